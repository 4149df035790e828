#include "glnar/cli.hpp"

#include "glnar/error.hpp"
#include "schema.hpp"
#include "text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace glnar::cli {

using nlohmann::json;

namespace {

// ------------------------------------------------------------------ schema check
// Supports the subset of JSON Schema the run-config schema uses.

const json& schema_document()
{
    static const json doc = json::parse(detail::kSchemaText);
    return doc;
}

bool has_type(const json& v, const std::string& type)
{
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "integer") return v.is_number_integer();
    if (type == "number") return v.is_number();
    if (type == "boolean") return v.is_boolean();
    return false;
}

void check(const json& v, const json& schema, const std::string& where, std::vector<std::string>& errs)
{
    if (schema.contains("$ref")) {
        const std::string ref = schema["$ref"];
        const std::string prefix = "#/$defs/";
        check(v, schema_document()["$defs"][ref.substr(prefix.size())], where, errs);
        return;
    }
    if (schema.contains("type") && !has_type(v, schema["type"])) {
        errs.push_back(where + ": expected " + schema["type"].get<std::string>() + ", got " + v.type_name());
        return;
    }
    if (schema.contains("const") && v != schema["const"])
        errs.push_back(where + ": must equal " + schema["const"].dump());
    if (schema.contains("enum")) {
        const auto& options = schema["enum"];
        if (std::find(options.begin(), options.end(), v) == options.end())
            errs.push_back(where + ": " + v.dump() + " is not one of " + options.dump());
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>())
            errs.push_back(where + ": must be >= " + schema["minimum"].dump());
        if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>()))
            errs.push_back(where + ": must be > " + schema["exclusiveMinimum"].dump());
        if (schema.contains("exclusiveMaximum") && !(x < schema["exclusiveMaximum"].get<double>()))
            errs.push_back(where + ": must be < " + schema["exclusiveMaximum"].dump());
    }
    if (v.is_array()) {
        if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
            errs.push_back(where + ": needs at least " + schema["minItems"].dump() + " item(s)");
        if (schema.contains("items"))
            for (std::size_t i = 0; i < v.size(); ++i)
                check(v[i], schema["items"], where + "[" + std::to_string(i) + "]", errs);
    }
    if (v.is_object()) {
        const json props = schema.value("properties", json::object());
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!v.contains(key.get<std::string>()))
                    errs.push_back(where + ": missing required key '" + key.get<std::string>() + "'");
        for (const auto& [key, value] : v.items()) {
            const std::string path = where + "." + key;
            if (props.contains(key))
                check(value, props[key], path, errs);
            else if (schema.value("additionalProperties", true) == false)
                errs.push_back(path + ": unknown key");
        }
    }
}

// ------------------------------------------------------------------ conversions

Timestamp timestamp_field(const std::string& text, const std::string& where)
{
    auto t = parse_timestamp(text);
    if (!t) throw ConfigError(where + ": cannot parse timestamp '" + text + "'");
    return *t;
}

std::filesystem::path resolve_path(const std::string& p, const std::filesystem::path& base)
{
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

ThetaState theta_from(const json& j, const ThetaState& fallback)
{
    ThetaState th = fallback;
    if (j.contains("phi")) {
        const auto phi = j["phi"].get<std::vector<double>>();
        th.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<long>(phi.size()));
    }
    th.sigma2 = j.value("sigma2", th.sigma2);
    th.nu = j.value("nu", th.nu);
    return th;
}

json theta_json(const ThetaState& th)
{
    return {{"phi", std::vector<double>(th.phi.data(), th.phi.data() + th.phi.size())},
            {"sigma2", th.sigma2},
            {"nu", th.nu}};
}

void merge_params(ModelParams& m, const json& j)
{
    m.p = j.value("p", m.p);
    m.delta = j.value("delta", m.delta);
    m.alpha = j.value("alpha", m.alpha);
    m.window = j.value("window", m.window);
}

json params_json(ModelKind kind, const ModelParams& m)
{
    json j = json::object();
    if (uses_lag_order(kind)) j["p"] = m.p;
    if (uses_delta(kind)) j["delta"] = m.delta;
    if (uses_alpha(kind)) j["alpha"] = m.alpha;
    if (kind == ModelKind::prob_persistence) j["window"] = m.window;
    return j;
}

std::vector<ModelKind> parse_model_list(const std::string& text)
{
    std::vector<ModelKind> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = glnar::detail::trim(item);
        if (item.empty()) continue;
        if (item == "all") {
            for (auto k : all_models()) out.push_back(k);
            continue;
        }
        out.push_back(parse_model(item));
    }
    if (out.empty()) throw ConfigError("--models: empty model list");
    return out;
}

} // namespace

std::vector<std::string> schema_diagnostics(const json& doc)
{
    std::vector<std::string> errs;
    check(doc, schema_document(), "config", errs);
    return errs;
}

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"ingest", "simulate", "fit-batch", "fit-recursive",
                                                "forecast", "evaluate", "cv", "emit-plots"};
    return names;
}

RunConfig resolve_config(const json& doc, const std::string& command, const Overrides& ov,
                         const std::filesystem::path& base_dir)
{
    const auto diagnostics = schema_diagnostics(doc);
    if (!diagnostics.empty()) {
        std::string msg = std::string("configuration does not match schema ") + kConfigSchemaId + ":";
        for (const auto& d : diagnostics) msg += "\n  " + d;
        throw ConfigError(msg);
    }
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw ConfigError("unknown command '" + command + "'");

    RunConfig c;
    c.command = command;
    c.seed = ov.seed ? *ov.seed : doc.value("seed", std::uint64_t{1});
    c.mode = parse_mode(ov.mode ? *ov.mode : doc.value("mode", std::string("prob")));
    if (ov.models) {
        c.models = parse_model_list(*ov.models);
        c.models_explicit = true;
    } else if (doc.contains("models")) {
        for (const auto& m : doc["models"]) c.models.push_back(parse_model(m.get<std::string>()));
        c.models_explicit = true;
    } else {
        c.models = all_models();
    }
    {
        std::vector<ModelKind> unique;
        for (auto k : c.models)
            if (std::find(unique.begin(), unique.end(), k) == unique.end()) unique.push_back(k);
        c.models = std::move(unique);
    }
    if (ov.out)
        c.out = *ov.out;
    else if (doc.contains("out"))
        c.out = resolve_path(doc["out"], base_dir);
    c.point_rule = parse_point_rule(doc.value("point_rule", std::string("median")));

    if (doc.contains("data")) {
        const auto& d = doc["data"];
        if (d.contains("series")) c.data.series = resolve_path(d["series"], base_dir);
        if (d.contains("farm")) c.data.farm = resolve_path(d["farm"], base_dir);
        if (d.contains("capacities")) c.data.capacities = resolve_path(d["capacities"], base_dir);
        c.data.resolution_minutes = d.value("resolution_minutes", 10);
    }
    if (doc.contains("split")) {
        const auto& s = doc["split"];
        SplitConfig sc;
        sc.train_end = timestamp_field(s["train_end"], "config.split.train_end");
        sc.cv_end = timestamp_field(s["cv_end"], "config.split.cv_end");
        sc.test_end = timestamp_field(s["test_end"], "config.split.test_end");
        sc.validate();
        c.split = sc;
    }

    auto& sim = c.simulate;
    sim.theta.phi = Eigen::Vector2d(1.36, -0.37);
    sim.theta.sigma2 = 0.11;
    sim.theta.nu = 1.4;
    if (doc.contains("simulate")) {
        const auto& s = doc["simulate"];
        sim.theta = theta_from(s, sim.theta);
        sim.n = s.value("n", sim.n);
        sim.burn_in = s.value("burn_in", sim.burn_in);
        if (s.contains("start")) sim.start = timestamp_field(s["start"], "config.simulate.start");
        ThetaState prev = sim.theta;
        for (const auto& sw : s.value("regime_switches", json::array())) {
            RegimeSwitch r{sw["index"].get<std::size_t>(), theta_from(sw, prev)};
            prev = r.theta;
            sim.regime_switches.push_back(std::move(r));
        }
    }

    for (auto k : all_models()) c.params[k] = default_params(k, c.mode);
    for (auto& [k, m] : c.params) m.point_rule = c.point_rule;
    if (doc.contains("params_from")) {
        c.params_from = resolve_path(doc["params_from"], base_dir);
        std::ifstream in(*c.params_from);
        if (!in) throw ConfigError("cannot open selection file " + c.params_from->string());
        json sel;
        try {
            sel = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("selection file " + c.params_from->string() + ": " + e.what());
        }
        if (sel.value("schema", std::string()) != kSelectionSchemaId)
            throw ConfigError("selection file " + c.params_from->string() + " lacks schema id " + kSelectionSchemaId);
        for (const auto& [name, p] : sel["models"].items()) merge_params(c.params[parse_model(name)], p);
    }
    if (doc.contains("params"))
        for (const auto& [name, p] : doc["params"].items()) merge_params(c.params[parse_model(name)], p);

    if (doc.contains("archives")) c.archives = resolve_path(doc["archives"], base_dir);

    const Metric default_metric = c.mode == ForecastMode::point ? Metric::rmse : Metric::crps;
    c.cv.grid = Grid::defaults(default_metric);
    if (doc.contains("cv")) {
        const auto& s = doc["cv"];
        if (s.contains("p")) c.cv.grid.p_values = s["p"].get<std::vector<std::size_t>>();
        if (s.contains("delta")) c.cv.grid.deltas = s["delta"].get<std::vector<double>>();
        if (s.contains("alpha")) c.cv.grid.alphas = s["alpha"].get<std::vector<double>>();
        if (s.contains("metric")) c.cv.grid.metric = parse_metric(s["metric"]);
        c.cv.exact_refit_limit = s.value("exact_refit_limit", c.cv.exact_refit_limit);
        c.cv.approx_refit_every = s.value("approx_refit_every", c.cv.approx_refit_every);
        c.cv.threads = s.value("threads", c.cv.threads);
    }
    c.cv.grid.validate();

    if (doc.contains("batch")) {
        const auto& b = doc["batch"];
        c.batch.epsilon = b.value("epsilon", c.batch.epsilon);
        c.batch.max_iterations = b.value("max_iterations", c.batch.max_iterations);
        c.batch.initial_nu = b.value("initial_nu", c.batch.initial_nu);
    }
    return c;
}

json RunConfig::resolved() const
{
    json j;
    j["schema"] = kConfigSchemaId;
    j["command"] = command;
    j["seed"] = seed;
    j["mode"] = mode == ForecastMode::point ? "point" : "prob";
    j["models"] = json::array();
    for (auto k : models) j["models"].push_back(to_string(k));
    j["out"] = out.string();
    j["point_rule"] = point_rule == PointRule::median ? "median" : "mean";
    json d = {{"resolution_minutes", data.resolution_minutes}};
    if (data.series) d["series"] = data.series->string();
    if (data.farm) d["farm"] = data.farm->string();
    if (data.capacities) d["capacities"] = data.capacities->string();
    j["data"] = d;
    if (split)
        j["split"] = {{"train_end", format_timestamp(split->train_end)},
                      {"cv_end", format_timestamp(split->cv_end)},
                      {"test_end", format_timestamp(split->test_end)}};
    json s = theta_json(simulate.theta);
    s["n"] = simulate.n;
    s["burn_in"] = simulate.burn_in;
    s["start"] = format_timestamp(simulate.start);
    s["regime_switches"] = json::array();
    for (const auto& r : simulate.regime_switches) {
        json sw = theta_json(r.theta);
        sw["index"] = r.index;
        s["regime_switches"].push_back(sw);
    }
    j["simulate"] = s;
    j["params"] = json::object();
    for (auto k : models) j["params"][to_string(k)] = params_json(k, params.at(k));
    if (params_from) j["params_from"] = params_from->string();
    if (archives) j["archives"] = archives->string();
    j["cv"] = {{"p", cv.grid.p_values},
               {"delta", cv.grid.deltas},
               {"alpha", cv.grid.alphas},
               {"metric", to_string(cv.grid.metric)},
               {"exact_refit_limit", cv.exact_refit_limit},
               {"approx_refit_every", cv.approx_refit_every},
               {"threads", cv.threads}};
    j["batch"] = {{"epsilon", batch.epsilon}, {"max_iterations", batch.max_iterations}, {"initial_nu", batch.initial_nu}};
    return j;
}

} // namespace glnar::cli
