#include "glnar/cli.hpp"

#include "glnar/benchmarks.hpp"
#include "glnar/error.hpp"
#include "glnar/metrics.hpp"
#include "glnar/recursive_mle.hpp"
#include "text.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>

namespace glnar::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Re-raises module errors with the module name in front, keeping the kind.
template <class F>
auto in_module(const char* module, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(module) + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

Resolution resolution(const RunConfig& c) { return Resolution{c.data.resolution_minutes}; }

PowerSeries load_series(const RunConfig& c)
{
    return in_module("timeseries_data", [&] {
        if (c.data.series) return read_series_csv(*c.data.series, resolution(c));
        if (c.data.farm) {
            if (!c.data.capacities) throw ConfigError("data.farm requires data.capacities");
            const auto caps = load_capacity_csv(*c.data.capacities);
            return aggregate_turbines(load_farm_csv(*c.data.farm, caps, resolution(c)));
        }
        throw ConfigError("no input data: set data.series (or data.farm with data.capacities)");
    });
}

const SplitConfig& require_split(const RunConfig& c)
{
    if (!c.split) throw ConfigError("command '" + c.command + "' needs a split section (train_end, cv_end, test_end)");
    return *c.split;
}

bool selected(const RunConfig& c, ModelKind k)
{
    return std::find(c.models.begin(), c.models.end(), k) != c.models.end();
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string fmt(double x)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << x;
    return s.str();
}

// ------------------------------------------------------------------ commands

void cmd_ingest(const RunConfig& c, std::ostream& log)
{
    if (!c.data.farm || !c.data.capacities) throw ConfigError("ingest needs data.farm and data.capacities");
    const auto caps = in_module("timeseries_data", [&] { return load_capacity_csv(*c.data.capacities); });
    const auto turbines = in_module("timeseries_data", [&] { return load_farm_csv(*c.data.farm, caps, resolution(c)); });
    const PowerSeries farm = in_module("timeseries_data", [&] { return aggregate_turbines(turbines); });
    write_series_csv(c.out / "series.csv", farm);
    json summary = {{"turbines", turbines.size()},
                    {"records", farm.size()},
                    {"gaps", farm.gap_count()},
                    {"resolution_minutes", c.data.resolution_minutes}};
    if (!farm.empty()) {
        summary["start"] = format_timestamp(farm[0].time);
        summary["end"] = format_timestamp(farm[farm.size() - 1].time);
    }
    if (c.split) {
        const auto parts = in_module("timeseries_data", [&] { return split(farm, *c.split); });
        write_series_csv(c.out / "train.csv", parts.train);
        write_series_csv(c.out / "cv.csv", parts.cv);
        write_series_csv(c.out / "test.csv", parts.test);
        summary["split"] = {{"train", parts.train.size()}, {"cv", parts.cv.size()}, {"test", parts.test.size()}};
    }
    write_json(c.out / "ingest.json", summary);
    log << "ingested " << turbines.size() << " turbines into " << farm.size() << " records (" << farm.gap_count()
        << " gaps)\n";
}

void cmd_simulate(const RunConfig& c, std::ostream& log)
{
    SimSpec spec;
    spec.theta = c.simulate.theta;
    spec.n = c.simulate.n;
    spec.seed = c.seed;
    spec.burn_in = c.simulate.burn_in;
    spec.regime_switches = c.simulate.regime_switches;
    spec.start = c.simulate.start;
    spec.resolution = resolution(c);
    const Simulation sim = in_module("simulator", [&] { return simulate(spec); });
    write_simulation(c.out / "series.csv", c.out / "series.json", sim);
    log << "simulated " << sim.series.size() << " observations (seed " << c.seed << ")\n";
}

PowerSeries fitting_history(const RunConfig& c, const PowerSeries& series)
{
    if (!c.split) return series;
    return series.slice(0, series.lower_bound(c.split->cv_end));
}

void cmd_fit_batch(const RunConfig& c, std::ostream& log)
{
    const PowerSeries history = fitting_history(c, load_series(c));
    bool any = false;
    if (selected(c, ModelKind::batch_glnar)) {
        any = true;
        const auto& m = c.params.at(ModelKind::batch_glnar);
        const BatchFit fit = in_module("batch_mle", [&] {
            return fit_batch(coarsen(history, CoarseningConfig{m.delta}), m.p, c.batch);
        });
        json j = to_json(fit);
        j["model"] = "batch_glnar";
        j["p"] = m.p;
        j["delta"] = m.delta;
        write_json(c.out / "fit_batch_glnar.json", j);
        log << "batch_glnar: nu=" << fit.theta.nu << " sigma2=" << fit.theta.sigma2 << " after " << fit.iterations
            << " iterations" << (fit.converged ? "" : " (not converged)") << '\n';
    }
    if (selected(c, ModelKind::batch_nar)) {
        any = true;
        const auto& m = c.params.at(ModelKind::batch_nar);
        const NarState s = in_module("benchmarks", [&] { return nar_fit_batch(history, m.p); });
        write_json(c.out / "fit_batch_nar.json",
                   {{"model", "batch_nar"}, {"p", m.p}, {"phi", vec(s.phi)}, {"sigma2", s.sigma2}});
        log << "batch_nar: sigma2=" << s.sigma2 << '\n';
    }
    if (!any) throw ConfigError("fit-batch: --models must include batch_glnar or batch_nar");
}

void cmd_fit_recursive(const RunConfig& c, std::ostream& log)
{
    const PowerSeries series = load_series(c);
    bool any = false;
    if (selected(c, ModelKind::recursive_glnar)) {
        any = true;
        const auto& m = c.params.at(ModelKind::recursive_glnar);
        RecursiveConfig cfg;
        cfg.p = m.p;
        cfg.alpha = m.alpha;
        cfg.delta = m.delta;
        const RecursiveRun run = in_module("recursive_mle", [&] { return run_series(series, cfg); });
        write_trajectory_csv(c.out / "trajectory_recursive_glnar.csv", run);
        json state = run.final_state.to_json();
        state["config"] = {{"p", cfg.p}, {"alpha", cfg.alpha}, {"delta", cfg.delta}};
        write_json(c.out / "state_recursive_glnar.json", state);
        log << "recursive_glnar: final nu=" << run.final_state.theta.nu << " after " << run.final_state.updates
            << " updates\n";
    }
    if (selected(c, ModelKind::recursive_nar)) {
        any = true;
        const auto& m = c.params.at(ModelKind::recursive_nar);
        const NarRun run = in_module("benchmarks", [&] { return nar_fit(series, m.p, NarMode::recursive, m.alpha); });
        std::ofstream out(c.out / "trajectory_recursive_nar.csv");
        if (!out) throw ConfigError("cannot write trajectory_recursive_nar.csv");
        out << "timestamp";
        for (std::size_t k = 1; k <= m.p; ++k) out << ",phi_" << k;
        out << ",sigma2\n";
        for (std::size_t i = 0; i < run.times.size(); ++i) {
            out << format_timestamp(run.times[i]);
            for (long k = 0; k < run.phi[i].size(); ++k) out << ',' << glnar::detail::format_double(run.phi[i](k));
            out << ',' << glnar::detail::format_double(run.sigma2[i]) << '\n';
        }
        log << "recursive_nar: final sigma2=" << run.final_state.sigma2 << '\n';
    }
    if (!any) throw ConfigError("fit-recursive: --models must include recursive_glnar or recursive_nar");
}

void cmd_forecast(const RunConfig& c, std::ostream& log)
{
    const auto& sp = require_split(c);
    const PowerSeries series = load_series(c);
    const std::size_t first = series.lower_bound(sp.cv_end);
    const std::size_t end = series.lower_bound(sp.test_end + std::chrono::seconds{1});
    if (first == 0) throw ConfigError("no records before the test period");
    if (first >= end) throw ConfigError("test period holds no records");
    const fs::path dir = c.out / "forecasts";
    ensure_dir(dir);
    RollOptions ro;
    ro.batch = c.batch;
    for (auto kind : c.models) {
        const RollResult r = in_module(to_string(kind).c_str(), [&] {
            return roll_forecast(series, kind, c.params.at(kind), first, end, ro);
        });
        write_archive(dir, r.archive);
        log << to_string(kind) << ": " << r.archive.records.size() << " forecasts";
        if (r.skipped) log << " (" << r.skipped << " targets without lags skipped)";
        log << '\n';
    }
}

void cmd_cv(const RunConfig& c, std::ostream& log)
{
    const auto& sp = require_split(c);
    const PowerSeries series = load_series(c);
    const fs::path dir = c.out / "cv";
    ensure_dir(dir);
    CvScheme scheme;
    scheme.fit_end = sp.train_end;
    scheme.cv_end = sp.cv_end;
    scheme.exact_refit_limit = c.cv.exact_refit_limit;
    scheme.approx_refit_every = c.cv.approx_refit_every;
    scheme.threads = c.cv.threads;
    json selection = {{"schema", kSelectionSchemaId},
                      {"metric", to_string(c.cv.grid.metric)},
                      {"models", json::object()}};
    for (auto kind : c.models) {
        const auto& base = c.params.at(kind);
        const CvResult res = in_module("hyperparam_cv", [&] { return cross_validate(series, kind, c.cv.grid, scheme, base); });
        const Selection sel = in_module("hyperparam_cv", [&] { return select(res, series, scheme, base); });
        json j = res.to_json();
        j["final_fit"] = sel.to_json();
        write_json(dir / (to_string(kind) + ".json"), j);
        json chosen = {{"p", sel.params.p}, {"delta", sel.params.delta}, {"alpha", sel.params.alpha}};
        if (kind == ModelKind::prob_persistence) chosen["window"] = sel.params.window;
        selection["models"][to_string(kind)] = chosen;
        log << to_string(kind) << ": " << to_string(res.metric) << " = " << res.cells[*res.best].metric << " with "
            << j["selected"].dump() << '\n';
    }
    write_json(c.out / "selected_params.json", selection);
}

std::vector<ForecastArchive> load_archives(const RunConfig& c)
{
    const fs::path dir = c.archives ? *c.archives : c.out / "forecasts";
    std::vector<fs::path> files;
    if (c.models_explicit) {
        for (auto k : c.models) files.push_back(dir / (to_string(k) + ".csv"));
    } else {
        if (!fs::is_directory(dir)) throw ConfigError("archive directory " + dir.string() + " does not exist");
        std::set<std::string> found;
        for (const auto& e : fs::directory_iterator(dir)) {
            const std::string name = e.path().filename().string();
            if (e.path().extension() == ".csv" && name.find(".cdf.") == std::string::npos)
                found.insert(e.path().stem().string());
        }
        for (auto k : all_models())
            if (found.erase(to_string(k))) files.push_back(dir / (to_string(k) + ".csv"));
        for (const auto& rest : found) files.push_back(dir / (rest + ".csv"));
        if (files.empty()) throw ConfigError("no forecast archives in " + dir.string());
    }
    std::vector<ForecastArchive> out;
    for (const auto& f : files) out.push_back(in_module("metrics", [&] { return read_archive(f); }));
    return out;
}

std::vector<EvaluationReport> build_reports(const std::vector<ForecastArchive>& archives)
{
    std::vector<EvaluationReport> reports;
    for (const auto& a : archives) reports.push_back(in_module("metrics", [&] { return evaluate(a); }));
    std::set<std::string> ids;
    for (const auto& r : reports) ids.insert(r.model_id);
    std::map<std::string, std::vector<std::string>> baselines;
    if (ids.count("persistence")) baselines["rmse"].push_back("persistence");
    for (const char* b : {"climatology", "prob_persistence"})
        if (ids.count(b)) baselines["crps"].push_back(b);
    in_module("metrics", [&] { return improvement_table(reports, baselines); });
    return reports;
}

std::string improvement_cell(const EvaluationReport& r, const std::string& key)
{
    auto it = r.improvements.find(key);
    return it == r.improvements.end() ? std::string() : fmt(it->second);
}

void cmd_evaluate(const RunConfig& c, std::ostream& log)
{
    const auto reports = build_reports(load_archives(c));
    json j = {{"reports", json::array()}};
    for (const auto& r : reports) j["reports"].push_back(r.to_json());
    write_json(c.out / "evaluation.json", j);

    std::ofstream t1(c.out / "table1_point.csv");
    std::ofstream t2(c.out / "table2_prob.csv");
    if (!t1 || !t2) throw ConfigError("cannot write evaluation tables in " + c.out.string());
    t1 << "model,rmse_percent,improvement_vs_persistence_percent\n";
    t2 << "model,crps_percent,improvement_vs_climatology_percent,improvement_vs_prob_persistence_percent\n";
    log << "model               RMSE%   impr/pers%   CRPS%   impr/clim%   impr/ppers%\n";
    for (const auto& r : reports) {
        const auto ip = improvement_cell(r, "rmse_vs_persistence");
        const auto ic = improvement_cell(r, "crps_vs_climatology");
        const auto ipp = improvement_cell(r, "crps_vs_prob_persistence");
        t1 << r.model_id << ',' << fmt(r.rmse) << ',' << ip << '\n';
        t2 << r.model_id << ',' << fmt(r.crps) << ',' << ic << ',' << ipp << '\n';
        log << std::left << std::setw(18) << r.model_id << std::right << std::setw(7) << fmt(r.rmse) << std::setw(13)
            << ip << std::setw(8) << fmt(r.crps) << std::setw(13) << ic << std::setw(14) << ipp << '\n';
    }
}

void cmd_emit_plots(const RunConfig& c, std::ostream& log)
{
    const auto archives = load_archives(c);
    const auto reports = build_reports(archives);
    const fs::path dir = c.out / "plots";
    ensure_dir(dir);
    write_brier_csv(dir / "brier_curve.csv", reports);
    write_reliability_csv(dir / "reliability.csv", reports);
    write_marginal_calibration_csv(dir / "marginal_calibration.csv", reports);
    write_intervals_csv(dir / "intervals.csv", archives);
    std::size_t files = 4;
    if (c.data.series && selected(c, ModelKind::recursive_glnar)) {
        const auto& m = c.params.at(ModelKind::recursive_glnar);
        RecursiveConfig cfg;
        cfg.p = m.p;
        cfg.alpha = m.alpha;
        cfg.delta = m.delta;
        const PowerSeries series = load_series(c);
        const RecursiveRun run = in_module("recursive_mle", [&] { return run_series(series, cfg); });
        write_trajectory_csv(dir / "theta_trajectory.csv", run);
        ++files;
    }
    log << "wrote " << files << " plot tables to " << dir.string() << '\n';
}

} // namespace

void execute(const RunConfig& c, std::ostream& log)
{
    static const std::map<std::string, std::function<void(const RunConfig&, std::ostream&)>> table{
        {"ingest", cmd_ingest},   {"simulate", cmd_simulate}, {"fit-batch", cmd_fit_batch},
        {"fit-recursive", cmd_fit_recursive}, {"forecast", cmd_forecast}, {"evaluate", cmd_evaluate},
        {"cv", cmd_cv},           {"emit-plots", cmd_emit_plots},
    };
    const auto it = table.find(c.command);
    if (it == table.end()) throw ConfigError("unknown command '" + c.command + "'");
    ensure_dir(c.out);
    write_json(c.out / ("resolved-config." + c.command + ".json"), c.resolved());
    it->second(c, log);
}

} // namespace glnar::cli
