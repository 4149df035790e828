#include "glnar/cli.hpp"

#include "glnar/error.hpp"
#include "schema.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>

namespace glnar::cli {

namespace {

const char* kind_label(ErrorKind k)
{
    switch (k) {
    case ErrorKind::config: return "config error";
    case ErrorKind::data: return "data error";
    case ErrorKind::estimation: return "estimation error";
    case ErrorKind::evaluation: return "evaluation error";
    }
    return "error";
}

nlohmann::json read_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Generalized logit-normal autoregressive forecasting toolkit", "glnar"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    Overrides ov;
    std::uint64_t seed = 0;
    std::string models, mode, out_dir;
    bool print_schema = false;
    app.add_option("--config", config_path, "JSON run configuration (" + std::string(kConfigSchemaId) + ")")
        ->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Top-level random seed");
    auto* models_opt = app.add_option("--models", models, "Comma-separated model list, or 'all'");
    auto* mode_opt = app.add_option("--mode", mode, "Forecast mode")->check(CLI::IsMember({"point", "prob"}));
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--print-schema", print_schema, "Print the configuration JSON schema and exit");
    app.set_version_flag("--version", "glnar 0.1.0");

    static const std::map<std::string, std::string> help{
        {"ingest", "Normalize and aggregate a per-turbine SCADA export"},
        {"simulate", "Generate a synthetic GLN-AR series with a parameter sidecar"},
        {"fit-batch", "Batch maximum-likelihood fit on the training and CV records"},
        {"fit-recursive", "Track parameters online over the series"},
        {"forecast", "One-step-ahead forecasts over the test period"},
        {"evaluate", "Scores, improvement tables and diagnostics from forecast archives"},
        {"cv", "Expanding-window hyperparameter selection"},
        {"emit-plots", "Data files for reliability, Brier, calibration and interval plots"},
    };
    for (const auto& name : command_names()) app.add_subcommand(name, help.at(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
    }
    if (print_schema) {
        out << detail::kSchemaText;
        return 0;
    }
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
        err << app.help();
        return static_cast<int>(ErrorKind::config);
    }
    const std::string command = subs.front()->get_name();
    if (*seed_opt) ov.seed = seed;
    if (*models_opt) ov.models = models;
    if (*mode_opt) ov.mode = mode;
    if (*out_opt) ov.out = out_dir;

    try {
        nlohmann::json doc = nlohmann::json::object();
        std::filesystem::path base;
        if (!config_path.empty()) {
            doc = read_config(config_path);
            base = std::filesystem::path(config_path).parent_path();
        }
        const RunConfig cfg = resolve_config(doc, command, ov, base);
        execute(cfg, out);
        return 0;
    } catch (const Error& e) {
        err << "glnar " << command << ": " << kind_label(e.kind()) << ": " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        err << "glnar " << command << ": internal error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace glnar::cli
