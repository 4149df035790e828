#pragma once

#include "glnar/batch_mle.hpp"
#include "glnar/cv.hpp"
#include "glnar/forecasting.hpp"
#include "glnar/series.hpp"
#include "glnar/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace glnar::cli {

inline constexpr const char* kConfigSchemaId = "glnar.run-config/v1";
inline constexpr const char* kSelectionSchemaId = "glnar.selected-params/v1";

struct DataSection {
    std::optional<std::filesystem::path> series;     ///< timestamp,value CSV
    std::optional<std::filesystem::path> farm;       ///< wide per-turbine CSV
    std::optional<std::filesystem::path> capacities; ///< turbine,nominal_power CSV
    int resolution_minutes = 10;
};

struct SimulateSection {
    ThetaState theta;
    std::size_t n = 50000;
    std::size_t burn_in = 1000;
    Timestamp start = std::chrono::sys_days{std::chrono::year{2013} / 7 / 1};
    std::vector<RegimeSwitch> regime_switches;
};

struct CvSection {
    Grid grid;
    std::size_t exact_refit_limit = 5000;
    std::size_t approx_refit_every = 50;
    unsigned threads = 0;
};

struct RunConfig {
    std::string command;
    std::uint64_t seed = 1;
    ForecastMode mode = ForecastMode::prob;
    std::vector<ModelKind> models;
    bool models_explicit = false;
    std::filesystem::path out = "glnar-out";
    DataSection data;
    std::optional<SplitConfig> split;
    SimulateSection simulate;
    PointRule point_rule = PointRule::median;
    std::map<ModelKind, ModelParams> params; ///< fully resolved for every model in `models`
    std::optional<std::filesystem::path> params_from;
    std::optional<std::filesystem::path> archives;
    CvSection cv;
    BatchOptions batch;

    /// Every setting after defaults, selection files and overrides were applied.
    nlohmann::json resolved() const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> models; ///< comma separated
    std::optional<std::string> mode;
    std::optional<std::filesystem::path> out;
};

/// Checks `doc` against the run-config schema and collects every violation
/// (empty when valid).
std::vector<std::string> schema_diagnostics(const nlohmann::json& doc);

/// Validates, applies defaults and overrides. Relative paths inside the
/// document are resolved against `base_dir`. Throws ConfigError listing all
/// schema diagnostics.
RunConfig resolve_config(const nlohmann::json& doc, const std::string& command, const Overrides& overrides,
                         const std::filesystem::path& base_dir = {});

const std::vector<std::string>& command_names();

/// Executes one command. Errors propagate as glnar::Error.
void execute(const RunConfig& config, std::ostream& log);

/// Full command-line entry point; returns the process exit status.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace glnar::cli
