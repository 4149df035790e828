#pragma once

#include "glnar/gln.hpp"
#include "glnar/series.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

namespace glnar {

/// Name recorded in simulation metadata. Streams are reproducible across
/// platforms: the engine is std::mt19937_64 (fully specified by the standard) and
/// Gaussians come from the Box-Muller transform implemented here, not from
/// std::normal_distribution.
inline constexpr const char* kGeneratorName = "mt19937_64+box-muller/v1";

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
    double uniform(); ///< in (0, 1]
    double next();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

struct RegimeSwitch {
    std::size_t index = 0; ///< first emitted observation governed by `theta`
    ThetaState theta;
};

struct SimSpec {
    ThetaState theta;            ///< sigma2 may be 0 for a noise-free run
    std::size_t n = 0;           ///< emitted observations (after burn-in)
    std::uint64_t seed = 1;
    std::size_t burn_in = 1000;
    std::vector<RegimeSwitch> regime_switches;
    std::vector<double> initial_y; ///< y_{-1}, ..., y_{-p} before burn-in; zeros if empty
    Timestamp start = std::chrono::sys_days{std::chrono::year{2013} / 7 / 1};
    Resolution resolution{10};

    void validate() const;
};

/// Roots of 1 - phi_1 z - ... - phi_p z^p all outside the unit circle.
bool is_stationary(const Eigen::VectorXd& phi);

struct Simulation {
    PowerSeries series;
    std::vector<double> transformed;
    std::vector<ThetaState> truth; ///< parameters in force at each emitted observation
    nlohmann::json metadata;
};

Simulation simulate(const SimSpec& spec);

/// JSON sidecar: generator, seed, burn-in and the true parameter trajectory as segments.
void write_simulation(const std::filesystem::path& series_csv, const std::filesystem::path& sidecar_json,
                      const Simulation& sim);

} // namespace glnar
