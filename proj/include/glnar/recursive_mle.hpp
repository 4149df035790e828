#pragma once

#include "glnar/gln.hpp"
#include "glnar/series.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <deque>
#include <filesystem>
#include <optional>
#include <vector>

namespace glnar {

struct RecursiveConfig {
    std::size_t p = 2;
    double alpha = 0.9994;      ///< forgetting factor in (0,1)
    std::size_t warmup = 0;     ///< parameter updates start after this many observations; 0 means 100 + p
    double delta = 0.005;       ///< coarsening threshold applied by run_series
    double sigma2_floor = 1e-8;
    double nu_min = 1e-3;
    double nu_max = 20.0;
    double jitter = 1e-10;      ///< diagonal loading when the information matrix fails to factor

    std::size_t effective_warmup() const noexcept { return warmup == 0 ? 100 + p : warmup; }
    double effective_sample_size() const noexcept { return 1.0 / (1.0 - alpha); }
    void validate() const;
};

/// Online estimator state: parameters, exponentially weighted information matrix
/// and the last p observations (most recent first, stored untransformed so that
/// lagged transforms are always evaluated at the current nu).
struct RecursiveState {
    ThetaState theta;
    Eigen::MatrixXd info;
    std::deque<double> lags;
    std::size_t t = 0;        ///< observations consumed
    std::size_t updates = 0;  ///< parameter updates applied
    std::size_t skipped = 0;  ///< observations with a non-finite score

    static RecursiveState initial(const RecursiveConfig& config);

    std::size_t order() const noexcept { return theta.order(); }
    bool buffer_full() const noexcept { return lags.size() >= order(); }
    void reset_lags() { lags.clear(); }

    nlohmann::json to_json() const;
    static RecursiveState from_json(const nlohmann::json& j);
};

/// Gradient of the log conditional density of `x` at the state's parameters,
/// ordered (phi_1..phi_p, sigma2, nu). Throws EstimationError if the lag buffer is short.
Eigen::VectorXd score_vector(const RecursiveState& state, double x);

/// Log conditional density of `x` given the state's lags at parameters `theta`.
double conditional_log_density(const ThetaState& theta, const std::deque<double>& lags, double x);

struct StepInfo {
    bool scored = false;    ///< information matrix updated
    bool updated = false;   ///< parameters moved
    double step_norm = 0.0; ///< |theta_t - theta_{t-1}|
    double step_bound = 0.0;///< (1 - alpha) |R^-1| |h|
    Eigen::VectorXd score;
};

/// Consumes one observation (already coarsened).
StepInfo step(RecursiveState& state, const RecursiveConfig& config, double x);

/// Predictive law of the next observation given the current lags. Requires a full buffer.
GlnPredictive next_predictive(const RecursiveState& state);

struct RecursiveRun {
    std::vector<Timestamp> times;
    std::vector<ThetaState> thetas;                    ///< estimate after consuming times[i]
    std::vector<std::optional<GlnPredictive>> next;    ///< law of the observation one step after times[i]
    RecursiveState final_state;
};

/// Coarsens with config.delta, then runs the recursion over the whole series.
/// Lag buffers restart after gaps. Throws EstimationError when the series is not
/// longer than the warm-up.
RecursiveRun run_series(const PowerSeries& series, const RecursiveConfig& config);

/// timestamp, phi_1..phi_p, sigma2, nu
void write_trajectory_csv(const std::filesystem::path& path, const RecursiveRun& run);

} // namespace glnar
