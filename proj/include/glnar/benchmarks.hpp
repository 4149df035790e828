#pragma once

#include "glnar/predictive.hpp"
#include "glnar/series.hpp"

#include <Eigen/Dense>

#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace glnar {

// ---------------------------------------------------------------- persistence

inline double persistence_point(double last) { return last; }

/// Persistence dressed with the most recent persistence errors: members
/// clip(last + e_i, 0, 1), equal weights. With fewer than `window` errors the
/// forecast is a point mass at `last`.
Predictive persistence_prob(double last, std::span<const double> recent_errors, std::size_t window = 20);

/// Rolling buffer of persistence errors x_{t+1} - x_t.
class ErrorBuffer {
public:
    explicit ErrorBuffer(std::size_t window = 20) : window_(window) {}
    void push(double error);
    std::vector<double> errors() const { return {errors_.begin(), errors_.end()}; }
    std::size_t window() const noexcept { return window_; }

private:
    std::size_t window_;
    std::deque<double> errors_;
};

// ---------------------------------------------------------------- climatology

/// {0, 1/steps, ..., 1}.
std::vector<double> probability_grid(std::size_t steps = 100);

/// Linear-interpolation sample quantiles of sorted data.
QuantileTable empirical_quantiles(std::span<const double> sorted, const std::vector<double>& levels);

/// Empirical distribution of every observation seen so far, reported as a quantile table.
class Climatology {
public:
    explicit Climatology(std::span<const double> history, std::vector<double> levels = probability_grid());
    QuantileTable table() const;
    void observe(double x);
    std::size_t size() const noexcept { return sorted_.size(); }

private:
    std::vector<double> sorted_;
    std::vector<double> levels_;
};

// ---------------------------------------------------------------- normal AR

/// Gaussian AR(p) on the untransformed variable, no intercept.
struct NarState {
    Eigen::VectorXd phi;
    double sigma2 = 0.0;
    // Recursive variant only.
    double alpha = 0.0;
    Eigen::MatrixXd info;       ///< exponentially weighted lag second moments
    Eigen::VectorXd cross;      ///< exponentially weighted lag/target cross moments
    double weight = 0.0;        ///< sum of forgetting weights, normalizes sigma2
    double weighted_sse = 0.0;
    std::deque<double> lags;    ///< most recent first
    std::size_t t = 0;
    bool initialized = false;

    std::size_t order() const noexcept { return static_cast<std::size_t>(phi.size()); }
};

/// Least squares on rows with contiguous lags; sigma2 = RSS / rows.
NarState nar_fit_batch(const PowerSeries& train, std::size_t p);

NarState nar_recursive_initial(std::size_t p, double alpha);
/// Exponentially weighted least squares update. The first solve happens once the
/// weighted lag moment matrix is positive definite; afterwards the update is the
/// gain form phi += (1 - alpha) R^-1 x e.
void nar_recursive_step(NarState& state, double x);

struct NarRun {
    NarState final_state;
    std::vector<Timestamp> times;
    std::vector<Eigen::VectorXd> phi;
    std::vector<double> sigma2;
};

enum class NarMode { batch, recursive };

/// Batch: fit on the whole series. Recursive: stream the series and keep the trajectory.
NarRun nar_fit(const PowerSeries& train, std::size_t p, NarMode mode, double alpha = 0.995);

struct NarForecast {
    double raw = 0.0;   ///< phi' lags, possibly outside [0,1]
    double point = 0.0; ///< raw truncated to [0,1]
    GaussianPredictive predictive;
};

/// `lags` most recent first, at least p values.
NarForecast nar_predict(const NarState& state, std::span<const double> lags);

} // namespace glnar
