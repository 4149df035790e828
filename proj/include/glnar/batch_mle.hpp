#pragma once

#include "glnar/gln.hpp"
#include "glnar/series.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace glnar {

/// Regression design for the conditional GLN-AR likelihood at a fixed nu.
///
/// Row i corresponds to a target observation whose p predecessors are contiguous.
/// `y`, `u`, `v` hold the transform and its nu-derivatives of the targets; the
/// matrices `Y`, `U`, `V` hold the same quantities for lags 1..p column-wise.
/// All six are recomputed by `refresh` whenever nu changes.
class DesignData {
public:
    DesignData(std::vector<double> values, std::vector<std::size_t> targets, std::size_t p, double nu);

    void refresh(double nu);

    std::size_t order() const noexcept { return p_; }
    std::size_t rows() const noexcept { return targets_.size(); }
    double nu() const noexcept { return nu_; }

    /// Targets' original values (coarsened, strictly in (0,1)).
    const Eigen::VectorXd& x() const noexcept { return x_; }
    const Eigen::VectorXd& y() const noexcept { return y_; }
    const Eigen::VectorXd& u() const noexcept { return u_; }
    const Eigen::VectorXd& v() const noexcept { return v_; }
    const Eigen::MatrixXd& Y() const noexcept { return Y_; }
    const Eigen::MatrixXd& U() const noexcept { return U_; }
    const Eigen::MatrixXd& V() const noexcept { return V_; }

private:
    std::vector<double> values_;
    std::vector<std::size_t> targets_;
    std::size_t p_;
    double nu_ = 1.0;
    Eigen::VectorXd x_, y_, u_, v_;
    Eigen::MatrixXd Y_, U_, V_;
};

/// Rows are built only where the p lagged records are contiguous.
/// Throws EstimationError when fewer than one usable row remains.
DesignData build_design(const PowerSeries& series, std::size_t p, double nu);
/// Gap-free values.
DesignData build_design(std::span<const double> values, std::size_t p, double nu);

struct PhiSigma {
    Eigen::VectorXd phi;
    double sigma2 = 0.0;
};

/// Least-squares AR coefficients and residual variance at the design's nu.
PhiSigma closed_form_phi_sigma(const DesignData& design);

/// Negative log-likelihood without the parameter-free constant.
double negative_log_likelihood(const DesignData& design, const ThetaState& theta);
/// d(NLL)/d(nu) with phi and sigma2 held fixed.
double nu_score(const DesignData& design, const ThetaState& theta);
/// d^2(NLL)/d(nu)^2 with phi and sigma2 held fixed.
double nu_curvature(const DesignData& design, const ThetaState& theta);

struct BatchOptions {
    double epsilon = 1e-3;       ///< stop when half the squared Newton decrement falls below this
    int max_iterations = 100;
    double armijo = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 60;
    double nu_min = 1e-3;
    double nu_max = 20.0;
    double initial_nu = 1.0;
};

struct BatchFit {
    ThetaState theta;
    int iterations = 0;
    std::vector<double> nll_trace;
    bool converged = false;
    double decrement = 0.0; ///< final lambda^2 / 2
    std::size_t rows = 0;
};

BatchFit fit_batch(const PowerSeries& series, std::size_t p, const BatchOptions& options = {});
BatchFit fit_batch(DesignData design, const BatchOptions& options = {});

nlohmann::json to_json(const BatchFit& fit);
BatchFit batch_fit_from_json(const nlohmann::json& j);

} // namespace glnar
