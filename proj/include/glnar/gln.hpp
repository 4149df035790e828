#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace glnar {

/// Parameters of a GLN-AR(p) model: AR coefficients on the transform scale,
/// innovation variance, and the shape of the generalized logit transform.
struct ThetaState {
    Eigen::VectorXd phi;
    double sigma2 = 1.0;
    double nu = 1.0;

    ThetaState() = default;
    ThetaState(Eigen::VectorXd phi_, double sigma2_, double nu_) : phi(std::move(phi_)), sigma2(sigma2_), nu(nu_) {}

    /// Algorithm start point: phi = 0, sigma2 = 1, nu = 1.
    static ThetaState initial(std::size_t p);

    std::size_t order() const noexcept { return static_cast<std::size_t>(phi.size()); }
    /// Throws ConfigError unless p >= 1, sigma2 > 0 and nu > 0.
    void validate() const;
};

/// Generalized logit transform ln(x^nu / (1 - x^nu)). Throws DomainError for x outside (0,1).
double transform(double x, double nu);

/// Inverse transform (e^y / (1 + e^y))^(1/nu).
double inverse_transform(double y, double nu);

/// GLN density with transform-scale mean `mu`.
double density(double x, double mu, double sigma2, double nu);
double log_density(double x, double mu, double sigma2, double nu);

/// First and second derivatives of the transform with respect to nu.
struct NuDerivatives {
    double u = 0.0; ///< d transform / d nu
    double v = 0.0; ///< d u / d nu
};
NuDerivatives nu_derivatives(double x, double nu);

/// x^nu / (1 - x^nu), evaluated stably.
double power_odds(double x, double nu);

/// One-step predictive law: Y ~ N(mu, sigma2) on the transform scale.
struct GlnPredictive {
    double mu = 0.0;
    double sigma2 = 1.0;
    double nu = 1.0;
};

double predictive_cdf(const GlnPredictive& pred, double x);
double predictive_quantile(const GlnPredictive& pred, double tau);
/// E[X] by 257-point Gauss-Legendre on the standardized transform scale.
double predictive_mean(const GlnPredictive& pred);

enum class PointRule { median, mean };

PointRule parse_point_rule(const std::string& name);

/// Point summary. With delta > 0, values below delta are reported as 0 and
/// values above 1 - delta as 1 (the coarsening convention).
double predictive_point(const GlnPredictive& pred, PointRule rule, double delta = 0.0);

/// Standard Gaussian CDF and quantile.
double normal_cdf(double z);
double normal_quantile(double p);

} // namespace glnar
