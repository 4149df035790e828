#include "glnar/gln.hpp"

#include "glnar/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <array>
#include <cmath>
#include <numbers>

namespace glnar {

namespace {

void require_open_unit(double x, const char* what)
{
    if (!(x > 0.0 && x < 1.0)) throw DomainError(std::string(what) + ": x must lie in (0,1), got " + std::to_string(x));
}

// ln(1 + e^a) without overflow.
double softplus(double a) { return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

constexpr std::size_t kQuadNodes = 257;
constexpr double kQuadHalfWidth = 12.0; // standard deviations on each side

struct GaussLegendre {
    std::array<double, kQuadNodes> node{};
    std::array<double, kQuadNodes> weight{};

    GaussLegendre()
    {
        constexpr std::size_t n = kQuadNodes;
        for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (std::size_t k = 1; k <= n; ++k) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p2) /
                         static_cast<double>(k);
                }
                dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
                double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            node[i] = -z;
            node[n - 1 - i] = z;
            weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre& gauss_legendre()
{
    static const GaussLegendre rule;
    return rule;
}

} // namespace

ThetaState ThetaState::initial(std::size_t p) { return ThetaState(Eigen::VectorXd::Zero(static_cast<long>(p)), 1.0, 1.0); }

void ThetaState::validate() const
{
    if (phi.size() < 1) throw ConfigError("lag order p must be at least 1");
    if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    if (!(nu > 0.0)) throw ConfigError("nu must be positive");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0,1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double transform(double x, double nu)
{
    require_open_unit(x, "transform");
    const double lx = nu * std::log(x);
    return lx - std::log(-std::expm1(lx));
}

double inverse_transform(double y, double nu) { return std::exp(-softplus(-y) / nu); }

double power_odds(double x, double nu)
{
    const double lx = nu * std::log(x);
    return std::exp(lx) / -std::expm1(lx);
}

double log_density(double x, double mu, double sigma2, double nu)
{
    require_open_unit(x, "density");
    const double lnx = std::log(x);
    const double lx = nu * lnx;
    const double one_minus = -std::expm1(lx);
    const double y = lx - std::log(one_minus);
    const double z = y - mu;
    return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) + std::log(nu) - lnx - std::log(one_minus) -
           0.5 * z * z / sigma2;
}

double density(double x, double mu, double sigma2, double nu) { return std::exp(log_density(x, mu, sigma2, nu)); }

NuDerivatives nu_derivatives(double x, double nu)
{
    require_open_unit(x, "nu_derivatives");
    const double lnx = std::log(x);
    const double r = power_odds(x, nu);
    const double u = lnx * (1.0 + r);
    return {u, u * lnx * r};
}

double predictive_cdf(const GlnPredictive& pred, double x)
{
    if (x < 0.0 || x > 1.0 || std::isnan(x)) throw DomainError("predictive_cdf: x must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    return normal_cdf((transform(x, pred.nu) - pred.mu) / std::sqrt(pred.sigma2));
}

double predictive_quantile(const GlnPredictive& pred, double tau)
{
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("predictive_quantile: tau must lie in (0,1)");
    return inverse_transform(pred.mu + std::sqrt(pred.sigma2) * normal_quantile(tau), pred.nu);
}

double predictive_mean(const GlnPredictive& pred)
{
    const auto& rule = gauss_legendre();
    const double sigma = std::sqrt(pred.sigma2);
    const double norm = kQuadHalfWidth / std::sqrt(2.0 * std::numbers::pi);
    double sum = 0.0;
    for (std::size_t i = 0; i < kQuadNodes; ++i) {
        const double z = kQuadHalfWidth * rule.node[i];
        sum += rule.weight[i] * std::exp(-0.5 * z * z) * inverse_transform(pred.mu + sigma * z, pred.nu);
    }
    return norm * sum;
}

PointRule parse_point_rule(const std::string& name)
{
    if (name == "median") return PointRule::median;
    if (name == "mean") return PointRule::mean;
    throw ConfigError("unknown point rule '" + name + "' (expected median or mean)");
}

double predictive_point(const GlnPredictive& pred, PointRule rule, double delta)
{
    double value = rule == PointRule::median ? inverse_transform(pred.mu, pred.nu) : predictive_mean(pred);
    if (delta > 0.0) {
        if (value < delta) return 0.0;
        if (value > 1.0 - delta) return 1.0;
    }
    return value;
}

} // namespace glnar
