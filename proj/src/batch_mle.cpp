#include "glnar/batch_mle.hpp"

#include "glnar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glnar {

namespace {

constexpr double kMaxCondition = 1e12;

std::size_t checked_order(std::size_t p)
{
    if (p < 1) throw ConfigError("lag order p must be at least 1");
    return p;
}

} // namespace

DesignData::DesignData(std::vector<double> values, std::vector<std::size_t> targets, std::size_t p, double nu)
    : values_(std::move(values)), targets_(std::move(targets)), p_(checked_order(p))
{
    if (targets_.empty())
        throw EstimationError("not enough contiguous observations for lag order " + std::to_string(p_));
    for (double x : values_)
        if (!(x > 0.0 && x < 1.0)) throw DomainError("design values must lie strictly inside (0,1); coarsen first");
    const auto n = static_cast<long>(targets_.size());
    const auto cols = static_cast<long>(p_);
    x_.resize(n);
    for (long i = 0; i < n; ++i) x_(i) = values_[targets_[static_cast<std::size_t>(i)]];
    y_.resize(n), u_.resize(n), v_.resize(n);
    Y_.resize(n, cols), U_.resize(n, cols), V_.resize(n, cols);
    refresh(nu);
}

void DesignData::refresh(double nu)
{
    nu_ = nu;
    // Only values referenced by some row are transformed.
    std::vector<double> ty(values_.size()), tu(values_.size()), tv(values_.size());
    std::vector<char> needed(values_.size(), 0);
    for (std::size_t t : targets_)
        for (std::size_t k = 0; k <= p_; ++k) needed[t - k] = 1;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!needed[i]) continue;
        ty[i] = transform(values_[i], nu);
        auto d = nu_derivatives(values_[i], nu);
        tu[i] = d.u;
        tv[i] = d.v;
    }
    for (std::size_t r = 0; r < targets_.size(); ++r) {
        const auto i = static_cast<long>(r);
        const std::size_t t = targets_[r];
        y_(i) = ty[t], u_(i) = tu[t], v_(i) = tv[t];
        for (std::size_t k = 1; k <= p_; ++k) {
            const auto c = static_cast<long>(k - 1);
            Y_(i, c) = ty[t - k], U_(i, c) = tu[t - k], V_(i, c) = tv[t - k];
        }
    }
}

DesignData build_design(const PowerSeries& series, std::size_t p, double nu)
{
    checked_order(p);
    std::vector<std::size_t> targets;
    for (std::size_t t = p; t < series.size(); ++t)
        if (series.contiguous(t - p, t)) targets.push_back(t);
    return DesignData(series.values(), std::move(targets), p, nu);
}

DesignData build_design(std::span<const double> values, std::size_t p, double nu)
{
    checked_order(p);
    std::vector<std::size_t> targets;
    for (std::size_t t = p; t < values.size(); ++t) targets.push_back(t);
    return DesignData(std::vector<double>(values.begin(), values.end()), std::move(targets), p, nu);
}

PhiSigma closed_form_phi_sigma(const DesignData& design)
{
    const Eigen::MatrixXd gram = design.Y().transpose() * design.Y();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition)
        throw EstimationError("singular normal equations for lag order " + std::to_string(design.order()) +
                              "; try a smaller p");
    PhiSigma out;
    out.phi = gram.ldlt().solve(design.Y().transpose() * design.y());
    const Eigen::VectorXd resid = design.y() - design.Y() * out.phi;
    out.sigma2 = resid.squaredNorm() / static_cast<double>(design.rows());
    return out;
}

double negative_log_likelihood(const DesignData& design, const ThetaState& theta)
{
    const double n = static_cast<double>(design.rows());
    const double nu = theta.nu;
    double log_terms = 0.0;
    for (long i = 0; i < design.x().size(); ++i) log_terms += std::log(-std::expm1(nu * std::log(design.x()(i))));
    const Eigen::VectorXd resid = design.y() - design.Y() * theta.phi;
    return 0.5 * n * std::log(theta.sigma2) - n * std::log(nu) + log_terms + 0.5 * resid.squaredNorm() / theta.sigma2;
}

double nu_score(const DesignData& design, const ThetaState& theta)
{
    const double n = static_cast<double>(design.rows());
    double odds_terms = 0.0;
    for (long i = 0; i < design.x().size(); ++i) {
        const double x = design.x()(i);
        odds_terms += std::log(x) * power_odds(x, theta.nu);
    }
    const Eigen::VectorXd resid = design.y() - design.Y() * theta.phi;
    const Eigen::VectorXd du = design.u() - design.U() * theta.phi;
    return -n / theta.nu - odds_terms + du.dot(resid) / theta.sigma2;
}

double nu_curvature(const DesignData& design, const ThetaState& theta)
{
    const double n = static_cast<double>(design.rows());
    double odds_terms = 0.0;
    for (long i = 0; i < design.x().size(); ++i) {
        const double x = design.x()(i);
        const double lnx = std::log(x);
        const double lx = theta.nu * lnx;
        const double one_minus = -std::expm1(lx);
        odds_terms += lnx * lnx * std::exp(lx) / (one_minus * one_minus);
    }
    const Eigen::VectorXd resid = design.y() - design.Y() * theta.phi;
    const Eigen::VectorXd du = design.u() - design.U() * theta.phi;
    const Eigen::VectorXd dv = design.v() - design.V() * theta.phi;
    return n / (theta.nu * theta.nu) - odds_terms + dv.dot(resid) / theta.sigma2 + du.squaredNorm() / theta.sigma2;
}

BatchFit fit_batch(const PowerSeries& series, std::size_t p, const BatchOptions& options)
{
    return fit_batch(build_design(series, p, std::clamp(options.initial_nu, options.nu_min, options.nu_max)), options);
}

BatchFit fit_batch(DesignData design, const BatchOptions& options)
{
    BatchFit fit;
    fit.rows = design.rows();
    double nu = std::clamp(options.initial_nu, options.nu_min, options.nu_max);
    if (design.nu() != nu) design.refresh(nu);

    auto update = [&]() {
        PhiSigma cf = closed_form_phi_sigma(design);
        if (!(cf.sigma2 > 0.0)) throw EstimationError("residual variance is zero; the likelihood is unbounded");
        ThetaState theta(std::move(cf.phi), cf.sigma2, nu);
        const double f = negative_log_likelihood(design, theta);
        if (!std::isfinite(f)) throw EstimationError("non-finite negative log-likelihood at nu=" + std::to_string(nu));
        fit.nll_trace.push_back(f);
        fit.theta = std::move(theta);
        return f;
    };

    bool moved = true;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        fit.iterations = iter;
        const double f0 = update();
        moved = false;

        const double g = nu_score(design, fit.theta);
        const double h = nu_curvature(design, fit.theta);
        double direction = 0.0;
        if (h > 0.0 && std::isfinite(h)) {
            direction = -g / h;
            fit.decrement = 0.5 * g * g / h;
            if (fit.decrement <= options.epsilon) {
                fit.converged = true;
                break;
            }
        } else {
            direction = -g; // curvature not positive: plain descent step
            fit.decrement = std::numeric_limits<double>::infinity();
        }

        double step = 1.0;
        for (int k = 0; k < options.max_backtracks; ++k, step *= options.shrink) {
            const double trial_nu = std::clamp(nu + step * direction, options.nu_min, options.nu_max);
            if (trial_nu == nu) break;
            design.refresh(trial_nu);
            ThetaState trial(fit.theta.phi, fit.theta.sigma2, trial_nu);
            const double f1 = negative_log_likelihood(design, trial);
            if (std::isfinite(f1) && f1 <= f0 + options.armijo * g * (trial_nu - nu)) {
                nu = trial_nu;
                moved = true;
                break;
            }
        }
        if (!moved) {
            if (design.nu() != nu) design.refresh(nu);
            break; // no decrease available along the step
        }
    }
    if (!fit.converged && moved) update(); // iteration cap: report closed form at the last nu
    return fit;
}

nlohmann::json to_json(const BatchFit& fit)
{
    nlohmann::json j;
    j["phi"] = std::vector<double>(fit.theta.phi.data(), fit.theta.phi.data() + fit.theta.phi.size());
    j["sigma2"] = fit.theta.sigma2;
    j["nu"] = fit.theta.nu;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["nll_trace"] = fit.nll_trace;
    j["decrement"] = std::isfinite(fit.decrement) ? nlohmann::json(fit.decrement) : nlohmann::json(nullptr);
    j["rows"] = fit.rows;
    return j;
}

BatchFit batch_fit_from_json(const nlohmann::json& j)
{
    try {
        BatchFit fit;
        auto phi = j.at("phi").get<std::vector<double>>();
        fit.theta = ThetaState(Eigen::Map<Eigen::VectorXd>(phi.data(), static_cast<long>(phi.size())),
                               j.at("sigma2").get<double>(), j.at("nu").get<double>());
        fit.iterations = j.value("iterations", 0);
        fit.converged = j.value("converged", false);
        fit.nll_trace = j.value("nll_trace", std::vector<double>{});
        if (j.contains("decrement") && !j["decrement"].is_null()) fit.decrement = j["decrement"].get<double>();
        fit.rows = j.value("rows", std::size_t{0});
        fit.theta.validate();
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed batch fit document: ") + e.what());
    }
}

} // namespace glnar
