#include "glnar/benchmarks.hpp"

#include "glnar/error.hpp"

#include <algorithm>
#include <cmath>

namespace glnar {

Predictive persistence_prob(double last, std::span<const double> recent_errors, std::size_t window)
{
    if (window == 0 || recent_errors.size() < window) return PointMass{last};
    std::vector<double> members;
    members.reserve(window);
    for (double e : recent_errors.last(window)) members.push_back(std::clamp(last + e, 0.0, 1.0));
    return EnsemblePredictive::equal_weights(std::move(members));
}

void ErrorBuffer::push(double error)
{
    errors_.push_back(error);
    while (errors_.size() > window_) errors_.pop_front();
}

std::vector<double> probability_grid(std::size_t steps)
{
    if (steps == 0) throw ConfigError("probability grid needs at least one step");
    std::vector<double> g(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) g[i] = static_cast<double>(i) / static_cast<double>(steps);
    return g;
}

QuantileTable empirical_quantiles(std::span<const double> sorted, const std::vector<double>& levels)
{
    if (sorted.empty()) throw EstimationError("empirical quantiles of an empty sample");
    QuantileTable q;
    q.levels = levels;
    q.values.reserve(levels.size());
    const double last = static_cast<double>(sorted.size() - 1);
    for (double tau : levels) {
        const double h = tau * last;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        q.values.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    }
    for (std::size_t i = 1; i < q.values.size(); ++i) q.values[i] = std::max(q.values[i], q.values[i - 1]);
    return q;
}

Climatology::Climatology(std::span<const double> history, std::vector<double> levels)
    : sorted_(history.begin(), history.end()), levels_(std::move(levels))
{
    if (sorted_.empty()) throw EstimationError("climatology needs a non-empty history");
    std::sort(sorted_.begin(), sorted_.end());
}

QuantileTable Climatology::table() const { return empirical_quantiles(sorted_, levels_); }

void Climatology::observe(double x) { sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), x), x); }

// ---------------------------------------------------------------------------

NarState nar_fit_batch(const PowerSeries& train, std::size_t p)
{
    if (p < 1) throw ConfigError("lag order p must be at least 1");
    std::vector<std::size_t> rows;
    for (std::size_t t = p; t < train.size(); ++t)
        if (train.contiguous(t - p, t)) rows.push_back(t);
    if (rows.empty()) throw EstimationError("not enough contiguous observations for a NAR(" + std::to_string(p) + ") fit");
    const auto n = static_cast<long>(rows.size());
    Eigen::MatrixXd X(n, static_cast<long>(p));
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) {
        const std::size_t t = rows[static_cast<std::size_t>(i)];
        y(i) = train[t].value;
        for (std::size_t k = 1; k <= p; ++k) X(i, static_cast<long>(k - 1)) = train[t - k].value;
    }
    const Eigen::MatrixXd gram = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    if (!(lo > 0.0) || eig.eigenvalues().maxCoeff() / lo > 1e12)
        throw EstimationError("singular normal equations for NAR(" + std::to_string(p) + ")");
    NarState s;
    s.phi = gram.ldlt().solve(X.transpose() * y);
    s.sigma2 = (y - X * s.phi).squaredNorm() / static_cast<double>(n);
    return s;
}

NarState nar_recursive_initial(std::size_t p, double alpha)
{
    if (p < 1) throw ConfigError("lag order p must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("forgetting factor alpha must lie in (0,1)");
    NarState s;
    const auto dim = static_cast<long>(p);
    s.phi = Eigen::VectorXd::Zero(dim);
    s.alpha = alpha;
    s.info = Eigen::MatrixXd::Zero(dim, dim);
    s.cross = Eigen::VectorXd::Zero(dim);
    return s;
}

void nar_recursive_step(NarState& s, double x)
{
    ++s.t;
    const std::size_t p = s.order();
    if (s.lags.size() >= p) {
        Eigen::VectorXd lag(static_cast<long>(p));
        for (std::size_t k = 0; k < p; ++k) lag(static_cast<long>(k)) = s.lags[k];
        const double a = s.alpha;
        const double err = x - s.phi.dot(lag);
        s.info = a * s.info + (1.0 - a) * lag * lag.transpose();
        s.cross = a * s.cross + (1.0 - a) * lag * x;
        Eigen::LLT<Eigen::MatrixXd> llt(s.info);
        if (llt.info() == Eigen::Success) {
            if (!s.initialized) {
                s.phi = llt.solve(s.cross);
                s.initialized = true;
            } else {
                s.phi += (1.0 - a) * llt.solve(lag * err);
            }
        }
        if (s.initialized) {
            s.weight = a * s.weight + (1.0 - a);
            s.weighted_sse = a * s.weighted_sse + (1.0 - a) * err * err;
            s.sigma2 = s.weighted_sse / s.weight;
        }
    }
    s.lags.push_front(x);
    while (s.lags.size() > p) s.lags.pop_back();
}

NarRun nar_fit(const PowerSeries& train, std::size_t p, NarMode mode, double alpha)
{
    NarRun run;
    if (mode == NarMode::batch) {
        run.final_state = nar_fit_batch(train, p);
        return run;
    }
    run.final_state = nar_recursive_initial(p, alpha);
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (i > 0 && !train.follows(i)) run.final_state.lags.clear();
        nar_recursive_step(run.final_state, train[i].value);
        run.times.push_back(train[i].time);
        run.phi.push_back(run.final_state.phi);
        run.sigma2.push_back(run.final_state.sigma2);
    }
    if (!run.final_state.initialized)
        throw EstimationError("recursive NAR never obtained an invertible moment matrix");
    return run;
}

NarForecast nar_predict(const NarState& state, std::span<const double> lags)
{
    const std::size_t p = state.order();
    if (lags.size() < p) throw EstimationError("nar_predict needs p lagged values");
    NarForecast f;
    for (std::size_t k = 0; k < p; ++k) f.raw += state.phi(static_cast<long>(k)) * lags[k];
    f.point = std::clamp(f.raw, 0.0, 1.0);
    f.predictive = GaussianPredictive{f.point, std::max(state.sigma2, 0.0)};
    return f;
}

} // namespace glnar
