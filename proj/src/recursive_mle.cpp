#include "glnar/recursive_mle.hpp"

#include "glnar/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace glnar {

void RecursiveConfig::validate() const
{
    if (p < 1) throw ConfigError("lag order p must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("forgetting factor alpha must lie in (0,1)");
    if (warmup != 0 && warmup < p + 1) throw ConfigError("warmup must be at least p + 1");
    CoarseningConfig{delta}.validate();
    if (!(nu_min > 0.0 && nu_min < nu_max)) throw ConfigError("invalid nu bounds");
}

RecursiveState RecursiveState::initial(const RecursiveConfig& config)
{
    config.validate();
    RecursiveState s;
    s.theta = ThetaState::initial(config.p);
    const auto dim = static_cast<long>(config.p + 2);
    s.info = Eigen::MatrixXd::Zero(dim, dim);
    return s;
}

nlohmann::json RecursiveState::to_json() const
{
    nlohmann::json j;
    j["phi"] = std::vector<double>(theta.phi.data(), theta.phi.data() + theta.phi.size());
    j["sigma2"] = theta.sigma2;
    j["nu"] = theta.nu;
    std::vector<double> r(info.data(), info.data() + info.size());
    j["info"] = r;
    j["lags"] = std::vector<double>(lags.begin(), lags.end());
    j["t"] = t;
    j["updates"] = updates;
    j["skipped"] = skipped;
    return j;
}

RecursiveState RecursiveState::from_json(const nlohmann::json& j)
{
    try {
        RecursiveState s;
        auto phi = j.at("phi").get<std::vector<double>>();
        s.theta = ThetaState(Eigen::Map<Eigen::VectorXd>(phi.data(), static_cast<long>(phi.size())),
                             j.at("sigma2").get<double>(), j.at("nu").get<double>());
        s.theta.validate();
        const auto dim = static_cast<long>(phi.size() + 2);
        auto r = j.at("info").get<std::vector<double>>();
        if (r.size() != static_cast<std::size_t>(dim * dim)) throw ConfigError("information matrix has wrong size");
        s.info = Eigen::Map<Eigen::MatrixXd>(r.data(), dim, dim);
        auto lags = j.at("lags").get<std::vector<double>>();
        s.lags.assign(lags.begin(), lags.end());
        s.t = j.at("t").get<std::size_t>();
        s.updates = j.value("updates", std::size_t{0});
        s.skipped = j.value("skipped", std::size_t{0});
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed recursive state: ") + e.what());
    }
}

double conditional_log_density(const ThetaState& theta, const std::deque<double>& lags, double x)
{
    double mu = 0.0;
    for (std::size_t k = 0; k < theta.order(); ++k) mu += theta.phi(static_cast<long>(k)) * transform(lags[k], theta.nu);
    return log_density(x, mu, theta.sigma2, theta.nu);
}

Eigen::VectorXd score_vector(const RecursiveState& state, double x)
{
    if (!state.buffer_full()) throw EstimationError("score_vector: lag buffer holds fewer than p observations");
    const auto& th = state.theta;
    const std::size_t p = th.order();
    Eigen::VectorXd ylag(static_cast<long>(p)), ulag(static_cast<long>(p));
    for (std::size_t k = 0; k < p; ++k) {
        ylag(static_cast<long>(k)) = transform(state.lags[k], th.nu);
        ulag(static_cast<long>(k)) = nu_derivatives(state.lags[k], th.nu).u;
    }
    const double y = transform(x, th.nu);
    const double u = nu_derivatives(x, th.nu).u;
    const double eps = y - th.phi.dot(ylag);
    const double s2 = th.sigma2;

    Eigen::VectorXd h(static_cast<long>(p + 2));
    h.head(static_cast<long>(p)) = eps * ylag / s2;
    h(static_cast<long>(p)) = -0.5 / s2 + 0.5 * eps * eps / (s2 * s2);
    h(static_cast<long>(p + 1)) = 1.0 / th.nu + std::log(x) * power_odds(x, th.nu) - eps * (u - th.phi.dot(ulag)) / s2;
    return h;
}

StepInfo step(RecursiveState& state, const RecursiveConfig& config, double x)
{
    StepInfo info;
    ++state.t;
    if (state.buffer_full()) {
        Eigen::VectorXd h = score_vector(state, x);
        if (!h.allFinite()) {
            ++state.skipped;
        } else {
            const double a = config.alpha;
            state.info = a * state.info + (1.0 - a) * h * h.transpose();
            state.info = 0.5 * (state.info + state.info.transpose()).eval();
            info.scored = true;

            if (state.t > config.effective_warmup()) {
                const auto dim = state.info.rows();
                Eigen::LLT<Eigen::MatrixXd> llt(state.info);
                if (llt.info() != Eigen::Success)
                    llt.compute(state.info + config.jitter * Eigen::MatrixXd::Identity(dim, dim));
                if (llt.info() == Eigen::Success) {
                    const Eigen::VectorXd direction = llt.solve(h);
                    if (direction.allFinite()) {
                        const Eigen::VectorXd delta = (1.0 - a) * direction;
                        const auto p = static_cast<long>(state.order());
                        auto& th = state.theta;
                        const Eigen::VectorXd before = [&] {
                            Eigen::VectorXd v(p + 2);
                            v << th.phi, th.sigma2, th.nu;
                            return v;
                        }();
                        th.phi += delta.head(p);
                        th.sigma2 = std::max(th.sigma2 + delta(p), config.sigma2_floor);
                        th.nu = std::clamp(th.nu + delta(p + 1), config.nu_min, config.nu_max);
                        Eigen::VectorXd after(p + 2);
                        after << th.phi, th.sigma2, th.nu;
                        info.step_norm = (after - before).norm();
                        // Spectral norm of R^-1 is 1 / smallest eigenvalue of R.
                        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.info, Eigen::EigenvaluesOnly);
                        const double lambda_min = eig.eigenvalues().minCoeff();
                        info.step_bound = lambda_min > 0.0 ? (1.0 - a) * h.norm() / lambda_min
                                                           : std::numeric_limits<double>::infinity();
                        info.updated = true;
                        ++state.updates;
                    }
                }
            }
            info.score = std::move(h);
        }
    }
    state.lags.push_front(x);
    while (state.lags.size() > state.order()) state.lags.pop_back();
    return info;
}

GlnPredictive next_predictive(const RecursiveState& state)
{
    if (!state.buffer_full()) throw EstimationError("next_predictive: lag buffer holds fewer than p observations");
    const auto& th = state.theta;
    double mu = 0.0;
    for (std::size_t k = 0; k < th.order(); ++k) mu += th.phi(static_cast<long>(k)) * transform(state.lags[k], th.nu);
    return {mu, th.sigma2, th.nu};
}

RecursiveRun run_series(const PowerSeries& series, const RecursiveConfig& config)
{
    config.validate();
    if (series.size() <= config.effective_warmup())
        throw EstimationError("series of length " + std::to_string(series.size()) + " is not longer than the warm-up (" +
                              std::to_string(config.effective_warmup()) + ")");
    const PowerSeries data = coarsen(series, CoarseningConfig{config.delta});
    RecursiveRun run;
    run.final_state = RecursiveState::initial(config);
    auto& state = run.final_state;
    run.times.reserve(data.size());
    run.thetas.reserve(data.size());
    run.next.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i > 0 && !data.follows(i)) state.reset_lags();
        step(state, config, data[i].value);
        run.times.push_back(data[i].time);
        run.thetas.push_back(state.theta);
        run.next.push_back(state.buffer_full() ? std::optional<GlnPredictive>(next_predictive(state)) : std::nullopt);
    }
    return run;
}

void write_trajectory_csv(const std::filesystem::path& path, const RecursiveRun& run)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    const std::size_t p = run.final_state.order();
    out << "timestamp";
    for (std::size_t k = 1; k <= p; ++k) out << ",phi_" << k;
    out << ",sigma2,nu\n";
    for (std::size_t i = 0; i < run.times.size(); ++i) {
        out << format_timestamp(run.times[i]);
        const auto& th = run.thetas[i];
        for (long k = 0; k < th.phi.size(); ++k) out << ',' << detail::format_double(th.phi(k));
        out << ',' << detail::format_double(th.sigma2) << ',' << detail::format_double(th.nu) << '\n';
    }
}

} // namespace glnar
