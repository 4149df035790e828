#include "glnar/simulator.hpp"

#include "glnar/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace glnar {

double NormalStream::uniform()
{
    // 53 random bits -> (0, 1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next()
{
    if (spare_) {
        double z = *spare_;
        spare_.reset();
        return z;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    return r * std::cos(angle);
}

bool is_stationary(const Eigen::VectorXd& phi)
{
    const auto p = phi.size();
    if (p == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    companion.row(0) = phi.transpose();
    for (long i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    return es.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

namespace {

void check_theta(const ThetaState& th, std::size_t p)
{
    if (th.order() != p) throw ConfigError("all regimes must share the lag order");
    if (!(th.sigma2 >= 0.0)) throw ConfigError("simulation sigma2 must be non-negative");
    if (!(th.nu > 0.0)) throw ConfigError("simulation nu must be positive");
    if (!is_stationary(th.phi)) throw ConfigError("AR coefficients are not stationary (a root lies on or inside the unit circle)");
}

nlohmann::json theta_json(const ThetaState& th)
{
    return {{"phi", std::vector<double>(th.phi.data(), th.phi.data() + th.phi.size())},
            {"sigma2", th.sigma2},
            {"nu", th.nu}};
}

} // namespace

void SimSpec::validate() const
{
    const std::size_t p = theta.order();
    if (p < 1) throw ConfigError("lag order p must be at least 1");
    if (n == 0) throw ConfigError("simulation length n must be positive");
    check_theta(theta, p);
    std::size_t last = 0;
    for (const auto& sw : regime_switches) {
        check_theta(sw.theta, p);
        if (sw.index >= n || sw.index < last) throw ConfigError("regime switch indices must be increasing and below n");
        last = sw.index;
    }
    if (!initial_y.empty() && initial_y.size() != p) throw ConfigError("initial_y must hold exactly p values");
}

Simulation simulate(const SimSpec& spec)
{
    spec.validate();
    const std::size_t p = spec.theta.order();
    NormalStream normal(spec.seed);

    std::vector<double> lags(p, 0.0); // most recent first
    if (!spec.initial_y.empty()) lags = spec.initial_y;

    Simulation sim;
    sim.transformed.reserve(spec.n);
    sim.truth.reserve(spec.n);
    std::vector<double> xs;
    xs.reserve(spec.n);

    const ThetaState* current = &spec.theta;
    std::size_t next_switch = 0;
    const std::size_t total = spec.burn_in + spec.n;
    for (std::size_t i = 0; i < total; ++i) {
        if (i >= spec.burn_in) {
            const std::size_t k = i - spec.burn_in;
            while (next_switch < spec.regime_switches.size() && spec.regime_switches[next_switch].index == k)
                current = &spec.regime_switches[next_switch++].theta;
        }
        double y = std::sqrt(current->sigma2) * normal.next();
        for (std::size_t k = 0; k < p; ++k) y += current->phi(static_cast<long>(k)) * lags[k];
        for (std::size_t k = p - 1; k > 0; --k) lags[k] = lags[k - 1];
        lags[0] = y;
        if (i < spec.burn_in) continue;
        double x = inverse_transform(y, current->nu);
        // Keep the value strictly inside (0,1) even in the far tails.
        x = std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
        xs.push_back(x);
        sim.transformed.push_back(y);
        sim.truth.push_back(*current);
    }
    sim.series = PowerSeries::regular(spec.start, spec.resolution, xs);

    auto& meta = sim.metadata;
    meta["generator"] = kGeneratorName;
    meta["seed"] = spec.seed;
    meta["n"] = spec.n;
    meta["burn_in"] = spec.burn_in;
    meta["start"] = format_timestamp(spec.start);
    meta["resolution_minutes"] = spec.resolution.count();
    auto& segs = meta["theta_trajectory"] = nlohmann::json::array();
    nlohmann::json first = theta_json(spec.theta);
    first["index"] = 0;
    first["start"] = format_timestamp(spec.start);
    segs.push_back(first);
    for (const auto& sw : spec.regime_switches) {
        nlohmann::json s = theta_json(sw.theta);
        s["index"] = sw.index;
        s["start"] = format_timestamp(spec.start + spec.resolution * static_cast<long>(sw.index));
        segs.push_back(s);
    }
    return sim;
}

void write_simulation(const std::filesystem::path& series_csv, const std::filesystem::path& sidecar_json,
                      const Simulation& sim)
{
    write_series_csv(series_csv, sim.series);
    std::ofstream out(sidecar_json);
    if (!out) throw ConfigError("cannot write " + sidecar_json.string());
    out << sim.metadata.dump(2) << '\n';
}

} // namespace glnar
