#include "glnar/predictive.hpp"

#include "glnar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace glnar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double interpolate(double x0, double x1, double y0, double y1, double x)
{
    if (x1 <= x0) return y1;
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double table_cdf(const QuantileTable& q, double y)
{
    const auto& v = q.values;
    if (v.empty()) throw EvaluationError("empty quantile table");
    if (y < v.front()) return 0.0;
    if (y >= v.back()) return 1.0;
    const auto i = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), y) - v.begin()) - 1;
    return interpolate(v[i], v[i + 1], q.levels[i], q.levels[i + 1], y);
}

double table_cdf_left(const QuantileTable& q, double y)
{
    const auto& v = q.values;
    if (v.empty()) throw EvaluationError("empty quantile table");
    if (y <= v.front()) return 0.0;
    if (y > v.back()) return 1.0;
    const auto j = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), y) - v.begin());
    return interpolate(v[j - 1], v[j], q.levels[j - 1], q.levels[j], y);
}

double grid_cdf(const GridCdf& g, double y)
{
    if (g.grid.empty()) throw EvaluationError("empty CDF grid");
    if (y < g.grid.front()) return 0.0;
    if (y >= g.grid.back()) return g.cdf.back();
    const auto i = static_cast<std::size_t>(std::upper_bound(g.grid.begin(), g.grid.end(), y) - g.grid.begin()) - 1;
    return interpolate(g.grid[i], g.grid[i + 1], g.cdf[i], g.cdf[i + 1], y);
}

} // namespace

EnsemblePredictive EnsemblePredictive::equal_weights(std::vector<double> points)
{
    std::sort(points.begin(), points.end());
    EnsemblePredictive e;
    e.weights.assign(points.size(), points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size()));
    e.points = std::move(points);
    return e;
}

double cdf(const Predictive& pred, double y)
{
    return std::visit(
        overloaded{
            [&](const PointMass& p) { return y >= p.at ? 1.0 : 0.0; },
            [&](const GlnPredictive& g) { return predictive_cdf(g, std::clamp(y, 0.0, 1.0)); },
            [&](const GaussianPredictive& g) {
                if (g.sigma2 <= 0.0) return y >= g.mean ? 1.0 : 0.0;
                return normal_cdf((y - g.mean) / std::sqrt(g.sigma2));
            },
            [&](const EnsemblePredictive& e) {
                double acc = 0.0;
                for (std::size_t i = 0; i < e.points.size() && e.points[i] <= y; ++i) acc += e.weights[i];
                return std::min(acc, 1.0);
            },
            [&](const QuantileTable& q) { return table_cdf(q, y); },
            [&](const GridCdf& g) { return grid_cdf(g, y); },
        },
        pred);
}

double cdf_left(const Predictive& pred, double y)
{
    return std::visit(
        overloaded{
            [&](const PointMass& p) { return y > p.at ? 1.0 : 0.0; },
            [&](const GaussianPredictive& g) {
                if (g.sigma2 <= 0.0) return y > g.mean ? 1.0 : 0.0;
                return normal_cdf((y - g.mean) / std::sqrt(g.sigma2));
            },
            [&](const EnsemblePredictive& e) {
                double acc = 0.0;
                for (std::size_t i = 0; i < e.points.size() && e.points[i] < y; ++i) acc += e.weights[i];
                return std::min(acc, 1.0);
            },
            [&](const QuantileTable& q) { return table_cdf_left(q, y); },
            [&](const auto&) { return cdf(pred, y); },
        },
        pred);
}

double quantile(const Predictive& pred, double tau)
{
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("quantile level must lie in [0,1]");
    return std::visit(
        overloaded{
            [&](const PointMass& p) { return p.at; },
            [&](const GlnPredictive& g) {
                if (tau <= 0.0) return 0.0;
                if (tau >= 1.0) return 1.0;
                return predictive_quantile(g, tau);
            },
            [&](const GaussianPredictive& g) {
                if (g.sigma2 <= 0.0) return g.mean;
                if (tau <= 0.0) return -std::numeric_limits<double>::infinity();
                if (tau >= 1.0) return std::numeric_limits<double>::infinity();
                return g.mean + std::sqrt(g.sigma2) * normal_quantile(tau);
            },
            [&](const EnsemblePredictive& e) {
                double acc = 0.0;
                for (std::size_t i = 0; i < e.points.size(); ++i) {
                    acc += e.weights[i];
                    if (acc >= tau - 1e-12) return e.points[i];
                }
                return e.points.back();
            },
            [&](const QuantileTable& q) {
                const auto& l = q.levels;
                if (tau <= l.front()) return q.values.front();
                if (tau >= l.back()) return q.values.back();
                const auto i = static_cast<std::size_t>(std::upper_bound(l.begin(), l.end(), tau) - l.begin()) - 1;
                return interpolate(l[i], l[i + 1], q.values[i], q.values[i + 1], tau);
            },
            [&](const GridCdf& g) {
                for (std::size_t i = 0; i < g.quantile_levels.size(); ++i)
                    if (std::abs(g.quantile_levels[i] - tau) < 1e-12) return g.quantile_values[i];
                const auto it = std::lower_bound(g.cdf.begin(), g.cdf.end(), tau);
                if (it == g.cdf.begin()) return g.grid.front();
                if (it == g.cdf.end()) return g.grid.back();
                const auto j = static_cast<std::size_t>(it - g.cdf.begin());
                return interpolate(g.cdf[j - 1], g.cdf[j], g.grid[j - 1], g.grid[j], tau);
            },
        },
        pred);
}

std::vector<double> atoms(const Predictive& pred)
{
    return std::visit(overloaded{
                          [](const PointMass& p) { return std::vector<double>{p.at}; },
                          [](const GaussianPredictive& g) {
                              return g.sigma2 <= 0.0 ? std::vector<double>{g.mean} : std::vector<double>{};
                          },
                          [](const EnsemblePredictive& e) { return e.points; },
                          [](const QuantileTable& q) {
                              std::vector<double> v = q.values;
                              v.erase(std::unique(v.begin(), v.end()), v.end());
                              return v;
                          },
                          [](const auto&) { return std::vector<double>{}; },
                      },
                      pred);
}

const char* predictive_kind(const Predictive& pred)
{
    static constexpr const char* names[] = {"point_mass", "gln", "gaussian", "ensemble", "quantile_table", "grid_cdf"};
    return names[pred.index()];
}

} // namespace glnar
