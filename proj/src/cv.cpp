#include "glnar/cv.hpp"

#include "glnar/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace glnar {

namespace {

nlohmann::json cell_json(const GridCell& c, ModelKind kind)
{
    nlohmann::json j = nlohmann::json::object();
    if (uses_lag_order(kind)) j["p"] = c.p;
    if (uses_delta(kind)) j["delta"] = c.delta;
    if (uses_alpha(kind)) j["alpha"] = c.alpha;
    return j;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Strict weak order: metric, then smaller p, larger alpha, larger delta.
bool better(const CellOutcome& a, const CellOutcome& b)
{
    if (a.metric != b.metric) return a.metric < b.metric;
    if (a.cell.p != b.cell.p) return a.cell.p < b.cell.p;
    if (a.cell.alpha != b.cell.alpha) return a.cell.alpha > b.cell.alpha;
    return a.cell.delta > b.cell.delta;
}

ModelParams apply(ModelParams base, const GridCell& c)
{
    base.p = c.p;
    base.delta = c.delta;
    base.alpha = c.alpha;
    return base;
}

} // namespace

std::string to_string(Metric metric) { return metric == Metric::rmse ? "rmse" : "crps"; }

Metric parse_metric(const std::string& name)
{
    if (name == "rmse") return Metric::rmse;
    if (name == "crps") return Metric::crps;
    throw ConfigError("unknown metric '" + name + "' (expected rmse or crps)");
}

Grid Grid::defaults(Metric metric)
{
    Grid g;
    g.metric = metric;
    g.p_values = {1, 2, 3, 4, 5};
    for (int k = 2; k <= 10; ++k) g.deltas.push_back(k / 1000.0);
    constexpr int steps = 10;
    for (int k = 0; k <= steps; ++k) {
        const double one_minus = 0.02 * std::pow(0.01, static_cast<double>(k) / steps);
        g.alphas.push_back(1.0 - one_minus);
    }
    return g;
}

void Grid::validate() const
{
    if (p_values.empty() || deltas.empty() || alphas.empty()) throw ConfigError("grid dimensions must be non-empty");
    for (auto p : p_values)
        if (p < 1) throw ConfigError("grid lag orders must be at least 1");
    for (double d : deltas) CoarseningConfig{d}.validate();
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("grid forgetting factors must lie in (0,1)");
}

std::vector<GridCell> Grid::cells(ModelKind kind, const ModelParams& base) const
{
    validate();
    const std::vector<std::size_t> ps = uses_lag_order(kind) ? p_values : std::vector<std::size_t>{base.p};
    const std::vector<double> ds = uses_delta(kind) ? deltas : std::vector<double>{base.delta};
    const std::vector<double> as = uses_alpha(kind) ? alphas : std::vector<double>{base.alpha};
    std::vector<GridCell> out;
    out.reserve(ps.size() * ds.size() * as.size());
    for (auto p : ps)
        for (double d : ds)
            for (double a : as) out.push_back({p, d, a});
    return out;
}

nlohmann::json CvResult::to_json() const
{
    nlohmann::json j;
    j["model"] = glnar::to_string(model);
    j["metric"] = glnar::to_string(metric);
    auto& arr = j["cells"] = nlohmann::json::array();
    for (const auto& c : cells) {
        nlohmann::json row = cell_json(c.cell, model);
        row["ok"] = c.ok;
        if (c.ok) {
            row["value"] = c.metric;
            row["forecasts"] = c.forecasts;
            row["approximate"] = c.approximate;
        } else {
            row["error"] = c.error;
        }
        arr.push_back(row);
    }
    if (best) {
        j["selected"] = cell_json(cells[*best].cell, model);
        j["selected_value"] = cells[*best].metric;
    } else {
        j["selected"] = nullptr;
    }
    return j;
}

CellOutcome evaluate_cell(const PowerSeries& series, ModelKind kind, const ModelParams& params,
                          const CvScheme& scheme, Metric metric)
{
    CellOutcome out;
    out.cell = {params.p, params.delta, params.alpha};
    const std::size_t first = series.lower_bound(scheme.fit_end);
    const std::size_t end = series.lower_bound(scheme.cv_end);
    if (first == 0) throw ConfigError("cross-validation needs records before " + format_timestamp(scheme.fit_end));
    if (first >= end) throw ConfigError("cross-validation period holds no records");

    RollOptions ro;
    if (kind == ModelKind::batch_nar || kind == ModelKind::batch_glnar) {
        out.approximate = end - 1 > scheme.exact_refit_limit;
        ro.refit_every = out.approximate ? std::max<std::size_t>(1, scheme.approx_refit_every) : 1;
    }
    try {
        const RollResult roll = roll_forecast(series, kind, params, first, end, ro);
        out.forecasts = roll.archive.records.size();
        out.metric = metric == Metric::rmse ? rmse(roll.archive) : crps(roll.archive);
        out.ok = std::isfinite(out.metric);
        if (!out.ok) out.error = "non-finite metric";
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

CvResult cross_validate(const PowerSeries& series, ModelKind kind, const Grid& grid, const CvScheme& scheme,
                        const ModelParams& base)
{
    const auto cells = grid.cells(kind, base);
    CvResult result;
    result.model = kind;
    result.metric = grid.metric;
    result.cells.resize(cells.size());

    unsigned workers = scheme.threads ? scheme.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i; (i = next++) < cells.size();) {
            if (failed) return;
            try {
                result.cells[i] = evaluate_cell(series, kind, apply(base, cells[i]), scheme, grid.metric);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        if (!result.cells[i].ok) continue;
        if (!result.best || better(result.cells[i], result.cells[*result.best])) result.best = i;
    }
    return result;
}

nlohmann::json Selection::to_json() const
{
    nlohmann::json j;
    j["model"] = glnar::to_string(model);
    j["params"] = {{"p", params.p}, {"delta", params.delta}, {"alpha", params.alpha}};
    if (glnar_batch) j["fit"] = glnar::to_json(*glnar_batch);
    if (glnar_recursive) j["state"] = glnar_recursive->to_json();
    if (nar) j["fit"] = {{"phi", to_vec(nar->phi)}, {"sigma2", nar->sigma2}};
    return j;
}

Selection select(const CvResult& result, const PowerSeries& series, const CvScheme& scheme, const ModelParams& base)
{
    if (!result.best) throw EstimationError("no grid cell produced a finite " + to_string(result.metric));
    Selection sel;
    sel.model = result.model;
    sel.params = apply(base, result.cells[*result.best].cell);
    const PowerSeries history = series.slice(0, series.lower_bound(scheme.cv_end));
    const auto& prm = sel.params;
    switch (result.model) {
    case ModelKind::batch_glnar:
        sel.glnar_batch = fit_batch(coarsen(history, CoarseningConfig{prm.delta}), prm.p);
        break;
    case ModelKind::recursive_glnar: {
        RecursiveConfig cfg;
        cfg.p = prm.p;
        cfg.alpha = prm.alpha;
        cfg.delta = prm.delta;
        sel.glnar_recursive = run_series(history, cfg).final_state;
        break;
    }
    case ModelKind::batch_nar: sel.nar = nar_fit(history, prm.p, NarMode::batch).final_state; break;
    case ModelKind::recursive_nar:
        sel.nar = nar_fit(history, prm.p, NarMode::recursive, prm.alpha).final_state;
        break;
    default: break;
    }
    return sel;
}

} // namespace glnar
