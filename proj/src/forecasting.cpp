#include "glnar/forecasting.hpp"

#include "glnar/benchmarks.hpp"
#include "glnar/error.hpp"
#include "glnar/recursive_mle.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace glnar {

namespace {

constexpr std::array<std::pair<ModelKind, const char*>, 7> kModelNames{{
    {ModelKind::persistence, "persistence"},
    {ModelKind::prob_persistence, "prob_persistence"},
    {ModelKind::climatology, "climatology"},
    {ModelKind::batch_nar, "batch_nar"},
    {ModelKind::recursive_nar, "recursive_nar"},
    {ModelKind::batch_glnar, "batch_glnar"},
    {ModelKind::recursive_glnar, "recursive_glnar"},
}};

std::vector<double> recent_lags(const PowerSeries& s, std::size_t j, std::size_t p)
{
    std::vector<double> lags(p);
    for (std::size_t k = 0; k < p; ++k) lags[k] = s[j - 1 - k].value;
    return lags;
}

bool has_lags(const PowerSeries& s, std::size_t j, std::size_t p)
{
    return j >= p && (p == 0 || s.contiguous(j - p, j));
}

GlnPredictive gln_predictive(const ThetaState& th, const std::vector<double>& lags)
{
    double mu = 0.0;
    for (std::size_t k = 0; k < lags.size(); ++k) mu += th.phi(static_cast<long>(k)) * transform(lags[k], th.nu);
    return {mu, th.sigma2, th.nu};
}

} // namespace

std::string to_string(ModelKind kind)
{
    for (const auto& [k, name] : kModelNames)
        if (k == kind) return name;
    return "unknown";
}

ModelKind parse_model(const std::string& name)
{
    for (const auto& [k, n] : kModelNames)
        if (name == n) return k;
    throw ConfigError("unknown model '" + name +
                      "' (expected persistence, prob_persistence, climatology, batch_nar, recursive_nar, "
                      "batch_glnar or recursive_glnar)");
}

std::vector<ModelKind> all_models()
{
    std::vector<ModelKind> out;
    for (const auto& entry : kModelNames) out.push_back(entry.first);
    return out;
}

bool uses_lag_order(ModelKind kind)
{
    return kind == ModelKind::batch_nar || kind == ModelKind::recursive_nar || kind == ModelKind::batch_glnar ||
           kind == ModelKind::recursive_glnar;
}

bool uses_delta(ModelKind kind) { return kind == ModelKind::batch_glnar || kind == ModelKind::recursive_glnar; }

bool uses_alpha(ModelKind kind) { return kind == ModelKind::recursive_nar || kind == ModelKind::recursive_glnar; }

ForecastMode parse_mode(const std::string& name)
{
    if (name == "point") return ForecastMode::point;
    if (name == "prob") return ForecastMode::prob;
    throw ConfigError("unknown mode '" + name + "' (expected point or prob)");
}

ModelParams default_params(ModelKind kind, ForecastMode mode)
{
    ModelParams m;
    m.p = 2;
    const bool prob = mode == ForecastMode::prob;
    switch (kind) {
    case ModelKind::recursive_nar: m.alpha = prob ? 0.983 : 0.995; break;
    case ModelKind::batch_glnar: m.delta = prob ? 0.006 : 0.005; break;
    case ModelKind::recursive_glnar:
        m.delta = prob ? 0.004 : 0.005;
        m.alpha = prob ? 0.9986 : 0.9994;
        break;
    default: break;
    }
    return m;
}

RollResult roll_forecast(const PowerSeries& series, ModelKind kind, const ModelParams& params,
                         std::size_t first_target, std::size_t end, const RollOptions& options)
{
    end = std::min(end, series.size());
    if (first_target >= end) throw ConfigError("forecast period is empty");
    if (uses_lag_order(kind) && params.p < 1) throw ConfigError("lag order p must be at least 1");
    if (uses_delta(kind)) CoarseningConfig{params.delta}.validate();
    if (uses_alpha(kind) && !(params.alpha > 0.0 && params.alpha < 1.0))
        throw ConfigError("forgetting factor alpha must lie in (0,1)");

    RollResult result;
    result.archive.model_id = to_string(kind);
    auto& records = result.archive.records;
    records.reserve(end - first_target);
    const std::size_t p = params.p;

    auto emit = [&](std::size_t j, double point, Predictive pred) {
        records.push_back({series[j].time, series[j].value, point, std::move(pred)});
    };

    switch (kind) {
    case ModelKind::persistence:
        for (std::size_t j = first_target; j < end; ++j) {
            if (!has_lags(series, j, 1)) { ++result.skipped; continue; }
            const double last = series[j - 1].value;
            emit(j, persistence_point(last), PointMass{last});
        }
        break;

    case ModelKind::prob_persistence: {
        ErrorBuffer errors(params.window);
        for (std::size_t i = 1; i < first_target; ++i)
            if (series.follows(i)) errors.push(series[i].value - series[i - 1].value);
        for (std::size_t j = first_target; j < end; ++j) {
            if (has_lags(series, j, 1)) {
                const double last = series[j - 1].value;
                const auto e = errors.errors();
                emit(j, persistence_point(last), persistence_prob(last, e, params.window));
                errors.push(series[j].value - last);
            } else {
                ++result.skipped;
            }
        }
        break;
    }

    case ModelKind::climatology: {
        std::vector<double> history;
        history.reserve(first_target);
        for (std::size_t i = 0; i < first_target; ++i) history.push_back(series[i].value);
        Climatology clim(history);
        for (std::size_t j = first_target; j < end; ++j) {
            if (clim.size() == 0) {
                ++result.skipped;
            } else {
                QuantileTable table = clim.table();
                const double median = quantile(Predictive{table}, 0.5);
                emit(j, median, std::move(table));
            }
            clim.observe(series[j].value);
        }
        break;
    }

    case ModelKind::batch_nar: {
        NarState state = nar_fit_batch(series.slice(0, first_target), p);
        ++result.refits;
        for (std::size_t j = first_target; j < end; ++j) {
            if (options.refit_every > 0 && j > first_target && (j - first_target) % options.refit_every == 0) {
                state = nar_fit_batch(series.slice(0, j), p);
                ++result.refits;
            }
            if (!has_lags(series, j, p)) { ++result.skipped; continue; }
            const auto f = nar_predict(state, recent_lags(series, j, p));
            emit(j, f.point, f.predictive);
        }
        break;
    }

    case ModelKind::recursive_nar: {
        NarState state = nar_recursive_initial(p, params.alpha);
        for (std::size_t j = 0; j < end; ++j) {
            if (j > 0 && !series.follows(j)) state.lags.clear();
            if (j >= first_target) {
                if (state.lags.size() >= p) {
                    const std::vector<double> lags(state.lags.begin(), state.lags.begin() + static_cast<long>(p));
                    const auto f = nar_predict(state, lags);
                    emit(j, f.point, f.predictive);
                } else {
                    ++result.skipped;
                }
            }
            nar_recursive_step(state, series[j].value);
        }
        break;
    }

    case ModelKind::batch_glnar: {
        const PowerSeries coarse = coarsen(series, CoarseningConfig{params.delta});
        BatchOptions bo = options.batch;
        BatchFit fit = fit_batch(coarse.slice(0, first_target), p, bo);
        ++result.refits;
        for (std::size_t j = first_target; j < end; ++j) {
            if (options.refit_every > 0 && j > first_target && (j - first_target) % options.refit_every == 0) {
                if (options.warm_start) bo.initial_nu = fit.theta.nu;
                fit = fit_batch(coarse.slice(0, j), p, bo);
                ++result.refits;
            }
            if (!has_lags(coarse, j, p)) { ++result.skipped; continue; }
            const GlnPredictive pred = gln_predictive(fit.theta, recent_lags(coarse, j, p));
            emit(j, predictive_point(pred, params.point_rule, params.delta), pred);
        }
        result.last_fit = std::move(fit);
        break;
    }

    case ModelKind::recursive_glnar: {
        RecursiveConfig cfg;
        cfg.p = p;
        cfg.alpha = params.alpha;
        cfg.delta = params.delta;
        cfg.validate();
        RecursiveState state = RecursiveState::initial(cfg);
        for (std::size_t j = 0; j < end; ++j) {
            if (j > 0 && !series.follows(j)) state.reset_lags();
            if (j >= first_target) {
                if (state.buffer_full()) {
                    const GlnPredictive pred = next_predictive(state);
                    emit(j, predictive_point(pred, params.point_rule, params.delta), pred);
                } else {
                    ++result.skipped;
                }
            }
            step(state, cfg, coarsen_value(series[j].value, params.delta));
        }
        break;
    }
    }

    if (records.empty()) throw EstimationError("no forecastable targets for " + result.archive.model_id);
    return result;
}

} // namespace glnar
