#pragma once

#include "glnar/batch_mle.hpp"
#include "glnar/gln.hpp"
#include "glnar/metrics.hpp"
#include "glnar/series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace glnar {

enum class ModelKind {
    persistence,
    prob_persistence,
    climatology,
    batch_nar,
    recursive_nar,
    batch_glnar,
    recursive_glnar,
};

std::string to_string(ModelKind kind);
ModelKind parse_model(const std::string& name);
std::vector<ModelKind> all_models();

bool uses_lag_order(ModelKind kind);
bool uses_delta(ModelKind kind);
bool uses_alpha(ModelKind kind);

enum class ForecastMode { point, prob };

ForecastMode parse_mode(const std::string& name);

struct ModelParams {
    std::size_t p = 2;
    double delta = 0.005;
    double alpha = 0.995;
    std::size_t window = 20; ///< probabilistic persistence ensemble size
    PointRule point_rule = PointRule::median;
};

/// Hyperparameters selected for the reference wind-farm study, per mode.
ModelParams default_params(ModelKind kind, ForecastMode mode);

struct RollOptions {
    /// Batch models: 0 fits once on the records before the first target;
    /// k > 0 refits on the expanding history every k targets.
    std::size_t refit_every = 0;
    /// Start each batch GLN refit from the previous nu instead of nu = 1.
    bool warm_start = true;
    BatchOptions batch;
};

struct RollResult {
    ForecastArchive archive;
    std::size_t skipped = 0;          ///< targets without contiguous lags
    std::size_t refits = 0;
    std::optional<BatchFit> last_fit; ///< batch GLN only
};

/// One-step-ahead forecasts for targets [first_target, end): target j only uses
/// records before j. Recursive models stream the series from its start; batch
/// models are fitted on records [0, first_target). Observations in the archive
/// are the raw (uncoarsened) values.
RollResult roll_forecast(const PowerSeries& series, ModelKind kind, const ModelParams& params,
                         std::size_t first_target, std::size_t end, const RollOptions& options = {});

} // namespace glnar
