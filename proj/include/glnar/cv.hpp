#pragma once

#include "glnar/benchmarks.hpp"
#include "glnar/forecasting.hpp"
#include "glnar/recursive_mle.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace glnar {

enum class Metric { rmse, crps };

std::string to_string(Metric metric);
Metric parse_metric(const std::string& name);

struct GridCell {
    std::size_t p = 2;
    double delta = 0.005;
    double alpha = 0.995;
};

struct Grid {
    std::vector<std::size_t> p_values;
    std::vector<double> deltas;
    std::vector<double> alphas;
    Metric metric = Metric::crps;

    /// p in 1..5, delta in 0.002..0.01 (step 0.001), alpha on a ladder of
    /// 1 - alpha log-spaced from 0.02 down to 0.0002.
    static Grid defaults(Metric metric);
    void validate() const;
    /// Cartesian product restricted to the dimensions the model uses; unused
    /// dimensions take the value from `base`.
    std::vector<GridCell> cells(ModelKind kind, const ModelParams& base) const;
};

struct CvScheme {
    Timestamp fit_end;  ///< first record of the cross-validation period
    Timestamp cv_end;   ///< first record after it
    /// Batch models are refitted before every CV target while the fitting
    /// history holds at most this many records, and every `approx_refit_every`
    /// targets otherwise.
    std::size_t exact_refit_limit = 5000;
    std::size_t approx_refit_every = 50;
    unsigned threads = 0; ///< 0 = hardware concurrency
};

struct CellOutcome {
    GridCell cell;
    bool ok = false;
    double metric = 0.0;
    std::size_t forecasts = 0;
    bool approximate = false; ///< batch refits were thinned
    std::string error;
};

struct CvResult {
    ModelKind model = ModelKind::persistence;
    Metric metric = Metric::crps;
    std::vector<CellOutcome> cells;
    std::optional<std::size_t> best; ///< index into cells

    nlohmann::json to_json() const;
};

/// Cross-validation metric of one configuration: one-step-ahead forecasts over
/// [fit_end, cv_end) using only records before each target.
CellOutcome evaluate_cell(const PowerSeries& series, ModelKind kind, const ModelParams& params,
                          const CvScheme& scheme, Metric metric);

/// Evaluates every grid cell (concurrently) and records the argmin. Ties go to
/// the smaller p, then the larger alpha, then the larger delta.
CvResult cross_validate(const PowerSeries& series, ModelKind kind, const Grid& grid, const CvScheme& scheme,
                        const ModelParams& base = {});

struct Selection {
    ModelKind model = ModelKind::persistence;
    ModelParams params;
    std::optional<BatchFit> glnar_batch;
    std::optional<RecursiveState> glnar_recursive;
    std::optional<NarState> nar;

    nlohmann::json to_json() const;
};

/// Refits the selected configuration on every record before cv_end.
Selection select(const CvResult& result, const PowerSeries& series, const CvScheme& scheme,
                 const ModelParams& base = {});

} // namespace glnar
