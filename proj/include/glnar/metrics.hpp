#pragma once

#include "glnar/predictive.hpp"
#include "glnar/series.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace glnar {

struct ForecastRecord {
    Timestamp time;
    double observation = 0.0;
    double point = 0.0;
    Predictive predictive;
};

/// One model's one-step-ahead forecasts over an evaluation period.
struct ForecastArchive {
    std::string model_id;
    std::vector<ForecastRecord> records;
};

/// Uniform grid over [0,1] (1001 points by default).
std::vector<double> uniform_grid(std::size_t points = 1001);

/// {0.025, 0.05, 0.1, 0.15, ..., 0.9, 0.95, 0.975}.
std::vector<double> default_reliability_levels();

/// Point-forecast RMSE in percent of nominal power.
double rmse(const ForecastArchive& archive);

/// BS(y) = mean_t (F_t(y) - 1{x_t <= y})^2 per threshold (raw, not percent).
std::vector<double> brier_curve(const ForecastArchive& archive, const std::vector<double>& thresholds);

/// integral over [0,1] of (F(y) - 1{y >= obs})^2 by the trapezoidal rule on `grid`,
/// with the observation and any atoms of F inserted as extra nodes. Exact for
/// piecewise-constant CDFs.
double crps_record(const Predictive& pred, double observation, const std::vector<double>& grid);

/// Archive-mean CRPS in percent. Throws EvaluationError naming the first record
/// whose CDF decreases on the grid.
double crps(const ForecastArchive& archive, const std::vector<double>& grid = uniform_grid());

struct ReliabilityRow {
    double nominal = 0.0;
    double empirical = 0.0;
};
std::vector<ReliabilityRow> reliability(const ForecastArchive& archive,
                                        const std::vector<double>& levels = default_reliability_levels());

struct CalibrationRow {
    double value = 0.0;
    double difference = 0.0; ///< mean predictive CDF minus empirical CDF
};
std::vector<CalibrationRow> marginal_calibration(const ForecastArchive& archive, const std::vector<double>& grid);

struct EvaluationReport {
    std::string model_id;
    std::size_t count = 0;
    double rmse = 0.0; ///< percent
    double crps = 0.0; ///< percent
    std::vector<double> thresholds;
    std::vector<double> brier;
    std::vector<ReliabilityRow> reliability;
    std::vector<CalibrationRow> marginal_calibration;
    std::map<std::string, double> improvements; ///< "<metric>_vs_<baseline>" -> percent

    nlohmann::json to_json() const;
};

struct EvaluationOptions {
    std::vector<double> integration_grid = uniform_grid();
    std::vector<double> brier_thresholds = uniform_grid(101);
    std::vector<double> reliability_levels = default_reliability_levels();
    std::vector<double> calibration_grid = uniform_grid(101);
};

EvaluationReport evaluate(const ForecastArchive& archive, const EvaluationOptions& options = {});

struct Improvement {
    std::string model_id;
    std::string metric;   ///< "rmse" or "crps"
    std::string baseline;
    double percent = 0.0; ///< 100 (baseline - model) / baseline
};

/// Baselines are given per metric, e.g. {"rmse": {"persistence"}, "crps": {"climatology", "prob_persistence"}}.
/// Also fills each report's `improvements`. Throws EvaluationError if a baseline is missing.
std::vector<Improvement> improvement_table(std::vector<EvaluationReport>& reports,
                                           const std::map<std::string, std::vector<std::string>>& baselines);

double improvement_percent(double baseline, double model);

// ---------------------------------------------------------------- archive files

struct ArchiveFileOptions {
    std::vector<double> quantile_levels = default_reliability_levels();
    std::vector<double> cdf_grid = uniform_grid();
};

/// Writes <dir>/<model_id>.csv (timestamp, observation, point, q_...) and the
/// companion <dir>/<model_id>.cdf.csv (timestamp then F on the grid).
void write_archive(const std::filesystem::path& dir, const ForecastArchive& archive,
                   const ArchiveFileOptions& options = {});

/// Reads the pair written by write_archive. `main_csv` is the <model_id>.csv path.
ForecastArchive read_archive(const std::filesystem::path& main_csv);

// ---------------------------------------------------------------- plot tables

void write_brier_csv(const std::filesystem::path& path, const std::vector<EvaluationReport>& reports);
void write_reliability_csv(const std::filesystem::path& path, const std::vector<EvaluationReport>& reports);
void write_marginal_calibration_csv(const std::filesystem::path& path, const std::vector<EvaluationReport>& reports);
/// Central prediction intervals (95% and 75%) per record, for band plots.
void write_intervals_csv(const std::filesystem::path& path, const std::vector<ForecastArchive>& archives);

} // namespace glnar
