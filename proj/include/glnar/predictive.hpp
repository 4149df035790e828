#pragma once

#include "glnar/gln.hpp"

#include <variant>
#include <vector>

namespace glnar {

/// Degenerate law concentrated at one value.
struct PointMass {
    double at = 0.0;
};

/// Gaussian law N(mean, sigma2) evaluated as-is on [0,1] (no renormalization to the bounds).
/// sigma2 == 0 behaves as a point mass.
struct GaussianPredictive {
    double mean = 0.0;
    double sigma2 = 0.0;
};

/// Weighted ensemble of support points; weights sum to one. Points are kept sorted.
struct EnsemblePredictive {
    std::vector<double> points;
    std::vector<double> weights;

    static EnsemblePredictive equal_weights(std::vector<double> points);
};

/// Quantile table on a probability grid; the CDF interpolates linearly between nodes.
struct QuantileTable {
    std::vector<double> levels; ///< increasing, typically 0, 0.01, ..., 1
    std::vector<double> values; ///< non-decreasing
};

/// CDF known only on a value grid (read back from an archive file), linearly interpolated.
/// Optional stored quantiles at fixed levels are returned verbatim by `quantile`.
struct GridCdf {
    std::vector<double> grid;
    std::vector<double> cdf;
    std::vector<double> quantile_levels;
    std::vector<double> quantile_values;
};

using Predictive = std::variant<PointMass, GlnPredictive, GaussianPredictive, EnsemblePredictive, QuantileTable, GridCdf>;

/// P(X <= y).
double cdf(const Predictive& pred, double y);
/// P(X < y); differs from cdf only at atoms.
double cdf_left(const Predictive& pred, double y);
/// Smallest value whose CDF reaches tau (interpolated for continuous laws).
double quantile(const Predictive& pred, double tau);
/// Locations where the CDF jumps; used to split integration intervals.
std::vector<double> atoms(const Predictive& pred);

const char* predictive_kind(const Predictive& pred);

} // namespace glnar
