#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glnar {

using Timestamp = std::chrono::sys_seconds;
using Resolution = std::chrono::minutes;

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (a space is accepted in place of 'T'). UTC only.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct PowerRecord {
    Timestamp time;
    double value = 0.0; ///< fraction of nominal power
};

/// Ordered power observations on a regular grid. Missing steps are simply absent;
/// `contiguous` tells whether a run of records has no gap.
class PowerSeries {
public:
    PowerSeries() = default;
    PowerSeries(std::vector<PowerRecord> records, Resolution resolution);

    /// Evenly spaced series starting at `start` with no gaps.
    static PowerSeries regular(Timestamp start, Resolution resolution, const std::vector<double>& values);

    const std::vector<PowerRecord>& records() const noexcept { return records_; }
    Resolution resolution() const noexcept { return resolution_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const PowerRecord& operator[](std::size_t i) const { return records_[i]; }

    std::vector<double> values() const;
    std::vector<Timestamp> times() const;

    /// True when records [first, last] are consecutive grid steps.
    bool contiguous(std::size_t first, std::size_t last) const;
    /// True when record i is exactly one step after record i-1.
    bool follows(std::size_t i) const { return i > 0 && contiguous(i - 1, i); }
    /// Number of gaps (missing runs) between consecutive records.
    std::size_t gap_count() const;

    /// Index of the first record with time >= t (size() if none).
    std::size_t lower_bound(Timestamp t) const;
    /// Records with index in [first, last).
    PowerSeries slice(std::size_t first, std::size_t last) const;

private:
    std::vector<PowerRecord> records_;
    Resolution resolution_{10};
};

struct CoarseningConfig {
    double delta = 0.005;
    void validate() const;
};

/// Period boundaries. Training holds t < train_end, cross-validation
/// train_end <= t < cv_end, test cv_end <= t <= test_end.
struct SplitConfig {
    Timestamp train_end;
    Timestamp cv_end;
    Timestamp test_end;
    void validate() const;
};

struct SplitSeries {
    PowerSeries train;
    PowerSeries cv;
    PowerSeries test;
};

/// Per-turbine nominal powers (same unit as the power columns).
using CapacityTable = std::map<std::string, double>;

struct TurbineSeries {
    std::string id;
    PowerSeries series;
};

/// Two-column CSV: turbine id, nominal power. A header row is optional.
CapacityTable load_capacity_csv(const std::filesystem::path& path);

/// Wide SCADA export: timestamp column then one column per turbine; empty cell = missing.
/// Each column is divided by its nominal power. Scaled values within 1e-6 outside
/// [0,1] are snapped; larger excursions raise DataError.
std::vector<TurbineSeries> load_farm_csv(const std::filesystem::path& path, const CapacityTable& nominal_powers,
                                         Resolution resolution = Resolution{10});

/// Equal-weight mean over the turbines available at each timestamp.
PowerSeries aggregate_turbines(const std::vector<TurbineSeries>& turbines);

/// Clips every value into [delta, 1 - delta].
PowerSeries coarsen(const PowerSeries& series, const CoarseningConfig& config);
double coarsen_value(double x, double delta);

SplitSeries split(const PowerSeries& series, const SplitConfig& config);

/// Two-column "timestamp,value" CSV, the common series exchange format.
void write_series_csv(const std::filesystem::path& path, const PowerSeries& series);
PowerSeries read_series_csv(const std::filesystem::path& path, Resolution resolution = Resolution{10});

} // namespace glnar
