#include "glnar/series.hpp"

#include "glnar/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace glnar {

namespace {

constexpr double kSnapTolerance = 1e-6;

} // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text)
{
    text = detail::trim(text);
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
    std::string buf(text);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int consumed = 0;
    int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
    if (n != 6 || (sep != 'T' && sep != ' ')) {
        consumed = 0;
        n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed);
        if (n != 3 || static_cast<std::size_t>(consumed) != buf.size()) return std::nullopt;
        h = mi = 0;
    } else if (static_cast<std::size_t>(consumed) != buf.size()) {
        int extra = 0;
        if (std::sscanf(buf.c_str() + consumed, ":%2d%n", &s, &extra) != 1 ||
            static_cast<std::size_t>(consumed + extra) != buf.size())
            return std::nullopt;
    }
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp t)
{
    using namespace std::chrono;
    auto day_point = floor<days>(t);
    year_month_day ymd{day_point};
    hh_mm_ss hms{t - day_point};
    char out[64];
    std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return out;
}

// ---------------------------------------------------------------------------

PowerSeries::PowerSeries(std::vector<PowerRecord> records, Resolution resolution)
    : records_(std::move(records)), resolution_(resolution)
{
    if (resolution_.count() <= 0) throw ConfigError("series resolution must be positive");
    for (std::size_t i = 1; i < records_.size(); ++i) {
        if (records_[i].time <= records_[i - 1].time)
            throw DataError("timestamps not strictly increasing at " + format_timestamp(records_[i].time));
    }
}

PowerSeries PowerSeries::regular(Timestamp start, Resolution resolution, const std::vector<double>& values)
{
    std::vector<PowerRecord> recs;
    recs.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        recs.push_back({start + resolution * static_cast<long>(i), values[i]});
    return PowerSeries(std::move(recs), resolution);
}

std::vector<double> PowerSeries::values() const
{
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.value);
    return out;
}

std::vector<Timestamp> PowerSeries::times() const
{
    std::vector<Timestamp> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.time);
    return out;
}

bool PowerSeries::contiguous(std::size_t first, std::size_t last) const
{
    if (last < first || last >= records_.size()) return false;
    return records_[last].time - records_[first].time == resolution_ * static_cast<long>(last - first);
}

std::size_t PowerSeries::gap_count() const
{
    std::size_t gaps = 0;
    for (std::size_t i = 1; i < records_.size(); ++i)
        if (!follows(i)) ++gaps;
    return gaps;
}

std::size_t PowerSeries::lower_bound(Timestamp t) const
{
    auto it = std::lower_bound(records_.begin(), records_.end(), t,
                               [](const PowerRecord& r, Timestamp v) { return r.time < v; });
    return static_cast<std::size_t>(it - records_.begin());
}

PowerSeries PowerSeries::slice(std::size_t first, std::size_t last) const
{
    last = std::min(last, records_.size());
    first = std::min(first, last);
    return PowerSeries(std::vector<PowerRecord>(records_.begin() + static_cast<long>(first),
                                                records_.begin() + static_cast<long>(last)),
                       resolution_);
}

// ---------------------------------------------------------------------------

void CoarseningConfig::validate() const
{
    if (!(delta > 0.0 && delta < 0.5))
        throw ConfigError("coarsening delta must lie in (0, 0.5), got " + std::to_string(delta));
}

void SplitConfig::validate() const
{
    if (!(train_end < cv_end && cv_end < test_end))
        throw ConfigError("split boundaries must satisfy train_end < cv_end < test_end");
}

double coarsen_value(double x, double delta) { return std::clamp(x, delta, 1.0 - delta); }

PowerSeries coarsen(const PowerSeries& series, const CoarseningConfig& config)
{
    config.validate();
    std::vector<PowerRecord> recs = series.records();
    for (auto& r : recs) r.value = coarsen_value(r.value, config.delta);
    return PowerSeries(std::move(recs), series.resolution());
}

SplitSeries split(const PowerSeries& series, const SplitConfig& config)
{
    config.validate();
    const std::size_t a = series.lower_bound(config.train_end);
    const std::size_t b = series.lower_bound(config.cv_end);
    std::size_t c = series.lower_bound(config.test_end);
    if (c < series.size() && series[c].time == config.test_end) ++c;
    SplitSeries out{series.slice(0, a), series.slice(a, b), series.slice(b, c)};
    if (out.train.empty()) throw ConfigError("split leaves the training period empty");
    if (out.cv.empty()) throw ConfigError("split leaves the cross-validation period empty");
    if (out.test.empty()) throw ConfigError("split leaves the test period empty");
    return out;
}

// ---------------------------------------------------------------------------

CapacityTable load_capacity_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open capacity file " + path.string());
    CapacityTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto cells = detail::split_csv(view);
        if (cells.size() != 2) throw ParseError(path.string(), lineno, "expected 'turbine,nominal_power'");
        auto value = detail::parse_double(cells[1]);
        if (!value) {
            if (table.empty() && lineno == 1) continue; // header
            throw ParseError(path.string(), lineno, "non-numeric nominal power '" + std::string(cells[1]) + "'");
        }
        if (!(*value > 0.0)) throw ConfigError("nominal power of turbine " + std::string(cells[0]) + " must be > 0");
        table[std::string(detail::trim(cells[0]))] = *value;
    }
    return table;
}

std::vector<TurbineSeries> load_farm_csv(const std::filesystem::path& path, const CapacityTable& nominal_powers,
                                         Resolution resolution)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open farm file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> ids;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto cells = detail::split_csv(view);
        if (cells.size() < 2) throw ParseError(path.string(), lineno, "header needs a timestamp and turbine columns");
        for (std::size_t i = 1; i < cells.size(); ++i) ids.emplace_back(detail::trim(cells[i]));
        break;
    }
    if (ids.empty()) throw ParseError(path.string(), lineno, "missing header row");

    std::vector<double> capacity;
    for (const auto& id : ids) {
        auto it = nominal_powers.find(id);
        if (it == nominal_powers.end()) throw ConfigError("unknown turbine id '" + id + "' (no nominal power entry)");
        if (!(it->second > 0.0)) throw ConfigError("nominal power of turbine " + id + " must be > 0");
        capacity.push_back(it->second);
    }

    std::vector<std::vector<PowerRecord>> columns(ids.size());
    while (std::getline(in, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto cells = detail::split_csv(view);
        if (cells.size() != ids.size() + 1)
            throw ParseError(path.string(), lineno,
                             "expected " + std::to_string(ids.size() + 1) + " cells, found " + std::to_string(cells.size()));
        auto t = parse_timestamp(cells[0]);
        if (!t) throw ParseError(path.string(), lineno, "bad timestamp '" + std::string(cells[0]) + "'");
        for (std::size_t j = 0; j < ids.size(); ++j) {
            auto cell = detail::trim(cells[j + 1]);
            if (cell.empty()) continue;
            auto raw = detail::parse_double(cell);
            if (!raw || !std::isfinite(*raw))
                throw ParseError(path.string(), lineno, "non-numeric power '" + std::string(cell) + "' for " + ids[j]);
            double scaled = *raw / capacity[j];
            if (scaled < -kSnapTolerance || scaled > 1.0 + kSnapTolerance)
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": power of " + ids[j] +
                                " outside [0, nominal] (scaled " + std::to_string(scaled) + ")");
            columns[j].push_back({*t, std::clamp(scaled, 0.0, 1.0)});
        }
    }

    std::vector<TurbineSeries> out;
    out.reserve(ids.size());
    for (std::size_t j = 0; j < ids.size(); ++j) out.push_back({ids[j], PowerSeries(std::move(columns[j]), resolution)});
    return out;
}

PowerSeries aggregate_turbines(const std::vector<TurbineSeries>& turbines)
{
    if (turbines.empty()) throw ConfigError("no turbine series to aggregate");
    const Resolution res = turbines.front().series.resolution();
    std::map<Timestamp, std::pair<double, std::size_t>> acc;
    for (const auto& t : turbines) {
        if (t.series.resolution() != res) throw ConfigError("turbine series do not share a resolution");
        for (const auto& r : t.series.records()) {
            auto& slot = acc[r.time];
            slot.first += r.value;
            ++slot.second;
        }
    }
    std::vector<PowerRecord> recs;
    recs.reserve(acc.size());
    for (const auto& [time, sum] : acc) recs.push_back({time, sum.first / static_cast<double>(sum.second)});
    return PowerSeries(std::move(recs), res);
}

void write_series_csv(const std::filesystem::path& path, const PowerSeries& series)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "timestamp,value\n";
    for (const auto& r : series.records()) out << format_timestamp(r.time) << ',' << detail::format_double(r.value) << '\n';
}

PowerSeries read_series_csv(const std::filesystem::path& path, Resolution resolution)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open series file " + path.string());
    std::vector<PowerRecord> recs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto cells = detail::split_csv(view);
        if (cells.size() < 2) throw ParseError(path.string(), lineno, "expected 'timestamp,value'");
        auto t = parse_timestamp(cells[0]);
        if (!t) {
            if (recs.empty() && lineno == 1) continue; // header
            throw ParseError(path.string(), lineno, "bad timestamp '" + std::string(cells[0]) + "'");
        }
        auto cell = detail::trim(cells[1]);
        if (cell.empty()) continue;
        auto v = detail::parse_double(cell);
        if (!v || !std::isfinite(*v)) throw ParseError(path.string(), lineno, "non-numeric value '" + std::string(cell) + "'");
        if (*v < -kSnapTolerance || *v > 1.0 + kSnapTolerance)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": value outside [0,1]");
        recs.push_back({*t, std::clamp(*v, 0.0, 1.0)});
    }
    return PowerSeries(std::move(recs), resolution);
}

} // namespace glnar
