#include "glnar/metrics.hpp"

#include "glnar/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace glnar {

namespace {

constexpr double kMonotoneTolerance = 1e-12;

std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void require_records(const ForecastArchive& archive, const char* what)
{
    if (archive.records.empty())
        throw EvaluationError(std::string(what) + ": archive '" + archive.model_id + "' has no records");
}

/// Trapezoidal CRPS over sorted, de-duplicated nodes. Runs of intervals with a
/// constant integrand are integrated as one span, so step CDFs integrate exactly.
double crps_on_nodes(const Predictive& pred, double obs, const std::vector<double>& nodes, bool& monotone)
{
    monotone = true;
    double total = 0.0;
    double run_start = nodes.front(), run_end = nodes.front(), run_value = 0.0;
    bool in_run = false;
    auto flush = [&] {
        if (in_run) total += run_value * (run_end - run_start);
        in_run = false;
    };
    double prev_right = cdf(pred, nodes.front());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = nodes[i];
        const double b = nodes[i + 1];
        const double fa = prev_right;
        const double fb = cdf_left(pred, b);
        const double fb_right = cdf(pred, b);
        if (fb < fa - kMonotoneTolerance || fb_right < fb - kMonotoneTolerance) monotone = false;
        const double ind = 0.5 * (a + b) >= obs ? 1.0 : 0.0;
        const double ga = (fa - ind) * (fa - ind);
        const double gb = (fb - ind) * (fb - ind);
        if (ga == gb) {
            if (in_run && run_value == ga && run_end == a) {
                run_end = b;
            } else {
                flush();
                in_run = true;
                run_start = a;
                run_end = b;
                run_value = ga;
            }
        } else {
            flush();
            total += 0.5 * (ga + gb) * (b - a);
        }
        prev_right = fb_right;
    }
    flush();
    return total;
}

std::vector<double> integration_nodes(const Predictive& pred, double obs, const std::vector<double>& grid)
{
    std::vector<double> nodes = grid;
    nodes.push_back(std::clamp(obs, 0.0, 1.0));
    for (double a : atoms(pred))
        if (a > 0.0 && a < 1.0) nodes.push_back(a);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

} // namespace

std::vector<double> uniform_grid(std::size_t points)
{
    if (points < 2) throw ConfigError("a grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

std::vector<double> default_reliability_levels()
{
    std::vector<double> levels{0.025};
    for (int i = 1; i <= 19; ++i) levels.push_back(0.05 * i);
    levels.push_back(0.975);
    for (auto& l : levels) l = std::round(l * 1e6) / 1e6;
    return levels;
}

double rmse(const ForecastArchive& archive)
{
    require_records(archive, "rmse");
    double sse = 0.0;
    for (const auto& r : archive.records) sse += (r.point - r.observation) * (r.point - r.observation);
    return 100.0 * std::sqrt(sse / static_cast<double>(archive.records.size()));
}

std::vector<double> brier_curve(const ForecastArchive& archive, const std::vector<double>& thresholds)
{
    require_records(archive, "brier_curve");
    std::vector<double> out(thresholds.size(), 0.0);
    for (const auto& r : archive.records) {
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            const double d = cdf(r.predictive, thresholds[j]) - (r.observation <= thresholds[j] ? 1.0 : 0.0);
            out[j] += d * d;
        }
    }
    for (auto& v : out) v /= static_cast<double>(archive.records.size());
    return out;
}

double crps_record(const Predictive& pred, double observation, const std::vector<double>& grid)
{
    bool monotone = true;
    return crps_on_nodes(pred, observation, integration_nodes(pred, observation, grid), monotone);
}

double crps(const ForecastArchive& archive, const std::vector<double>& grid)
{
    require_records(archive, "crps");
    double total = 0.0;
    for (std::size_t i = 0; i < archive.records.size(); ++i) {
        const auto& r = archive.records[i];
        bool monotone = true;
        total += crps_on_nodes(r.predictive, r.observation, integration_nodes(r.predictive, r.observation, grid), monotone);
        if (!monotone)
            throw EvaluationError("archive '" + archive.model_id + "': predictive CDF of record " + std::to_string(i) +
                                  " (" + format_timestamp(r.time) + ") is not monotone");
    }
    return 100.0 * total / static_cast<double>(archive.records.size());
}

std::vector<ReliabilityRow> reliability(const ForecastArchive& archive, const std::vector<double>& levels)
{
    require_records(archive, "reliability");
    std::vector<ReliabilityRow> rows;
    rows.reserve(levels.size());
    for (double tau : levels) {
        std::size_t hits = 0;
        for (const auto& r : archive.records)
            if (r.observation <= quantile(r.predictive, tau)) ++hits;
        rows.push_back({tau, static_cast<double>(hits) / static_cast<double>(archive.records.size())});
    }
    return rows;
}

std::vector<CalibrationRow> marginal_calibration(const ForecastArchive& archive, const std::vector<double>& grid)
{
    std::vector<CalibrationRow> rows;
    if (grid.empty()) return rows;
    require_records(archive, "marginal_calibration");
    const double n = static_cast<double>(archive.records.size());
    rows.reserve(grid.size());
    for (double y : grid) {
        double mean_cdf = 0.0, empirical = 0.0;
        for (const auto& r : archive.records) {
            mean_cdf += cdf(r.predictive, y);
            if (r.observation <= y) empirical += 1.0;
        }
        rows.push_back({y, (mean_cdf - empirical) / n});
    }
    return rows;
}

nlohmann::json EvaluationReport::to_json() const
{
    nlohmann::json j;
    j["model"] = model_id;
    j["count"] = count;
    j["rmse_percent"] = rmse;
    j["crps_percent"] = crps;
    j["brier"] = {{"thresholds", thresholds}, {"values", brier}};
    auto& rel = j["reliability"] = nlohmann::json::array();
    for (const auto& r : reliability) rel.push_back({{"nominal", r.nominal}, {"empirical", r.empirical}});
    auto& cal = j["marginal_calibration"] = nlohmann::json::array();
    for (const auto& r : marginal_calibration) cal.push_back({{"value", r.value}, {"difference", r.difference}});
    j["improvements_percent"] = improvements;
    return j;
}

EvaluationReport evaluate(const ForecastArchive& archive, const EvaluationOptions& options)
{
    EvaluationReport rep;
    rep.model_id = archive.model_id;
    rep.count = archive.records.size();
    rep.rmse = rmse(archive);
    rep.crps = crps(archive, options.integration_grid);
    rep.thresholds = options.brier_thresholds;
    rep.brier = brier_curve(archive, options.brier_thresholds);
    rep.reliability = reliability(archive, options.reliability_levels);
    rep.marginal_calibration = marginal_calibration(archive, options.calibration_grid);
    return rep;
}

double improvement_percent(double baseline, double model)
{
    if (baseline == 0.0) throw EvaluationError("improvement over a baseline with zero score is undefined");
    return 100.0 * (baseline - model) / baseline;
}

std::vector<Improvement> improvement_table(std::vector<EvaluationReport>& reports,
                                           const std::map<std::string, std::vector<std::string>>& baselines)
{
    auto find = [&](const std::string& id) -> const EvaluationReport& {
        for (const auto& r : reports)
            if (r.model_id == id) return r;
        throw EvaluationError("baseline model '" + id + "' has no evaluation report");
    };
    std::vector<Improvement> table;
    for (const auto& [metric, ids] : baselines) {
        if (metric != "rmse" && metric != "crps") throw EvaluationError("unknown metric '" + metric + "'");
        for (const auto& id : ids) {
            const EvaluationReport& base = find(id);
            const double b = metric == "rmse" ? base.rmse : base.crps;
            for (auto& r : reports) {
                if (r.model_id == id) continue;
                const double m = metric == "rmse" ? r.rmse : r.crps;
                const double pct = improvement_percent(b, m);
                r.improvements[metric + "_vs_" + id] = pct;
                table.push_back({r.model_id, metric, id, pct});
            }
        }
    }
    return table;
}

// ---------------------------------------------------------------------------

void write_archive(const std::filesystem::path& dir, const ForecastArchive& archive, const ArchiveFileOptions& options)
{
    std::filesystem::create_directories(dir);
    const auto main_path = dir / (archive.model_id + ".csv");
    const auto cdf_path = dir / (archive.model_id + ".cdf.csv");
    std::ofstream main(main_path), grid(cdf_path);
    if (!main || !grid) throw ConfigError("cannot write archive files in " + dir.string());

    main << "# model: " << archive.model_id << "\n";
    main << "timestamp,observation,point";
    for (double l : options.quantile_levels) main << ",q_" << detail::format_double(l);
    main << '\n';
    grid << "timestamp";
    for (double y : options.cdf_grid) grid << ",F_" << detail::format_double(y);
    grid << '\n';

    for (const auto& r : archive.records) {
        const std::string ts = format_timestamp(r.time);
        main << ts << ',' << detail::format_double(r.observation) << ',' << detail::format_double(r.point);
        for (double l : options.quantile_levels) main << ',' << detail::format_double(quantile(r.predictive, l));
        main << '\n';
        grid << ts;
        for (double y : options.cdf_grid) grid << ',' << fmt9(cdf(r.predictive, y));
        grid << '\n';
    }
}

namespace {

std::vector<double> parse_header_numbers(const std::vector<std::string_view>& cells, std::size_t first,
                                         std::string_view prefix, const std::string& source)
{
    std::vector<double> out;
    for (std::size_t i = first; i < cells.size(); ++i) {
        auto cell = cells[i];
        if (cell.substr(0, prefix.size()) != prefix) throw ParseError(source, 1, "unexpected column '" + std::string(cell) + "'");
        auto v = detail::parse_double(cell.substr(prefix.size()));
        if (!v) throw ParseError(source, 1, "bad column '" + std::string(cell) + "'");
        out.push_back(*v);
    }
    return out;
}

} // namespace

ForecastArchive read_archive(const std::filesystem::path& main_csv)
{
    if (!std::filesystem::exists(main_csv)) throw ConfigError("archive file not found: " + main_csv.string());
    auto cdf_csv = main_csv;
    cdf_csv.replace_extension(".cdf.csv");
    if (!std::filesystem::exists(cdf_csv)) throw ConfigError("archive CDF file not found: " + cdf_csv.string());

    ForecastArchive archive;
    archive.model_id = main_csv.stem().string();

    std::ifstream main(main_csv);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> levels;
    bool header = false;
    while (std::getline(main, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            constexpr std::string_view tag = "# model:";
            if (view.substr(0, tag.size()) == tag) archive.model_id = std::string(detail::trim(view.substr(tag.size())));
            continue;
        }
        auto cells = detail::split_csv(view);
        if (!header) {
            if (cells.size() < 3 || cells[0] != "timestamp" || cells[1] != "observation" || cells[2] != "point")
                throw ParseError(main_csv.string(), lineno, "expected header 'timestamp,observation,point,...'");
            levels = parse_header_numbers(cells, 3, "q_", main_csv.string());
            header = true;
            continue;
        }
        if (cells.size() != levels.size() + 3) throw ParseError(main_csv.string(), lineno, "wrong number of cells");
        auto t = parse_timestamp(cells[0]);
        auto obs = detail::parse_double(cells[1]);
        auto pt = detail::parse_double(cells[2]);
        if (!t || !obs || !pt) throw ParseError(main_csv.string(), lineno, "malformed record");
        GridCdf g;
        g.quantile_levels = levels;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            auto q = detail::parse_double(cells[i + 3]);
            if (!q) throw ParseError(main_csv.string(), lineno, "malformed quantile");
            g.quantile_values.push_back(*q);
        }
        archive.records.push_back({*t, *obs, *pt, std::move(g)});
    }

    std::ifstream grid_in(cdf_csv);
    lineno = 0;
    header = false;
    std::vector<double> grid;
    std::size_t row = 0;
    while (std::getline(grid_in, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto cells = detail::split_csv(view);
        if (!header) {
            if (cells.empty() || cells[0] != "timestamp") throw ParseError(cdf_csv.string(), lineno, "expected header");
            grid = parse_header_numbers(cells, 1, "F_", cdf_csv.string());
            header = true;
            continue;
        }
        if (row >= archive.records.size()) throw ParseError(cdf_csv.string(), lineno, "more CDF rows than records");
        auto t = parse_timestamp(cells[0]);
        if (!t || *t != archive.records[row].time)
            throw ParseError(cdf_csv.string(), lineno, "timestamp does not match the archive record");
        if (cells.size() != grid.size() + 1) throw ParseError(cdf_csv.string(), lineno, "wrong number of cells");
        auto& g = std::get<GridCdf>(archive.records[row].predictive);
        g.grid = grid;
        g.cdf.reserve(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto v = detail::parse_double(cells[i + 1]);
            if (!v) throw ParseError(cdf_csv.string(), lineno, "malformed CDF value");
            g.cdf.push_back(*v);
        }
        ++row;
    }
    if (row != archive.records.size()) throw DataError("CDF file " + cdf_csv.string() + " has fewer rows than the archive");
    return archive;
}

void write_brier_csv(const std::filesystem::path& path, const std::vector<EvaluationReport>& reports)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "model,threshold,brier\n";
    for (const auto& r : reports)
        for (std::size_t i = 0; i < r.thresholds.size(); ++i)
            out << r.model_id << ',' << detail::format_double(r.thresholds[i]) << ',' << detail::format_double(r.brier[i]) << '\n';
}

void write_reliability_csv(const std::filesystem::path& path, const std::vector<EvaluationReport>& reports)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "model,nominal,empirical\n";
    for (const auto& r : reports)
        for (const auto& row : r.reliability)
            out << r.model_id << ',' << detail::format_double(row.nominal) << ',' << detail::format_double(row.empirical) << '\n';
}

void write_marginal_calibration_csv(const std::filesystem::path& path, const std::vector<EvaluationReport>& reports)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "model,value,difference\n";
    for (const auto& r : reports)
        for (const auto& row : r.marginal_calibration)
            out << r.model_id << ',' << detail::format_double(row.value) << ',' << detail::format_double(row.difference) << '\n';
}

void write_intervals_csv(const std::filesystem::path& path, const std::vector<ForecastArchive>& archives)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "model,timestamp,observation,point,lower_95,upper_95,lower_75,upper_75\n";
    for (const auto& archive : archives) {
        for (const auto& r : archive.records) {
            out << archive.model_id << ',' << format_timestamp(r.time) << ',' << detail::format_double(r.observation)
                << ',' << detail::format_double(r.point);
            for (double tau : {0.025, 0.975, 0.125, 0.875})
                out << ',' << detail::format_double(quantile(r.predictive, tau));
            out << '\n';
        }
    }
}

} // namespace glnar
