#include "glnar/error.hpp"
#include "glnar/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace glnar;
using glnar::test::TempDir;
using glnar::test::ts;

namespace {

double gaussian_crps(double mean, double sd, double obs)
{
    const double z = (obs - mean) / sd;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    return sd * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

ForecastArchive gln_archive(std::size_t n, std::uint64_t seed, double sigma_scale = 1.0, double shift = 0.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> mu(-1.5, 1.5);
    ForecastArchive a{"gln", {}};
    const auto t0 = ts("2014-01-01");
    for (std::size_t i = 0; i < n; ++i) {
        const GlnPredictive truth{mu(rng), 0.2, 1.3};
        const double x = inverse_transform(truth.mu + std::sqrt(truth.sigma2) * z(rng), truth.nu);
        const GlnPredictive issued{truth.mu + shift, truth.sigma2 * sigma_scale * sigma_scale, truth.nu};
        a.records.push_back({t0 + std::chrono::minutes{10 * static_cast<int>(i)}, x, predictive_quantile(issued, 0.5), issued});
    }
    return a;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("RMSE by hand")
{
    const auto t0 = ts("2014-01-01");
    ForecastArchive a{"m", {{t0, 0.5, 0.4, PointMass{0.4}}, {t0, 0.2, 0.5, PointMass{0.5}}, {t0, 0.0, 0.0, PointMass{0.0}}}};
    CHECK(rmse(a) == doctest::Approx(100.0 * std::sqrt((0.01 + 0.09) / 3.0)).epsilon(1e-14));
    CHECK_THROWS_AS((void)rmse(ForecastArchive{"empty", {}}), EvaluationError);
}

TEST_CASE("point-mass CRPS equals the absolute error exactly")
{
    const auto grid = uniform_grid();
    for (double f : {0.0, 0.123, 0.5, 0.9871, 1.0})
        for (double x : {0.0, 0.3337, 0.5, 1.0})
            CHECK(crps_record(PointMass{f}, x, grid) == std::abs(f - x));
    const auto ens = EnsemblePredictive::equal_weights({0.2, 0.6});
    // Two-point ensemble: CRPS = E|X - x| - E|X - X'| / 2.
    CHECK(crps_record(ens, 0.5, grid) == doctest::Approx(0.5 * (0.3 + 0.1) - 0.25 * 0.4).epsilon(1e-14));
}

TEST_CASE("Gaussian CRPS matches the closed form")
{
    const auto grid = uniform_grid();
    CHECK(crps_record(GaussianPredictive{0.5, 1e-4}, 0.5, grid) == doctest::Approx(0.002337).epsilon(1e-3));
    CHECK(gaussian_crps(0.5, 0.01, 0.5) == doctest::Approx(0.01 * (2.0 / std::sqrt(2.0 * std::numbers::pi) - 1.0 / std::sqrt(std::numbers::pi))));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> m(0.3, 0.7), s(0.02, 0.08), o(0.1, 0.9);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double mean = m(rng), sd = s(rng), obs = o(rng);
        worst = std::max(worst, std::abs(crps_record(GaussianPredictive{mean, sd * sd}, obs, grid) - gaussian_crps(mean, sd, obs)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("archive CRPS equals the integrated Brier curve")
{
    const auto a = gln_archive(500, 3);
    const auto grid = uniform_grid();
    const auto bs = brier_curve(a, grid);
    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) integral += 0.5 * (bs[i] + bs[i - 1]) * (grid[i] - grid[i - 1]);
    CHECK(std::abs(crps(a, grid) / 100.0 - integral) < 2e-4);
}

TEST_CASE("non-monotone predictive CDF is reported with its record")
{
    ForecastArchive a{"broken", {{ts("2014-01-01"), 0.5, 0.5, GridCdf{{0.0, 0.5, 1.0}, {0.0, 0.8, 0.6}, {}, {}}}}};
    try {
        (void)crps(a);
        FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("record 0") != std::string::npos);
        CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
}

TEST_CASE("ideal forecaster: reliability within binomial bands, small calibration gap")
{
    const auto a = gln_archive(20000, 4);
    const double n = 20000.0;
    for (const auto& row : reliability(a)) {
        const double band = 2.5758 * std::sqrt(row.nominal * (1 - row.nominal) / n);
        CHECK(std::abs(row.empirical - row.nominal) <= band);
    }
    double sup = 0.0;
    for (const auto& row : marginal_calibration(a, uniform_grid(101))) sup = std::max(sup, std::abs(row.difference));
    CHECK(sup < 0.01);
}

TEST_CASE("over-dispersed forecaster concentrates the PIT around one half")
{
    // Quantiles spread too wide: fewer observations below low quantiles, more below high ones.
    const auto a = gln_archive(5000, 6, 2.0);
    for (const auto& row : reliability(a, {0.1, 0.25, 0.75, 0.9})) {
        if (row.nominal < 0.5) CHECK(row.empirical < row.nominal);
        else CHECK(row.empirical > row.nominal);
    }
}

TEST_CASE("biased forecaster gives a signed calibration bump")
{
    // Issued laws shifted upward: predictive CDF sits below the empirical CDF.
    const auto up = gln_archive(5000, 8, 1.0, 0.5);
    double low = 0.0;
    for (const auto& row : marginal_calibration(up, uniform_grid(101))) low = std::min(low, row.difference);
    CHECK(low < -0.05);
    const auto down = gln_archive(5000, 8, 1.0, -0.5);
    double high = 0.0;
    for (const auto& row : marginal_calibration(down, uniform_grid(101))) high = std::max(high, row.difference);
    CHECK(high > 0.05);
}

TEST_CASE("improvement arithmetic and tables")
{
    CHECK(improvement_percent(3.27, 2.70) == doctest::Approx(17.43).epsilon(1e-3));
    CHECK(improvement_percent(1.36, 1.06) == doctest::Approx(22.06).epsilon(1e-3));
    CHECK_THROWS_AS((void)improvement_percent(0.0, 1.0), EvaluationError);

    std::vector<EvaluationReport> reports(2);
    reports[0].model_id = "persistence";
    reports[0].rmse = 3.27;
    reports[1].model_id = "recursive_glnar";
    reports[1].rmse = 2.70;
    const auto table = improvement_table(reports, {{"rmse", {"persistence"}}});
    REQUIRE(table.size() == 1);
    CHECK(table[0].model_id == "recursive_glnar");
    CHECK(reports[1].improvements.at("rmse_vs_persistence") == doctest::Approx(17.43).epsilon(1e-3));
    CHECK_THROWS_AS((void)improvement_table(reports, {{"crps", {"climatology"}}}), EvaluationError);
}

TEST_CASE("archive files round trip through the CDF grid")
{
    TempDir dir("archive");
    ForecastArchive a = gln_archive(30, 9);
    a.model_id = "batch_glnar";
    a.records.push_back({ts("2015-01-01"), 1.0, 1.0, PointMass{1.0}});
    write_archive(dir.path(), a);
    const auto back = read_archive(dir / "batch_glnar.csv");
    CHECK(back.model_id == "batch_glnar");
    REQUIRE(back.records.size() == a.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(back.records[i].time == a.records[i].time);
        CHECK(back.records[i].observation == a.records[i].observation);
        CHECK(back.records[i].point == a.records[i].point);
        CHECK(quantile(back.records[i].predictive, 0.975) ==
              doctest::Approx(quantile(a.records[i].predictive, 0.975)).epsilon(1e-9));
    }
    CHECK(crps(back) == doctest::Approx(crps(a)).epsilon(1e-3));
    CHECK_THROWS_AS((void)read_archive(dir / "missing.csv"), ConfigError);
}

}
