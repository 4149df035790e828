#include "glnar/error.hpp"
#include "glnar/series.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace glnar;
using glnar::test::TempDir;
using glnar::test::ts;
using glnar::test::write_text;

TEST_SUITE("timeseries_data") {

TEST_CASE("timestamps parse in the accepted layouts and format as UTC")
{
    CHECK(format_timestamp(ts("2013-07-01T00:10:00Z")) == "2013-07-01T00:10:00Z");
    CHECK(ts("2013-07-01 00:10") == ts("2013-07-01T00:10:00Z"));
    CHECK(ts("2013-07-01") == ts("2013-07-01T00:00:00"));
    CHECK_FALSE(parse_timestamp("2013-13-01T00:00").has_value());
    CHECK_FALSE(parse_timestamp("yesterday").has_value());
}

TEST_CASE("series rejects non-increasing timestamps and reports gaps")
{
    const auto t0 = ts("2013-07-01T00:00");
    const std::chrono::minutes step{10};
    CHECK_THROWS_AS(PowerSeries({{t0, 0.1}, {t0, 0.2}}, step), DataError);
    CHECK_THROWS_AS(PowerSeries({{t0 + step, 0.1}, {t0, 0.2}}, step), DataError);

    PowerSeries s({{t0, 0.1}, {t0 + step, 0.2}, {t0 + 3 * step, 0.3}, {t0 + 4 * step, 0.4}}, step);
    CHECK(s.gap_count() == 1);
    CHECK(s.follows(1));
    CHECK_FALSE(s.follows(2));
    CHECK(s.contiguous(2, 3));
    CHECK_FALSE(s.contiguous(0, 3));
    CHECK(s.lower_bound(t0 + 2 * step) == 2);
}

TEST_CASE("farm CSV is scaled by nominal power with gaps preserved")
{
    TempDir dir("farm");
    write_text(dir / "cap.csv", "turbine,nominal_kw\nT1,3600\nT2,3600\nT3,2000\n");
    write_text(dir / "farm.csv",
               "timestamp,T1,T2,T3\n"
               "2013-07-01T00:00:00Z,1200,3600,0\n"
               "2013-07-01T00:10:00Z,,1800,1000\n"
               "2013-07-01T00:20:00Z,3600.0000001,0,500\n");
    const auto caps = load_capacity_csv(dir / "cap.csv");
    REQUIRE(caps.size() == 3);
    const auto turbines = load_farm_csv(dir / "farm.csv", caps);
    REQUIRE(turbines.size() == 3);
    CHECK(turbines[0].id == "T1");
    CHECK(turbines[0].series[0].value == doctest::Approx(1200.0 / 3600.0).epsilon(1e-15));
    CHECK(turbines[1].series[0].value == 1.0);
    // Missing cell: T1 has no record at 00:10, so its series has a gap.
    CHECK(turbines[0].series.size() == 2);
    CHECK(turbines[0].series.gap_count() == 1);
    // A 3e-11 relative excursion above nominal is snapped to 1.
    CHECK(turbines[0].series[1].value == 1.0);
}

TEST_CASE("farm CSV errors: parse error with line, unknown turbine, out of range power")
{
    TempDir dir("farm-bad");
    CapacityTable caps{{"T1", 3600.0}, {"T2", 3600.0}};
    write_text(dir / "bad.csv", "timestamp,T1,T2\n2013-07-01T00:00Z,1,2\n2013-07-01T00:10Z,abc,2\n");
    try {
        (void)load_farm_csv(dir / "bad.csv", caps);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    write_text(dir / "unknown.csv", "timestamp,T1,T9\n2013-07-01T00:00Z,1,2\n");
    CHECK_THROWS_AS((void)load_farm_csv(dir / "unknown.csv", caps), ConfigError);
    write_text(dir / "neg.csv", "timestamp,T1,T2\n2013-07-01T00:00Z,-50,2\n");
    CHECK_THROWS_AS((void)load_farm_csv(dir / "neg.csv", caps), DataError);
    write_text(dir / "over.csv", "timestamp,T1,T2\n2013-07-01T00:00Z,3700,2\n");
    CHECK_THROWS_AS((void)load_farm_csv(dir / "over.csv", caps), DataError);
    CHECK_THROWS_AS((void)load_farm_csv(dir / "missing.csv", caps), ConfigError);
}

TEST_CASE("aggregation averages available turbines")
{
    const auto t0 = ts("2013-07-01T00:00");
    const std::chrono::minutes step{10};
    std::vector<TurbineSeries> farm{
        {"a", PowerSeries({{t0, 0.2}, {t0 + step, 0.2}}, step)},
        {"b", PowerSeries({{t0, 0.4}}, step)},
        {"c", PowerSeries({{t0, 0.6}, {t0 + step, 0.6}}, step)},
    };
    const PowerSeries agg = aggregate_turbines(farm);
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].value == doctest::Approx(0.4));
    CHECK(agg[1].value == doctest::Approx(0.4)); // b missing: mean of 0.2 and 0.6

    // A timestamp with no turbine available disappears from the output.
    std::vector<TurbineSeries> gappy{
        {"a", PowerSeries({{t0, 0.2}, {t0 + 2 * step, 0.3}}, step)},
        {"b", PowerSeries({{t0, 0.4}, {t0 + 2 * step, 0.5}}, step)},
    };
    const PowerSeries g = aggregate_turbines(gappy);
    REQUIRE(g.size() == 2);
    CHECK(g[1].time == t0 + 2 * step);
    CHECK(g.gap_count() == 1);

    CHECK_THROWS_AS((void)aggregate_turbines({}), ConfigError);
}

TEST_CASE("aggregate stays within the min and max of available turbines")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto t0 = ts("2013-07-01T00:00");
    const std::chrono::minutes step{10};
    std::vector<std::vector<PowerRecord>> cols(5);
    for (int i = 0; i < 200; ++i)
        for (auto& c : cols)
            if (unif(rng) < 0.8) c.push_back({t0 + i * step, unif(rng)});
    std::vector<TurbineSeries> farm;
    for (std::size_t k = 0; k < cols.size(); ++k) farm.push_back({std::to_string(k), PowerSeries(cols[k], step)});
    const PowerSeries agg = aggregate_turbines(farm);
    for (const auto& r : agg.records()) {
        double lo = 1.0, hi = 0.0;
        int n = 0;
        for (const auto& c : cols)
            for (const auto& rec : c)
                if (rec.time == r.time) {
                    lo = std::min(lo, rec.value);
                    hi = std::max(hi, rec.value);
                    ++n;
                }
        REQUIRE(n > 0);
        CHECK(r.value >= lo - 1e-15);
        CHECK(r.value <= hi + 1e-15);
    }
}

TEST_CASE("coarsening clips into [delta, 1 - delta] and is idempotent")
{
    CHECK(coarsen_value(0.002, 0.005) == 0.005);
    CHECK(coarsen_value(0.5, 0.005) == 0.5);
    CHECK(coarsen_value(0.999, 0.005) == doctest::Approx(0.995).epsilon(1e-15));
    CHECK(coarsen_value(0.0, 0.005) == 0.005);
    CHECK(coarsen_value(1.0, 0.005) == doctest::Approx(0.995).epsilon(1e-15));

    CHECK_THROWS_AS(CoarseningConfig{0.0}.validate(), ConfigError);
    CHECK_THROWS_AS(CoarseningConfig{0.5}.validate(), ConfigError);

    std::vector<double> v{0.0, 0.001, 0.3, 0.9999, 1.0};
    const auto s = PowerSeries::regular(ts("2013-07-01"), std::chrono::minutes{10}, v);
    const auto once = coarsen(s, {0.004});
    const auto twice = coarsen(once, {0.004});
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(once[i].value > 0.0);
        CHECK(once[i].value < 1.0);
        CHECK(twice[i].value == once[i].value);
    }
}

TEST_CASE("split partitions a series exhaustively and in order")
{
    std::vector<double> v(1000, 0.5);
    const auto t0 = ts("2013-07-01T00:00");
    const std::chrono::minutes step{10};
    const auto s = PowerSeries::regular(t0, step, v);
    SplitConfig cfg{t0 + 600 * step, t0 + 800 * step, t0 + 999 * step};
    const auto parts = split(s, cfg);
    CHECK(parts.train.size() == 600);
    CHECK(parts.cv.size() == 200);
    CHECK(parts.test.size() == 200);
    CHECK(parts.train.size() + parts.cv.size() + parts.test.size() == s.size());
    CHECK(parts.train[599].time < parts.cv[0].time);
    CHECK(parts.cv[199].time < parts.test[0].time);
    CHECK(parts.test[199].time == s[999].time);

    SplitConfig at_start{t0, t0 + 800 * step, t0 + 999 * step};
    CHECK_THROWS_AS((void)split(s, at_start), ConfigError);
    SplitConfig unordered{t0 + 800 * step, t0 + 600 * step, t0 + 999 * step};
    CHECK_THROWS_AS((void)split(s, unordered), ConfigError);
}

TEST_CASE("series CSV round trip")
{
    TempDir dir("series");
    const auto s = PowerSeries::regular(ts("2013-07-01"), std::chrono::minutes{10}, {0.1, 0.25, 1.0 / 3.0, 0.0, 1.0});
    write_series_csv(dir / "s.csv", s);
    const auto back = read_series_csv(dir / "s.csv");
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back[i].time == s[i].time);
        CHECK(back[i].value == s[i].value);
    }
    write_text(dir / "bad.csv", "timestamp,value\n2013-07-01T00:00Z,1.5\n");
    CHECK_THROWS_AS((void)read_series_csv(dir / "bad.csv"), DataError);
}

}
