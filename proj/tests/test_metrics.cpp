#include "psps/metrics.hpp"
#include "psps/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace psps;

namespace {

HighRiskThreshold at(double t) {
    HighRiskThreshold thr;
    thr.mean_r = t;
    thr.threshold = t;
    return thr;
}

std::array<double, 6> metrics_of(std::vector<double> v, double threshold = 80.0) {
    return aggregate_all(v, v.size(), at(threshold));
}

} // namespace

TEST(HighRiskThreshold, HandArithmetic) {
    auto t = compute_high_risk_threshold(std::vector<double>{0, 0, 10, 10});
    EXPECT_DOUBLE_EQ(t.mean_r, 5.0);
    EXPECT_DOUBLE_EQ(t.std_r, 5.0);
    EXPECT_DOUBLE_EQ(t.threshold, 10.0);
    EXPECT_EQ(t.samples, 4u);

    auto single = compute_high_risk_threshold(std::vector<double>{42});
    EXPECT_EQ(single.mean_r, 42.0);
    EXPECT_EQ(single.std_r, 0.0);
    EXPECT_EQ(single.threshold, 42.0);

    EXPECT_THROW(compute_high_risk_threshold(std::vector<double>{}), InsufficientDataError);
}

TEST(HighRiskThreshold, StreamingMatchesTwoPass) {
    std::mt19937_64 eng(11);
    std::vector<double> v;
    for (int i = 0; i < 50000; ++i) v.push_back(double(eng() % 151));
    auto t = compute_high_risk_threshold(v);
    auto [mean, sd] = oracle::two_pass_stats(v);
    EXPECT_NEAR(t.mean_r, mean, 1e-9 * mean);
    EXPECT_NEAR(t.std_r, sd, 1e-9 * sd);
}

TEST(HighRiskPixels, InclusiveThreshold) {
    EXPECT_EQ(high_risk_pixels(std::vector<double>{100, 30, 20}, at(80)), (std::vector<double>{100}));
    EXPECT_TRUE(high_risk_pixels(std::vector<double>{10, 20}, at(80)).empty());
    EXPECT_EQ(high_risk_pixels(std::vector<double>{80, 79.999}, at(80)), (std::vector<double>{80}));
}

// The three worked-example lines at a high-risk threshold of 80.
TEST(Aggregate, WorkedExampleLineOne) {
    auto m = metrics_of({100, 30, 20});
    EXPECT_EQ(m[0], 100.0);
    EXPECT_EQ(m[1], 50.0);
    EXPECT_EQ(m[2], 150.0);
    EXPECT_EQ(m[3], 100.0);
    EXPECT_NEAR(m[4], 100.0 / 3.0, 1e-12);
    EXPECT_EQ(m[5], 100.0);
}

TEST(Aggregate, WorkedExampleLineTwo) {
    auto m = metrics_of({100, 95, 90, 25, 20});
    EXPECT_EQ(m[0], 100.0);
    EXPECT_EQ(m[1], 66.0); // printed as 67 in the source table; 330 / 5 is 66
    EXPECT_EQ(m[2], 330.0);
    EXPECT_EQ(m[3], 100.0);
    EXPECT_EQ(m[4], 57.0);
    EXPECT_EQ(m[5], 285.0);
}

TEST(Aggregate, WorkedExampleLineThree) {
    auto m = metrics_of({100, 100, 55, 55, 40, 40, 30});
    EXPECT_EQ(m[0], 100.0);
    EXPECT_EQ(m[1], 60.0);
    EXPECT_EQ(m[2], 420.0);
    EXPECT_EQ(m[3], 100.0);
    EXPECT_NEAR(m[4], 200.0 / 7.0, 1e-12);
    EXPECT_EQ(m[5], 200.0);
}

TEST(Aggregate, EmptyLineIsZeroEverywhere) {
    for (double v : aggregate_all({}, 0, at(80))) EXPECT_EQ(v, 0.0);
    // no pixel reaches the threshold: high-risk metrics are zero, not the baseline
    auto m = metrics_of({10, 20});
    EXPECT_EQ(m[3], 0.0);
    EXPECT_EQ(m[4], 0.0);
    EXPECT_EQ(m[5], 0.0);
}

TEST(Aggregate, MoreValuesThanPixelsIsInconsistent) {
    std::vector<double> v{1, 2};
    EXPECT_THROW(aggregate(v, 0, MetricKind::ME, at(1)), InconsistencyError);
}

TEST(Aggregate, MatchesDirectFormulas) {
    std::mt19937_64 eng(5);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> v(eng() % 30);
        for (auto& x : v) x = double(eng() % 151);
        std::size_t count = v.size() + eng() % 3;
        auto thr = at(double(eng() % 151));
        auto fast = aggregate_all(v, count, thr);
        auto ref = oracle::naive_metrics(v, count, thr);
        for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(fast[k], ref[k], 1e-12 * std::max(1.0, ref[k]));
    }
}

TEST(MetricNames, RoundTrip) {
    for (auto k : kAllMetrics) EXPECT_EQ(parse_metric(to_string(k)), k);
    EXPECT_THROW(parse_metric("MAX"), ParseError);
}

TEST(LineRiskTable, OneLineTwoDays) {
    Network net = network_from_json(test::two_bus_json());
    std::vector<RiskRaster> rasters(2);
    for (int d = 0; d < 2; ++d) {
        rasters[std::size_t(d)].day = add_days(parse_date("2020-01-01"), d);
        rasters[std::size_t(d)].grid = {3, 1, 0.0, 0.0, 1.0};
        rasters[std::size_t(d)].values = {10.0 * (d + 1), 0.0, 5.0};
    }
    auto table = build_table(net, rasters, at(15));
    ASSERT_EQ(table.n_lines(), 1u);
    ASSERT_EQ(table.n_days(), 2u);
    EXPECT_EQ(table.at(0, 0, MetricKind::MA), 10.0);
    EXPECT_EQ(table.at(0, 1, MetricKind::MA), 20.0);
    EXPECT_EQ(table.at(0, 0, MetricKind::HRMA), 0.0);
    EXPECT_EQ(table.at(0, 1, MetricKind::HRCU), 20.0);
    EXPECT_NEAR(table.at(0, 0, MetricKind::ME), 5.0, 1e-12);

    std::ostringstream out;
    write_table_csv(table, out);
    test::TempDir dir("table");
    std::vector<MetricKind> present;
    auto back = read_table_csv(dir.write("t.csv", out.str()), &present);
    EXPECT_EQ(back, table);
    EXPECT_EQ(present.size(), 6u);
}

TEST(LineRiskTable, RestrictedMetricsLeaveOthersAbsent) {
    LineRiskTable t({4}, {parse_date("2020-01-01")});
    t.at(0, 0, MetricKind::CU) = 3.5;
    std::ostringstream out;
    std::vector<MetricKind> only{MetricKind::CU};
    write_table_csv(t, out, only);
    EXPECT_EQ(out.str(), "line,day,metric,risk\n4,2020-01-01,CU,3.5\n");
    test::TempDir dir("table");
    std::vector<MetricKind> present;
    auto back = read_table_csv(dir.write("t.csv", out.str()), &present);
    EXPECT_EQ(present, only);
    EXPECT_EQ(back.at(0, 0, MetricKind::CU), 3.5);
}

TEST(LineRiskTable, RejectsUnsortedDaysAndMixedGrids) {
    Network net = network_from_json(test::two_bus_json());
    std::vector<RiskRaster> rasters(2);
    for (auto& r : rasters) r.grid = {3, 1, 0.0, 0.0, 1.0}, r.values = {1, 1, 1};
    rasters[0].day = parse_date("2020-01-02");
    rasters[1].day = parse_date("2020-01-01");
    EXPECT_THROW(build_table(net, rasters, at(1)), ValidationError);
    std::swap(rasters[0].day, rasters[1].day);
    rasters[1].grid.cell_size = 1.5;
    EXPECT_THROW(build_table(net, rasters, at(1)), GeometryError);
}
