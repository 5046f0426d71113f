#include "psps/ops.hpp"
#include "psps/threshold_planner.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace psps;

namespace {

const Date kDay = parse_date("2020-10-26");

LineRiskTable table_of(std::vector<int> ids, std::vector<double> risks, MetricKind k = MetricKind::MA) {
    LineRiskTable t(std::move(ids), {kDay});
    for (std::size_t l = 0; l < risks.size(); ++l) t.at(l, 0, k) = risks[l];
    return t;
}

PercentileThreshold cut(double v) { return {MetricKind::MA, 95.0, v}; }

} // namespace

TEST(Percentile, NearestRank) {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    EXPECT_EQ(nearest_rank(v, 95.0), 95.0);
    EXPECT_EQ(nearest_rank(v, 50.0), 50.0);
    EXPECT_EQ(nearest_rank(v, 0.5), 1.0);
    EXPECT_EQ(nearest_rank({7}, 1.0), 7.0);
    EXPECT_EQ(nearest_rank({7}, 95.0), 7.0);
    EXPECT_THROW(nearest_rank({}, 95.0), InsufficientDataError);
    EXPECT_THROW(nearest_rank({1}, 100.0), InconsistencyError);
}

TEST(Percentile, MatchesSortOracle) {
    std::mt19937_64 eng(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + eng() % 500);
        for (auto& x : v) x = double(eng() % 1000) / 7.0;
        double q = 1.0 + double(eng() % 98);
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        // smallest value with at least q% of the population at or below it
        double expect = sorted.back();
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (100.0 * double(i + 1) >= q * double(sorted.size())) {
                expect = sorted[i];
                break;
            }
        EXPECT_EQ(nearest_rank(v, q), expect);
    }
}

TEST(Percentile, PooledOverLinesAndDays) {
    LineRiskTable t({1, 2}, {kDay, add_days(kDay, 1)});
    t.at(0, 0, MetricKind::CU) = 4;
    t.at(1, 0, MetricKind::CU) = 1;
    t.at(0, 1, MetricKind::CU) = 3;
    t.at(1, 1, MetricKind::CU) = 2;
    EXPECT_EQ(compute_percentile(t, MetricKind::CU, 50.0).value, 2.0);
    EXPECT_EQ(compute_percentile(t, MetricKind::CU, 95.0).value, 4.0);
}

TEST(ThresholdPlan, SwitchesOffStrictlyAbove) {
    auto t = table_of({10, 20}, {10, 5});
    auto p = plan_threshold(t, MetricKind::MA, kDay, cut(7));
    EXPECT_EQ(p.off_lines, std::vector<int>{10});
    EXPECT_EQ(p.residual_risk, 5.0);
    EXPECT_EQ(p.method, Method::Threshold);
}

TEST(ThresholdPlan, AllBelowKeepsEverythingOn) {
    auto p = plan_threshold(table_of({1, 2, 3}, {1, 2, 3}), MetricKind::MA, kDay, cut(7));
    EXPECT_TRUE(p.off_lines.empty());
    EXPECT_EQ(p.residual_risk, 6.0);
}

TEST(ThresholdPlan, EqualityStaysEnergized) {
    auto p = plan_threshold(table_of({1, 2}, {7, 7.0000001}), MetricKind::MA, kDay, cut(7));
    EXPECT_EQ(p.off_lines, std::vector<int>{2});
    EXPECT_EQ(p.residual_risk, 7.0);
}

TEST(ThresholdPlan, MissingDayIsADataError) {
    EXPECT_THROW(plan_threshold(table_of({1}, {1}), MetricKind::MA, add_days(kDay, 3), cut(0)), ValidationError);
}

TEST(WorstCaseHour, UniqueMaximum) {
    std::vector<double> shed(24, 1.0);
    shed[18] = 5.0;
    EXPECT_EQ(worst_case_hour(shed), 18);
}

TEST(WorstCaseHour, TiesGoToTheEarliestHour) {
    EXPECT_EQ(worst_case_hour(std::vector<double>(24, 0.0)), 0);
    std::vector<double> shed(24, 0.0);
    shed[10] = shed[20] = 3.0;
    EXPECT_EQ(worst_case_hour(shed), 10);
}

TEST(RiskBudget, IsTheResidualOfTheThresholdPlan) {
    DeEnergizationPlan p;
    p.residual_risk = 5.0;
    EXPECT_EQ(risk_budget(p), 5.0);
    auto none = plan_threshold(table_of({1, 2, 3}, {2, 0, 4}), MetricKind::MA, kDay, cut(100));
    EXPECT_EQ(risk_budget(none), 6.0);
    EXPECT_EQ(residual_risk({2, 0, 4}, {true, false, false}), 2.0);
}

TEST(Method, NamesRoundTrip) {
    EXPECT_EQ(parse_method("THRESHOLD"), Method::Threshold);
    EXPECT_EQ(parse_method(to_string(Method::Ops)), Method::Ops);
    EXPECT_THROW(parse_method("greedy"), ParseError);
}
