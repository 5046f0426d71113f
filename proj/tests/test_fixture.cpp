// Checks on the generated synthetic year after `psps run` has produced its
// study directory. Every expectation is recomputed here from the inputs.

#include "psps/oracle.hpp"
#include "psps/study.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace psps;

namespace {

class FixtureStudy : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        config_ = new StudyConfig(load_config(std::string(PSPS_FIXTURE_DIR) + "/config.json"));
        net_ = new Network(load_network(config_->network.string()));
        table_ = new LineRiskTable(read_table_csv(StudyPaths{config_->output_dir}.risk_table().string()));
    }
    static void TearDownTestSuite() {
        delete table_;
        delete net_;
        delete config_;
    }

    static const StudyConfig& config() { return *config_; }
    static const Network& net() { return *net_; }
    static const LineRiskTable& table() { return *table_; }
    static StudyPaths out() { return {config_->output_dir}; }

    static std::map<std::pair<MetricKind, Date>, DeEnergizationPlan> plans(Method m) { return read_plans_csv(out().plans(m)); }

    /// Off set of (metric, day), empty when the plans file has no rows for it.
    static std::vector<int> off(const std::map<std::pair<MetricKind, Date>, DeEnergizationPlan>& p, MetricKind k, Date d) {
        auto it = p.find({k, d});
        return it == p.end() ? std::vector<int>{} : it->second.off_lines;
    }

private:
    static inline StudyConfig* config_ = nullptr;
    static inline Network* net_ = nullptr;
    static inline LineRiskTable* table_ = nullptr;
};

std::string golden(const std::string& name) { return test::read_file(std::string(PSPS_SOURCE_DIR) + "/tests/golden/" + name); }

} // namespace

TEST_F(FixtureStudy, ReportsMatchGoldenFiles) {
    EXPECT_EQ(test::read_file(out().threshold_json()), golden("high_risk_threshold.json"));
    EXPECT_EQ(test::read_file(out().percentiles()), golden("percentiles.csv"));
    for (const char* name : {"shed_totals.csv", "unique_lines.csv", "similarity.csv"})
        EXPECT_EQ(test::read_file(out().report() / name), golden(name)) << name;
}

TEST_F(FixtureStudy, ThresholdMatchesTwoPassStatistics) {
    auto rasters = load_rasters(config().raster_dir, config().training);
    auto sets = trace_network(net(), rasters.front().grid);
    std::vector<double> pool;
    for (const auto& r : rasters)
        for (const auto& s : sets)
            for (double v : pixel_risks(s, r).values) pool.push_back(v);
    auto [mean, sd] = oracle::two_pass_stats(pool);
    auto doc = nlohmann::json::parse(test::read_file(out().threshold_json()));
    EXPECT_EQ(doc["samples"].get<std::size_t>(), pool.size());
    EXPECT_NEAR(doc["mean"].get<double>(), mean, 1e-9 * mean);
    EXPECT_NEAR(doc["std"].get<double>(), sd, 1e-9 * sd);
}

TEST_F(FixtureStudy, RiskTableMatchesDirectFormulas) {
    auto doc = nlohmann::json::parse(test::read_file(out().threshold_json()));
    HighRiskThreshold thr;
    thr.mean_r = doc["mean"];
    thr.std_r = doc["std"];
    thr.threshold = doc["threshold"];
    ASSERT_EQ(table().n_days(), config().study.days().size());
    ASSERT_EQ(table().n_lines(), net().lines.size());
    GridGeometry grid{};
    for (std::size_t d = 0; d < table().n_days(); d += 5) {
        auto r = load_raster((config().raster_dir / raster_file_name(table().days()[d])).string(), table().days()[d]);
        for (std::size_t l = 0; l < net().lines.size(); ++l) {
            // every cell whose square the line touches, found by dense sampling;
            // 27720 = lcm(1..12) puts samples on the lattice corners of diagonal lines
            std::set<PixelRef> cells;
            const auto& g = net().lines[l].geometry;
            for (std::size_t i = 1; i < g.size(); ++i) {
                auto part = oracle::sample_segment_cells(g[i - 1], g[i], r.grid, 27720);
                cells.insert(part.begin(), part.end());
            }
            std::vector<double> values;
            for (const auto& c : cells)
                if (!RiskRaster::is_nodata(r.at(c))) values.push_back(r.at(c));
            auto ref = oracle::naive_metrics(values, values.size(), thr);
            for (auto k : kAllMetrics)
                EXPECT_NEAR(table().at(l, d, k), ref[std::size_t(k)], 1e-9 * std::max(1.0, ref[std::size_t(k)]))
                    << "line " << net().lines[l].id << " day " << d << " " << to_string(k);
        }
        grid = r.grid;
    }
    EXPECT_EQ(grid.n_cols, 64);
}

TEST_F(FixtureStudy, PercentilesMatchSortedPopulation) {
    std::map<MetricKind, double> written;
    csv::read_file(out().percentiles().string(), "metric,q,value", [&](const auto& f, std::size_t) {
        double v = 0;
        ASSERT_TRUE(csv::parse_number(f[2], v));
        written[parse_metric(f[0])] = v;
    });
    for (auto k : config().metrics) {
        auto pop = table().population(k);
        std::sort(pop.begin(), pop.end());
        auto rank = std::size_t(std::ceil(0.95 * double(pop.size())));
        EXPECT_EQ(written.at(k), pop[rank - 1]) << to_string(k);
    }
}

TEST_F(FixtureStudy, ThresholdPlansAndBudgetsRecompute) {
    auto thr = plans(Method::Threshold);
    auto ops = plans(Method::Ops);
    std::map<MetricKind, double> cut;
    csv::read_file(out().percentiles().string(), "metric,q,value", [&](const auto& f, std::size_t) {
        csv::parse_number(f[2], cut[parse_metric(f[0])]);
    });
    std::size_t days_checked = 0;
    for (auto k : config().metrics) {
        for (std::size_t d = 0; d < table().n_days(); ++d) {
            const Date day = table().days()[d];
            std::vector<int> expect_off;
            double budget = 0.0, used = 0.0;
            auto ops_off = off(ops, k, day);
            for (std::size_t l = 0; l < table().n_lines(); ++l) {
                double r = table().at(l, d, k);
                int id = table().line_ids()[l];
                if (r > cut.at(k)) expect_off.push_back(id);
                else budget += r;
                if (!std::binary_search(ops_off.begin(), ops_off.end(), id)) used += r;
            }
            ASSERT_EQ(off(thr, k, day), expect_off) << format_date(day) << " " << to_string(k);
            EXPECT_LE(used, budget * (1 + 1e-9)) << format_date(day) << " " << to_string(k);
            ++days_checked;
        }
    }
    EXPECT_EQ(days_checked, 6 * config().study.days().size());
}

TEST_F(FixtureStudy, UniqueLinesMatchSetUnion) {
    std::map<std::pair<std::string, std::string>, std::size_t> written;
    csv::read_file((out().report() / "unique_lines.csv").string(), "metric,method,unique_lines",
                   [&](const auto& f, std::size_t) {
                       std::size_t n = 0;
                       ASSERT_TRUE(csv::parse_number(f[2], n));
                       written[{std::string(f[0]), std::string(f[1])}] = n;
                   });
    for (auto m : {Method::Threshold, Method::Ops}) {
        auto p = plans(m);
        for (auto k : config().metrics) {
            std::set<int> all;
            for (const auto& [key, plan] : p)
                if (key.first == k) all.insert(plan.off_lines.begin(), plan.off_lines.end());
            EXPECT_EQ(written.at({std::string(to_string(k)), std::string(to_string(m))}), all.size());
        }
    }
}

TEST_F(FixtureStudy, HourlyShedAddsUpToDailyTotals) {
    for (auto m : {Method::Threshold, Method::Ops}) {
        for (auto k : config().metrics) {
            std::map<Date, double> sum;
            csv::read_file(out().hourly_shed(m, k).string(), "day,hour,bus,load_shed_mw", [&](const auto& f, std::size_t) {
                double v = 0;
                ASSERT_TRUE(csv::parse_number(f[3], v));
                EXPECT_GT(v, 0.0);
                sum[parse_date(f[0])] += v;
            });
            for (const auto& [day, total] : read_daily_shed_csv(out().daily_shed(m, k)))
                EXPECT_NEAR(sum[day], total, 1e-6 * std::max(1.0, total)) << format_date(day);
        }
    }
}

TEST_F(FixtureStudy, OpsDayReproducesFromLibrary) {
    // One congested day re-planned in process must match the exported files.
    const Date day = parse_date("2020-09-01");
    auto demand = load_demand(config().demand.string(), net());
    auto pct = compute_percentile(table(), MetricKind::CU, config().percentile);
    auto thr = plan_threshold(table(), MetricKind::CU, day, pct);
    OpsOptions opt;
    opt.mip_gap = config().mip_gap;
    auto res = plan_ops_day(net(), table(), MetricKind::CU, day, demand.day_mw(day, net().buses.size()), thr, opt);
    EXPECT_EQ(res.solution.plan.off_lines, off(plans(Method::Ops), MetricKind::CU, day));
    auto h = std::size_t(res.decision_hour);
    EXPECT_LE(res.simulation.hours[h].total_shed_mw, res.threshold_simulation.hours[h].total_shed_mw + 1e-6);
    for (const auto& [d, v] : read_daily_shed_csv(out().daily_shed(Method::Ops, MetricKind::CU)))
        if (d == day) EXPECT_EQ(csv::format_double(v), csv::format_double(res.simulation.total_shed_mwh));
}
