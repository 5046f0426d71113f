#include "psps/dispatch.hpp"
#include "psps/ops.hpp"
#include "psps/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace psps;

namespace {

void expect_invariants(const Network& net, const std::vector<bool>& on, const std::vector<double>& demand,
                       const DispatchResult& r) {
    EXPECT_TRUE(r.feasible);
    EXPECT_LE(r.max_balance_residual_pu, 1e-6);
    for (std::size_t n = 0; n < net.buses.size(); ++n) {
        EXPECT_GE(r.shed_mw[n], 0.0);
        EXPECT_LE(r.shed_mw[n], demand[n]);
    }
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        if (!on[l]) EXPECT_EQ(r.flow_mw[l], 0.0);
        EXPECT_LE(std::abs(r.flow_mw[l]), net.lines[l].flow_limit_mw * (1 + 1e-7));
    }
}

} // namespace

TEST(Dispatch, TwoBusCapacitySuffices) {
    auto net = network_from_json(test::two_bus_json());
    std::vector<double> demand{0.0, 50.0};
    auto r = dispatch_fixed(net, {true}, demand);
    EXPECT_NEAR(r.total_shed_mw, 0.0, 1e-9);
    EXPECT_NEAR(r.flow_mw[0], 50.0, 1e-9);
    EXPECT_NEAR(r.gen_mw[0], 50.0, 1e-9);
    expect_invariants(net, {true}, demand, r);
}

TEST(Dispatch, TwoBusIslanded) {
    auto net = network_from_json(test::two_bus_json());
    std::vector<double> demand{0.0, 50.0};
    auto r = dispatch_fixed(net, {false}, demand);
    EXPECT_NEAR(r.total_shed_mw, 50.0, 1e-9);
    EXPECT_NEAR(r.objective_pu, 0.5, 1e-12);
    expect_invariants(net, {false}, demand, r);
}

TEST(Dispatch, TriangleReroutesOverTheWeakLine) {
    auto net = network_from_json(test::triangle_json());
    std::vector<double> demand{0.0, 0.0, 50.0};
    std::vector<bool> on{true, true, false};
    auto r = dispatch_fixed(net, on, demand);
    EXPECT_NEAR(r.total_shed_mw, 20.0, 1e-9);
    EXPECT_NEAR(r.flow_mw[1], 30.0, 1e-9);
    expect_invariants(net, on, demand, r);
    // all lines on: the direct line and the detour share the 50 MW
    auto all = dispatch_fixed(net, {true, true, true}, demand);
    EXPECT_NEAR(all.total_shed_mw, 0.0, 1e-9);
}

TEST(Dispatch, FlowLimitBindsWithoutSwitching) {
    auto net = network_from_json(test::two_bus_json(100.0, 30.0));
    std::vector<double> demand{0.0, 50.0};
    auto r = dispatch_fixed(net, {true}, demand);
    EXPECT_NEAR(r.total_shed_mw, 20.0, 1e-9);
}

TEST(Dispatch, GeneratorCapacityBinds) {
    auto net = network_from_json(test::two_bus_json(40.0));
    std::vector<double> demand{5.0, 50.0};
    auto r = dispatch_fixed(net, {true}, demand);
    EXPECT_NEAR(r.total_shed_mw, 15.0, 1e-9);
    expect_invariants(net, {true}, demand, r);
}

TEST(Dispatch, ShapeErrors) {
    auto net = network_from_json(test::two_bus_json());
    EXPECT_THROW(dispatch_fixed(net, {true, true}, std::vector<double>{0, 1}), InconsistencyError);
    EXPECT_THROW(dispatch_fixed(net, {true}, std::vector<double>{1}), InconsistencyError);
}

TEST(Dispatch, RandomStatusesKeepInvariants) {
    std::mt19937_64 eng(9);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto rc = oracle::random_case(seed);
        const auto& net = *rc.network;
        std::vector<bool> on(net.lines.size());
        for (std::size_t l = 0; l < on.size(); ++l) on[l] = eng() % 3 != 0;
        auto r = dispatch_fixed(net, on, rc.instance.demand_mw);
        expect_invariants(net, on, rc.instance.demand_mw, r);
        // everything off: every load bus without a generator is fully shed
        std::vector<bool> off(net.lines.size(), false);
        auto dark = dispatch_fixed(net, off, rc.instance.demand_mw);
        expect_invariants(net, off, rc.instance.demand_mw, dark);
    }
}

TEST(SimulateDay, ZeroDemand) {
    auto net = network_from_json(test::two_bus_json());
    auto sim = simulate_day(net, {true}, std::vector<std::vector<double>>(24, {0.0, 0.0}));
    EXPECT_EQ(sim.hours.size(), 24u);
    EXPECT_NEAR(sim.total_shed_mwh, 0.0, 1e-12);
}

TEST(SimulateDay, SumsHourlyDispatches) {
    auto net = network_from_json(test::triangle_json());
    std::vector<std::vector<double>> demand;
    for (int h = 0; h < 24; ++h) demand.push_back({0.0, 0.0, 20.0 + 2.0 * h});
    std::vector<bool> on{true, true, false};
    auto sim = simulate_day(net, on, demand);
    double total = 0.0;
    for (int h = 0; h < 24; ++h) total += dispatch_fixed(net, on, demand[std::size_t(h)]).total_shed_mw;
    EXPECT_NEAR(sim.total_shed_mwh, total, 1e-9);
    EXPECT_NEAR(sim.total_shed_mwh, 342.0, 1e-6); // hours 6..23 shed 2, 4, ..., 36
    EXPECT_EQ(worst_case_hour(sim.hourly_shed_mw()), 23);
}

TEST(SimulateDay, NeedsTwentyFourHours) {
    auto net = network_from_json(test::two_bus_json());
    EXPECT_THROW(simulate_day(net, {true}, std::vector<std::vector<double>>(23, {0.0, 0.0})), InconsistencyError);
}
