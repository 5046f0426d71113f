#include "psps/network.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace psps;
using psps::test::TempDir;

TEST(Network, TwoBusFile) {
    auto net = network_from_json(test::two_bus_json());
    EXPECT_EQ(net.buses.size(), 2u);
    EXPECT_EQ(net.lines.size(), 1u);
    ASSERT_EQ(net.generators.size(), 1u);
    EXPECT_DOUBLE_EQ(net.generators[0].p_max_pu, 1.0);
    EXPECT_DOUBLE_EQ(net.lines[0].flow_limit_pu, 1.0);
    EXPECT_DOUBLE_EQ(net.lines[0].susceptance, -10.0);
    EXPECT_DOUBLE_EQ(net.lines[0].angle_max, kDefaultAngleLimit);
    EXPECT_EQ(net.bus_index(2), 1u);
    EXPECT_TRUE(net.warnings.empty());
}

TEST(Network, DanglingBusNamesTheLine) {
    auto doc = test::two_bus_json();
    doc["lines"][0]["id"] = 7;
    doc["lines"][0]["to_bus"] = 99;
    try {
        network_from_json(doc);
        FAIL() << "expected a reference error";
    } catch (const ReferenceError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;
        EXPECT_NE(msg.find("99"), std::string::npos) << msg;
    }
}

TEST(Network, SchemaErrorsNameFieldAndRecord) {
    auto doc = test::two_bus_json();
    doc["lines"][0].erase("flow_limit");
    try {
        network_from_json(doc);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("flow_limit"), std::string::npos) << msg;
        EXPECT_NE(msg.find("lines"), std::string::npos) << msg;
    }
}

TEST(Network, RejectsInvalidValues) {
    auto bad = [](auto edit) {
        auto doc = test::two_bus_json();
        edit(doc);
        return doc;
    };
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["lines"][0]["flow_limit"] = 0.0; })), ValidationError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["lines"][0]["susceptance"] = 0.0; })), ValidationError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["lines"][0]["to_bus"] = 1; })), ValidationError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["lines"][0]["geometry"] = {{1.0, 1.0}}; })), ValidationError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["generators"][0]["p_min"] = 200.0; })), ValidationError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["buses"].push_back({{"id", 1}}); })), ValidationError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["generators"][0]["bus"] = 5; })), ReferenceError);
    EXPECT_THROW(network_from_json(bad([](auto& d) { d["base_mva"] = -1.0; })), ValidationError);
}

TEST(Network, WarnsAboutDisconnectedComponents) {
    auto doc = test::two_bus_json();
    doc["buses"].push_back({{"id", 3}});
    auto net = network_from_json(doc);
    EXPECT_EQ(net.warnings.size(), 1u);
    EXPECT_EQ(net.reference_buses().size(), 2u);
}

TEST(Network, ShippedFixtureHasTwentyLines) {
    auto net = load_network(test::shipped_network_path());
    EXPECT_EQ(net.buses.size(), 14u);
    EXPECT_EQ(net.lines.size(), 20u);
    EXPECT_EQ(net.generators.size(), 5u);
    EXPECT_TRUE(net.warnings.empty());
    EXPECT_EQ(net.reference_buses().size(), 1u);
}

TEST(Network, RoundTrip) {
    TempDir dir("net");
    auto net = load_network(test::shipped_network_path());
    save_network(net, (dir / "copy.json").string());
    EXPECT_EQ(load_network((dir / "copy.json").string()), net);
}

TEST(Network, ComponentsFollowEnergizedLines) {
    auto net = network_from_json(test::triangle_json());
    EXPECT_EQ(net.reference_buses().size(), 1u);
    EXPECT_EQ(net.reference_buses({false, true, false}).size(), 2u);
    EXPECT_EQ(net.reference_buses({false, false, false}).size(), 3u);
}

TEST(Demand, ConstantFiftyMegawatts) {
    TempDir dir("demand");
    auto net = network_from_json(test::two_bus_json());
    std::string text = "day,hour,bus,mw\n";
    for (int h = 0; h < 24; ++h) text += "2020-06-01," + std::to_string(h) + ",2,50\n";
    auto d = load_demand(dir.write("d.csv", text), net);
    ASSERT_EQ(d.days.size(), 1u);
    const auto& s = d.series[0][net.bus_index(2)];
    for (double v : s.hourly_mw) EXPECT_EQ(v, 50.0);
    for (double v : d.series[0][net.bus_index(1)].hourly_mw) EXPECT_EQ(v, 0.0);
}

TEST(Demand, MissingHourIsRejected) {
    TempDir dir("demand");
    auto net = network_from_json(test::two_bus_json());
    std::string text = "day,hour,bus,mw\n";
    for (int h = 0; h < 24; ++h)
        if (h != 13) text += "2020-06-01," + std::to_string(h) + ",2,50\n";
    try {
        load_demand(dir.write("d.csv", text), net);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("hour 13"), std::string::npos) << e.what();
    }
}

TEST(Demand, TwoDaysInOrder) {
    TempDir dir("demand");
    auto net = network_from_json(test::two_bus_json());
    std::string text = "day,hour,bus,mw\n";
    for (const char* day : {"2020-06-02", "2020-06-01"})
        for (int h = 0; h < 24; ++h) text += std::string(day) + "," + std::to_string(h) + ",2," + std::to_string(h) + "\n";
    auto d = load_demand(dir.write("d.csv", text), net);
    ASSERT_EQ(d.days.size(), 2u);
    EXPECT_EQ(format_date(d.days[0]), "2020-06-01");
    EXPECT_EQ(format_date(d.days[1]), "2020-06-02");
    for (const auto& day : d.series) EXPECT_EQ(day.size(), net.buses.size());
    EXPECT_EQ(d.hour_mw(1, 7)[1], 7.0);
}

TEST(Demand, DuplicateAndNegativeRows) {
    TempDir dir("demand");
    auto net = network_from_json(test::two_bus_json());
    EXPECT_THROW(load_demand(dir.write("dup.csv", "day,hour,bus,mw\n2020-06-01,0,2,5\n2020-06-01,0,2,6\n"), net),
                 DuplicateError);
    EXPECT_THROW(load_demand(dir.write("neg.csv", "day,hour,bus,mw\n2020-06-01,0,2,-5\n"), net), ValidationError);
    EXPECT_THROW(load_demand(dir.write("bus.csv", "day,hour,bus,mw\n2020-06-01,0,9,5\n"), net), ReferenceError);
    EXPECT_THROW(load_demand(dir.write("hdr.csv", "date,hour,bus,mw\n"), net), ParseError);
}
