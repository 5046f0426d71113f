#pragma once

#include "psps/csv.hpp"
#include "psps/date.hpp"
#include "psps/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace psps {

/// Fixture default for angle-difference limits when a line omits them (30 degrees).
inline constexpr double kDefaultAngleLimit = 0.5236;

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Bus {
    int id = 0;
    std::string name;
    friend bool operator==(const Bus&, const Bus&) = default;
};

/// MW values are kept as given; per-unit values are derived once at load.
struct Generator {
    int id = 0;
    int bus = 0;          // bus id
    std::size_t bus_index = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    double p_min_pu = 0.0;
    double p_max_pu = 0.0;
    friend bool operator==(const Generator&, const Generator&) = default;
};

struct Line {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    std::size_t from_index = 0;
    std::size_t to_index = 0;
    double susceptance = 0.0; // per unit, sign as given (negative for inductive lines)
    double flow_limit_mw = 0.0;
    double flow_limit_pu = 0.0;
    double angle_min = -kDefaultAngleLimit;
    double angle_max = kDefaultAngleLimit;
    std::vector<Point> geometry;

    double length() const {
        double total = 0.0;
        for (std::size_t i = 1; i < geometry.size(); ++i)
            total += std::hypot(geometry[i].x - geometry[i - 1].x, geometry[i].y - geometry[i - 1].y);
        return total;
    }
    friend bool operator==(const Line&, const Line&) = default;
};

/// Immutable after load. Buses, generators and lines keep file order;
/// `bus_index(id)` gives the dense position of a bus.
class Network {
public:
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Generator> generators;
    std::vector<Line> lines;
    std::vector<std::string> warnings;

    std::size_t bus_index(int id) const {
        auto it = bus_pos_.find(id);
        if (it == bus_pos_.end()) throw ReferenceError("unknown bus id " + std::to_string(id));
        return it->second;
    }
    bool has_bus(int id) const { return bus_pos_.count(id) != 0; }

    std::size_t line_index(int id) const {
        auto it = line_pos_.find(id);
        if (it == line_pos_.end()) throw ReferenceError("unknown line id " + std::to_string(id));
        return it->second;
    }

    /// Connected component label per bus, using only lines with `energized[l]`
    /// (all lines when empty). Components are numbered by their lowest bus id.
    std::vector<std::size_t> components(const std::vector<bool>& energized = {}) const {
        std::vector<std::size_t> parent(buses.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        for (std::size_t l = 0; l < lines.size(); ++l) {
            if (!energized.empty() && !energized[l]) continue;
            auto a = find(lines[l].from_index), b = find(lines[l].to_index);
            if (a == b) continue;
            // keep the root on the lowest bus id
            if (buses[a].id < buses[b].id) parent[b] = a;
            else parent[a] = b;
        }
        std::vector<std::size_t> label(buses.size());
        for (std::size_t i = 0; i < buses.size(); ++i) label[i] = find(i);
        return label;
    }

    /// Per component, the bus index with the lowest id.
    std::vector<std::size_t> reference_buses(const std::vector<bool>& energized = {}) const {
        auto label = components(energized);
        std::vector<std::size_t> refs;
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (label[i] == i) refs.push_back(i);
        return refs;
    }

    void index() {
        bus_pos_.clear();
        line_pos_.clear();
        for (std::size_t i = 0; i < buses.size(); ++i) bus_pos_[buses[i].id] = i;
        for (std::size_t i = 0; i < lines.size(); ++i) line_pos_[lines[i].id] = i;
    }

    friend bool operator==(const Network& a, const Network& b) {
        return a.base_mva == b.base_mva && a.buses == b.buses && a.generators == b.generators &&
               a.lines == b.lines;
    }

private:
    std::unordered_map<int, std::size_t> bus_pos_;
    std::unordered_map<int, std::size_t> line_pos_;
};

namespace detail {

template <typename T>
T field(const nlohmann::json& rec, const char* key, const std::string& where) {
    if (!rec.is_object() || !rec.contains(key))
        throw ParseError(where + ": missing field '" + key + "'");
    try {
        return rec.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(where + ": field '" + key + "' has the wrong type");
    }
}

inline std::string where(const char* kind, std::size_t pos, const nlohmann::json& rec) {
    std::string s = std::string(kind) + "[" + std::to_string(pos) + "]";
    if (rec.is_object() && rec.contains("id") && rec["id"].is_number_integer())
        s += " (id " + std::to_string(rec["id"].get<int>()) + ")";
    return s;
}

} // namespace detail

/// Builds a validated Network from its JSON document.
inline Network network_from_json(const nlohmann::json& doc) {
    using detail::field;
    if (!doc.is_object()) throw ParseError("network: top level must be an object");
    Network net;
    net.base_mva = field<double>(doc, "base_mva", "network");
    if (!(net.base_mva > 0.0)) throw ValidationError("network: base_mva must be positive");
    for (const char* key : {"buses", "generators", "lines"})
        if (!doc.contains(key) || !doc[key].is_array())
            throw ParseError(std::string("network: missing array '") + key + "'");

    std::size_t pos = 0;
    for (const auto& rec : doc["buses"]) {
        auto w = detail::where("buses", pos++, rec);
        Bus b;
        b.id = field<int>(rec, "id", w);
        b.name = rec.contains("name") ? field<std::string>(rec, "name", w) : std::string{};
        if (net.has_bus(b.id)) throw ValidationError(w + ": duplicate bus id");
        net.buses.push_back(b);
        net.index();
    }

    pos = 0;
    for (const auto& rec : doc["generators"]) {
        auto w = detail::where("generators", pos++, rec);
        Generator g;
        g.id = field<int>(rec, "id", w);
        g.bus = field<int>(rec, "bus", w);
        g.p_min_mw = rec.contains("p_min") ? field<double>(rec, "p_min", w) : 0.0;
        g.p_max_mw = field<double>(rec, "p_max", w);
        if (!net.has_bus(g.bus))
            throw ReferenceError(w + ": generator " + std::to_string(g.id) + " references absent bus " +
                                 std::to_string(g.bus));
        if (!(g.p_min_mw >= 0.0 && g.p_min_mw <= g.p_max_mw))
            throw ValidationError(w + ": require 0 <= p_min <= p_max");
        g.bus_index = net.bus_index(g.bus);
        g.p_min_pu = g.p_min_mw / net.base_mva;
        g.p_max_pu = g.p_max_mw / net.base_mva;
        net.generators.push_back(g);
    }

    pos = 0;
    for (const auto& rec : doc["lines"]) {
        auto w = detail::where("lines", pos++, rec);
        Line l;
        l.id = field<int>(rec, "id", w);
        l.from_bus = field<int>(rec, "from_bus", w);
        l.to_bus = field<int>(rec, "to_bus", w);
        l.susceptance = field<double>(rec, "susceptance", w);
        l.flow_limit_mw = field<double>(rec, "flow_limit", w);
        if (rec.contains("angle_min")) l.angle_min = field<double>(rec, "angle_min", w);
        if (rec.contains("angle_max")) l.angle_max = field<double>(rec, "angle_max", w);
        auto pts = field<std::vector<std::array<double, 2>>>(rec, "geometry", w);
        for (auto [x, y] : pts) l.geometry.push_back({x, y});

        for (int b : {l.from_bus, l.to_bus})
            if (!net.has_bus(b))
                throw ReferenceError(w + ": line " + std::to_string(l.id) + " references absent bus " +
                                     std::to_string(b));
        if (l.from_bus == l.to_bus) throw ValidationError(w + ": from_bus equals to_bus");
        if (!(l.flow_limit_mw > 0.0)) throw ValidationError(w + ": flow_limit must be positive");
        if (!(l.angle_min < l.angle_max)) throw ValidationError(w + ": angle_min must be below angle_max");
        if (l.susceptance == 0.0 || !std::isfinite(l.susceptance))
            throw ValidationError(w + ": susceptance must be finite and nonzero");
        if (l.geometry.size() < 2 || !(l.length() > 0.0))
            throw ValidationError(w + ": geometry needs >= 2 points and positive length");
        for (const auto& p : l.geometry)
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError(w + ": non-finite coordinate");
        l.from_index = net.bus_index(l.from_bus);
        l.to_index = net.bus_index(l.to_bus);
        l.flow_limit_pu = l.flow_limit_mw / net.base_mva;
        for (const auto& other : net.lines)
            if (other.id == l.id) throw ValidationError(w + ": duplicate line id");
        net.lines.push_back(std::move(l));
    }
    net.index();

    if (!net.buses.empty()) {
        auto refs = net.reference_buses();
        if (refs.size() > 1)
            net.warnings.push_back("network has " + std::to_string(refs.size()) +
                                   " connected components with all lines energized");
    }
    return net;
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        return network_from_json(doc);
    } catch (const Error& e) {
        // keep the concrete type, prefix the file
        if (dynamic_cast<const ReferenceError*>(&e)) throw ReferenceError(path + ": " + e.what());
        if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(path + ": " + e.what());
        throw ParseError(path + ": " + e.what());
    }
}

inline nlohmann::json network_to_json(const Network& net) {
    nlohmann::json doc;
    doc["base_mva"] = net.base_mva;
    doc["buses"] = nlohmann::json::array();
    for (const auto& b : net.buses) doc["buses"].push_back({{"id", b.id}, {"name", b.name}});
    doc["generators"] = nlohmann::json::array();
    for (const auto& g : net.generators)
        doc["generators"].push_back({{"id", g.id}, {"bus", g.bus}, {"p_min", g.p_min_mw}, {"p_max", g.p_max_mw}});
    doc["lines"] = nlohmann::json::array();
    for (const auto& l : net.lines) {
        nlohmann::json geom = nlohmann::json::array();
        for (const auto& p : l.geometry) geom.push_back({p.x, p.y});
        doc["lines"].push_back({{"id", l.id},
                                {"from_bus", l.from_bus},
                                {"to_bus", l.to_bus},
                                {"susceptance", l.susceptance},
                                {"flow_limit", l.flow_limit_mw},
                                {"angle_min", l.angle_min},
                                {"angle_max", l.angle_max},
                                {"geometry", geom}});
    }
    return doc;
}

inline void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << network_to_json(net).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Demand

struct DemandSeries {
    int bus = 0;
    Date day;
    std::array<double, 24> hourly_mw{};
};

/// Hourly demand for every bus of a network over a contiguous range of days.
class Demand {
public:
    std::vector<Date> days;
    /// series[d][b] for day index d and bus index b.
    std::vector<std::vector<DemandSeries>> series;

    std::optional<std::size_t> day_index(const Date& day) const {
        auto it = std::lower_bound(days.begin(), days.end(), day);
        if (it == days.end() || *it != day) return std::nullopt;
        return std::size_t(it - days.begin());
    }

    /// Per-bus demand in MW for one hour.
    std::vector<double> hour_mw(std::size_t day, int hour) const {
        std::vector<double> out;
        out.reserve(series[day].size());
        for (const auto& s : series[day]) out.push_back(s.hourly_mw[std::size_t(hour)]);
        return out;
    }

    /// 24 vectors of per-bus MW for the given date; zero demand when the date is absent.
    std::vector<std::vector<double>> day_mw(const Date& day, std::size_t n_buses) const {
        std::vector<std::vector<double>> out(24, std::vector<double>(n_buses, 0.0));
        if (auto d = day_index(day))
            for (int h = 0; h < 24; ++h) out[std::size_t(h)] = hour_mw(*d, h);
        return out;
    }
};

/// Reads `day,hour,bus,mw` rows. Buses without rows on a day have zero demand;
/// a bus with rows on a day must cover all 24 hours.
inline Demand load_demand(const std::string& path, const Network& net) {
    std::map<std::pair<Date, std::size_t>, std::array<int, 24>> seen;
    std::map<std::pair<Date, std::size_t>, std::array<double, 24>> values;
    csv::read_file(path, "day,hour,bus,mw", [&](const auto& f, std::size_t lineno) {
        auto at = path + ":" + std::to_string(lineno);
        if (f.size() != 4) throw ParseError(at + ": expected 4 fields");
        Date day = parse_date(csv::trim(f[0]));
        int hour = 0, bus = 0;
        double mw = 0.0;
        if (!csv::parse_number(f[1], hour) || hour < 0 || hour > 23)
            throw ParseError(at + ": hour must be an integer in 0..23");
        if (!csv::parse_number(f[2], bus)) throw ParseError(at + ": bus must be an integer");
        if (!csv::parse_number(f[3], mw) || !std::isfinite(mw)) throw ParseError(at + ": mw must be numeric");
        if (mw < 0.0) throw ValidationError(at + ": negative demand");
        if (!net.has_bus(bus)) throw ReferenceError(at + ": demand references absent bus " + std::to_string(bus));
        auto key = std::make_pair(day, net.bus_index(bus));
        auto& count = seen[key];
        if (count[std::size_t(hour)]++)
            throw DuplicateError(at + ": duplicate (bus, day, hour) = (" + std::to_string(bus) + ", " +
                                 format_date(day) + ", " + std::to_string(hour) + ")");
        values[key][std::size_t(hour)] = mw;
    });

    Demand out;
    if (seen.empty()) return out;
    for (const auto& [key, count] : seen)
        for (int h = 0; h < 24; ++h)
            if (!count[std::size_t(h)])
                throw ValidationError(path + ": bus " + std::to_string(net.buses[key.second].id) + " on " +
                                      format_date(key.first) + " is missing hour " + std::to_string(h));

    out.days = date_range(seen.begin()->first.first, seen.rbegin()->first.first);
    out.series.resize(out.days.size());
    for (std::size_t d = 0; d < out.days.size(); ++d) {
        for (const auto& bus : net.buses) {
            DemandSeries s;
            s.bus = bus.id;
            s.day = out.days[d];
            auto it = values.find({out.days[d], net.bus_index(bus.id)});
            if (it != values.end()) s.hourly_mw = it->second;
            out.series[d].push_back(s);
        }
    }
    return out;
}

} // namespace psps
