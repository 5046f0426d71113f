#pragma once

#include "psps/csv.hpp"
#include "psps/date.hpp"
#include "psps/error.hpp"
#include "psps/network.hpp"
#include "psps/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psps {

enum class MetricKind { MA, ME, CU, HRMA, HRME, HRCU };

inline constexpr std::array<MetricKind, 6> kAllMetrics = {MetricKind::MA,   MetricKind::ME,   MetricKind::CU,
                                                          MetricKind::HRMA, MetricKind::HRME, MetricKind::HRCU};

inline constexpr std::string_view to_string(MetricKind k) {
    constexpr std::array<std::string_view, 6> names = {"MA", "ME", "CU", "HRMA", "HRME", "HRCU"};
    return names[std::size_t(k)];
}

inline MetricKind parse_metric(std::string_view s) {
    for (auto k : kAllMetrics)
        if (to_string(k) == s) return k;
    throw ParseError("unknown metric '" + std::string(s) + "'");
}

/// Pixel-level cut-off for the high-risk metrics: mean plus one population
/// standard deviation of a training year's pixel risks.
struct HighRiskThreshold {
    double mean_r = 0.0;
    double std_r = 0.0;
    double threshold = 0.0;
    std::string training_year;
    std::size_t samples = 0;
};

/// Accumulates the (line, day, pixel) risk multiset. Welford update so a year
/// of pixels can stream through without being held in memory.
class RiskStatistics {
public:
    void add(double v) {
        ++n_;
        double delta = v - mean_;
        mean_ += delta / double(n_);
        m2_ += delta * (v - mean_);
    }
    void add(std::span<const double> vs) {
        for (double v : vs) add(v);
    }
    std::size_t count() const { return n_; }

    HighRiskThreshold threshold(std::string training_year = {}) const {
        if (n_ == 0) throw InsufficientDataError("high-risk threshold needs at least one burnable pixel value");
        HighRiskThreshold t;
        t.mean_r = mean_;
        t.std_r = std::sqrt(std::max(0.0, m2_ / double(n_)));
        t.threshold = t.mean_r + t.std_r;
        t.training_year = std::move(training_year);
        t.samples = n_;
        return t;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline HighRiskThreshold compute_high_risk_threshold(std::span<const double> pixel_risks,
                                                     std::string training_year = {}) {
    RiskStatistics stats;
    stats.add(pixel_risks);
    return stats.threshold(std::move(training_year));
}

/// Values at or above the threshold, in input order.
inline std::vector<double> high_risk_pixels(std::span<const double> values, const HighRiskThreshold& thr) {
    std::vector<double> out;
    for (double v : values)
        if (v >= thr.threshold) out.push_back(v);
    return out;
}

/// One line-day risk under `kind`. `pixel_count` is |P_l|, the mean
/// denominator for both ME and HRME. Empty sets aggregate to zero.
inline double aggregate(std::span<const double> values, std::size_t pixel_count, MetricKind kind,
                        const HighRiskThreshold& thr) {
    if (values.size() > pixel_count)
        throw InconsistencyError("aggregate: " + std::to_string(values.size()) + " values but pixel count " +
                                 std::to_string(pixel_count));
    bool high = kind == MetricKind::HRMA || kind == MetricKind::HRME || kind == MetricKind::HRCU;
    double max = 0.0, sum = 0.0;
    for (double v : values) {
        if (high && !(v >= thr.threshold)) continue;
        max = std::max(max, v);
        sum += v;
    }
    switch (kind) {
    case MetricKind::MA:
    case MetricKind::HRMA:
        return max;
    case MetricKind::CU:
    case MetricKind::HRCU:
        return sum;
    case MetricKind::ME:
    case MetricKind::HRME:
        return pixel_count == 0 ? 0.0 : sum / double(pixel_count);
    }
    return 0.0;
}

inline std::array<double, 6> aggregate_all(std::span<const double> values, std::size_t pixel_count,
                                           const HighRiskThreshold& thr) {
    std::array<double, 6> out{};
    for (auto k : kAllMetrics) out[std::size_t(k)] = aggregate(values, pixel_count, k, thr);
    return out;
}

/// R[l, d, metric] for every line of a network over a sequence of days.
class LineRiskTable {
public:
    LineRiskTable() = default;
    LineRiskTable(std::vector<int> line_ids, std::vector<Date> days)
        : line_ids_(std::move(line_ids)), days_(std::move(days)),
          values_(line_ids_.size() * days_.size() * 6, 0.0) {}

    const std::vector<int>& line_ids() const { return line_ids_; }
    const std::vector<Date>& days() const { return days_; }
    std::size_t n_lines() const { return line_ids_.size(); }
    std::size_t n_days() const { return days_.size(); }

    double& at(std::size_t line, std::size_t day, MetricKind k) { return values_[offset(line, day, k)]; }
    double at(std::size_t line, std::size_t day, MetricKind k) const { return values_[offset(line, day, k)]; }

    std::optional<std::size_t> day_index(const Date& d) const {
        auto it = std::lower_bound(days_.begin(), days_.end(), d);
        if (it == days_.end() || *it != d) return std::nullopt;
        return std::size_t(it - days_.begin());
    }

    /// Risk of every line on one day under one metric, in line order.
    std::vector<double> day_slice(std::size_t day, MetricKind k) const {
        std::vector<double> out(n_lines());
        for (std::size_t l = 0; l < n_lines(); ++l) out[l] = at(l, day, k);
        return out;
    }

    /// Every (line, day) value for one metric.
    std::vector<double> population(MetricKind k) const {
        std::vector<double> out;
        out.reserve(n_lines() * n_days());
        for (std::size_t d = 0; d < n_days(); ++d)
            for (std::size_t l = 0; l < n_lines(); ++l) out.push_back(at(l, d, k));
        return out;
    }

    friend bool operator==(const LineRiskTable&, const LineRiskTable&) = default;

private:
    std::size_t offset(std::size_t line, std::size_t day, MetricKind k) const {
        return (day * line_ids_.size() + line) * 6 + std::size_t(k);
    }

    std::vector<int> line_ids_;
    std::vector<Date> days_;
    std::vector<double> values_;
};

/// Traces every line once on the shared grid of `rasters`.
inline std::vector<LinePixelSet> trace_network(const Network& net, const GridGeometry& grid) {
    std::vector<LinePixelSet> sets;
    sets.reserve(net.lines.size());
    for (const auto& l : net.lines) sets.push_back(trace_line(l, grid));
    return sets;
}

inline void check_same_grid(const std::vector<RiskRaster>& rasters) {
    for (const auto& r : rasters)
        if (!(r.grid == rasters.front().grid))
            throw GeometryError("raster for " + format_date(r.day) + " does not share the grid of " +
                                format_date(rasters.front().day));
}

/// Streams the training-year pixel multiset (one entry per line, day, pixel).
inline HighRiskThreshold threshold_from_rasters(const Network& net, const std::vector<RiskRaster>& rasters,
                                                std::string training_year = {}) {
    if (rasters.empty()) throw InsufficientDataError("no training rasters");
    check_same_grid(rasters);
    auto sets = trace_network(net, rasters.front().grid);
    RiskStatistics stats;
    for (const auto& r : rasters)
        for (const auto& s : sets) stats.add(pixel_risks(s, r).values);
    return stats.threshold(std::move(training_year));
}

/// Builds the full |L| x |days| x 6 table. Rasters must be in day order.
inline LineRiskTable build_table(const Network& net, const std::vector<RiskRaster>& rasters,
                                 const HighRiskThreshold& thr) {
    std::vector<int> ids;
    for (const auto& l : net.lines) ids.push_back(l.id);
    std::vector<Date> days;
    for (const auto& r : rasters) days.push_back(r.day);
    if (!std::is_sorted(days.begin(), days.end()) || std::adjacent_find(days.begin(), days.end()) != days.end())
        throw ValidationError("rasters must have distinct days in ascending order");
    LineRiskTable table(ids, days);
    if (rasters.empty()) return table;
    check_same_grid(rasters);
    auto sets = trace_network(net, rasters.front().grid);
    for (std::size_t d = 0; d < rasters.size(); ++d) {
        for (std::size_t l = 0; l < sets.size(); ++l) {
            PixelRisks px;
            try {
                px = pixel_risks(sets[l], rasters[d]);
            } catch (const Error& e) {
                throw GeometryError("line " + std::to_string(ids[l]) + ", day " + format_date(days[d]) + ": " + e.what());
            }
            auto all = aggregate_all(px.values, px.count, thr);
            for (auto k : kAllMetrics) table.at(l, d, k) = all[std::size_t(k)];
        }
    }
    return table;
}

/// Audit export, `line,day,metric,risk`, day-major then line then metric.
inline void write_table_csv(const LineRiskTable& t, std::ostream& out,
                            std::span<const MetricKind> metrics = kAllMetrics) {
    out << "line,day,metric,risk\n";
    for (std::size_t d = 0; d < t.n_days(); ++d) {
        auto day = format_date(t.days()[d]);
        for (std::size_t l = 0; l < t.n_lines(); ++l)
            for (auto k : metrics)
                out << t.line_ids()[l] << ',' << day << ',' << to_string(k) << ','
                    << csv::format_double(t.at(l, d, k)) << '\n';
    }
}

/// Reads a table written by `write_table_csv`. Metrics absent from the file stay zero;
/// `present` reports which ones were found.
inline LineRiskTable read_table_csv(const std::string& path, std::vector<MetricKind>* present = nullptr) {
    struct Row {
        int line;
        Date day;
        MetricKind k;
        double v;
    };
    std::vector<Row> rows;
    csv::read_file(path, "line,day,metric,risk", [&](const auto& f, std::size_t lineno) {
        auto at = path + ":" + std::to_string(lineno);
        if (f.size() != 4) throw ParseError(at + ": expected 4 fields");
        Row r{};
        if (!csv::parse_number(f[0], r.line)) throw ParseError(at + ": bad line id");
        r.day = parse_date(csv::trim(f[1]));
        r.k = parse_metric(csv::trim(f[2]));
        if (!csv::parse_number(f[3], r.v) || !(r.v >= 0.0)) throw ParseError(at + ": bad risk value");
        rows.push_back(r);
    });
    std::vector<int> ids;
    std::vector<Date> days;
    std::array<bool, 6> seen{};
    for (const auto& r : rows) {
        if (std::find(ids.begin(), ids.end(), r.line) == ids.end()) ids.push_back(r.line);
        days.push_back(r.day);
        seen[std::size_t(r.k)] = true;
    }
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    LineRiskTable t(ids, days);
    for (const auto& r : rows) {
        auto l = std::size_t(std::find(ids.begin(), ids.end(), r.line) - ids.begin());
        t.at(l, *t.day_index(r.day), r.k) = r.v;
    }
    if (present) {
        present->clear();
        for (auto k : kAllMetrics)
            if (seen[std::size_t(k)]) present->push_back(k);
    }
    return t;
}

} // namespace psps
