#pragma once

#include "psps/csv.hpp"
#include "psps/date.hpp"
#include "psps/error.hpp"
#include "psps/metrics.hpp"
#include "psps/plan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace psps {

/// Number of distinct lines switched off at least once across `plans`.
inline std::size_t unique_lines(std::span<const DeEnergizationPlan> plans) {
    for (const auto& p : plans)
        if (p.method != plans.front().method || p.metric != plans.front().metric)
            throw InconsistencyError("unique_lines: plans mix methods or metrics");
    std::set<int> seen;
    for (const auto& p : plans) seen.insert(p.off_lines.begin(), p.off_lines.end());
    return seen.size();
}

/// Days each line of `line_ids` spent switched off across `plans`.
inline std::vector<double> count_vector(std::span<const DeEnergizationPlan> plans, std::span<const int> line_ids) {
    std::map<int, std::size_t> pos;
    for (std::size_t i = 0; i < line_ids.size(); ++i) pos[line_ids[i]] = i;
    std::vector<double> counts(line_ids.size(), 0.0);
    for (const auto& p : plans) {
        for (int id : p.off_lines) {
            auto it = pos.find(id);
            if (it == pos.end()) throw InconsistencyError("plan switches off line " + std::to_string(id) +
                                                          ", which is not in the line universe");
            counts[it->second] += 1.0;
        }
    }
    return counts;
}

/// Cosine similarity of two count vectors; zero when either vector is all zero.
inline double similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw InconsistencyError("similarity: vectors of length " + std::to_string(u.size()) + " and " +
                                 std::to_string(v.size()));
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), 0.0, 1.0);
}

/// Trailing mean over `window` entries; the first entries average the shorter prefix.
inline std::vector<double> rolling_average(std::span<const double> series, std::size_t window = 7) {
    if (series.empty()) throw InsufficientDataError("rolling average of an empty series");
    if (window == 0) throw InconsistencyError("rolling average window must be positive");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        double sum = 0.0;
        for (std::size_t k = first; k <= i; ++k) sum += series[k];
        out[i] = sum / double(i + 1 - first);
    }
    return out;
}

/// One row/column of the similarity matrix.
struct PlanSeriesKey {
    MetricKind metric = MetricKind::MA;
    Method method = Method::Threshold;

    std::string label() const { return std::string(to_string(metric)) + "_" + std::string(to_string(method)); }
    friend auto operator<=>(const PlanSeriesKey&, const PlanSeriesKey&) = default;
};

/// Metric-major order: MA_THRESHOLD, MA_OPS, ME_THRESHOLD, ...
inline std::vector<PlanSeriesKey> all_series_keys() {
    std::vector<PlanSeriesKey> keys;
    for (auto k : kAllMetrics)
        for (auto m : {Method::Threshold, Method::Ops}) keys.push_back({k, m});
    return keys;
}

struct SimilarityMatrix {
    std::vector<PlanSeriesKey> keys;
    std::vector<std::vector<double>> values;
};

/// Pairwise similarity of the count vectors; keys absent from `counts` get all-zero vectors.
inline SimilarityMatrix similarity_matrix(const std::map<PlanSeriesKey, std::vector<double>>& counts,
                                          std::size_t n_lines) {
    SimilarityMatrix m;
    m.keys = all_series_keys();
    std::vector<std::vector<double>> vecs;
    for (const auto& k : m.keys) {
        auto it = counts.find(k);
        vecs.push_back(it == counts.end() ? std::vector<double>(n_lines, 0.0) : it->second);
    }
    m.values.assign(m.keys.size(), std::vector<double>(m.keys.size(), 0.0));
    for (std::size_t i = 0; i < vecs.size(); ++i)
        for (std::size_t j = i; j < vecs.size(); ++j) m.values[i][j] = m.values[j][i] = similarity(vecs[i], vecs[j]);
    return m;
}

// ---------------------------------------------------------------------------
// Report writers. Every writer produces the same bytes for the same input.

inline void write_similarity_csv(const SimilarityMatrix& m, std::ostream& out) {
    out << "series";
    for (const auto& k : m.keys) out << ',' << k.label();
    out << '\n';
    for (std::size_t i = 0; i < m.keys.size(); ++i) {
        out << m.keys[i].label();
        for (double v : m.values[i]) out << ',' << csv::format_fixed(v, 6);
        out << '\n';
    }
}

/// Daily shed of one (metric, method) series with its trailing 7-day mean.
struct ShedSeries {
    PlanSeriesKey key;
    std::vector<Date> days;
    std::vector<double> shed_mwh;

    double total() const {
        double t = 0.0;
        for (double v : shed_mwh) t += v;
        return t;
    }
};

namespace detail {

inline std::string svg_number(double v) { return csv::format_fixed(v, 2); }

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

} // namespace detail

/// Line chart of the 7-day rolling average of each series (shared day axis).
inline void write_rolling_svg(std::span<const ShedSeries> series, const std::string& title, std::ostream& out) {
    using detail::svg_number;
    const double w = 800, h = 360, left = 70, right = 20, top = 40, bottom = 50;
    std::vector<std::vector<double>> rolled;
    double ymax = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
        rolled.push_back(s.shed_mwh.empty() ? std::vector<double>{} : rolling_average(s.shed_mwh));
        for (double v : rolled.back()) ymax = std::max(ymax, v);
        n = std::max(n, s.shed_mwh.size());
    }
    if (ymax <= 0.0) ymax = 1.0;
    auto px = [&](std::size_t i) { return left + (n > 1 ? double(i) / double(n - 1) : 0.0) * (w - left - right); };
    auto py = [&](double v) { return top + (1.0 - v / ymax) * (h - top - bottom); };
    static constexpr std::array<const char*, 4> colors = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_number(w) << "\" height=\"" << svg_number(h)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << svg_number(w / 2) << "\" y=\"20\" text-anchor=\"middle\">" << detail::svg_escape(title)
        << "</text>\n";
    out << "<line x1=\"" << svg_number(left) << "\" y1=\"" << svg_number(h - bottom) << "\" x2=\"" << svg_number(w - right)
        << "\" y2=\"" << svg_number(h - bottom) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << svg_number(left) << "\" y1=\"" << svg_number(top) << "\" x2=\"" << svg_number(left)
        << "\" y2=\"" << svg_number(h - bottom) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double v = ymax * t / 4.0;
        out << "<text x=\"" << svg_number(left - 6) << "\" y=\"" << svg_number(py(v) + 4) << "\" text-anchor=\"end\">"
            << csv::format_fixed(v, 1) << "</text>\n";
    }
    out << "<text x=\"15\" y=\"" << svg_number((top + h - bottom) / 2) << "\" transform=\"rotate(-90 15 "
        << svg_number((top + h - bottom) / 2) << ")\" text-anchor=\"middle\">7-day mean shed (MWh/day)</text>\n";
    if (!series.empty() && !series.front().days.empty()) {
        const auto& days = series.front().days;
        out << "<text x=\"" << svg_number(left) << "\" y=\"" << svg_number(h - bottom + 18) << "\">"
            << format_date(days.front()) << "</text>\n";
        out << "<text x=\"" << svg_number(w - right) << "\" y=\"" << svg_number(h - bottom + 18)
            << "\" text-anchor=\"end\">" << format_date(days.back()) << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % colors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < rolled[s].size(); ++i)
            out << (i ? " " : "") << svg_number(px(i)) << ',' << svg_number(py(rolled[s][i]));
        out << "\"/>\n";
        double ly = top + 16.0 * double(s);
        out << "<rect x=\"" << svg_number(w - right - 150) << "\" y=\"" << svg_number(ly - 9) << "\" width=\"12\" height=\"4\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << svg_number(w - right - 132) << "\" y=\"" << svg_number(ly - 3) << "\">"
            << series[s].key.label() << "</text>\n";
    }
    out << "</svg>\n";
}

/// Greyscale heatmap of the similarity matrix, darker meaning more similar.
inline void write_heatmap_svg(const SimilarityMatrix& m, std::ostream& out) {
    using detail::svg_number;
    const double cell = 36, left = 120, top = 120;
    const double size = cell * double(m.keys.size());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_number(left + size + 20) << "\" height=\""
        << svg_number(top + size + 20) << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < m.keys.size(); ++i) {
        double c = left + cell * (double(i) + 0.5);
        out << "<text x=\"" << svg_number(left - 6) << "\" y=\"" << svg_number(top + cell * (double(i) + 0.5) + 3)
            << "\" text-anchor=\"end\">" << m.keys[i].label() << "</text>\n";
        out << "<text x=\"" << svg_number(c) << "\" y=\"" << svg_number(top - 6) << "\" transform=\"rotate(-60 "
            << svg_number(c) << ' ' << svg_number(top - 6) << ")\">" << m.keys[i].label() << "</text>\n";
    }
    for (std::size_t i = 0; i < m.keys.size(); ++i) {
        for (std::size_t j = 0; j < m.keys.size(); ++j) {
            double v = m.values[i][j];
            int shade = int(std::lround(255.0 * (1.0 - v)));
            double x = left + cell * double(j), y = top + cell * double(i);
            out << "<rect x=\"" << svg_number(x) << "\" y=\"" << svg_number(y) << "\" width=\"" << svg_number(cell)
                << "\" height=\"" << svg_number(cell) << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade
                << ")\" stroke=\"#999\"/>\n";
            out << "<text x=\"" << svg_number(x + cell / 2) << "\" y=\"" << svg_number(y + cell / 2 + 3)
                << "\" text-anchor=\"middle\" fill=\"" << (v > 0.5 ? "white" : "black") << "\">"
                << csv::format_fixed(v, 2) << "</text>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace psps
