#pragma once

#include "psps/date.hpp"
#include "psps/error.hpp"
#include "psps/metrics.hpp"
#include "psps/network.hpp"

#include <algorithm>
#include <optional>
#include <string_view>
#include <vector>

namespace psps {

enum class Method { Threshold, Ops };

inline constexpr std::string_view to_string(Method m) { return m == Method::Threshold ? "THRESHOLD" : "OPS"; }

inline Method parse_method(std::string_view s) {
    if (s == "THRESHOLD" || s == "threshold") return Method::Threshold;
    if (s == "OPS" || s == "ops") return Method::Ops;
    throw ParseError("unknown method '" + std::string(s) + "'");
}

/// Lines switched off for one day under one metric and planning method.
struct DeEnergizationPlan {
    Date day{};
    MetricKind metric = MetricKind::MA;
    Method method = Method::Threshold;
    std::vector<int> off_lines; // sorted line ids
    double residual_risk = 0.0; // risk left on energized switchable lines
    std::optional<double> risk_budget;

    bool is_off(int line_id) const { return std::binary_search(off_lines.begin(), off_lines.end(), line_id); }

    /// Energization status per line, in network order.
    std::vector<bool> energized(const Network& net) const {
        std::vector<bool> on(net.lines.size(), true);
        for (int id : off_lines) on[net.line_index(id)] = false;
        return on;
    }
};

/// Sum of `risk` over lines that are energized.
inline double residual_risk(const std::vector<double>& risk, const std::vector<bool>& energized) {
    double total = 0.0;
    for (std::size_t l = 0; l < risk.size(); ++l)
        if (energized[l] && risk[l] > 0.0) total += risk[l];
    return total;
}

} // namespace psps
