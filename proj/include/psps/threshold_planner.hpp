#pragma once

#include "psps/error.hpp"
#include "psps/metrics.hpp"
#include "psps/network.hpp"
#include "psps/plan.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace psps {

struct PercentileThreshold {
    MetricKind metric = MetricKind::MA;
    double q = 95.0;
    double value = 0.0;
};

/// Nearest-rank percentile: the ceil(q N / 100)-th smallest value.
inline double nearest_rank(std::vector<double> values, double q) {
    if (values.empty()) throw InsufficientDataError("percentile of an empty population");
    if (!(q > 0.0 && q < 100.0)) throw InconsistencyError("percentile q must lie in (0, 100)");
    std::sort(values.begin(), values.end());
    double n = double(values.size());
    // q * n is exact for integral q and realistic n, so the division is the only rounding
    auto rank = std::size_t(std::ceil(q * n / 100.0 - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

/// Percentile over every (line, day) value of `metric` in the table.
inline PercentileThreshold compute_percentile(const LineRiskTable& table, MetricKind metric, double q = 95.0) {
    auto pop = table.population(metric);
    if (pop.empty()) throw InsufficientDataError("risk table has no values for " + std::string(to_string(metric)));
    return {metric, q, nearest_rank(std::move(pop), q)};
}

/// Switches off every line whose risk is strictly above the percentile value.
inline DeEnergizationPlan plan_threshold(const LineRiskTable& table, MetricKind metric, const Date& day,
                                         const PercentileThreshold& pct) {
    auto d = table.day_index(day);
    if (!d) throw ValidationError("risk table has no entries for " + format_date(day));
    DeEnergizationPlan plan;
    plan.day = day;
    plan.metric = metric;
    plan.method = Method::Threshold;
    for (std::size_t l = 0; l < table.n_lines(); ++l) {
        double r = table.at(l, *d, metric);
        if (r > pct.value) plan.off_lines.push_back(table.line_ids()[l]);
        else plan.residual_risk += r;
    }
    std::sort(plan.off_lines.begin(), plan.off_lines.end());
    return plan;
}

} // namespace psps
