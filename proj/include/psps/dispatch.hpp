#pragma once

#include "psps/date.hpp"
#include "psps/error.hpp"
#include "psps/lp.hpp"
#include "psps/network.hpp"
#include "psps/plan.hpp"
#include "psps/simplex.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

namespace psps {

/// Big-M bounds on the angle difference across a de-energized line.
inline constexpr double kBigMUpper = 2.0 * std::numbers::pi;
inline constexpr double kBigMLower = -2.0 * std::numbers::pi;

/// Hourly DC dispatch with line statuses fixed.
struct DispatchResult {
    Date day{};
    int hour = 0;
    std::vector<double> gen_mw;    // per generator
    std::vector<double> flow_mw;   // per line, from -> to
    std::vector<double> angle_rad; // per bus
    std::vector<double> shed_mw;   // per bus
    double total_shed_mw = 0.0;
    double objective_pu = 0.0;     // shed in per unit (the LP objective)
    double max_balance_residual_pu = 0.0;
    bool feasible = false;
};

/// Column positions of the dispatch LP.
struct DispatchLayout {
    std::size_t gen = 0;   // first generator column
    std::size_t shed = 0;  // first shed column
    std::size_t angle = 0; // first angle column
};

/// Minimum-shed DC dispatch LP for fixed statuses. Flows of energized lines
/// are substituted by -b (theta_fr - theta_to), so flow and angle limits
/// collapse into one ranged row per line; de-energized lines keep only the
/// big-M angle window. One reference angle is pinned per connected component
/// of the full network (lowest bus id).
inline lp::Model build_dispatch_model(const Network& net, const std::vector<bool>& energized,
                                      std::span<const double> demand_mw, DispatchLayout* layout = nullptr) {
    if (energized.size() != net.lines.size()) throw InconsistencyError("dispatch: statuses must cover every line");
    if (demand_mw.size() != net.buses.size()) throw InconsistencyError("dispatch: demand must cover every bus");
    lp::Model m;
    DispatchLayout lay;
    const std::size_t nb = net.buses.size();

    lay.gen = 0;
    for (const auto& g : net.generators)
        m.add_variable("pg_" + std::to_string(g.id), 0.0, g.p_max_pu); // lower bound relaxed to 0
    lay.shed = m.variables().size();
    for (std::size_t n = 0; n < nb; ++n) {
        double pd = demand_mw[n] / net.base_mva;
        m.add_variable("pls_" + std::to_string(net.buses[n].id), 0.0, pd, 1.0);
    }
    lay.angle = m.variables().size();
    std::vector<bool> is_ref(nb, false);
    for (auto r : net.reference_buses()) is_ref[r] = true;
    for (std::size_t n = 0; n < nb; ++n) {
        double bound = is_ref[n] ? 0.0 : lp::kInf;
        m.add_variable("va_" + std::to_string(net.buses[n].id), -bound, bound);
    }

    std::vector<std::vector<lp::Term>> balance(nb);
    for (const auto& g : net.generators) balance[g.bus_index].push_back({lay.gen + std::size_t(&g - net.generators.data()), -1.0});
    for (std::size_t n = 0; n < nb; ++n) balance[n].push_back({lay.shed + n, -1.0});

    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const auto& line = net.lines[l];
        std::size_t fr = lay.angle + line.from_index, to = lay.angle + line.to_index;
        std::string name = "line_" + std::to_string(line.id);
        if (!energized[l]) {
            m.add_constraint(name + "_off", {{fr, 1.0}, {to, -1.0}}, kBigMLower, kBigMUpper);
            continue;
        }
        double cap = line.flow_limit_pu / std::abs(line.susceptance);
        m.add_constraint(name, {{fr, 1.0}, {to, -1.0}}, std::max(line.angle_min, -cap), std::min(line.angle_max, cap));
        // f = -b (va_fr - va_to) leaves `fr` and enters `to`
        double b = line.susceptance;
        balance[line.from_index].push_back({fr, -b});
        balance[line.from_index].push_back({to, b});
        balance[line.to_index].push_back({fr, b});
        balance[line.to_index].push_back({to, -b});
    }
    for (std::size_t n = 0; n < nb; ++n) {
        double pd = demand_mw[n] / net.base_mva;
        m.add_constraint("balance_" + std::to_string(net.buses[n].id), std::move(balance[n]), -pd, -pd);
    }
    if (layout) *layout = lay;
    return m;
}

/// Solves the fixed-status dispatch for one hour. Shedding all load is always
/// feasible, so an infeasible report is an internal error carrying the model.
inline DispatchResult dispatch_fixed(const Network& net, const std::vector<bool>& energized,
                                     std::span<const double> demand_mw, Date day = {}, int hour = 0) {
    DispatchLayout lay;
    auto model = build_dispatch_model(net, energized, demand_mw, &lay);
    auto sol = lp::solve_lp(model);
    if (sol.status != lp::Status::Optimal) {
        std::ostringstream dump;
        model.write_lp(dump);
        throw SolverError("dispatch LP for " + format_date(day) + " hour " + std::to_string(hour) + " returned " +
                          lp::to_string(sol.status) + "; model:\n" + dump.str());
    }
    DispatchResult r;
    r.day = day;
    r.hour = hour;
    r.feasible = true;
    r.objective_pu = sol.objective;
    for (std::size_t g = 0; g < net.generators.size(); ++g) r.gen_mw.push_back(sol.x[lay.gen + g] * net.base_mva);
    for (std::size_t n = 0; n < net.buses.size(); ++n) {
        r.angle_rad.push_back(sol.x[lay.angle + n]);
        double shed = std::clamp(sol.x[lay.shed + n] * net.base_mva, 0.0, demand_mw[n]);
        r.shed_mw.push_back(shed);
        r.total_shed_mw += shed;
    }
    std::vector<double> injection(net.buses.size(), 0.0); // per unit
    for (std::size_t g = 0; g < net.generators.size(); ++g)
        injection[net.generators[g].bus_index] += sol.x[lay.gen + g];
    for (std::size_t n = 0; n < net.buses.size(); ++n)
        injection[n] += -demand_mw[n] / net.base_mva + sol.x[lay.shed + n];
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const auto& line = net.lines[l];
        double f = 0.0;
        if (energized[l])
            f = -line.susceptance * (r.angle_rad[line.from_index] - r.angle_rad[line.to_index]);
        r.flow_mw.push_back(f * net.base_mva);
        injection[line.from_index] -= f;
        injection[line.to_index] += f;
    }
    for (double v : injection) r.max_balance_residual_pu = std::max(r.max_balance_residual_pu, std::abs(v));
    return r;
}

/// A plan held fixed over a day of hourly dispatches.
struct DaySimulation {
    std::vector<DispatchResult> hours;
    double total_shed_mwh = 0.0;

    std::vector<double> hourly_shed_mw() const {
        std::vector<double> out;
        for (const auto& h : hours) out.push_back(h.total_shed_mw);
        return out;
    }
};

/// `demand_mw[h]` holds per-bus MW for hour h; hours are independent 1-hour solves.
inline DaySimulation simulate_day(const Network& net, const std::vector<bool>& energized,
                                  const std::vector<std::vector<double>>& demand_mw, Date day = {}) {
    if (demand_mw.size() != 24) throw InconsistencyError("simulate_day: expected 24 hourly demand vectors");
    DaySimulation sim;
    for (int h = 0; h < 24; ++h) {
        sim.hours.push_back(dispatch_fixed(net, energized, demand_mw[std::size_t(h)], day, h));
        sim.total_shed_mwh += sim.hours.back().total_shed_mw;
    }
    return sim;
}

inline DaySimulation simulate_day(const Network& net, const DeEnergizationPlan& plan,
                                  const std::vector<std::vector<double>>& demand_mw) {
    return simulate_day(net, plan.energized(net), demand_mw, plan.day);
}

} // namespace psps
