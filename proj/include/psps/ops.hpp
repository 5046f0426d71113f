#pragma once

#include "psps/dispatch.hpp"
#include "psps/error.hpp"
#include "psps/lp.hpp"
#include "psps/metrics.hpp"
#include "psps/mip.hpp"
#include "psps/network.hpp"
#include "psps/plan.hpp"
#include "psps/threshold_planner.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace psps {

/// One Optimal Power Shutoff problem: a single decision hour of one day under
/// one metric. Lines with zero risk are not switchable.
struct OpsInstance {
    const Network* network = nullptr;
    Date day{};
    MetricKind metric = MetricKind::MA;
    int hour = 0;
    std::vector<double> demand_mw;  // per bus at `hour`
    std::vector<double> risk;       // R[l, d] per line, network order
    double risk_budget = 0.0;
    double epsilon_switch = 0.01;
    double big_m_upper = kBigMUpper;
    double big_m_lower = kBigMLower;
    std::optional<std::vector<bool>> warm_start; // energized status per line
    double mip_gap = 1e-4;
    double time_limit_s = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> switchable() const {
        std::vector<std::size_t> out;
        for (std::size_t l = 0; l < risk.size(); ++l)
            if (risk[l] > 0.0) out.push_back(l);
        return out;
    }

    void validate() const {
        if (!network) throw InconsistencyError("ops instance has no network");
        if (risk.size() != network->lines.size()) throw InconsistencyError("ops instance: risk must cover every line");
        if (demand_mw.size() != network->buses.size()) throw InconsistencyError("ops instance: demand must cover every bus");
        for (double r : risk)
            if (!(r >= 0.0)) throw InconsistencyError("ops instance: negative risk");
        if (!(risk_budget >= 0.0)) throw InconsistencyError("ops instance: negative risk budget");
        if (!(epsilon_switch > 0.0)) throw InconsistencyError("ops instance: epsilon_switch must be positive");
        if (!(big_m_lower < 0.0 && big_m_upper > 0.0)) throw InconsistencyError("ops instance: big-M bounds must straddle zero");
        if (warm_start && warm_start->size() != network->lines.size())
            throw InconsistencyError("ops instance: warm start must cover every line");
        if (hour < 0 || hour > 23) throw InconsistencyError("ops instance: hour out of range");
    }
};

/// Column positions in the OPS model. `status[l]` is the binary column of a
/// switchable line, or absent.
struct OpsLayout {
    std::size_t gen = 0, shed = 0, flow = 0, angle = 0;
    std::vector<std::optional<std::size_t>> status;
    std::vector<std::size_t> switchable;
};

struct OpsModel {
    lp::Model model;
    OpsLayout layout;
};

/// Mixed-integer model for one hour: generation and shed bounds, status-gated
/// flow limits, big-M angle windows, big-M DC flow pairs, nodal balance and the
/// risk budget; the objective is shed plus epsilon per de-energized line.
inline OpsModel build_ops(const OpsInstance& inst) {
    inst.validate();
    const Network& net = *inst.network;
    const double mu = inst.big_m_upper, ml = inst.big_m_lower;
    OpsModel om;
    auto& m = om.model;
    auto& lay = om.layout;
    lay.switchable = inst.switchable();
    lay.status.assign(net.lines.size(), std::nullopt);

    lay.gen = 0;
    for (const auto& g : net.generators) m.add_variable("pg_" + std::to_string(g.id), 0.0, g.p_max_pu);
    lay.shed = m.variables().size();
    for (std::size_t n = 0; n < net.buses.size(); ++n)
        m.add_variable("pls_" + std::to_string(net.buses[n].id), 0.0, inst.demand_mw[n] / net.base_mva, 1.0);
    lay.flow = m.variables().size();
    for (const auto& l : net.lines)
        m.add_variable("f_" + std::to_string(l.id), -l.flow_limit_pu, l.flow_limit_pu);
    lay.angle = m.variables().size();
    std::vector<bool> is_ref(net.buses.size(), false);
    for (auto r : net.reference_buses()) is_ref[r] = true;
    for (std::size_t n = 0; n < net.buses.size(); ++n) {
        double bound = is_ref[n] ? 0.0 : lp::kInf;
        m.add_variable("va_" + std::to_string(net.buses[n].id), -bound, bound);
    }
    // epsilon * sum(1 - z) = epsilon * |switch| - epsilon * sum(z)
    for (auto l : lay.switchable) {
        lay.status[l] = m.add_variable("z_" + std::to_string(net.lines[l].id), 0.0, 1.0, -inst.epsilon_switch, true);
        if (inst.warm_start) m.set_hint(*lay.status[l], (*inst.warm_start)[l] ? 1.0 : 0.0);
    }
    m.set_objective_offset(inst.epsilon_switch * double(lay.switchable.size()));

    std::vector<std::vector<lp::Term>> balance(net.buses.size());
    for (std::size_t g = 0; g < net.generators.size(); ++g)
        balance[net.generators[g].bus_index].push_back({lay.gen + g, -1.0});
    for (std::size_t n = 0; n < net.buses.size(); ++n) balance[n].push_back({lay.shed + n, -1.0});

    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const auto& line = net.lines[l];
        const std::string tag = std::to_string(line.id);
        std::size_t f = lay.flow + l, fr = lay.angle + line.from_index, to = lay.angle + line.to_index;
        const double b = line.susceptance, ab = std::abs(b), fmax = line.flow_limit_pu;
        balance[line.from_index].push_back({f, 1.0});
        balance[line.to_index].push_back({f, -1.0});
        if (auto z = lay.status[l]) {
            m.add_constraint("flow_ub_" + tag, {{f, 1.0}, {*z, -fmax}}, -lp::kInf, 0.0);
            m.add_constraint("flow_lb_" + tag, {{f, 1.0}, {*z, fmax}}, 0.0, lp::kInf);
            // va_fr - va_to >= angle_min z + M_lo (1 - z)
            m.add_constraint("angle_lb_" + tag, {{fr, 1.0}, {to, -1.0}, {*z, -(line.angle_min - ml)}}, ml, lp::kInf);
            // va_fr - va_to <= angle_max z + M_up (1 - z)
            m.add_constraint("angle_ub_" + tag, {{fr, 1.0}, {to, -1.0}, {*z, -(line.angle_max - mu)}}, -lp::kInf, mu);
            // f >= -b (va_fr - va_to) + |b| M_lo (1 - z)
            m.add_constraint("dc_lb_" + tag, {{f, 1.0}, {fr, b}, {to, -b}, {*z, ab * ml}}, ab * ml, lp::kInf);
            // f <= -b (va_fr - va_to) + |b| M_up (1 - z)
            m.add_constraint("dc_ub_" + tag, {{f, 1.0}, {fr, b}, {to, -b}, {*z, ab * mu}}, -lp::kInf, ab * mu);
        } else {
            m.add_constraint("angle_" + tag, {{fr, 1.0}, {to, -1.0}}, line.angle_min, line.angle_max);
            m.add_constraint("dc_" + tag, {{f, 1.0}, {fr, b}, {to, -b}}, 0.0, 0.0);
        }
    }
    for (std::size_t n = 0; n < net.buses.size(); ++n) {
        double pd = inst.demand_mw[n] / net.base_mva;
        m.add_constraint("balance_" + std::to_string(net.buses[n].id), std::move(balance[n]), -pd, -pd);
    }
    if (!lay.switchable.empty()) {
        std::vector<lp::Term> terms;
        for (auto l : lay.switchable) terms.push_back({*lay.status[l], inst.risk[l]});
        m.add_constraint("risk_budget", std::move(terms), -lp::kInf, inst.risk_budget);
    }
    return om;
}

struct OpsSolution {
    DeEnergizationPlan plan;
    DispatchResult dispatch; // at the decision hour, from the MILP solution
    double objective = 0.0;  // shed (pu) + epsilon * #off
    double gap = 0.0;
    double bound = 0.0;
    std::size_t nodes = 0;
    bool timed_out = false;
    bool hint_accepted = false;
};

inline OpsSolution solve_ops(const OpsInstance& inst) {
    auto om = build_ops(inst);
    const Network& net = *inst.network;
    lp::MipOptions opt;
    opt.mip_gap = inst.mip_gap;
    opt.time_limit_s = inst.time_limit_s;
    auto res = lp::solve_mip(om.model, opt);
    if (!res.has_incumbent) {
        if (res.status == lp::Status::TimeLimit)
            throw SolverError("OPS " + format_date(inst.day) + " " + std::string(to_string(inst.metric)) +
                              ": time limit reached without an incumbent");
        throw SolverError("OPS " + format_date(inst.day) + " " + std::string(to_string(inst.metric)) +
                          ": no feasible switching plan (" + lp::to_string(res.status) + ")");
    }
    const auto& lay = om.layout;
    const auto& x = res.x;
    OpsSolution sol;
    sol.objective = res.objective;
    sol.gap = res.gap;
    sol.bound = res.bound;
    sol.nodes = res.nodes;
    sol.timed_out = res.timed_out;
    sol.hint_accepted = res.hint_accepted;

    auto& plan = sol.plan;
    plan.day = inst.day;
    plan.metric = inst.metric;
    plan.method = Method::Ops;
    plan.risk_budget = inst.risk_budget;
    std::vector<bool> on(net.lines.size(), true);
    for (auto l : lay.switchable) {
        if (x[*lay.status[l]] < 0.5) {
            on[l] = false;
            plan.off_lines.push_back(net.lines[l].id);
        }
    }
    std::sort(plan.off_lines.begin(), plan.off_lines.end());
    plan.residual_risk = residual_risk(inst.risk, on);

    auto& dr = sol.dispatch;
    dr.day = inst.day;
    dr.hour = inst.hour;
    dr.feasible = true;
    for (std::size_t g = 0; g < net.generators.size(); ++g) dr.gen_mw.push_back(x[lay.gen + g] * net.base_mva);
    std::vector<double> injection(net.buses.size(), 0.0);
    for (std::size_t g = 0; g < net.generators.size(); ++g) injection[net.generators[g].bus_index] += x[lay.gen + g];
    for (std::size_t n = 0; n < net.buses.size(); ++n) {
        dr.angle_rad.push_back(x[lay.angle + n]);
        double shed = std::clamp(x[lay.shed + n] * net.base_mva, 0.0, inst.demand_mw[n]);
        dr.shed_mw.push_back(shed);
        dr.total_shed_mw += shed;
        dr.objective_pu += x[lay.shed + n];
        injection[n] += x[lay.shed + n] - inst.demand_mw[n] / net.base_mva;
    }
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        double f = x[lay.flow + l];
        dr.flow_mw.push_back(f * net.base_mva);
        injection[net.lines[l].from_index] -= f;
        injection[net.lines[l].to_index] += f;
    }
    for (double v : injection) dr.max_balance_residual_pu = std::max(dr.max_balance_residual_pu, std::abs(v));
    return sol;
}

/// Hour with the most shed; the earliest hour wins ties.
inline int worst_case_hour(std::span<const double> hourly_shed_mw) {
    int best = 0;
    for (std::size_t h = 1; h < hourly_shed_mw.size(); ++h)
        if (hourly_shed_mw[h] > hourly_shed_mw[std::size_t(best)] + 1e-9) best = int(h);
    return best;
}

inline double risk_budget(const DeEnergizationPlan& threshold_plan) { return threshold_plan.residual_risk; }

struct OpsOptions {
    double epsilon_switch = 0.01;
    double mip_gap = 1e-4;
    double time_limit_s = std::numeric_limits<double>::infinity();
};

struct OpsDay {
    OpsSolution solution;
    DaySimulation simulation;           // OPS statuses held for 24 hours
    DaySimulation threshold_simulation; // the plan that fixed hour and budget
    int decision_hour = 0;
};

/// Risk of every network line on one day, looked up by line id.
inline std::vector<double> line_risks(const Network& net, const LineRiskTable& table, MetricKind metric, const Date& day) {
    auto d = table.day_index(day);
    if (!d) throw ValidationError("risk table has no entries for " + format_date(day));
    std::vector<double> risk(net.lines.size(), 0.0);
    const auto& ids = table.line_ids();
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        auto it = std::find(ids.begin(), ids.end(), net.lines[l].id);
        if (it == ids.end()) throw ValidationError("risk table has no entries for line " + std::to_string(net.lines[l].id));
        risk[l] = table.at(std::size_t(it - ids.begin()), *d, metric);
    }
    return risk;
}

/// Simulates the threshold plan to pick the decision hour, solves the OPS there
/// with the threshold plan's residual risk as budget and its statuses as the
/// warm start, then holds the OPS statuses for the whole day.
inline OpsDay plan_ops_day(const Network& net, const LineRiskTable& table, MetricKind metric, const Date& day,
                           const std::vector<std::vector<double>>& demand_mw, const DeEnergizationPlan& threshold_plan,
                           const OpsOptions& options = {}) {
    OpsDay out;
    out.threshold_simulation = simulate_day(net, threshold_plan, demand_mw);
    auto hourly = out.threshold_simulation.hourly_shed_mw();
    out.decision_hour = worst_case_hour(hourly);

    OpsInstance inst;
    inst.network = &net;
    inst.day = day;
    inst.metric = metric;
    inst.hour = out.decision_hour;
    inst.demand_mw = demand_mw[std::size_t(out.decision_hour)];
    inst.risk = line_risks(net, table, metric, day);
    inst.risk_budget = risk_budget(threshold_plan);
    inst.epsilon_switch = options.epsilon_switch;
    inst.warm_start = threshold_plan.energized(net);
    inst.mip_gap = options.mip_gap;
    inst.time_limit_s = options.time_limit_s;
    out.solution = solve_ops(inst);
    out.simulation = simulate_day(net, out.solution.plan, demand_mw);
    return out;
}

} // namespace psps
