#pragma once

#include "psps/lp.hpp"
#include "psps/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace psps::lp {

struct MipOptions {
    double mip_gap = 1e-4;        // relative
    double absolute_gap = 1e-9;
    double integrality_tol = 1e-6;
    double feasibility_tol = 1e-6;
    double time_limit_s = std::numeric_limits<double>::infinity();
    std::size_t node_limit = 0;   // 0 = unlimited
    SimplexOptions simplex;
};

struct MipResult {
    Status status = Status::Infeasible;
    bool has_incumbent = false;
    double objective = std::numeric_limits<double>::infinity();
    double bound = -std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    std::vector<double> x;
    std::size_t nodes = 0;
    bool hint_accepted = false;
    bool timed_out = false;
};

/// Depth-first branch and bound over the dual-simplex LP relaxation. Each
/// child inherits its parent's optimal tableau and only re-optimises after the
/// branching bound change. Start hints on the integer variables are tried as
/// the first incumbent; they never restrict the search.
inline MipResult solve_mip(const Model& model, const MipOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    const auto& vars = model.variables();
    std::vector<std::size_t> ints;
    for (std::size_t j = 0; j < vars.size(); ++j)
        if (vars[j].integer) ints.push_back(j);

    MipResult res;
    auto tolerance = [&] { return std::max(opt.absolute_gap, opt.mip_gap * std::abs(res.objective)); };
    double pruned_bound = std::numeric_limits<double>::infinity();

    // Candidate incumbent: integers rounded and fixed, continuous part re-optimised.
    auto accept = [&](const DualSimplex& lp) {
        DualSimplex fixed = lp;
        for (auto j : ints) {
            double v = std::round(lp.value(j));
            fixed.set_bounds(j, v, v);
        }
        if (fixed.solve() != Status::Optimal) return false;
        auto x = fixed.solution();
        for (auto j : ints) x[j] = std::round(x[j]);
        if (model.max_violation(x) > opt.feasibility_tol) return false;
        double obj = model.objective(x);
        if (res.has_incumbent && obj >= res.objective) return false;
        res.has_incumbent = true;
        res.objective = obj;
        res.x = std::move(x);
        return true;
    };
    auto fractional = [&](const DualSimplex& lp) {
        std::size_t pick = vars.size();
        double best = opt.integrality_tol;
        for (auto j : ints) {
            double v = lp.value(j);
            double f = std::abs(v - std::round(v));
            if (f > best) best = f, pick = j;
        }
        return pick;
    };

    DualSimplex root(model, opt.simplex);
    auto st = root.solve();
    ++res.nodes;
    if (st == Status::Infeasible || st == Status::Unbounded) {
        res.status = st;
        return res;
    }
    if (st != Status::Optimal) throw SolverError(std::string("MIP root relaxation: ") + to_string(st));

    // start hint: fix every hinted integer and re-optimise the rest
    bool hinted = !ints.empty();
    for (auto j : ints) hinted = hinted && model.hints()[j].has_value();
    if (hinted) {
        DualSimplex trial = root;
        for (auto j : ints) {
            double v = std::round(*model.hints()[j]);
            v = std::clamp(v, vars[j].lower, vars[j].upper);
            trial.set_bounds(j, v, v);
        }
        if (trial.solve() == Status::Optimal) res.hint_accepted = accept(trial);
    }

    struct Node {
        DualSimplex lp;
        double parent_bound;
    };
    std::vector<Node> stack;
    stack.push_back({std::move(root), -std::numeric_limits<double>::infinity()});
    bool root_pending = true; // root is already solved

    while (!stack.empty()) {
        if (elapsed() > opt.time_limit_s || (opt.node_limit && res.nodes >= opt.node_limit)) {
            res.timed_out = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        if (res.has_incumbent && node.parent_bound >= res.objective - tolerance()) {
            pruned_bound = std::min(pruned_bound, node.parent_bound);
            continue;
        }
        if (!root_pending) {
            ++res.nodes;
            st = node.lp.solve();
            if (st == Status::Infeasible) continue;
            if (st != Status::Optimal) throw SolverError(std::string("MIP node relaxation: ") + to_string(st));
        }
        root_pending = false;
        double bound = node.lp.objective();
        if (res.has_incumbent && bound >= res.objective - tolerance()) {
            pruned_bound = std::min(pruned_bound, bound);
            continue;
        }
        std::size_t j = fractional(node.lp);
        if (j == vars.size()) {
            accept(node.lp);
            continue;
        }
        double v = node.lp.value(j);
        double down_hi = std::floor(v), up_lo = std::ceil(v);
        Node down{node.lp, bound};
        down.lp.set_bounds(j, node.lp.lower(j), down_hi);
        Node up{std::move(node.lp), bound};
        up.lp.set_bounds(j, up_lo, up.lp.upper(j));
        // explore the nearer side first
        if (v - down_hi >= 0.5) {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        } else {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        }
    }

    double open = std::numeric_limits<double>::infinity();
    for (const auto& n : stack) open = std::min(open, n.parent_bound);
    if (!res.has_incumbent) {
        res.status = res.timed_out ? Status::TimeLimit : Status::Infeasible;
        res.bound = open;
        return res;
    }
    res.bound = std::min({res.objective, pruned_bound, open});
    res.gap = (res.objective - res.bound) / std::max(std::abs(res.objective), 1e-10);
    if (res.objective - res.bound <= opt.absolute_gap) res.gap = 0.0;
    res.status = res.timed_out ? Status::TimeLimit : Status::Optimal;
    return res;
}

} // namespace psps::lp
