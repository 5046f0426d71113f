#pragma once

// Brute-force references. Nothing here calls the production metric, trace or
// MILP code paths; the enumeration evaluates each switching vector through
// the fixed-status dispatch LP, which uses a separate formulation.

#include "psps/dispatch.hpp"
#include "psps/error.hpp"
#include "psps/metrics.hpp"
#include "psps/ops.hpp"
#include "psps/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <vector>

namespace psps::oracle {

inline constexpr std::size_t kMaxEnumerated = 20;

struct EnumerationResult {
    std::vector<bool> energized;     // per network line
    double objective = 0.0;          // shed (pu) + epsilon * #off
    double shed_pu = 0.0;
    std::size_t evaluations = 0;     // LP solves
    std::size_t budget_feasible = 0; // vectors passing the risk budget
};

/// Tries every status vector of the switchable lines. Vectors are visited in
/// lexicographic order of z (first switchable line most significant, 0 before
/// 1); the first strict minimum wins.
inline EnumerationResult enumerate_ops(const OpsInstance& inst) {
    inst.validate();
    const Network& net = *inst.network;
    std::vector<std::size_t> sw;
    for (std::size_t l = 0; l < inst.risk.size(); ++l)
        if (inst.risk[l] > 0.0) sw.push_back(l);
    if (sw.size() > kMaxEnumerated)
        throw InconsistencyError("enumerate_ops: " + std::to_string(sw.size()) + " switchable lines exceeds the cap of " +
                                 std::to_string(kMaxEnumerated));
    const std::size_t k = sw.size();
    const double slack = 1e-9 * std::max(1.0, std::abs(inst.risk_budget));

    EnumerationResult best;
    best.objective = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
        std::vector<bool> on(net.lines.size(), true);
        double risk = 0.0;
        std::size_t off = 0;
        for (std::size_t i = 0; i < k; ++i) {
            bool z = (code >> (k - 1 - i)) & 1u;
            on[sw[i]] = z;
            if (z) risk += inst.risk[sw[i]];
            else ++off;
        }
        if (risk > inst.risk_budget + slack) continue;
        ++best.budget_feasible;
        auto r = dispatch_fixed(net, on, inst.demand_mw, inst.day, inst.hour);
        ++best.evaluations;
        double obj = r.objective_pu + inst.epsilon_switch * double(off);
        if (!found || obj < best.objective - 1e-12) {
            found = true;
            best.objective = obj;
            best.shed_pu = r.objective_pu;
            best.energized = on;
        }
    }
    if (!found) throw SolverError("enumerate_ops: no status vector satisfies the risk budget");
    return best;
}

/// The six metrics straight from their definitions, order MA, ME, CU, HRMA, HRME, HRCU.
inline std::array<double, 6> naive_metrics(std::span<const double> values, std::size_t count,
                                           const HighRiskThreshold& thr) {
    if (count == 0 && !values.empty()) throw InconsistencyError("naive_metrics: values without pixels");
    std::array<double, 6> out{};
    if (count == 0) return out;
    std::vector<double> all(values.begin(), values.end());
    std::vector<double> high;
    std::copy_if(all.begin(), all.end(), std::back_inserter(high), [&](double v) { return v >= thr.mean_r + thr.std_r; });
    auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
    auto sum_of = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
    out[0] = max_of(all);
    out[1] = sum_of(all) / double(count);
    out[2] = sum_of(all);
    out[3] = max_of(high);
    out[4] = sum_of(high) / double(count);
    out[5] = sum_of(high);
    return out;
}

/// Two-pass population mean and standard deviation.
inline std::pair<double, double> two_pass_stats(std::span<const double> values) {
    if (values.empty()) throw InsufficientDataError("two_pass_stats: empty");
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / double(values.size()))};
}

/// Cells (file row order) containing any of `samples` evenly spaced points on
/// segment a-b, endpoints included. A point on a cell edge or corner belongs to
/// every cell sharing it.
inline std::set<PixelRef> sample_segment_cells(const Point& a, const Point& b, const GridGeometry& grid,
                                               std::size_t samples = 10000) {
    std::set<PixelRef> cells;
    for (std::size_t s = 0; s <= samples; ++s) {
        double t = double(s) / double(samples);
        double gx = (a.x + (b.x - a.x) * t - grid.x_origin) / grid.cell_size;
        double gy = (a.y + (b.y - a.y) * t - grid.y_origin) / grid.cell_size;
        double fx = std::floor(gx), fy = std::floor(gy);
        for (int cx : {int(fx) - (gx == fx ? 1 : 0), int(fx)}) {
            for (int cy : {int(fy) - (gy == fy ? 1 : 0), int(fy)}) {
                if (cx < 0 || cy < 0 || cx >= grid.n_cols || cy >= grid.n_rows) continue;
                cells.insert({cx, grid.n_rows - 1 - cy});
            }
        }
    }
    return cells;
}

/// Point-to-segment distance, for the "no cell too far" check.
inline double distance_to_segment(const Point& p, const Point& a, const Point& b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0) : 0.0;
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

inline Point cell_center(const PixelRef& c, const GridGeometry& grid) {
    return {grid.x_origin + (c.col + 0.5) * grid.cell_size,
            grid.y_origin + (grid.n_rows - 1 - c.row + 0.5) * grid.cell_size};
}

/// A random OPS instance together with the network it points into.
struct RandomCase {
    std::unique_ptr<Network> network;
    OpsInstance instance;
};

/// Small random network and OPS instance: a random spanning tree plus extra
/// lines, tight flow limits, random loads, risks (some zero) and a budget
/// between 20% and 100% of the total risk. Draws come from raw engine output,
/// so a seed gives the same case everywhere.
inline RandomCase random_case(std::uint64_t seed, std::size_t max_buses = 10, std::size_t max_switchable = 12) {
    std::mt19937_64 eng(seed);
    auto uniform = [&] { return double(eng() >> 11) * 0x1.0p-53; };
    auto pick = [&](std::size_t lo, std::size_t hi) { return lo + std::size_t(uniform() * double(hi - lo + 1)); };

    auto net = std::make_unique<Network>();
    net->base_mva = 100.0;
    const std::size_t nb = pick(2, std::max<std::size_t>(2, max_buses));
    for (std::size_t i = 0; i < nb; ++i) net->buses.push_back({int(i + 1), "b" + std::to_string(i + 1)});
    net->index();

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 1; i < nb; ++i) edges.push_back({pick(0, i - 1), i});
    std::size_t extra = pick(0, std::min<std::size_t>(nb, 4));
    for (std::size_t e = 0; e < extra; ++e) {
        std::size_t a = pick(0, nb - 1), b = pick(0, nb - 1);
        if (a != b) edges.push_back({a, b});
    }
    for (std::size_t l = 0; l < edges.size(); ++l) {
        Line line;
        line.id = int(l + 1);
        line.from_bus = int(edges[l].first + 1);
        line.to_bus = int(edges[l].second + 1);
        line.from_index = edges[l].first;
        line.to_index = edges[l].second;
        line.susceptance = -1.0 / (0.05 + 0.45 * uniform());
        line.flow_limit_mw = 10.0 + 60.0 * uniform();
        line.flow_limit_pu = line.flow_limit_mw / net->base_mva;
        line.geometry = {{0.0, 0.0}, {1.0, 1.0}};
        net->lines.push_back(line);
    }
    net->index();

    const std::size_t ng = pick(1, std::min<std::size_t>(3, nb));
    for (std::size_t g = 0; g < ng; ++g) {
        Generator gen;
        gen.id = int(g + 1);
        gen.bus_index = pick(0, nb - 1);
        gen.bus = int(gen.bus_index + 1);
        gen.p_max_mw = 20.0 + 100.0 * uniform();
        gen.p_max_pu = gen.p_max_mw / net->base_mva;
        net->generators.push_back(gen);
    }

    RandomCase rc;
    auto& inst = rc.instance;
    inst.day = Date{std::chrono::year{2020}, std::chrono::January, std::chrono::day{1}};
    inst.demand_mw.resize(nb);
    for (auto& d : inst.demand_mw) d = uniform() < 0.3 ? 0.0 : 5.0 + 45.0 * uniform();
    inst.risk.resize(net->lines.size());
    std::size_t risky = 0;
    for (auto& r : inst.risk) {
        r = (uniform() < 0.25 || risky >= max_switchable) ? 0.0 : 1.0 + 99.0 * uniform();
        if (r > 0.0) ++risky;
    }
    double total = std::accumulate(inst.risk.begin(), inst.risk.end(), 0.0);
    inst.risk_budget = total * (0.2 + 0.8 * uniform());
    inst.epsilon_switch = 0.01;
    inst.mip_gap = 0.0;
    inst.network = net.get();
    rc.network = std::move(net);
    return rc;
}

} // namespace psps::oracle
