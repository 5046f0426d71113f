// Command-line front end for the PSPS planning study.
//
//   psps risk            --config study.json [--metrics MA,CU]
//   psps plan threshold  --config study.json [--days 2020-10-26]
//   psps plan ops        --config study.json [--days ...] [--mip-gap G] [--time-limit-s T] [--epsilon-switch E]
//   psps compare         --config study.json
//   psps run             --config study.json          (all stages in order)
//   psps verify ops      --max-switchable 12 [--instances 25] [--seed S]
//   psps verify metrics  [--vectors N] [--seed S]
//   psps verify trace    [--segments N] [--seed S]
//   psps config print-defaults | config validate --config study.json
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver failure.

#include "psps/metrics.hpp"
#include "psps/oracle.hpp"
#include "psps/raster.hpp"
#include "psps/study.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>

namespace {

using namespace psps;

struct Overrides {
    std::string config = "study.json";
    std::string metrics;
    std::string days;
    std::optional<double> mip_gap;
    std::optional<double> time_limit_s;
    std::optional<double> epsilon_switch;
    std::optional<std::size_t> workers;
};

StudyConfig resolve(const Overrides& o) {
    auto cfg = load_config(o.config);
    apply_env_overrides(cfg);
    if (!o.metrics.empty()) {
        cfg.metrics.clear();
        for (auto part : csv::split(o.metrics, ',')) {
            try {
                cfg.metrics.push_back(parse_metric(csv::trim(part)));
            } catch (const Error& e) {
                throw ConfigError(std::string("--metrics: ") + e.what());
            }
        }
    }
    if (o.mip_gap) cfg.mip_gap = *o.mip_gap;
    if (o.time_limit_s) cfg.time_limit_s = *o.time_limit_s;
    if (o.epsilon_switch) cfg.epsilon_switch = *o.epsilon_switch;
    if (o.workers) cfg.workers = *o.workers;
    // re-run the range checks on the merged values
    cfg = config_from_json(config_to_json(cfg));
    validate_paths(cfg);
    return cfg;
}

std::vector<Date> selected_days(const Overrides& o, const StudyConfig& cfg) {
    if (o.days.empty()) return {};
    auto days = parse_day_selection(o.days);
    for (const auto& d : days)
        if (d < cfg.study.first || cfg.study.last < d)
            throw ConfigError("--days: " + format_date(d) + " lies outside the study range");
    return days;
}

void note(const std::string& msg) { std::cerr << msg << '\n'; }

int verify_ops(std::size_t instances, std::size_t max_switchable, std::uint64_t seed) {
    std::size_t bad = 0;
    for (std::size_t i = 0; i < instances; ++i) {
        auto rc = oracle::random_case(seed + i, 10, max_switchable);
        auto sol = solve_ops(rc.instance);
        auto ref = oracle::enumerate_ops(rc.instance);
        double diff = std::abs(sol.objective - ref.objective);
        bool ok = diff <= 1e-6;
        bad += !ok;
        std::printf("case %zu: buses=%zu switchable=%zu milp=%.9f enumeration=%.9f diff=%.2e %s\n", i,
                    rc.network->buses.size(), rc.instance.switchable().size(), sol.objective, ref.objective, diff,
                    ok ? "ok" : "MISMATCH");
    }
    std::printf("%zu of %zu cases match\n", instances - bad, instances);
    return bad ? 4 : 0;
}

int verify_metrics(std::size_t vectors, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    auto uniform = [&] { return double(eng() >> 11) * 0x1.0p-53; };
    std::size_t bad = 0;
    for (std::size_t i = 0; i < vectors; ++i) {
        std::size_t n = std::size_t(uniform() * 40.0);
        std::vector<double> v(n);
        for (auto& x : v) x = std::round(150.0 * uniform());
        HighRiskThreshold thr;
        thr.mean_r = 50.0 * uniform();
        thr.std_r = 30.0 * uniform();
        thr.threshold = thr.mean_r + thr.std_r;
        auto fast = aggregate_all(v, n, thr);
        auto ref = oracle::naive_metrics(v, n, thr);
        for (std::size_t k = 0; k < 6; ++k)
            if (std::abs(fast[k] - ref[k]) > 1e-12 * std::max(1.0, std::abs(ref[k]))) ++bad;
    }
    std::printf("%zu vectors, %zu metric mismatches\n", vectors, bad);
    return bad ? 3 : 0;
}

int verify_trace(std::size_t segments, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    auto uniform = [&] { return double(eng() >> 11) * 0x1.0p-53; };
    GridGeometry grid{32, 32, 0.0, 0.0, 1.0};
    std::size_t missing = 0;
    for (std::size_t i = 0; i < segments; ++i) {
        Line l;
        l.id = int(i);
        Point a{32.0 * uniform(), 32.0 * uniform()}, b{32.0 * uniform(), 32.0 * uniform()};
        if (i % 4 == 0) a = {std::round(a.x), std::round(a.y)}, b = {std::round(b.x), std::round(b.y)};
        if (a == b) continue;
        l.geometry = {a, b};
        auto traced = trace_line(l, grid);
        for (const auto& c : oracle::sample_segment_cells(a, b, grid))
            if (!std::binary_search(traced.pixels.begin(), traced.pixels.end(), c,
                                    [](const PixelRef& x, const PixelRef& y) {
                                        return std::pair(x.row, x.col) < std::pair(y.row, y.col);
                                    }))
                ++missing;
    }
    std::printf("%zu segments, %zu sampled cells missing from the trace\n", segments, missing);
    return missing ? 3 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wildfire public-safety power shutoff planning"};
    app.require_subcommand(1);
    Overrides o;
    auto add_config = [&](CLI::App* cmd) { cmd->add_option("--config", o.config, "Study config (JSON)")->required(); };
    auto add_common = [&](CLI::App* cmd) {
        add_config(cmd);
        cmd->add_option("--metrics", o.metrics, "Comma-separated metrics (MA,ME,CU,HRMA,HRME,HRCU)");
        cmd->add_option("--workers", o.workers, "Worker threads for day-level jobs (0 = all cores)");
    };

    auto* risk = app.add_subcommand("risk", "Compute the high-risk threshold and the line risk table");
    add_common(risk);

    auto* plan = app.add_subcommand("plan", "Plan de-energizations and simulate load shed");
    plan->require_subcommand(1);
    auto* plan_thr = plan->add_subcommand("threshold", "Percentile-threshold plans");
    auto* plan_ops = plan->add_subcommand("ops", "Optimal Power Shutoff plans");
    for (auto* cmd : {plan_thr, plan_ops}) {
        add_common(cmd);
        cmd->add_option("--days", o.days, "Days to plan: DATE, FIRST:LAST or a comma list (default: whole study)");
    }
    plan_ops->add_option("--mip-gap", o.mip_gap, "Relative MIP gap");
    plan_ops->add_option("--time-limit-s", o.time_limit_s, "Time limit per MILP in seconds");
    plan_ops->add_option("--epsilon-switch", o.epsilon_switch, "Per-line switching penalty (per unit)");

    auto* compare = app.add_subcommand("compare", "Compare threshold and OPS plans and write the report");
    add_common(compare);

    auto* run = app.add_subcommand("run", "Run risk, both planners and compare");
    add_common(run);
    run->add_option("--mip-gap", o.mip_gap, "Relative MIP gap");
    run->add_option("--time-limit-s", o.time_limit_s, "Time limit per MILP in seconds");

    auto* verify = app.add_subcommand("verify", "Check production code against brute-force references");
    verify->require_subcommand(1);
    std::size_t instances = 25, max_switchable = 12, vectors = 100000, segments = 1000;
    std::uint64_t seed = 1;
    auto* v_ops = verify->add_subcommand("ops", "MILP against exhaustive switching enumeration");
    v_ops->add_option("--max-switchable", max_switchable, "Switchable lines per case")
        ->check(CLI::Range(std::size_t{0}, oracle::kMaxEnumerated))
        ->capture_default_str();
    v_ops->add_option("--instances", instances, "Random cases")->capture_default_str();
    auto* v_metrics = verify->add_subcommand("metrics", "Aggregation against the direct formulas");
    v_metrics->add_option("--vectors", vectors, "Random pixel vectors")->capture_default_str();
    auto* v_trace = verify->add_subcommand("trace", "Line tracing against dense point sampling");
    v_trace->add_option("--segments", segments, "Random segments")->capture_default_str();
    for (auto* cmd : {v_ops, v_metrics, v_trace}) cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

    auto* config = app.add_subcommand("config", "Show or check study configuration");
    config->require_subcommand(1);
    auto* print_defaults = config->add_subcommand("print-defaults", "Print the default config");
    auto* validate = config->add_subcommand("validate", "Validate a config file and its input paths");
    add_config(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*print_defaults) {
            std::cout << config_to_json(StudyConfig{}).dump(2) << '\n';
        } else if (*validate) {
            auto cfg = resolve(o);
            std::cout << config_to_json(cfg).dump(2) << '\n';
        } else if (*risk) {
            run_risk(resolve(o), note);
        } else if (*plan_thr) {
            auto cfg = resolve(o);
            run_threshold(cfg, selected_days(o, cfg), note);
        } else if (*plan_ops) {
            auto cfg = resolve(o);
            auto incomplete = run_ops(cfg, selected_days(o, cfg), note);
            if (incomplete) note(std::to_string(incomplete) + " day(s) incomplete; see plans/ops/summary.csv");
        } else if (*compare) {
            run_compare(resolve(o), note);
        } else if (*run) {
            auto cfg = resolve(o);
            run_risk(cfg, note);
            run_threshold(cfg, {}, note);
            auto incomplete = run_ops(cfg, {}, note);
            if (incomplete) note(std::to_string(incomplete) + " day(s) incomplete; see plans/ops/summary.csv");
            run_compare(cfg, note);
        } else if (*v_ops) {
            return verify_ops(instances, max_switchable, seed);
        } else if (*v_metrics) {
            return verify_metrics(vectors, seed);
        } else if (*v_trace) {
            return verify_trace(segments, seed);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
