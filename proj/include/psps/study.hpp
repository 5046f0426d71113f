#pragma once

#include "psps/analysis.hpp"
#include "psps/csv.hpp"
#include "psps/date.hpp"
#include "psps/dispatch.hpp"
#include "psps/error.hpp"
#include "psps/metrics.hpp"
#include "psps/network.hpp"
#include "psps/ops.hpp"
#include "psps/plan.hpp"
#include "psps/raster.hpp"
#include "psps/threshold_planner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace psps {

namespace fs = std::filesystem;

struct DateRange {
    Date first{};
    Date last{};
    std::vector<Date> days() const { return date_range(first, last); }
};

/// Everything a study run needs. Relative paths are resolved against the
/// directory of the config file.
struct StudyConfig {
    fs::path network = "network.json";
    fs::path demand = "demand.csv";
    fs::path raster_dir = "rasters";
    fs::path output_dir = "out";
    DateRange training{parse_date("2019-01-01"), parse_date("2019-12-31")};
    DateRange study{parse_date("2020-01-01"), parse_date("2020-12-31")};
    std::vector<MetricKind> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    double percentile = 95.0;
    double epsilon_switch = 0.01;
    double mip_gap = 1e-4;
    double time_limit_s = 60.0;
    std::size_t workers = 0; // 0 = one per hardware thread
};

inline nlohmann::json config_to_json(const StudyConfig& c) {
    nlohmann::json metrics = nlohmann::json::array();
    for (auto k : c.metrics) metrics.push_back(std::string(to_string(k)));
    return {
        {"network", c.network.generic_string()},
        {"demand", c.demand.generic_string()},
        {"raster_dir", c.raster_dir.generic_string()},
        {"output_dir", c.output_dir.generic_string()},
        {"training", {{"start", format_date(c.training.first)}, {"end", format_date(c.training.last)}}},
        {"study", {{"start", format_date(c.study.first)}, {"end", format_date(c.study.last)}}},
        {"metrics", metrics},
        {"percentile", c.percentile},
        {"epsilon_switch", c.epsilon_switch},
        {"mip_gap", c.mip_gap},
        {"time_limit_s", c.time_limit_s},
        {"workers", c.workers},
    };
}

namespace detail {

template <typename T>
T config_field(const nlohmann::json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: '") + key + "' has the wrong type");
    }
}

inline DateRange config_range(const nlohmann::json& doc, const char* key) {
    const auto& r = doc.at(key);
    if (!r.is_object() || !r.contains("start") || !r.contains("end") || r.size() != 2)
        throw ConfigError(std::string("config: '") + key + "' must be {\"start\": date, \"end\": date}");
    try {
        return {parse_date(config_field<std::string>(r, "start")), parse_date(config_field<std::string>(r, "end"))};
    } catch (const ParseError& e) {
        throw ConfigError(std::string("config: '") + key + "': " + e.what());
    }
}

} // namespace detail

/// Parses a config document over the defaults; unknown keys are rejected.
/// Checks value ranges but not the file system (see `validate_paths`).
inline StudyConfig config_from_json(const nlohmann::json& doc, const fs::path& base_dir = {}) {
    using detail::config_field;
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    static const std::set<std::string> known = {"network", "demand",         "raster_dir", "output_dir",
                                                "training", "study",         "metrics",    "percentile",
                                                "epsilon_switch", "mip_gap", "time_limit_s", "workers"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");

    StudyConfig c;
    auto path = [&](const char* key, fs::path& out) {
        if (!doc.contains(key)) return;
        fs::path p = config_field<std::string>(doc, key);
        out = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    path("network", c.network);
    path("demand", c.demand);
    path("raster_dir", c.raster_dir);
    path("output_dir", c.output_dir);
    if (doc.contains("training")) c.training = detail::config_range(doc, "training");
    if (doc.contains("study")) c.study = detail::config_range(doc, "study");
    if (doc.contains("metrics")) {
        c.metrics.clear();
        for (const auto& s : config_field<std::vector<std::string>>(doc, "metrics")) {
            try {
                c.metrics.push_back(parse_metric(s));
            } catch (const Error& e) {
                throw ConfigError(std::string("config: metrics: ") + e.what());
            }
        }
    }
    if (doc.contains("percentile")) c.percentile = config_field<double>(doc, "percentile");
    if (doc.contains("epsilon_switch")) c.epsilon_switch = config_field<double>(doc, "epsilon_switch");
    if (doc.contains("mip_gap")) c.mip_gap = config_field<double>(doc, "mip_gap");
    if (doc.contains("time_limit_s")) c.time_limit_s = config_field<double>(doc, "time_limit_s");
    if (doc.contains("workers")) c.workers = config_field<std::size_t>(doc, "workers");

    if (c.training.last < c.training.first) throw ConfigError("config: training range is empty");
    if (c.study.last < c.study.first) throw ConfigError("config: study range is empty");
    if (c.metrics.empty()) throw ConfigError("config: metrics must not be empty");
    for (std::size_t i = 0; i < c.metrics.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (c.metrics[i] == c.metrics[j]) throw ConfigError("config: metric listed twice");
    if (!(c.percentile > 0.0 && c.percentile < 100.0)) throw ConfigError("config: percentile must lie in (0, 100)");
    if (!(c.epsilon_switch > 0.0)) throw ConfigError("config: epsilon_switch must be positive");
    if (!(c.mip_gap >= 0.0 && c.mip_gap < 1.0)) throw ConfigError("config: mip_gap must lie in [0, 1)");
    if (!(c.time_limit_s > 0.0)) throw ConfigError("config: time_limit_s must be positive");
    return c;
}

inline StudyConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return config_from_json(doc, path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/// Input files must exist before any compute starts.
inline void validate_paths(const StudyConfig& c) {
    if (!fs::is_regular_file(c.network)) throw ConfigError("network file not found: " + c.network.string());
    if (!fs::is_regular_file(c.demand)) throw ConfigError("demand file not found: " + c.demand.string());
    if (!fs::is_directory(c.raster_dir)) throw ConfigError("raster directory not found: " + c.raster_dir.string());
}

/// PSPS_TIME_LIMIT_S and PSPS_WORKERS override the file. `env` defaults to getenv.
inline void apply_env_overrides(StudyConfig& c, const std::function<const char*(const char*)>& env = {}) {
    auto get = [&](const char* name) -> const char* { return env ? env(name) : std::getenv(name); };
    if (const char* v = get("PSPS_TIME_LIMIT_S")) {
        double t = 0.0;
        if (!csv::parse_number(v, t) || !(t > 0.0)) throw ConfigError("PSPS_TIME_LIMIT_S must be a positive number");
        c.time_limit_s = t;
    }
    if (const char* v = get("PSPS_WORKERS")) {
        std::size_t w = 0;
        if (!csv::parse_number(v, w)) throw ConfigError("PSPS_WORKERS must be a non-negative integer");
        c.workers = w;
    }
}

/// Parses `2020-10-26`, `2020-10-01:2020-10-31` or a comma list of either.
inline std::vector<Date> parse_day_selection(std::string_view text) {
    std::vector<Date> out;
    try {
        for (auto part : csv::split(text, ',')) {
            part = csv::trim(part);
            auto colon = part.find(':');
            if (colon == std::string_view::npos) {
                out.push_back(parse_date(part));
            } else {
                auto r = date_range(parse_date(part.substr(0, colon)), parse_date(part.substr(colon + 1)));
                if (r.empty()) throw ConfigError("empty day range '" + std::string(part) + "'");
                out.insert(out.end(), r.begin(), r.end());
            }
        }
    } catch (const ParseError& e) {
        throw ConfigError(std::string("--days: ") + e.what());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Output layout

struct StudyPaths {
    fs::path root;
    fs::path threshold_json() const { return root / "risk" / "high_risk_threshold.json"; }
    fs::path risk_table() const { return root / "risk" / "line_risk.csv"; }
    fs::path method_dir(Method m) const { return root / "plans" / (m == Method::Threshold ? "threshold" : "ops"); }
    fs::path plans(Method m) const { return method_dir(m) / "plans.csv"; }
    fs::path percentiles() const { return method_dir(Method::Threshold) / "percentiles.csv"; }
    fs::path ops_summary() const { return method_dir(Method::Ops) / "summary.csv"; }
    fs::path hourly_shed(Method m, MetricKind k) const {
        return method_dir(m) / std::string(to_string(k)) / "hourly_shed.csv";
    }
    fs::path daily_shed(Method m, MetricKind k) const {
        return method_dir(m) / std::string(to_string(k)) / "daily_shed.csv";
    }
    fs::path report() const { return root / "report"; }
};

/// Writes a whole file at once so readers never see a partial one.
inline void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

/// Runs `job(i)` for i in [0, n) on at most `workers` threads. The first
/// exception (lowest index) is rethrown after every thread has joined.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Plan and shed files

/// `day,metric,method,line_id,status`, one row per switched-off line.
inline std::string plans_csv(std::span<const DeEnergizationPlan> plans) {
    std::ostringstream out;
    out << "day,metric,method,line_id,status\n";
    for (const auto& p : plans)
        for (int id : p.off_lines)
            out << format_date(p.day) << ',' << to_string(p.metric) << ',' << to_string(p.method) << ',' << id << ",OFF\n";
    return out.str();
}

/// Plans keyed by (metric, day); days without rows are absent.
inline std::map<std::pair<MetricKind, Date>, DeEnergizationPlan> read_plans_csv(const fs::path& path) {
    std::map<std::pair<MetricKind, Date>, DeEnergizationPlan> out;
    csv::read_file(path.string(), "day,metric,method,line_id,status", [&](const auto& f, std::size_t lineno) {
        auto at = path.string() + ":" + std::to_string(lineno);
        if (f.size() != 5) throw ParseError(at + ": expected 5 fields");
        Date day = parse_date(csv::trim(f[0]));
        MetricKind k = parse_metric(csv::trim(f[1]));
        Method m = parse_method(csv::trim(f[2]));
        int id = 0;
        if (!csv::parse_number(f[3], id)) throw ParseError(at + ": bad line id");
        if (csv::trim(f[4]) != "OFF") throw ParseError(at + ": status must be OFF");
        auto& p = out[{k, day}];
        p.day = day;
        p.metric = k;
        p.method = m;
        p.off_lines.push_back(id);
    });
    for (auto& [_, p] : out) {
        std::sort(p.off_lines.begin(), p.off_lines.end());
        if (std::adjacent_find(p.off_lines.begin(), p.off_lines.end()) != p.off_lines.end())
            throw DuplicateError(path.string() + ": line listed twice on " + format_date(p.day));
    }
    return out;
}

/// Shed outcome of one plan held over one day.
struct DayShed {
    Date day{};
    std::vector<std::vector<double>> hourly_bus_mw; // [hour][bus]
    double total_mwh = 0.0;
};

inline DayShed day_shed(const DaySimulation& sim) {
    DayShed s;
    s.total_mwh = sim.total_shed_mwh;
    for (const auto& h : sim.hours) {
        s.day = h.day;
        s.hourly_bus_mw.push_back(h.shed_mw);
    }
    return s;
}

/// `day,hour,bus,load_shed_mw`; hours and buses without shed are omitted.
inline std::string hourly_shed_csv(const Network& net, std::span<const DayShed> days) {
    std::ostringstream out;
    out << "day,hour,bus,load_shed_mw\n";
    for (const auto& d : days)
        for (std::size_t h = 0; h < d.hourly_bus_mw.size(); ++h)
            for (std::size_t b = 0; b < d.hourly_bus_mw[h].size(); ++b)
                if (d.hourly_bus_mw[h][b] > 0.0)
                    out << format_date(d.day) << ',' << h << ',' << net.buses[b].id << ','
                        << csv::format_double(d.hourly_bus_mw[h][b]) << '\n';
    return out.str();
}

/// `day,total_shed_mwh`, one row per simulated day.
inline std::string daily_shed_csv(std::span<const DayShed> days) {
    std::ostringstream out;
    out << "day,total_shed_mwh\n";
    for (const auto& d : days) out << format_date(d.day) << ',' << csv::format_double(d.total_mwh) << '\n';
    return out.str();
}

inline std::vector<std::pair<Date, double>> read_daily_shed_csv(const fs::path& path) {
    std::vector<std::pair<Date, double>> rows;
    csv::read_file(path.string(), "day,total_shed_mwh", [&](const auto& f, std::size_t lineno) {
        auto at = path.string() + ":" + std::to_string(lineno);
        if (f.size() != 2) throw ParseError(at + ": expected 2 fields");
        double v = 0.0;
        if (!csv::parse_number(f[1], v) || !(v >= 0.0)) throw ParseError(at + ": bad shed value");
        rows.emplace_back(parse_date(csv::trim(f[0])), v);
    });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i - 1].first < rows[i].first)) throw ValidationError(path.string() + ": days out of order");
    return rows;
}

// ---------------------------------------------------------------------------
// Stages

using Log = std::function<void(const std::string&)>;

inline std::vector<RiskRaster> load_rasters(const fs::path& dir, const DateRange& range) {
    std::vector<RiskRaster> out;
    for (const auto& day : range.days()) {
        auto path = dir / raster_file_name(day);
        if (!fs::is_regular_file(path))
            throw InsufficientDataError("missing raster for " + format_date(day) + ": " + path.string());
        out.push_back(load_raster(path.string(), day));
    }
    return out;
}

inline std::string threshold_json(const HighRiskThreshold& thr) {
    nlohmann::json doc = {{"training_year", thr.training_year},
                          {"samples", thr.samples},
                          {"mean", thr.mean_r},
                          {"std", thr.std_r},
                          {"threshold", thr.threshold}};
    return doc.dump(2) + "\n";
}

/// Training-year threshold and the study-year risk table.
inline LineRiskTable run_risk(const StudyConfig& c, const Log& log = {}) {
    StudyPaths out{c.output_dir};
    auto net = load_network(c.network.string());
    auto training = load_rasters(c.raster_dir, c.training);
    auto label = format_date(c.training.first) + ".." + format_date(c.training.last);
    auto thr = threshold_from_rasters(net, training, label);
    training.clear();
    if (log)
        log("high-risk threshold " + csv::format_fixed(thr.threshold, 4) + " from " + std::to_string(thr.samples) +
            " training pixels");
    auto study = load_rasters(c.raster_dir, c.study);
    auto table = build_table(net, study, thr);
    std::ostringstream csv_out;
    write_table_csv(table, csv_out, c.metrics);
    write_text(out.threshold_json(), threshold_json(thr));
    write_text(out.risk_table(), csv_out.str());
    if (log) log("risk table: " + std::to_string(table.n_lines()) + " lines x " + std::to_string(table.n_days()) + " days");
    return table;
}

/// Shared inputs of the planning stages.
struct PlanningInputs {
    Network net;
    Demand demand;
    LineRiskTable table;
    std::vector<MetricKind> present;
    std::vector<Date> days;
    std::vector<PercentileThreshold> percentiles; // per configured metric
};

inline PlanningInputs load_planning_inputs(const StudyConfig& c, const std::vector<Date>& selection) {
    StudyPaths out{c.output_dir};
    PlanningInputs in;
    in.net = load_network(c.network.string());
    in.demand = load_demand(c.demand.string(), in.net);
    if (!fs::is_regular_file(out.risk_table()))
        throw InsufficientDataError("risk table not found (run `risk` first): " + out.risk_table().string());
    in.table = read_table_csv(out.risk_table().string(), &in.present);
    for (auto k : c.metrics)
        if (std::find(in.present.begin(), in.present.end(), k) == in.present.end())
            throw InsufficientDataError("risk table has no values for metric " + std::string(to_string(k)));
    for (const auto& l : in.net.lines)
        if (std::find(in.table.line_ids().begin(), in.table.line_ids().end(), l.id) == in.table.line_ids().end())
            throw ValidationError("risk table has no entries for line " + std::to_string(l.id));
    in.days = selection.empty() ? in.table.days() : selection;
    for (const auto& d : in.days) {
        if (!in.table.day_index(d)) throw ValidationError("risk table has no entries for " + format_date(d));
        if (!in.demand.day_index(d)) throw ValidationError("demand file has no entries for " + format_date(d));
    }
    for (auto k : c.metrics) in.percentiles.push_back(compute_percentile(in.table, k, c.percentile));
    return in;
}

/// Threshold plans for every (metric, day) and their 24-hour simulations.
inline void run_threshold(const StudyConfig& c, const std::vector<Date>& selection = {}, const Log& log = {}) {
    StudyPaths out{c.output_dir};
    auto in = load_planning_inputs(c, selection);
    const std::size_t nd = in.days.size(), nm = c.metrics.size();
    std::vector<DeEnergizationPlan> plans(nm * nd);
    std::vector<DayShed> shed(nm * nd);
    parallel_for(nm * nd, c.workers, [&](std::size_t job) {
        std::size_t m = job / nd, d = job % nd;
        plans[job] = plan_threshold(in.table, c.metrics[m], in.days[d], in.percentiles[m]);
        shed[job] = day_shed(simulate_day(in.net, plans[job], in.demand.day_mw(in.days[d], in.net.buses.size())));
        shed[job].day = in.days[d];
    });

    std::ostringstream pct;
    pct << "metric,q,value\n";
    for (const auto& p : in.percentiles)
        pct << to_string(p.metric) << ',' << csv::format_double(p.q) << ',' << csv::format_double(p.value) << '\n';
    write_text(out.percentiles(), pct.str());
    write_text(out.plans(Method::Threshold), plans_csv(plans));
    for (std::size_t m = 0; m < nm; ++m) {
        std::span<const DayShed> slice(shed.data() + m * nd, nd);
        write_text(out.hourly_shed(Method::Threshold, c.metrics[m]), hourly_shed_csv(in.net, slice));
        write_text(out.daily_shed(Method::Threshold, c.metrics[m]), daily_shed_csv(slice));
        if (log) {
            double total = 0.0;
            for (const auto& s : slice) total += s.total_mwh;
            log("THRESHOLD " + std::string(to_string(c.metrics[m])) + ": " + std::to_string(nd) + " days, shed " +
                csv::format_fixed(total, 3) + " MWh");
        }
    }
}

/// Per-day OPS outcome kept for the summary file.
struct OpsDayRecord {
    Date day{};
    MetricKind metric = MetricKind::MA;
    int decision_hour = 0;
    double risk_budget = 0.0;
    double residual_risk = 0.0;
    std::size_t threshold_off = 0;
    std::size_t ops_off = 0;
    double threshold_hour_shed_mw = 0.0;
    double ops_hour_shed_mw = 0.0;
    double threshold_day_mwh = 0.0;
    double ops_day_mwh = 0.0;
    double objective = 0.0;
    double gap = 0.0;
    std::size_t nodes = 0;
    std::string status = "optimal"; // optimal | time_limit | failed
    std::string message;
};

inline std::string ops_summary_csv(std::span<const OpsDayRecord> recs) {
    std::ostringstream out;
    out << "day,metric,decision_hour,risk_budget,residual_risk,threshold_off,ops_off,threshold_hour_shed_mw,"
           "ops_hour_shed_mw,threshold_day_mwh,ops_day_mwh,objective,gap,nodes,status\n";
    for (const auto& r : recs) {
        out << format_date(r.day) << ',' << to_string(r.metric) << ',' << r.decision_hour << ','
            << csv::format_double(r.risk_budget) << ',' << csv::format_double(r.residual_risk) << ','
            << r.threshold_off << ',' << r.ops_off << ',' << csv::format_double(r.threshold_hour_shed_mw) << ','
            << csv::format_double(r.ops_hour_shed_mw) << ',' << csv::format_double(r.threshold_day_mwh) << ','
            << csv::format_double(r.ops_day_mwh) << ',' << csv::format_double(r.objective) << ','
            << csv::format_double(r.gap) << ',' << r.nodes << ',' << r.status << '\n';
    }
    return out.str();
}

/// OPS plans for every (metric, day). A day whose MILP fails keeps the
/// threshold statuses for its simulation and is listed as `failed` in the
/// summary; a time-limited day keeps its incumbent and is listed as
/// `time_limit`. Returns the number of incomplete days.
inline std::size_t run_ops(const StudyConfig& c, const std::vector<Date>& selection = {}, const Log& log = {}) {
    StudyPaths out{c.output_dir};
    auto in = load_planning_inputs(c, selection);
    const std::size_t nd = in.days.size(), nm = c.metrics.size();
    std::vector<DeEnergizationPlan> plans(nm * nd);
    std::vector<DayShed> shed(nm * nd);
    std::vector<OpsDayRecord> recs(nm * nd);
    OpsOptions opt;
    opt.epsilon_switch = c.epsilon_switch;
    opt.mip_gap = c.mip_gap;
    opt.time_limit_s = c.time_limit_s;

    parallel_for(nm * nd, c.workers, [&](std::size_t job) {
        std::size_t m = job / nd, d = job % nd;
        const auto day = in.days[d];
        const auto metric = c.metrics[m];
        auto demand = in.demand.day_mw(day, in.net.buses.size());
        auto thr_plan = plan_threshold(in.table, metric, day, in.percentiles[m]);
        auto& rec = recs[job];
        rec.day = day;
        rec.metric = metric;
        rec.risk_budget = thr_plan.residual_risk;
        rec.threshold_off = thr_plan.off_lines.size();
        try {
            auto res = plan_ops_day(in.net, in.table, metric, day, demand, thr_plan, opt);
            auto risks = line_risks(in.net, in.table, metric, day);
            double used = residual_risk(risks, res.solution.plan.energized(in.net));
            if (used > rec.risk_budget + 1e-9 * std::max(1.0, rec.risk_budget))
                throw SolverError("OPS plan exceeds the risk budget");
            plans[job] = res.solution.plan;
            shed[job] = day_shed(res.simulation);
            rec.decision_hour = res.decision_hour;
            rec.residual_risk = res.solution.plan.residual_risk;
            rec.ops_off = res.solution.plan.off_lines.size();
            rec.threshold_hour_shed_mw = res.threshold_simulation.hours[std::size_t(res.decision_hour)].total_shed_mw;
            rec.ops_hour_shed_mw = res.simulation.hours[std::size_t(res.decision_hour)].total_shed_mw;
            rec.threshold_day_mwh = res.threshold_simulation.total_shed_mwh;
            rec.ops_day_mwh = res.simulation.total_shed_mwh;
            rec.objective = res.solution.objective;
            rec.gap = res.solution.gap;
            rec.nodes = res.solution.nodes;
            if (res.solution.timed_out) rec.status = "time_limit";
        } catch (const SolverError& e) {
            auto sim = simulate_day(in.net, thr_plan, demand);
            plans[job] = thr_plan;
            plans[job].method = Method::Ops;
            plans[job].risk_budget = thr_plan.residual_risk;
            shed[job] = day_shed(sim);
            rec.decision_hour = worst_case_hour(sim.hourly_shed_mw());
            rec.residual_risk = thr_plan.residual_risk;
            rec.ops_off = rec.threshold_off;
            rec.threshold_hour_shed_mw = rec.ops_hour_shed_mw = sim.hours[std::size_t(rec.decision_hour)].total_shed_mw;
            rec.threshold_day_mwh = rec.ops_day_mwh = sim.total_shed_mwh;
            rec.status = "failed";
            rec.message = e.what();
        }
        shed[job].day = day;
    });

    std::size_t incomplete = 0;
    for (const auto& r : recs) {
        if (r.status == "optimal") continue;
        ++incomplete;
        if (log) log("incomplete: " + format_date(r.day) + " " + std::string(to_string(r.metric)) + " " + r.status +
                     (r.message.empty() ? "" : ": " + r.message.substr(0, r.message.find('\n'))));
    }
    write_text(out.plans(Method::Ops), plans_csv(plans));
    write_text(out.ops_summary(), ops_summary_csv(recs));
    for (std::size_t m = 0; m < nm; ++m) {
        std::span<const DayShed> slice(shed.data() + m * nd, nd);
        write_text(out.hourly_shed(Method::Ops, c.metrics[m]), hourly_shed_csv(in.net, slice));
        write_text(out.daily_shed(Method::Ops, c.metrics[m]), daily_shed_csv(slice));
        if (log) {
            double total = 0.0;
            for (const auto& s : slice) total += s.total_mwh;
            log("OPS " + std::string(to_string(c.metrics[m])) + ": " + std::to_string(nd) + " days, shed " +
                csv::format_fixed(total, 3) + " MWh");
        }
    }
    return incomplete;
}

/// Annual totals of one metric under both methods.
struct ShedComparison {
    MetricKind metric = MetricKind::MA;
    double threshold_mwh = 0.0;
    double ops_mwh = 0.0;
    double ratio() const { return threshold_mwh > 0.0 ? ops_mwh / threshold_mwh : 0.0; }
};

struct CompareResult {
    SimilarityMatrix similarity;
    std::vector<ShedComparison> totals;
    std::map<PlanSeriesKey, std::size_t> unique;
};

/// Reads both methods' plan and shed files and writes the report directory.
inline CompareResult run_compare(const StudyConfig& c, const Log& log = {}) {
    StudyPaths out{c.output_dir};
    auto net = load_network(c.network.string());
    std::vector<int> ids;
    for (const auto& l : net.lines) ids.push_back(l.id);

    CompareResult res;
    std::map<PlanSeriesKey, std::vector<double>> counts;
    std::vector<ShedSeries> series;
    for (auto method : {Method::Threshold, Method::Ops}) {
        if (!fs::is_regular_file(out.plans(method)))
            throw InsufficientDataError("plans not found (run `plan " +
                                        std::string(method == Method::Threshold ? "threshold" : "ops") +
                                        "` first): " + out.plans(method).string());
        auto plans = read_plans_csv(out.plans(method));
        for (auto k : c.metrics) {
            PlanSeriesKey key{k, method};
            std::vector<DeEnergizationPlan> mine;
            for (const auto& [pk, p] : plans)
                if (pk.first == k) mine.push_back(p);
            res.unique[key] = mine.empty() ? 0 : unique_lines(mine);
            counts[key] = count_vector(mine, ids);
            ShedSeries s;
            s.key = key;
            for (const auto& [day, v] : read_daily_shed_csv(out.daily_shed(method, k))) {
                s.days.push_back(day);
                s.shed_mwh.push_back(v);
            }
            series.push_back(std::move(s));
        }
    }
    res.similarity = similarity_matrix(counts, ids.size());

    const auto rep = out.report();
    std::ostringstream unique_out, totals_out, daily_out, counts_out, sim_out, heat_out;
    unique_out << "metric,method,unique_lines\n";
    for (auto k : c.metrics)
        for (auto m : {Method::Threshold, Method::Ops})
            unique_out << to_string(k) << ',' << to_string(m) << ',' << res.unique[{k, m}] << '\n';

    totals_out << "metric,threshold_mwh,ops_mwh,ops_to_threshold_ratio\n";
    daily_out << "day,metric,method,shed_mwh,rolling7_mwh\n";
    for (auto k : c.metrics) {
        ShedComparison cmp{k};
        std::vector<ShedSeries> pair;
        for (const auto& s : series) {
            if (s.key.metric != k) continue;
            (s.key.method == Method::Threshold ? cmp.threshold_mwh : cmp.ops_mwh) = s.total();
            pair.push_back(s);
        }
        if (pair[0].days != pair[1].days)
            throw ValidationError("threshold and OPS shed files cover different days for " + std::string(to_string(k)));
        res.totals.push_back(cmp);
        totals_out << to_string(k) << ',' << csv::format_fixed(cmp.threshold_mwh, 6) << ','
                   << csv::format_fixed(cmp.ops_mwh, 6) << ',' << csv::format_fixed(cmp.ratio(), 6) << '\n';
        for (const auto& s : pair) {
            if (s.shed_mwh.empty()) continue;
            auto rolled = rolling_average(s.shed_mwh);
            for (std::size_t i = 0; i < s.days.size(); ++i)
                daily_out << format_date(s.days[i]) << ',' << to_string(k) << ',' << to_string(s.key.method) << ','
                          << csv::format_fixed(s.shed_mwh[i], 6) << ',' << csv::format_fixed(rolled[i], 6) << '\n';
        }
        std::ostringstream svg;
        write_rolling_svg(pair, "Seven-day rolling average load shed, " + std::string(to_string(k)), svg);
        write_text(rep / ("rolling_shed_" + std::string(to_string(k)) + ".svg"), svg.str());
        if (log)
            log(std::string(to_string(k)) + ": threshold " + csv::format_fixed(cmp.threshold_mwh, 3) + " MWh, OPS " +
                csv::format_fixed(cmp.ops_mwh, 3) + " MWh, ratio " + csv::format_fixed(cmp.ratio(), 4));
    }

    counts_out << "line_id";
    for (const auto& k : res.similarity.keys) counts_out << ',' << k.label();
    counts_out << '\n';
    for (std::size_t l = 0; l < ids.size(); ++l) {
        counts_out << ids[l];
        for (const auto& k : res.similarity.keys) {
            auto it = counts.find(k);
            counts_out << ',' << (it == counts.end() ? 0 : long(it->second[l]));
        }
        counts_out << '\n';
    }
    write_similarity_csv(res.similarity, sim_out);
    write_heatmap_svg(res.similarity, heat_out);

    write_text(rep / "unique_lines.csv", unique_out.str());
    write_text(rep / "shed_totals.csv", totals_out.str());
    write_text(rep / "daily_shed.csv", daily_out.str());
    write_text(rep / "deenergization_counts.csv", counts_out.str());
    write_text(rep / "similarity.csv", sim_out.str());
    write_text(rep / "similarity.svg", heat_out.str());
    return res;
}

} // namespace psps
