// Writes the synthetic study year used by the tests and the README walkthrough:
// a copy of the network, daily risk rasters for a training and a study year,
// hourly demand, and a config file tying them together. The output depends
// only on the seed.

#include "psps/network.hpp"
#include "psps/raster.hpp"
#include "psps/study.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>

namespace {

using namespace psps;

/// Uniform and normal draws built from raw engine output, so the files are the
/// same with every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    double normal() {
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// A hot area of the landscape: elliptical Gaussian with its own day-to-day
/// intensity process.
struct Hotspot {
    double cx, cy, sx, sy, amplitude;
};

const std::vector<Hotspot> kHotspots = {
    {28.0, 36.0, 6.0, 6.0, 1.00},  // canyon crossed by the two feeders into the northern area
    {32.0, 53.0, 10.0, 7.0, 0.65}, // northern hills around the low-voltage mesh
    {17.0, 29.0, 5.0, 5.0, 0.90},  // western ridge under the meshed high-voltage lines
};

constexpr int kGridSize = 64;
constexpr double kLakeX = 20.0, kLakeY = 51.0, kLakeR = 1.6; // non-burnable cells

double seasonal(int day_of_year, double peak, double width) {
    double t = (day_of_year - peak) / width;
    return std::exp(-t * t);
}

int day_of_year(const Date& d) {
    auto jan1 = Date{d.year(), std::chrono::January, std::chrono::day{1}};
    return int((std::chrono::sys_days{d} - std::chrono::sys_days{jan1}).count());
}

void write_rasters(const fs::path& dir, const DateRange& range, Rng& rng) {
    std::vector<double> level(kHotspots.size(), 0.0); // AR(1) log-intensity per hotspot
    for (const auto& day : range.days()) {
        for (auto& z : level) z = 0.8 * z + 0.6 * rng.normal();
        double season = 0.2 + 0.8 * seasonal(day_of_year(day), 245.0, 50.0);
        RiskRaster r;
        r.day = day;
        r.grid = {kGridSize, kGridSize, 0.0, 0.0, 1.0};
        r.nodata_value = -9999.0;
        r.values.assign(std::size_t(kGridSize * kGridSize), 0.0);
        for (int row = 0; row < kGridSize; ++row) {
            for (int col = 0; col < kGridSize; ++col) {
                double x = col + 0.5, y = kGridSize - 1 - row + 0.5;
                double noise = 1.0 + 0.15 * (2.0 * rng.uniform() - 1.0);
                double& v = r.values[std::size_t(row * kGridSize + col)];
                if (std::hypot(x - kLakeX, y - kLakeY) < kLakeR) {
                    v = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                double field = 0.0;
                for (std::size_t k = 0; k < kHotspots.size(); ++k) {
                    const auto& h = kHotspots[k];
                    double dx = (x - h.cx) / h.sx, dy = (y - h.cy) / h.sy;
                    field += h.amplitude * std::exp(0.45 * level[k]) * std::exp(-0.5 * (dx * dx + dy * dy));
                }
                v = field < 0.03 ? 0.0 : std::round(std::clamp(150.0 * season * field * noise, 0.0, 150.0));
            }
        }
        save_raster(r, (dir / raster_file_name(day)).string());
    }
}

// Peak-hour loads in MW (IEEE 14-bus values).
const std::map<int, double> kBaseLoad = {{2, 21.7}, {3, 94.2}, {4, 47.8}, {5, 7.6},  {6, 11.2}, {9, 29.5},
                                         {10, 9.0}, {11, 3.5}, {12, 6.1}, {13, 13.5}, {14, 14.9}};

void write_demand(const fs::path& path, const Network& net, const DateRange& range, Rng& rng) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "day,hour,bus,mw\n";
    for (const auto& day : range.days()) {
        double daily = 0.85 + 0.3 * seasonal(day_of_year(day), 215.0, 55.0) + 0.03 * rng.normal();
        for (int h = 0; h < 24; ++h) {
            double profile = 0.7 + 0.35 * std::max(0.0, std::sin(std::numbers::pi * (h - 8) / 18.0));
            for (const auto& bus : net.buses) {
                auto it = kBaseLoad.find(bus.id);
                if (it == kBaseLoad.end()) continue;
                double mw = std::max(0.0, it->second * daily * profile * (1.0 + 0.02 * rng.normal()));
                out << format_date(day) << ',' << h << ',' << bus.id << ',' << csv::format_fixed(mw, 2) << '\n';
            }
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic PSPS study fixture"};
    std::string network_path, out_dir;
    std::uint64_t seed = 20200101;
    std::string training = "2019-01-01:2019-12-31", study = "2020-01-01:2020-12-31";
    app.add_option("--network", network_path, "Network JSON to copy into the fixture")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    app.add_option("--training", training, "Training days FIRST:LAST")->capture_default_str();
    app.add_option("--study", study, "Study days FIRST:LAST")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        auto range = [](const std::string& s) {
            auto days = parse_day_selection(s);
            return DateRange{days.front(), days.back()};
        };
        DateRange train = range(training), stud = range(study);
        fs::path out = out_dir;
        fs::create_directories(out / "rasters");
        auto net = load_network(network_path);
        save_network(net, (out / "network.json").string());

        Rng rng(seed);
        write_rasters(out / "rasters", train, rng);
        write_rasters(out / "rasters", stud, rng);
        write_demand(out / "demand.csv", net, stud, rng);

        StudyConfig cfg;
        cfg.network = "network.json";
        cfg.demand = "demand.csv";
        cfg.raster_dir = "rasters";
        cfg.output_dir = "study";
        cfg.training = train;
        cfg.study = stud;
        cfg.mip_gap = 0.0;
        cfg.time_limit_s = 300.0;
        write_text(out / "config.json", config_to_json(cfg).dump(2) + "\n");
        std::cout << "fixture written to " << out.string() << '\n';
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return 0;
}
