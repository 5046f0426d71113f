#pragma once

// Small builders shared by the unit tests.

#include "psps/network.hpp"
#include "psps/study.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace psps::test {

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 eng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("psps_" + tag + "_" + std::to_string(eng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

    std::string write(const std::string& name, const std::string& text) const {
        auto p = path_ / name;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream(p) << text;
        return p.string();
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json line_json(int id, int from, int to, double x, double limit_mw, std::vector<std::array<double, 2>> geom) {
    return {{"id", id}, {"from_bus", from}, {"to_bus", to}, {"susceptance", -1.0 / x}, {"flow_limit", limit_mw},
            {"geometry", geom}};
}

/// Generator of `gen_mw` at bus 1, one line to load bus 2.
inline nlohmann::json two_bus_json(double gen_mw = 100.0, double limit_mw = 100.0) {
    return {{"base_mva", 100.0},
            {"buses", {{{"id", 1}, {"name", "Plant"}}, {{"id", 2}, {"name", "Town"}}}},
            {"generators", {{{"id", 1}, {"bus", 1}, {"p_max", gen_mw}}}},
            {"lines", {line_json(1, 1, 2, 0.1, limit_mw, {{0.5, 0.5}, {2.5, 0.5}})}}};
}

/// Generator at bus 1, 50 MW load at bus 3; line 1-3 direct (limit 100), and
/// the detour 1-2 (limit 100) and 2-3 (limit 30).
inline nlohmann::json triangle_json() {
    return {{"base_mva", 100.0},
            {"buses", {{{"id", 1}}, {{"id", 2}}, {{"id", 3}}}},
            {"generators", {{{"id", 1}, {"bus", 1}, {"p_max", 200.0}}}},
            {"lines",
             {line_json(1, 1, 2, 0.1, 100.0, {{0.5, 0.5}, {2.5, 0.5}}),
              line_json(2, 2, 3, 0.1, 30.0, {{2.5, 0.5}, {1.5, 2.5}}),
              line_json(3, 1, 3, 0.1, 100.0, {{0.5, 0.5}, {1.5, 2.5}})}}};
}

inline std::string shipped_network_path() { return std::string(PSPS_SOURCE_DIR) + "/data/network.json"; }

} // namespace psps::test
