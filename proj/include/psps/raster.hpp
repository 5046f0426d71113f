#pragma once

#include "psps/csv.hpp"
#include "psps/date.hpp"
#include "psps/error.hpp"
#include "psps/network.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace psps {

/// Placement of a north-up raster grid in planar CRS units.
struct GridGeometry {
    int n_cols = 0;
    int n_rows = 0;
    double x_origin = 0.0; // lower-left corner
    double y_origin = 0.0;
    double cell_size = 1.0;

    double x_max() const { return x_origin + n_cols * cell_size; }
    double y_max() const { return y_origin + n_rows * cell_size; }
    bool contains(const Point& p) const {
        return p.x >= x_origin && p.x <= x_max() && p.y >= y_origin && p.y <= y_max();
    }
    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Cell index; row 0 is the top (maximum y) row as in the file.
struct PixelRef {
    int col = 0;
    int row = 0;
    friend auto operator<=>(const PixelRef&, const PixelRef&) = default;
};

/// One day's wildfire-potential grid. NO_DATA cells hold NaN.
struct RiskRaster {
    Date day{};
    GridGeometry grid;
    double nodata_value = -9999.0; // sentinel used in the file
    std::vector<double> values;    // row-major, row 0 at the top

    static bool is_nodata(double v) { return std::isnan(v); }
    double at(int col, int row) const { return values[std::size_t(row) * std::size_t(grid.n_cols) + std::size_t(col)]; }
    double at(PixelRef p) const { return at(p.col, p.row); }
    std::size_t nodata_count() const {
        return std::size_t(std::count_if(values.begin(), values.end(), [](double v) { return is_nodata(v); }));
    }
};

/// Pixels a line crosses on a given grid.
struct LinePixelSet {
    int line = 0;
    GridGeometry grid;
    std::vector<PixelRef> pixels; // sorted by (row, col), unique
};

/// Burnable pixel values of a line on one day; `count` is |P_l| over burnable pixels.
struct PixelRisks {
    std::vector<double> values;
    std::size_t count = 0;
};

inline std::string raster_file_name(const Date& day) { return "wfpi_" + format_date(day) + ".asc"; }

namespace detail {

inline std::optional<Date> date_from_raster_name(const std::string& path) {
    auto name = std::filesystem::path(path).filename().string();
    if (name.size() != 19 || name.rfind("wfpi_", 0) != 0 || name.substr(15) != ".asc") return std::nullopt;
    try {
        return parse_date(name.substr(5, 10));
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

inline std::string lower(std::string s) {
    for (auto& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace detail

/// Parses an ESRI ASCII grid. The day comes from a `wfpi_YYYY-MM-DD.asc` file
/// name unless given explicitly.
inline RiskRaster parse_raster(std::istream& in, const std::string& source, std::optional<Date> day = {}) {
    RiskRaster r;
    if (day) r.day = *day;
    bool have_cols = false, have_rows = false, have_x = false, have_y = false, have_cs = false;
    bool x_center = false, y_center = false;

    std::string line;
    std::size_t lineno = 0;
    std::streampos body_start = in.tellg();
    while (true) {
        body_start = in.tellg();
        if (!std::getline(in, line)) break;
        ++lineno;
        std::istringstream ls(line);
        std::string key, val;
        if (!(ls >> key)) continue;
        auto k = detail::lower(key);
        bool is_header = k == "ncols" || k == "nrows" || k == "xllcorner" || k == "yllcorner" ||
                         k == "xllcenter" || k == "yllcenter" || k == "cellsize" || k == "nodata_value";
        if (!is_header) {
            --lineno;
            in.clear();
            in.seekg(body_start);
            break;
        }
        if (!(ls >> val)) throw ParseError(source + ":" + std::to_string(lineno) + ": header '" + key + "' has no value");
        double num = 0.0;
        if (!csv::parse_number(val, num))
            throw ParseError(source + ":" + std::to_string(lineno) + ": header '" + key + "' is not numeric");
        if (k == "ncols") r.grid.n_cols = int(num), have_cols = true;
        else if (k == "nrows") r.grid.n_rows = int(num), have_rows = true;
        else if (k == "xllcorner" || k == "xllcenter") r.grid.x_origin = num, have_x = true, x_center = k == "xllcenter";
        else if (k == "yllcorner" || k == "yllcenter") r.grid.y_origin = num, have_y = true, y_center = k == "yllcenter";
        else if (k == "cellsize") r.grid.cell_size = num, have_cs = true;
        else r.nodata_value = num;
    }
    if (!(have_cols && have_rows && have_x && have_y && have_cs))
        throw ParseError(source + ": header needs ncols, nrows, xllcorner, yllcorner, cellsize");
    if (r.grid.n_cols <= 0 || r.grid.n_rows <= 0)
        throw ValidationError(source + ": ncols and nrows must be positive");
    if (!(r.grid.cell_size > 0.0)) throw ValidationError(source + ": cellsize must be positive");
    if (x_center) r.grid.x_origin -= r.grid.cell_size / 2;
    if (y_center) r.grid.y_origin -= r.grid.cell_size / 2;

    r.values.reserve(std::size_t(r.grid.n_cols) * std::size_t(r.grid.n_rows));
    int row = 0;
    while (row < r.grid.n_rows && std::getline(in, line)) {
        ++lineno;
        std::string_view rest = line;
        int col = 0;
        while (true) {
            auto start = rest.find_first_not_of(" \t\r");
            if (start == std::string_view::npos) break;
            rest.remove_prefix(start);
            auto end = rest.find_first_of(" \t\r");
            auto tok = rest.substr(0, end);
            rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
            double v = 0.0;
            auto ctx = source + ": row " + std::to_string(row) + ", col " + std::to_string(col);
            if (!csv::parse_number(tok, v)) throw ParseError(ctx + ": non-numeric cell '" + std::string(tok) + "'");
            if (col >= r.grid.n_cols)
                throw ParseError(source + ": row " + std::to_string(row) + " has more than " +
                                 std::to_string(r.grid.n_cols) + " columns");
            if (v == r.nodata_value) v = std::numeric_limits<double>::quiet_NaN();
            else if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(ctx + ": negative risk value");
            r.values.push_back(v);
            ++col;
        }
        if (col == 0) {
            --lineno;
            continue; // blank line
        }
        if (col != r.grid.n_cols)
            throw ParseError(source + ": row " + std::to_string(row) + " has " + std::to_string(col) +
                             " columns, header declares " + std::to_string(r.grid.n_cols));
        ++row;
    }
    if (row != r.grid.n_rows)
        throw ParseError(source + ": found " + std::to_string(row) + " rows, header declares " +
                         std::to_string(r.grid.n_rows));
    while (std::getline(in, line))
        if (!csv::trim(line).empty()) throw ParseError(source + ": more rows than the header declares");
    return r;
}

inline RiskRaster load_raster(const std::string& path, std::optional<Date> day = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open raster '" + path + "'");
    if (!day) day = detail::date_from_raster_name(path);
    return parse_raster(in, path, day);
}

inline void write_raster(std::ostream& out, const RiskRaster& r) {
    out << "ncols " << r.grid.n_cols << '\n'
        << "nrows " << r.grid.n_rows << '\n'
        << "xllcorner " << csv::format_double(r.grid.x_origin) << '\n'
        << "yllcorner " << csv::format_double(r.grid.y_origin) << '\n'
        << "cellsize " << csv::format_double(r.grid.cell_size) << '\n'
        << "NODATA_value " << csv::format_double(r.nodata_value) << '\n';
    for (int row = 0; row < r.grid.n_rows; ++row) {
        for (int col = 0; col < r.grid.n_cols; ++col) {
            if (col) out << ' ';
            double v = r.at(col, row);
            out << csv::format_double(RiskRaster::is_nodata(v) ? r.nodata_value : v);
        }
        out << '\n';
    }
}

inline void save_raster(const RiskRaster& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    write_raster(out, r);
}

namespace detail {

/// Supercover of one segment given in grid units (x right, y up, cell (c, r)
/// spans [c, c+1] x [r, r+1]). Appends (col, row-from-bottom) pairs.
inline void supercover_segment(double ax, double ay, double bx, double by, int n_cols, int n_rows,
                               std::vector<PixelRef>& out) {
    if (ax > bx) {
        std::swap(ax, bx);
        std::swap(ay, by);
    }
    int c_lo = std::max(0, int(std::ceil(ax)) - 1);
    int c_hi = std::min(n_cols - 1, int(std::floor(bx)));
    double dx = bx - ax;
    for (int c = c_lo; c <= c_hi; ++c) {
        // y-extent of the segment inside the closed strip [c, c+1]
        double y0 = ay, y1 = by;
        if (dx > 0.0) {
            double x0 = std::max(ax, double(c));
            double x1 = std::min(bx, double(c + 1));
            if (x0 > x1) continue;
            y0 = x0 == ax ? ay : ay + (by - ay) * ((x0 - ax) / dx);
            y1 = x1 == bx ? by : ay + (by - ay) * ((x1 - ax) / dx);
        }
        double ylo = std::min(y0, y1), yhi = std::max(y0, y1);
        int r_lo = std::max(0, int(std::ceil(ylo)) - 1);
        int r_hi = std::min(n_rows - 1, int(std::floor(yhi)));
        for (int r = r_lo; r <= r_hi; ++r) out.push_back({c, r});
    }
}

} // namespace detail

/// All cells whose closed square the polyline touches, corner contacts
/// included, deduplicated and sorted by (row, col). NO_DATA cells are kept.
inline LinePixelSet trace_line(const Line& line, const GridGeometry& grid) {
    LinePixelSet set;
    set.line = line.id;
    set.grid = grid;
    for (std::size_t i = 0; i < line.geometry.size(); ++i)
        if (!grid.contains(line.geometry[i]))
            throw BoundsError("line " + std::to_string(line.id) + ": vertex " + std::to_string(i) + " (" +
                              csv::format_double(line.geometry[i].x) + ", " +
                              csv::format_double(line.geometry[i].y) + ") lies outside the raster extent");
    std::vector<PixelRef> cells;
    auto gx = [&](const Point& p) { return (p.x - grid.x_origin) / grid.cell_size; };
    auto gy = [&](const Point& p) { return (p.y - grid.y_origin) / grid.cell_size; };
    for (std::size_t i = 1; i < line.geometry.size(); ++i) {
        const auto& a = line.geometry[i - 1];
        const auto& b = line.geometry[i];
        detail::supercover_segment(gx(a), gy(a), gx(b), gy(b), grid.n_cols, grid.n_rows, cells);
    }
    for (auto& p : cells) p.row = grid.n_rows - 1 - p.row; // bottom-up to file order
    std::sort(cells.begin(), cells.end(), [](const PixelRef& l, const PixelRef& r) {
        return std::tie(l.row, l.col) < std::tie(r.row, r.col);
    });
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    set.pixels = std::move(cells);
    return set;
}

inline LinePixelSet trace_line(const Line& line, const RiskRaster& raster) { return trace_line(line, raster.grid); }

/// Risk values of the burnable pixels in `set` on the raster's day.
inline PixelRisks pixel_risks(const LinePixelSet& set, const RiskRaster& raster) {
    if (!(set.grid == raster.grid))
        throw GeometryError("line " + std::to_string(set.line) + ": pixel set was traced on a different grid than the raster for " +
                            format_date(raster.day));
    PixelRisks out;
    out.values.reserve(set.pixels.size());
    for (const auto& p : set.pixels) {
        double v = raster.at(p);
        if (!RiskRaster::is_nodata(v)) out.values.push_back(v);
    }
    out.count = out.values.size();
    return out;
}

} // namespace psps
