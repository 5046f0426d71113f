#pragma once

#include "psps/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace psps {

using Date = std::chrono::year_month_day;

/// Parses an ISO `YYYY-MM-DD` date.
inline Date parse_date(std::string_view text) {
    auto fail = [&] { return ParseError("invalid ISO date '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::string_view part, auto& out) {
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || p != part.data() + part.size()) throw fail();
    };
    num(text.substr(0, 4), y);
    num(text.substr(5, 2), m);
    num(text.substr(8, 2), d);
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw fail();
    return date;
}

inline std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(date.year()), unsigned(date.month()),
                  unsigned(date.day()));
    return buf;
}

inline Date add_days(const Date& date, int n) {
    return Date{std::chrono::sys_days{date} + std::chrono::days{n}};
}

/// Inclusive range [first, last]; empty when last < first.
inline std::vector<Date> date_range(const Date& first, const Date& last) {
    std::vector<Date> out;
    for (auto d = std::chrono::sys_days{first}; d <= std::chrono::sys_days{last}; d += std::chrono::days{1})
        out.emplace_back(d);
    return out;
}

} // namespace psps
