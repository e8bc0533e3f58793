#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "mfa/common.hpp"

namespace mfa {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct Date {
    int32_t days = 0;

    friend bool operator==(Date a, Date b) { return a.days == b.days; }
    friend bool operator!=(Date a, Date b) { return a.days != b.days; }
    friend bool operator<(Date a, Date b) { return a.days < b.days; }
    friend bool operator<=(Date a, Date b) { return a.days <= b.days; }
    friend bool operator>(Date a, Date b) { return a.days > b.days; }
    friend bool operator>=(Date a, Date b) { return a.days >= b.days; }

    Date next() const { return Date{days + 1}; }
};

namespace detail {

// Days from civil date, and back. Algorithms by Howard Hinnant (public domain).
inline int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct Civil {
    int year;
    unsigned month;
    unsigned day;
};

inline Civil civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), m, d};
}

} // namespace detail

inline Date make_date(int year, unsigned month, unsigned day) {
    return Date{static_cast<int32_t>(detail::days_from_civil(year, month, day))};
}

/// Strict ISO "YYYY-MM-DD". Rejects out-of-range fields (e.g. 2020-02-30).
inline Date parse_date(std::string_view s, long line = 0) {
    auto bad = [&]() -> Date { throw ParseError("invalid date '" + std::string(s) + "'", line); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return bad();
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return bad();
    int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    unsigned m = (s[5] - '0') * 10u + (s[6] - '0');
    unsigned d = (s[8] - '0') * 10u + (s[9] - '0');
    if (m < 1 || m > 12 || d < 1 || d > 31) return bad();
    Date r = make_date(y, m, d);
    auto c = detail::civil_from_days(r.days);
    if (c.year != y || c.month != m || c.day != d) return bad();
    return r;
}

inline std::string to_string(Date d) {
    auto c = detail::civil_from_days(d.days);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

/// 0 = Monday ... 6 = Sunday.
inline int weekday(Date d) {
    int w = static_cast<int>((d.days + 3) % 7);
    return w < 0 ? w + 7 : w;
}

inline bool is_weekday(Date d) { return weekday(d) < 5; }

struct IsoWeek {
    int year;
    int week; // 1..53
    friend bool operator==(const IsoWeek& a, const IsoWeek& b) {
        return a.year == b.year && a.week == b.week;
    }
    friend bool operator<(const IsoWeek& a, const IsoWeek& b) {
        return a.year != b.year ? a.year < b.year : a.week < b.week;
    }
};

inline IsoWeek iso_week(Date d) {
    auto c = detail::civil_from_days(d.days);
    int doy = static_cast<int>(d.days - detail::days_from_civil(c.year, 1, 1)) + 1;
    int wd = weekday(d) + 1; // 1 = Monday ... 7 = Sunday
    int week = (doy - wd + 10) / 7;
    if (week < 1) return iso_week(make_date(c.year - 1, 12, 31));
    if (week == 53) {
        // Week 53 exists only when Jan 1 or Dec 31 falls on Thursday.
        int jan1_wd = weekday(make_date(c.year, 1, 1));
        bool leap = (c.year % 4 == 0 && c.year % 100 != 0) || c.year % 400 == 0;
        if (!(jan1_wd == 3 || (leap && jan1_wd == 2))) return {c.year + 1, 1};
    }
    return {c.year, week};
}

} // namespace mfa
