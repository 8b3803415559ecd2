#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace pvcast {

// Naive local time at minute precision, counted from 1970-01-01 00:00.
// No timezone or DST arithmetic is ever applied.
struct Timestamp {
    std::int64_t minutes = 0;

    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

// Calendar date, counted in days from 1970-01-01.
struct Date {
    std::int64_t days = 0;

    friend constexpr auto operator<=>(Date, Date) = default;
};

inline constexpr std::int64_t kMinutesPerDay = 24 * 60;
inline constexpr std::int64_t kCadenceMinutes = 10;
inline constexpr std::int64_t kSlotsPerDay = kMinutesPerDay / kCadenceMinutes;

constexpr Timestamp operator+(Timestamp t, std::int64_t minutes) { return {t.minutes + minutes}; }
constexpr std::int64_t operator-(Timestamp a, Timestamp b) { return a.minutes - b.minutes; }

constexpr Date date_of(Timestamp t) {
    // floor division so pre-1970 minutes land on the right day
    std::int64_t d = t.minutes / kMinutesPerDay;
    if (t.minutes % kMinutesPerDay < 0) --d;
    return {d};
}

constexpr Timestamp start_of(Date d) { return {d.days * kMinutesPerDay}; }

constexpr int minute_of_day(Timestamp t) {
    return static_cast<int>(t - start_of(date_of(t)));
}

inline std::optional<Date> make_date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) return std::nullopt;
    return Date{sys_days{ymd}.time_since_epoch().count()};
}

inline std::chrono::year_month_day civil(Date d) {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{d.days}}};
}

// 1-based day of year.
inline int day_of_year(Date d) {
    auto ymd = civil(d);
    auto jan1 = make_date(int(ymd.year()), 1, 1);
    return static_cast<int>(d.days - jan1->days) + 1;
}

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

// Parses "yyyy-mm-dd".
inline std::optional<Date> parse_date(std::string_view s) {
    int y, m, d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!detail::parse_digits(s, 0, 4, y) || !detail::parse_digits(s, 5, 2, m) ||
        !detail::parse_digits(s, 8, 2, d))
        return std::nullopt;
    return make_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

// Parses "yyyy-mm-dd HH:MM". The ISO 8601 'T' separator is accepted too.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    if (s.size() != 16 || (s[10] != ' ' && s[10] != 'T') || s[13] != ':') return std::nullopt;
    auto date = parse_date(s.substr(0, 10));
    int hh, mm;
    if (!date || !detail::parse_digits(s, 11, 2, hh) || !detail::parse_digits(s, 14, 2, mm))
        return std::nullopt;
    if (hh > 23 || mm > 59) return std::nullopt;
    return start_of(*date) + (hh * 60 + mm);
}

inline std::string format_date(Date d) {
    auto ymd = civil(d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

inline std::string format_timestamp(Timestamp t) {
    int mod = minute_of_day(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, " %02d:%02d", mod / 60, mod % 60);
    return format_date(date_of(t)) + buf;
}

}  // namespace pvcast
