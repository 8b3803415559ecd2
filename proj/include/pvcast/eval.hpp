#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "physics.hpp"
#include "text.hpp"
#include "time.hpp"

namespace pvcast::eval {

using physics::PowerSample;
using PowerSeries = std::vector<PowerSample>;

inline constexpr double kDefaultEpsilon = 1.0;

// Absolute percentage error relative to the actual value:
//   100 * |forecast - actual| / actual
// nullopt marks an undefined error (actual at or below epsilon).
inline std::optional<double> ape(double forecast, double actual, double epsilon = kDefaultEpsilon) {
    if (!(actual > epsilon)) return std::nullopt;
    return 100.0 * std::abs(forecast - actual) / actual;
}

struct IntervalRow {
    Timestamp time;
    double predicted_w = 0.0;
    double actual_w = 0.0;
    std::optional<double> ape_pct;
};

struct DayRow {
    Date date;
    double predicted_wh = 0.0;
    double actual_wh = 0.0;
    std::optional<double> ape_pct;
};

struct EvaluationReport {
    std::vector<IntervalRow> per_interval;
    std::vector<DayRow> per_day;
    // mean of the defined daily APEs; nullopt when no day is defined
    std::optional<double> mape;
    std::size_t undefined_count = 0;
    std::size_t unmatched_predicted = 0;
    std::size_t unmatched_actual = 0;
};

inline std::optional<double> mean_defined(const std::vector<DayRow>& days) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& d : days) {
        if (d.ape_pct) {
            s += *d.ape_pct;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
}

// Inner join on timestamp. Daily APE compares daily energy sums; days whose
// actual energy is at or below epsilon (Wh) have no APE.
inline EvaluationReport evaluate(const PowerSeries& predicted, const PowerSeries& actual,
                                 double epsilon = kDefaultEpsilon) {
    std::map<Timestamp, double> act;
    for (const auto& s : actual) act[s.time] = s.watts;

    EvaluationReport r;
    PowerSeries joined_f, joined_a;
    std::size_t matched = 0;
    std::map<Timestamp, double> pred;
    for (const auto& s : predicted) pred[s.time] = s.watts;
    for (const auto& [t, vf] : pred) {
        auto it = act.find(t);
        if (it == act.end()) {
            ++r.unmatched_predicted;
            continue;
        }
        ++matched;
        IntervalRow row{t, vf, it->second, ape(vf, it->second, epsilon)};
        if (!row.ape_pct) ++r.undefined_count;
        r.per_interval.push_back(row);
        joined_f.push_back({t, vf});
        joined_a.push_back({t, it->second});
    }
    r.unmatched_actual = act.size() - matched;
    if (r.per_interval.empty()) throw NoOverlapError("no overlap between predicted and actual series");

    auto ef = physics::daily_energy(joined_f);
    auto ea = physics::daily_energy(joined_a);
    for (const auto& [date, e_a] : ea) {
        const double e_f = ef.at(date);
        r.per_day.push_back({date, e_f, e_a, ape(e_f, e_a, epsilon)});
    }
    r.mape = mean_defined(r.per_day);
    return r;
}

inline constexpr std::string_view kUndefined = "NA";

inline std::string format_optional(const std::optional<double>& v) {
    return v ? text::format_double(*v) : std::string(kUndefined);
}

inline void write_per_interval_csv(std::ostream& os, const EvaluationReport& r) {
    os << "time,predicted_w,actual_w,ape_pct\n";
    for (const auto& row : r.per_interval)
        os << format_timestamp(row.time) << ',' << text::format_double(row.predicted_w) << ','
           << text::format_double(row.actual_w) << ',' << format_optional(row.ape_pct) << '\n';
}

inline void write_per_day_csv(std::ostream& os, const EvaluationReport& r) {
    os << "date,predicted_wh,actual_wh,ape_pct\n";
    for (const auto& row : r.per_day)
        os << format_date(row.date) << ',' << text::format_double(row.predicted_wh) << ','
           << text::format_double(row.actual_wh) << ',' << format_optional(row.ape_pct) << '\n';
}

inline void write_summary_csv(std::ostream& os, const EvaluationReport& r) {
    os << "mape_pct,days,undefined_intervals,unmatched_predicted,unmatched_actual\n";
    os << format_optional(r.mape) << ',' << r.per_day.size() << ',' << r.undefined_count << ','
       << r.unmatched_predicted << ',' << r.unmatched_actual << '\n';
}

namespace detail {

inline std::optional<double> parse_optional(std::string_view s) {
    s = text::trim(s);
    if (s == kUndefined) return std::nullopt;
    auto v = text::parse_double(s);
    if (!v) throw SchemaError("bad numeric field: " + std::string(s));
    return v;
}

inline void expect_header(std::istream& is, std::string_view header) {
    std::string line;
    if (!std::getline(is, line) || text::trim(line) != header)
        throw SchemaError("expected header: " + std::string(header));
}

}  // namespace detail

inline std::vector<IntervalRow> read_per_interval_csv(std::istream& is) {
    detail::expect_header(is, "time,predicted_w,actual_w,ape_pct");
    std::vector<IntervalRow> rows;
    std::string line;
    while (std::getline(is, line)) {
        auto sv = text::trim(line);
        if (sv.empty()) continue;
        auto f = text::split(sv);
        if (f.size() != 4) throw SchemaError("per_interval row needs 4 fields");
        auto t = parse_timestamp(f[0]);
        auto p = text::parse_double(f[1]);
        auto a = text::parse_double(f[2]);
        if (!t || !p || !a) throw SchemaError("bad per_interval row: " + std::string(sv));
        rows.push_back({*t, *p, *a, detail::parse_optional(f[3])});
    }
    return rows;
}

inline std::vector<DayRow> read_per_day_csv(std::istream& is) {
    detail::expect_header(is, "date,predicted_wh,actual_wh,ape_pct");
    std::vector<DayRow> rows;
    std::string line;
    while (std::getline(is, line)) {
        auto sv = text::trim(line);
        if (sv.empty()) continue;
        auto f = text::split(sv);
        if (f.size() != 4) throw SchemaError("per_day row needs 4 fields");
        auto d = parse_date(text::trim(f[0]));
        auto p = text::parse_double(f[1]);
        auto a = text::parse_double(f[2]);
        if (!d || !p || !a) throw SchemaError("bad per_day row: " + std::string(sv));
        rows.push_back({*d, *p, *a, detail::parse_optional(f[3])});
    }
    return rows;
}

// `time,power_w` series, used for both predicted and measured power.
inline void write_power_csv(std::ostream& os, const PowerSeries& s) {
    os << "time,power_w\n";
    for (const auto& p : s) os << format_timestamp(p.time) << ',' << text::format_double(p.watts) << '\n';
}

inline PowerSeries read_power_csv(std::istream& is) {
    detail::expect_header(is, "time,power_w");
    PowerSeries out;
    std::string line;
    while (std::getline(is, line)) {
        auto sv = text::trim(line);
        if (sv.empty()) continue;
        auto f = text::split(sv);
        if (f.size() != 2) throw SchemaError("power row needs 2 fields");
        auto t = parse_timestamp(text::trim(f[0]));
        auto w = text::parse_double(f[1]);
        if (!t || !w || !std::isfinite(*w)) throw SchemaError("bad power row: " + std::string(sv));
        out.push_back({*t, *w});
    }
    return out;
}

}  // namespace pvcast::eval
