#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "feature_spec.hpp"
#include "text.hpp"
#include "time.hpp"

namespace pvcast::ingest {

// One 10-minute observation.
struct WeatherRecord {
    Timestamp time;
    double ghi_pyr = 0.0;                     // W/m^2
    double dni = 0.0;                         // W/m^2
    double air_temperature = 0.0;             // C at 2 m
    double relative_humidity = 0.0;           // % at 2 m
    double wind_speed = 0.0;                  // m/s at 10 m
    double wind_speed_of_gust = 0.0;          // m/s
    double wind_from_direction_st_dev = 0.0;  // deg
    double wind_from_direction = 0.0;         // deg clockwise from north
    double barometric_pressure = 0.0;         // hPa
    bool sensor_cleaning = false;

    friend bool operator==(const WeatherRecord&, const WeatherRecord&) = default;
};

struct NumericField {
    std::string_view name;
    double WeatherRecord::*member;
};

inline constexpr std::array<NumericField, 9> kNumericFields{{
    {"ghi_pyr", &WeatherRecord::ghi_pyr},
    {"dni", &WeatherRecord::dni},
    {"air_temperature", &WeatherRecord::air_temperature},
    {"relative_humidity", &WeatherRecord::relative_humidity},
    {"wind_speed", &WeatherRecord::wind_speed},
    {"wind_speed_of_gust", &WeatherRecord::wind_speed_of_gust},
    {"wind_from_direction_st_dev", &WeatherRecord::wind_from_direction_st_dev},
    {"wind_from_direction", &WeatherRecord::wind_from_direction},
    {"barometric_pressure", &WeatherRecord::barometric_pressure},
}};

inline const std::vector<std::string>& default_schema() {
    static const std::vector<std::string> schema{
        "time",
        "ghi_pyr",
        "dni",
        "air_temperature",
        "relative_humidity",
        "wind_speed",
        "wind_speed_of_gust",
        "wind_from_direction_st_dev",
        "wind_from_direction",
        "barometric_pressure",
        "sensor_cleaning",
    };
    return schema;
}

// Raw field value by column name; sensor_cleaning reads as 0/1.
inline double field_value(const WeatherRecord& r, std::string_view name) {
    for (const auto& f : kNumericFields)
        if (f.name == name) return r.*f.member;
    if (name == "sensor_cleaning") return r.sensor_cleaning ? 1.0 : 0.0;
    throw UnknownFeatureError("unknown weather field: " + std::string(name));
}

namespace reason {
inline constexpr std::string_view kFieldCount = "wrong field count";
inline constexpr std::string_view kTimestamp = "unparseable timestamp";
inline constexpr std::string_view kNonNumeric = "non-numeric field";
inline constexpr std::string_view kNonFinite = "non-finite value";
inline constexpr std::string_view kPhysicalRange = "out of physical range";
inline constexpr std::string_view kDuplicate = "duplicate timestamp";
inline constexpr std::string_view kOutOfOrder = "timestamp out of order";
inline constexpr std::string_view kFeatureBounds = "outside feature bounds";
inline constexpr std::string_view kSensorCleaning = "sensor cleaning";
}  // namespace reason

// Run of missing cadence slots between two consecutive records.
// start and end are the first and last missing slot.
struct Gap {
    Timestamp start;
    Timestamp end;
    std::int64_t missing_intervals = 0;

    friend bool operator==(const Gap&, const Gap&) = default;
};

struct IngestReport {
    std::size_t rows_accepted = 0;
    std::size_t rows_rejected = 0;
    std::map<std::string, std::size_t, std::less<>> rejected_by_reason;
    std::vector<Gap> gaps;
    // steps between consecutive records that are not a multiple of the cadence
    std::size_t off_cadence_steps = 0;
    std::map<std::string, std::size_t, std::less<>> out_of_range_flags;
    std::size_t flagged_rows = 0;

    std::size_t total_rows() const { return rows_accepted + rows_rejected; }

    std::int64_t missing_intervals() const {
        std::int64_t n = 0;
        for (const auto& g : gaps) n += g.missing_intervals;
        return n;
    }

    void reject(std::string_view why) {
        ++rows_rejected;
        auto it = rejected_by_reason.find(why);
        if (it == rejected_by_reason.end())
            rejected_by_reason.emplace(std::string(why), 1);
        else
            ++it->second;
    }

    std::string summary() const {
        std::ostringstream os;
        os << "rows accepted: " << rows_accepted << "\n";
        os << "rows rejected: " << rows_rejected << "\n";
        for (const auto& [why, n] : rejected_by_reason) os << "  " << why << ": " << n << "\n";
        os << "gaps: " << gaps.size() << " (" << missing_intervals() << " missing intervals)\n";
        if (off_cadence_steps) os << "off-cadence steps: " << off_cadence_steps << "\n";
        os << "rows flagged out of range: " << flagged_rows << "\n";
        for (const auto& [field, n] : out_of_range_flags) os << "  " << field << ": " << n << "\n";
        return os.str();
    }
};

struct ParseOptions {
    std::vector<std::string> schema = default_schema();
    // reject rows outside `bounds` instead of only flagging them
    bool strict_range = false;
    FeatureSpec bounds = default_feature_spec();
    bool drop_cleaning_rows = false;
};

struct ParseResult {
    std::vector<WeatherRecord> records;
    IngestReport report;
};

namespace detail {

inline bool physically_valid(const WeatherRecord& r) {
    return r.wind_from_direction >= 0.0 && r.wind_from_direction <= 360.0 &&
           r.relative_humidity >= 0.0 && r.relative_humidity <= 100.0;
}

inline bool within(const WeatherRecord& r, const FeatureSpec& bounds) {
    for (const auto& f : kNumericFields) {
        const auto* b = bounds.find(f.name);
        if (b && !b->contains(r.*f.member)) return false;
    }
    return true;
}

// Column index for each recognised field, or npos when absent from the file.
struct ColumnMap {
    std::size_t width = 0;
    std::size_t time = std::string::npos;
    std::array<std::size_t, kNumericFields.size()> numeric{};
    std::size_t cleaning = std::string::npos;
};

inline ColumnMap map_header(std::string_view header, const std::vector<std::string>& schema) {
    auto cols = text::split(header);
    ColumnMap map;
    map.width = cols.size();
    map.numeric.fill(std::string::npos);
    std::vector<bool> seen(schema.size(), false);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        auto name = text::trim(cols[i]);
        auto it = std::find(schema.begin(), schema.end(), name);
        if (it == schema.end()) throw SchemaError("unknown column: " + std::string(name));
        auto si = static_cast<std::size_t>(it - schema.begin());
        if (seen[si]) throw SchemaError("duplicate column: " + std::string(name));
        seen[si] = true;
        if (name == "time") {
            map.time = i;
        } else if (name == "sensor_cleaning") {
            map.cleaning = i;
        } else {
            bool known = false;
            for (std::size_t f = 0; f < kNumericFields.size(); ++f) {
                if (kNumericFields[f].name == name) {
                    map.numeric[f] = i;
                    known = true;
                }
            }
            if (!known) throw SchemaError("unsupported column: " + std::string(name));
        }
    }
    for (std::size_t s = 0; s < schema.size(); ++s)
        if (!seen[s]) throw SchemaError("missing column: " + schema[s]);
    if (map.time == std::string::npos) throw SchemaError("missing column: time");
    return map;
}

}  // namespace detail

// Rows are kept in file order and must already be ascending in time:
// a repeated timestamp or a step backwards rejects the later row.
// Blank lines are ignored and do not count as rows.
inline ParseResult parse_csv(std::istream& source, const ParseOptions& options = {}) {
    ParseResult out;
    std::string line;
    bool have_header = false;
    while (std::getline(source, line)) {
        if (!text::trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw SchemaError("missing header row");
    std::string_view header = line;
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    const auto cols = detail::map_header(header, options.schema);

    while (std::getline(source, line)) {
        std::string_view row = text::trim(line);
        if (row.empty()) continue;
        auto fields = text::split(row);
        if (fields.size() != cols.width) {
            out.report.reject(reason::kFieldCount);
            continue;
        }
        WeatherRecord rec;
        auto ts = parse_timestamp(text::trim(fields[cols.time]));
        if (!ts) {
            out.report.reject(reason::kTimestamp);
            continue;
        }
        rec.time = *ts;

        std::string_view bad;
        for (std::size_t f = 0; f < kNumericFields.size() && bad.empty(); ++f) {
            if (cols.numeric[f] == std::string::npos) continue;
            auto v = text::parse_double(fields[cols.numeric[f]]);
            if (!v) bad = reason::kNonNumeric;
            else if (!std::isfinite(*v)) bad = reason::kNonFinite;
            else rec.*kNumericFields[f].member = *v;
        }
        if (bad.empty() && cols.cleaning != std::string::npos) {
            auto v = text::parse_double(fields[cols.cleaning]);
            if (!v) bad = reason::kNonNumeric;
            else if (!std::isfinite(*v)) bad = reason::kNonFinite;
            else if (*v != 0.0 && *v != 1.0) bad = reason::kPhysicalRange;
            else rec.sensor_cleaning = *v == 1.0;
        }
        if (bad.empty() && !detail::physically_valid(rec)) bad = reason::kPhysicalRange;
        if (bad.empty() && !out.records.empty()) {
            auto prev = out.records.back().time;
            if (rec.time == prev) bad = reason::kDuplicate;
            else if (rec.time < prev) bad = reason::kOutOfOrder;
        }
        if (bad.empty() && options.strict_range && !detail::within(rec, options.bounds))
            bad = reason::kFeatureBounds;
        if (bad.empty() && options.drop_cleaning_rows && rec.sensor_cleaning)
            bad = reason::kSensorCleaning;

        if (!bad.empty()) {
            out.report.reject(bad);
            continue;
        }
        out.records.push_back(rec);
        ++out.report.rows_accepted;
    }
    return out;
}

inline ParseResult parse_csv(std::string_view source, const ParseOptions& options = {}) {
    std::istringstream in{std::string(source)};
    return parse_csv(in, options);
}

// Fills only the gap fields of the returned report.
inline IngestReport audit_gaps(const std::vector<WeatherRecord>& records,
                               std::int64_t cadence_minutes = kCadenceMinutes) {
    if (cadence_minutes <= 0) throw PreconditionError("cadence must be positive");
    IngestReport report;
    for (std::size_t i = 1; i < records.size(); ++i) {
        auto step = records[i].time - records[i - 1].time;
        if (step <= 0) throw PreconditionError("audit_gaps requires strictly ascending records");
        if (step % cadence_minutes != 0) ++report.off_cadence_steps;
        if (step <= cadence_minutes) continue;
        // slots prev + k*cadence lying strictly before the next record
        std::int64_t missing = (step - 1) / cadence_minutes;
        report.gaps.push_back({records[i - 1].time + cadence_minutes,
                               records[i - 1].time + missing * cadence_minutes, missing});
    }
    return report;
}

// Fills only the out-of-range fields of the returned report. Bounds are inclusive.
inline IngestReport flag_range(const std::vector<WeatherRecord>& records, const FeatureSpec& bounds) {
    IngestReport report;
    for (const auto& r : records) {
        bool flagged = false;
        for (const auto& f : kNumericFields) {
            const auto* b = bounds.find(f.name);
            if (b && !b->contains(r.*f.member)) {
                ++report.out_of_range_flags[std::string(f.name)];
                flagged = true;
            }
        }
        if (flagged) ++report.flagged_rows;
    }
    return report;
}

// parse_csv + audit_gaps + flag_range combined into one report.
inline ParseResult ingest(std::istream& source, const ParseOptions& options = {}) {
    auto result = parse_csv(source, options);
    auto gaps = audit_gaps(result.records);
    auto flags = flag_range(result.records, options.bounds);
    result.report.gaps = std::move(gaps.gaps);
    result.report.off_cadence_steps = gaps.off_cadence_steps;
    result.report.out_of_range_flags = std::move(flags.out_of_range_flags);
    result.report.flagged_rows = flags.flagged_rows;
    return result;
}

inline void write_csv(std::ostream& os, const std::vector<WeatherRecord>& records) {
    const auto& schema = default_schema();
    for (std::size_t i = 0; i < schema.size(); ++i) os << (i ? "," : "") << schema[i];
    os << "\n";
    for (const auto& r : records) {
        os << format_timestamp(r.time) << ',' << text::format_double(r.ghi_pyr) << ','
           << text::format_double(r.dni) << ',' << text::format_double(r.air_temperature) << ','
           << text::format_double(r.relative_humidity) << ',' << text::format_double(r.wind_speed)
           << ',' << text::format_double(r.wind_speed_of_gust) << ','
           << text::format_double(r.wind_from_direction_st_dev) << ','
           << text::format_double(r.wind_from_direction) << ','
           << text::format_double(r.barometric_pressure) << ',' << (r.sensor_cleaning ? 1 : 0)
           << "\n";
    }
}

}  // namespace pvcast::ingest
