#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "feature_spec.hpp"
#include "ingest.hpp"
#include "physics.hpp"
#include "text.hpp"
#include "time.hpp"

namespace pvcast::features {

enum class TargetMode { irradiance, power };

inline std::string_view to_string(TargetMode m) {
    return m == TargetMode::irradiance ? "irradiance" : "power";
}

inline TargetMode parse_target_mode(std::string_view s) {
    if (s == "irradiance") return TargetMode::irradiance;
    if (s == "power") return TargetMode::power;
    throw PreconditionError("unknown target mode: " + std::string(s));
}

inline constexpr std::string_view kWindDirection = "wind_from_direction";
inline constexpr std::string_view kWindDirSin = "wind_dir_sin";
inline constexpr std::string_view kWindDirCos = "wind_dir_cos";

inline bool is_circular(std::string_view raw_name) { return raw_name == kWindDirection; }

// x -> (x - min) / (max - min), clamped to [0, 1].
inline double normalize_value(const FeatureBound& b, double raw) {
    return std::clamp((raw - b.min) / b.span(), 0.0, 1.0);
}

// Inverse of normalize_value. Outside [0, 1] extrapolates linearly unless strict.
inline double denormalize_value(const FeatureBound& b, double norm, bool strict = false) {
    if (strict && !(norm >= 0.0 && norm <= 1.0))
        throw PreconditionError("normalized value for " + b.name + " outside [0, 1]");
    return b.min + norm * b.span();
}

// Degrees to the unit circle. Unclamped: sin/cos already lie in [-1, 1].
inline std::pair<double, double> encode_direction(double degrees) {
    double rad = degrees * std::numbers::pi / 180.0;
    return {std::sin(rad), std::cos(rad)};
}

// Back to degrees in [0, 360).
inline double decode_direction(double sin_v, double cos_v) {
    double deg = std::atan2(sin_v, cos_v) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

// Model columns for an ordered list of raw inputs; the circular wind
// direction expands to a sin and a cos column.
inline std::vector<std::string> encoded_columns(std::span<const std::string> raw_names) {
    std::vector<std::string> cols;
    for (const auto& n : raw_names) {
        if (is_circular(n)) {
            cols.emplace_back(kWindDirSin);
            cols.emplace_back(kWindDirCos);
        } else {
            cols.push_back(n);
        }
    }
    return cols;
}

inline std::vector<double> normalize(std::span<const double> raw, std::span<const std::string> raw_names,
                                     const FeatureSpec& spec) {
    if (raw.size() != raw_names.size()) throw PreconditionError("normalize: value/name count mismatch");
    std::vector<double> out;
    out.reserve(raw.size() + 1);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& bound = spec.at(raw_names[i]);
        if (is_circular(raw_names[i])) {
            auto [s, c] = encode_direction(raw[i]);
            out.push_back(s);
            out.push_back(c);
        } else {
            out.push_back(normalize_value(bound, raw[i]));
        }
    }
    return out;
}

inline std::vector<double> denormalize(std::span<const double> norm, std::span<const std::string> raw_names,
                                       const FeatureSpec& spec, bool strict = false) {
    std::vector<double> out;
    out.reserve(raw_names.size());
    std::size_t j = 0;
    for (const auto& name : raw_names) {
        const auto& bound = spec.at(name);
        if (is_circular(name)) {
            if (j + 2 > norm.size()) throw PreconditionError("denormalize: too few values");
            out.push_back(decode_direction(norm[j], norm[j + 1]));
            j += 2;
        } else {
            if (j + 1 > norm.size()) throw PreconditionError("denormalize: too few values");
            out.push_back(denormalize_value(bound, norm[j], strict));
            j += 1;
        }
    }
    if (j != norm.size()) throw PreconditionError("denormalize: too many values");
    return out;
}

inline std::vector<std::string> default_inputs() {
    return {"air_temperature", "wind_speed", "relative_humidity", std::string(kWindDirection)};
}

// Fields left out of the default inputs; enabled together by the all-features option.
inline std::vector<std::string> extra_inputs() {
    return {"dni", "wind_speed_of_gust", "wind_from_direction_st_dev", "barometric_pressure"};
}

inline std::vector<std::string> all_inputs() {
    auto v = default_inputs();
    for (auto& e : extra_inputs()) v.push_back(std::move(e));
    return v;
}

// Adds bounds for any of `names` missing from `spec`, using the observed
// min/max over `records` (widened by 1 when constant).
inline FeatureSpec with_inferred_bounds(FeatureSpec spec, const std::vector<ingest::WeatherRecord>& records,
                                        std::span<const std::string> names) {
    for (const auto& name : names) {
        if (spec.contains(name)) continue;
        if (records.empty()) throw EmptyDatasetError("cannot infer bounds for " + name + " from no records");
        double lo = ingest::field_value(records.front(), name), hi = lo;
        for (const auto& r : records) {
            double v = ingest::field_value(r, name);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(lo < hi)) {
            lo -= 0.5;
            hi += 0.5;
        }
        spec.set({name, lo, hi, ""});
    }
    return spec;
}

class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> columns, std::string target_name)
        : columns_(std::move(columns)), target_name_(std::move(target_name)) {}

    const std::vector<std::string>& columns() const { return columns_; }
    const std::string& target_name() const { return target_name_; }
    std::size_t rows() const { return timestamps_.size(); }
    std::size_t cols() const { return columns_.size(); }
    bool empty() const { return timestamps_.empty(); }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& target() const { return target_; }
    const std::vector<Timestamp>& timestamps() const { return timestamps_; }

    void push_row(Timestamp t, std::span<const double> features, double target) {
        if (features.size() != cols()) throw PreconditionError("feature row width mismatch");
        if (!timestamps_.empty() && !(timestamps_.back() < t))
            throw PreconditionError("feature matrix timestamps must be strictly increasing");
        values_.insert(values_.end(), features.begin(), features.end());
        timestamps_.push_back(t);
        target_.push_back(target);
    }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::vector<std::string> columns_;
    std::string target_name_;
    std::vector<double> values_;
    std::vector<Timestamp> timestamps_;
    std::vector<double> target_;
};

struct DatasetLayout {
    std::vector<std::string> raw_inputs = default_inputs();
    TargetMode mode = TargetMode::irradiance;

    std::vector<std::string> columns() const { return encoded_columns(raw_inputs); }
    std::string target_name() const {
        return mode == TargetMode::irradiance ? "ghi_pyr" : std::string(kPowerTarget);
    }
};

struct BuildResult {
    FeatureMatrix matrix;
    std::size_t dropped = 0;
};

// ghi_pyr never appears among the inputs: it is the irradiance target and the
// power target is a fixed function of it. Negative irradiance readings are
// treated as zero when forming targets.
inline BuildResult build_dataset(const std::vector<ingest::WeatherRecord>& records, const FeatureSpec& spec,
                                 const DatasetLayout& layout, const physics::PanelArray& panel) {
    if (records.empty()) throw EmptyDatasetError("empty dataset");
    for (const auto& n : layout.raw_inputs)
        if (n == "ghi_pyr") throw PreconditionError("ghi_pyr cannot be a model input");
    const auto& target_bound = spec.at(layout.target_name());
    for (const auto& n : layout.raw_inputs) (void)spec.at(n);

    BuildResult out{FeatureMatrix(layout.columns(), layout.target_name()), 0};
    std::vector<double> raw(layout.raw_inputs.size());
    for (const auto& r : records) {
        bool ok = std::isfinite(r.ghi_pyr);
        for (std::size_t i = 0; i < raw.size() && ok; ++i) {
            raw[i] = ingest::field_value(r, layout.raw_inputs[i]);
            ok = std::isfinite(raw[i]);
        }
        if (!ok) {
            ++out.dropped;
            continue;
        }
        double g = std::max(0.0, r.ghi_pyr);
        double target = layout.mode == TargetMode::irradiance
                            ? normalize_value(target_bound, g)
                            : normalize_value(target_bound, physics::instantaneous_power(g, panel));
        out.matrix.push_row(r.time, normalize(raw, layout.raw_inputs, spec), target);
    }
    if (out.matrix.empty()) throw EmptyDatasetError("empty dataset");
    return out;
}

struct SplitDataset {
    FeatureMatrix train;
    FeatureMatrix test;
    Timestamp boundary;

    bool one_side_empty() const { return train.empty() || test.empty(); }
};

inline Timestamp default_split_boundary() { return start_of(*make_date(2017, 1, 1)); }

// Rows strictly before `boundary` train; rows at or after it test.
inline SplitDataset chronological_split(const FeatureMatrix& m, Timestamp boundary = default_split_boundary()) {
    SplitDataset out{FeatureMatrix(m.columns(), m.target_name()), FeatureMatrix(m.columns(), m.target_name()),
                     boundary};
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto t = m.timestamps()[i];
        (t < boundary ? out.train : out.test).push_row(t, m.row(i), m.target()[i]);
    }
    return out;
}

// Header: feature columns, then `target`, then `time`.
inline void write_matrix_csv(std::ostream& os, const FeatureMatrix& m) {
    for (const auto& c : m.columns()) os << c << ',';
    os << "target,time\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (double v : m.row(i)) os << text::format_double(v) << ',';
        os << text::format_double(m.target()[i]) << ',' << format_timestamp(m.timestamps()[i]) << '\n';
    }
}

inline FeatureMatrix read_matrix_csv(std::istream& is, std::string target_name = "target") {
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("missing header row");
    auto header = text::split(text::trim(line));
    if (header.size() < 2 || header[header.size() - 2] != "target" || header.back() != "time")
        throw SchemaError("feature matrix header must end with target,time");
    std::vector<std::string> cols(header.begin(), header.end() - 2);
    FeatureMatrix m(cols, std::move(target_name));
    std::vector<double> row(cols.size());
    while (std::getline(is, line)) {
        auto sv = text::trim(line);
        if (sv.empty()) continue;
        auto f = text::split(sv);
        if (f.size() != header.size()) throw SchemaError("feature matrix row width mismatch");
        for (std::size_t j = 0; j < cols.size(); ++j) {
            auto v = text::parse_double(f[j]);
            if (!v || !std::isfinite(*v)) throw SchemaError("non-numeric feature value");
            row[j] = *v;
        }
        auto t = text::parse_double(f[cols.size()]);
        auto ts = parse_timestamp(f.back());
        if (!t || !ts) throw SchemaError("bad target or time field");
        m.push_row(*ts, row, *t);
    }
    return m;
}

}  // namespace pvcast::features
