#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "features.hpp"
#include "mlp.hpp"
#include "physics.hpp"
#include "text.hpp"
#include "time.hpp"

namespace pvcast::config {

// Thrown for malformed config files or option values.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Flat key -> value settings. Keys use underscores; "panel." keys are dotted.
using Settings = std::map<std::string, std::string, std::less<>>;

inline std::string normalize_key(std::string_view key) {
    std::string k(text::trim(key));
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

// `key = value` per line; '#' starts a comment.
inline Settings parse_settings(std::istream& is) {
    Settings s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view sv = line;
        if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
        sv = text::trim(sv);
        if (sv.empty()) continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        auto key = normalize_key(sv.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        s[key] = std::string(text::trim(sv.substr(eq + 1)));
    }
    return s;
}

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path artifact_dir = "artifacts";
    std::filesystem::path report_dir = "report";

    features::TargetMode target_mode = features::TargetMode::irradiance;
    Timestamp split_boundary = features::default_split_boundary();

    std::string model = "mlp";  // "linreg" or "mlp"
    models::TrainConfig train;
    std::vector<std::size_t> hidden_layers = models::default_hidden_layers();
    models::Activation activation = models::Activation::tanh;
    double ridge_lambda = 0.0;

    physics::PanelSpec panel;
    int panel_count = 4;
    double performance_ratio = 0.75;

    bool all_features = false;
    bool drop_cleaning_rows = false;
    bool strict_range = false;

    physics::PanelArray panel_array() const { return physics::PanelArray(panel, panel_count, performance_ratio); }

    std::filesystem::path records_cache() const { return artifact_dir / "records.csv"; }
    std::filesystem::path model_path() const { return artifact_dir / "model.json"; }
};

// Keys understood by apply(); each is also a --key command-line option.
inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "input", "artifact_dir", "report_dir", "target_mode", "boundary", "model", "epochs", "batch_size",
        "learning_rate", "momentum", "seed", "early_stop_patience", "validation_fraction", "hidden_layers",
        "activation", "ridge_lambda", "panel.p_max_w", "panel.length_m", "panel.width_m", "panel.v_mp", "panel.i_mp", "panel.count",
        "panel.performance_ratio", "all_features", "drop_cleaning_rows", "strict_range",
    };
    return keys;
}

inline const std::vector<std::string>& flag_keys() {
    static const std::vector<std::string> keys{"all_features", "drop_cleaning_rows", "strict_range"};
    return keys;
}

namespace detail {

inline double to_double(const std::string& key, std::string_view v) {
    auto d = text::parse_double(v);
    if (!d || !std::isfinite(*d)) throw ConfigError(key + ": expected a number, got '" + std::string(v) + "'");
    return *d;
}

inline std::uint64_t to_uint(const std::string& key, std::string_view v) {
    v = text::trim(v);
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

inline bool to_bool(const std::string& key, std::string_view v) {
    v = text::trim(v);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + std::string(v) + "'");
}

}  // namespace detail

// Accepts "yyyy-mm-dd HH:MM" or a bare date (midnight).
inline std::optional<Timestamp> parse_time_or_date(std::string_view s) {
    s = text::trim(s);
    if (auto t = parse_timestamp(s)) return t;
    if (auto d = parse_date(s)) return start_of(*d);
    return std::nullopt;
}

inline void apply(RunConfig& c, const Settings& s) {
    for (const auto& [key, value] : s) {
        const auto& v = value;
        if (key == "input") c.input = v;
        else if (key == "artifact_dir") c.artifact_dir = v;
        else if (key == "report_dir") c.report_dir = v;
        else if (key == "target_mode") {
            if (v != "irradiance" && v != "power") throw ConfigError("target_mode: expected irradiance or power");
            c.target_mode = features::parse_target_mode(v);
        } else if (key == "boundary") {
            auto t = parse_time_or_date(v);
            if (!t) throw ConfigError("boundary: expected yyyy-mm-dd[ HH:MM]");
            c.split_boundary = *t;
        } else if (key == "model") {
            if (v != "linreg" && v != "mlp") throw ConfigError("model: expected linreg or mlp");
            c.model = v;
        } else if (key == "epochs") c.train.epochs = detail::to_uint(key, v);
        else if (key == "batch_size") c.train.batch_size = detail::to_uint(key, v);
        else if (key == "learning_rate") c.train.learning_rate = detail::to_double(key, v);
        else if (key == "momentum") c.train.momentum = detail::to_double(key, v);
        else if (key == "seed") c.train.seed = detail::to_uint(key, v);
        else if (key == "early_stop_patience") {
            if (text::trim(v) == "none" || text::trim(v).empty()) c.train.early_stop_patience.reset();
            else c.train.early_stop_patience = detail::to_uint(key, v);
        } else if (key == "validation_fraction") c.train.validation_fraction = detail::to_double(key, v);
        else if (key == "hidden_layers") {
            c.hidden_layers.clear();
            auto t = text::trim(v);
            if (!t.empty() && t != "none")
                for (auto part : text::split(t)) c.hidden_layers.push_back(detail::to_uint(key, part));
        } else if (key == "activation") {
            if (v != "relu" && v != "tanh") throw ConfigError("activation: expected relu or tanh");
            c.activation = models::parse_activation(v);
        } else if (key == "ridge_lambda") c.ridge_lambda = detail::to_double(key, v);
        else if (key == "panel.p_max_w") c.panel.p_max_w = detail::to_double(key, v);
        else if (key == "panel.length_m") c.panel.length_m = detail::to_double(key, v);
        else if (key == "panel.width_m") c.panel.width_m = detail::to_double(key, v);
        else if (key == "panel.v_mp") c.panel.v_mp = detail::to_double(key, v);
        else if (key == "panel.i_mp") c.panel.i_mp = detail::to_double(key, v);
        else if (key == "panel.count") c.panel_count = static_cast<int>(detail::to_uint(key, v));
        else if (key == "panel.performance_ratio") c.performance_ratio = detail::to_double(key, v);
        else if (key == "all_features") c.all_features = detail::to_bool(key, v);
        else if (key == "drop_cleaning_rows") c.drop_cleaning_rows = detail::to_bool(key, v);
        else if (key == "strict_range") c.strict_range = detail::to_bool(key, v);
        else throw ConfigError("unknown config key: " + key);
    }
    try {
        c.train.validate();
        (void)c.panel_array();
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace pvcast::config
