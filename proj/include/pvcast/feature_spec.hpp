#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace pvcast {

struct FeatureBound {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    std::string unit;

    double span() const { return max - min; }
    bool contains(double v) const { return v >= min && v <= max; }
};

// Physical bounds per raw field. Min-max scaling of model inputs and targets
// uses these fixed bounds, never per-split statistics.
class FeatureSpec {
public:
    FeatureSpec() = default;
    explicit FeatureSpec(std::vector<FeatureBound> bounds) {
        for (auto& b : bounds) set(std::move(b));
    }

    const std::vector<FeatureBound>& bounds() const { return bounds_; }

    const FeatureBound* find(std::string_view name) const {
        for (const auto& b : bounds_)
            if (b.name == name) return &b;
        return nullptr;
    }

    const FeatureBound& at(std::string_view name) const {
        if (auto* b = find(name)) return *b;
        throw UnknownFeatureError("unknown feature: " + std::string(name));
    }

    bool contains(std::string_view name) const { return find(name) != nullptr; }

    // Inserts or replaces.
    void set(FeatureBound bound) {
        if (!(bound.min < bound.max))
            throw PreconditionError("feature bound for " + bound.name + " needs min < max");
        for (auto& b : bounds_) {
            if (b.name == bound.name) {
                b = std::move(bound);
                return;
            }
        }
        bounds_.push_back(std::move(bound));
    }

private:
    std::vector<FeatureBound> bounds_;
};

inline constexpr std::string_view kPowerTarget = "power_w";

// Observed ranges of the Islamabad 2014-2017 record plus the array's power range.
inline FeatureSpec default_feature_spec() {
    return FeatureSpec({
        {"air_temperature", 0.8, 43.3, "C"},
        {"wind_speed", 0.0, 17.6, "m/s"},
        {"wind_from_direction", 0.0, 360.0, "deg"},
        {std::string(kPowerTarget), 0.0, 600.0, "W"},
        {"ghi_pyr", 0.0, 1140.0, "W/m2"},
        {"relative_humidity", 9.1, 100.0, "%"},
    });
}

}  // namespace pvcast
