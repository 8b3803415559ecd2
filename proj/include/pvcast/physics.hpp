#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "time.hpp"

// Irradiance-to-power conversion for a flat array of identical panels:
//
//   power = A_total * r * G * PR
//
// with A_total the summed panel area, r the panel yield at standard test
// conditions, G the irradiance and PR the performance ratio. Applied per
// 10-minute slot; energy is the time integral of the resulting power.
namespace pvcast::physics {

inline constexpr double kStcIrradiance = 1000.0;  // W/m^2

// Nameplate of one module. Defaults are the EverExceed EX150-36P.
struct PanelSpec {
    double p_max_w = 150.0;
    double length_m = 1.480;
    double width_m = 0.680;
    double v_mp = 18.4;
    double i_mp = 8.16;
    double operating_temp_c = 47.0;
    double operating_temp_tolerance_c = 2.0;

    double area_m2() const { return length_m * width_m; }

    void validate() const {
        if (!(p_max_w > 0.0)) throw PreconditionError("panel p_max must be positive");
        if (!(area_m2() > 0.0)) throw PreconditionError("panel area must be positive");
        if (std::abs(v_mp * i_mp - p_max_w) / p_max_w >= 0.02)
            throw PreconditionError("panel V_mp * I_mp disagrees with p_max by 2% or more");
    }
};

class PanelArray {
public:
    PanelArray() : PanelArray(PanelSpec{}, 4, 0.75) {}

    PanelArray(PanelSpec panel, int count, double performance_ratio)
        : panel_(panel), count_(count), performance_ratio_(performance_ratio) {
        panel_.validate();
        if (count_ < 1) throw PreconditionError("panel count must be at least 1");
        if (!(performance_ratio_ > 0.0 && performance_ratio_ <= 1.0))
            throw PreconditionError("performance ratio must lie in (0, 1]");
    }

    const PanelSpec& panel() const { return panel_; }
    int count() const { return count_; }
    double performance_ratio() const { return performance_ratio_; }

    double total_area_m2() const { return count_ * panel_.area_m2(); }

    // Nameplate yield: fraction of STC irradiance converted at p_max.
    double yield() const { return panel_.p_max_w / (panel_.area_m2() * kStcIrradiance); }

    double rated_power_w() const { return count_ * panel_.p_max_w; }

private:
    PanelSpec panel_;
    int count_;
    double performance_ratio_;
};

inline double instantaneous_power(double irradiance, const PanelArray& array) {
    if (!(irradiance >= 0.0)) throw PreconditionError("irradiance must be non-negative");
    return array.total_area_m2() * array.yield() * irradiance * array.performance_ratio();
}

struct PowerSample {
    Timestamp time;
    double watts = 0.0;
};

// Wh per calendar date: each sample contributes watts * cadence.
inline std::map<Date, double> daily_energy(const std::vector<PowerSample>& powers,
                                           std::int64_t cadence_minutes = kCadenceMinutes) {
    std::map<Date, double> out;
    const double minutes = static_cast<double>(cadence_minutes);
    for (const auto& s : powers) out[date_of(s.time)] += s.watts * minutes / 60.0;
    return out;
}

}  // namespace pvcast::physics
