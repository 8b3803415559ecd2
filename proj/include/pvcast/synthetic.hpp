#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "feature_spec.hpp"
#include "ingest.hpp"
#include "rng.hpp"
#include "time.hpp"

// Seeded weather generator used as a test oracle, since measured panel data
// is not available.
//
// Each day gets a clear-sky arc G_peak * max(0, sin(pi * (t - sunrise) / daylength))
// scaled by a slowly varying cloud factor. Humidity, wind speed and wind
// direction are drawn as smooth processes around that latent sky state.
// Air temperature is then back-solved so that the irradiance is an exact,
// known function of the observed inputs:
//
//   linear:    g = b0 + bT*T + bW*W + bH*H + bS*sin(dir) + bC*cos(dir)
//   nonlinear: g = 3 * (1 - 0.4*H^2) * (1 + 0.1*W*sin(dir)) * max(0, T - 0.2 - 0.05*H)^1.5
//
// where g, T, W, H are min-max normalized with the default feature bounds.
// Relative Gaussian noise is applied to the recorded irradiance only.
namespace pvcast::synthetic {

enum class Relation { linear, nonlinear };

inline Relation parse_relation(std::string_view s) {
    if (s == "linear") return Relation::linear;
    if (s == "nonlinear") return Relation::nonlinear;
    throw PreconditionError("unknown relation: " + std::string(s));
}

// Coefficients of the linear relation, in the default irradiance-mode
// column order (air_temperature, wind_speed, relative_humidity,
// wind_dir_sin, wind_dir_cos).
struct LinearConstruction {
    double bias = -0.3;
    std::vector<double> weights{1.6, 0.1, -0.2, 0.05, -0.05};
};

inline Date default_start() { return *make_date(2014, 1, 1); }

inline std::vector<ingest::WeatherRecord> generate(std::uint64_t seed, int days, double noise_sigma,
                                                   Relation relation, Date start = default_start()) {
    if (days < 1) throw PreconditionError("synthetic generation needs days >= 1");
    if (!(noise_sigma >= 0.0)) throw PreconditionError("noise_sigma must be non-negative");

    const auto spec = default_feature_spec();
    const auto& tb = spec.at("air_temperature");
    const auto& wb = spec.at("wind_speed");
    const auto& hb = spec.at("relative_humidity");
    const auto& gb = spec.at("ghi_pyr");
    const LinearConstruction lin;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    SplitMix64 rng(seed);
    std::vector<ingest::WeatherRecord> out;
    out.reserve(static_cast<std::size_t>(days) * kSlotsPerDay);

    for (int d = 0; d < days; ++d) {
        const Date date{start.days + d};
        const double season = std::sin(two_pi * (day_of_year(date) - 80) / 365.25);
        const double daylength = 12.0 + 2.0 * season;
        const double sunrise = 12.0 - daylength / 2.0;
        const double g_peak = 850.0 + 150.0 * season;

        const double cloud_day = 0.3 + 0.7 * std::sqrt(rng.uniform());
        const double cloud_phase = rng.uniform(0.0, two_pi);
        const double humid_day = rng.uniform(-1.0, 1.0);
        const double wind_day = rng.uniform();
        const double wind_phase = rng.uniform(0.0, two_pi);
        const double dir_day = rng.uniform(0.0, 360.0);
        const double dir_phase = rng.uniform(0.0, two_pi);
        const double night_cool = 0.05 + 0.1 * rng.uniform();
        const double gust_ratio = 1.4 + 0.2 * rng.uniform();

        for (std::int64_t slot = 0; slot < kSlotsPerDay; ++slot) {
            const double h = static_cast<double>(slot * kCadenceMinutes) / 60.0;
            const double clear = std::max(0.0, std::sin(std::numbers::pi * (h - sunrise) / daylength));
            const double cloud = std::clamp(cloud_day + 0.08 * std::sin(two_pi * h / 3.0 + cloud_phase), 0.15, 1.0);
            const double g_clean = g_peak * clear * cloud;
            const double g_norm = g_clean / gb.span();

            const double hum = std::clamp(0.15 + 0.55 * (1.0 - cloud) + 0.2 * (1.0 - clear) + 0.05 * humid_day, 0.0, 1.0);
            const double wind = std::clamp(0.05 + 0.25 * wind_day + 0.1 * clear + 0.05 * std::sin(two_pi * h / 6.0 + wind_phase), 0.0, 0.6);
            const double dir = std::fmod(dir_day + 40.0 * std::sin(two_pi * h / 24.0 + dir_phase) + 360.0, 360.0);
            const double rad = dir * std::numbers::pi / 180.0;
            const double ds = std::sin(rad), dc = std::cos(rad);

            double temp;
            if (relation == Relation::linear) {
                const auto& w = lin.weights;
                temp = (g_norm - lin.bias - w[1] * wind - w[2] * hum - w[3] * ds - w[4] * dc) / w[0];
            } else {
                const double m = 3.0 * (1.0 - 0.4 * hum * hum) * (1.0 + 0.1 * wind * ds);
                const double z = g_norm > 0.0 ? std::pow(g_norm / m, 2.0 / 3.0) : -night_cool;
                temp = z + 0.2 + 0.05 * hum;
            }

            const double noise = rng.normal();
            ingest::WeatherRecord r;
            r.time = start_of(date) + slot * kCadenceMinutes;
            r.ghi_pyr = std::max(0.0, g_clean * (1.0 + noise_sigma * noise));
            r.dni = 1.15 * g_peak * cloud * std::sqrt(clear);
            r.air_temperature = tb.min + temp * tb.span();
            r.relative_humidity = hb.min + hum * hb.span();
            r.wind_speed = wb.min + wind * wb.span();
            r.wind_speed_of_gust = r.wind_speed * gust_ratio;
            r.wind_from_direction_st_dev = 8.0 + 25.0 * (1.0 - wind / 0.6);
            r.wind_from_direction = dir;
            r.barometric_pressure = 935.0 - 6.0 * season + 2.0 * std::sin(two_pi * h / 12.0);
            r.sensor_cleaning = (d % 7 == 0) && slot == 48;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace pvcast::synthetic
