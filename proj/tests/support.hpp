#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <pvcast/features.hpp>
#include <pvcast/ingest.hpp>
#include <pvcast/time.hpp>

namespace pvcast::testing {

inline Timestamp at(const char* s) { return *parse_timestamp(s); }

// Mid-range values for every field.
inline ingest::WeatherRecord record_at(Timestamp t) {
    ingest::WeatherRecord r;
    r.time = t;
    r.ghi_pyr = 500.0;
    r.dni = 600.0;
    r.air_temperature = 25.0;
    r.relative_humidity = 50.0;
    r.wind_speed = 3.0;
    r.wind_speed_of_gust = 5.0;
    r.wind_from_direction_st_dev = 12.0;
    r.wind_from_direction = 180.0;
    r.barometric_pressure = 940.0;
    return r;
}

// Feature matrix from row-major values, one row per 10-minute slot.
inline features::FeatureMatrix make_matrix(std::vector<std::string> columns, const std::vector<double>& values,
                                           const std::vector<double>& target) {
    features::FeatureMatrix m(std::move(columns), "target");
    const std::size_t p = m.cols();
    Timestamp t = at("2014-01-01 00:00");
    for (std::size_t i = 0; i < target.size(); ++i) {
        m.push_row(t, std::span<const double>(values.data() + i * p, p), target[i]);
        t = t + kCadenceMinutes;
    }
    return m;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pvcast_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace pvcast::testing
