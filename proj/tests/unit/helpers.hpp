#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "thermocast/ingest.hpp"
#include "thermocast/random.hpp"

namespace testutil {

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("thermocast_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

// Noisy diurnal temperature with an irradiance channel, 15-min cadence.
inline thermocast::SensorFrame sine_frame(std::size_t n, std::uint64_t seed = 1) {
    using thermocast::Channel;
    thermocast::Rng rng(seed);
    thermocast::SensorFrame frame;
    frame.period = 900;
    frame.start = 1298937600 + 900;
    auto& d = frame.channels[Channel::Temperature];
    auto& w = frame.channels[Channel::Irradiance];
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = 2.0 * M_PI * static_cast<double>(i % 96) / 96.0;
        const double sun = std::max(0.0, std::sin(phase - M_PI / 2.0));
        w.push_back(sun > 0.0 ? 800.0 * sun + 5.0 * rng.uniform() : 0.0);
        d.push_back(20.0 + 2.0 * std::sin(phase - 2.0) + 0.02 * rng.normal());
    }
    return frame;
}

}  // namespace testutil
