#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "thermocast/ingest.hpp"

namespace thermocast {

/// Occupied interval in hours of the day, [start, end).
struct OccupancyBlock {
    double start_hour = 0.0;
    double end_hour = 0.0;
    bool weekends_only = false;
    bool weekdays_only = false;
};

struct SynthConfig {
    std::size_t days = 35;
    std::uint64_t seed = 7;
    Timestamp start = 1298937600;  // 2011-03-01T00:00:00Z
    double base_temperature = 18.0;
    double diurnal_amplitude = 5.0;  // degrees at peak irradiance
    double irradiance_peak = 800.0;  // W/m2
    double inertia = 0.997;          // per-minute thermal inertia
    double occupancy_lift = 0.5;     // degrees while occupied
    // Thermostat heater, enabled while occupied: switches on below
    // setpoint - band/2 and off above setpoint + band/2. Zero power disables it.
    double heating_power = 6.0;  // degrees added to the drive while on
    double heating_setpoint = 20.5;
    double heating_band = 1.0;
    double occupancy_jitter = 0.0;   // hours; each day's schedule shifts by U(-j, j)
    double cloud_variability = 0.7;  // day-to-day spread of the irradiance peak
    double rain_probability = 0.05;  // per hour
    double temperature_noise = 0.004;
    double irradiance_noise = 0.05;  // log-normal spread
    double humidity_noise = 0.3;
    double co2_noise = 8.0;
    std::vector<OccupancyBlock> occupancy{
        {0.0, 7.5, false, false}, {18.0, 24.0, false, false}, {7.5, 18.0, true, false}};

    void validate() const;
};

/// Minute-level d, W, H, Q, R series. Irradiance follows a clipped solar
/// sinusoid (exactly zero at night); temperature relaxes towards a drive set
/// by irradiance and occupancy with per-minute inertia.
std::vector<RawSeries> generate(const SynthConfig& config);

/// Column names used for generated CSV files.
CsvSchema synth_schema();

}  // namespace thermocast
