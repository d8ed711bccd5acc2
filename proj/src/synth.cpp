#include "thermocast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thermocast/error.hpp"
#include "thermocast/random.hpp"

namespace thermocast {

namespace {

bool is_weekend(Timestamp ts) {
    // 1970-01-01 was a Thursday.
    const auto day = (ts >= 0 ? ts / 86400 : (ts - 86399) / 86400);
    const auto weekday = ((day % 7) + 7 + 3) % 7;  // 0 = Monday
    return weekday >= 5;
}

double occupied(const SynthConfig& config, Timestamp ts, double shift) {
    const double hour = static_cast<double>(((ts % 86400) + 86400) % 86400) / 3600.0 - shift;
    const bool weekend = is_weekend(ts);
    for (const auto& block : config.occupancy) {
        if (block.weekends_only && !weekend) continue;
        if (block.weekdays_only && weekend) continue;
        if (hour >= block.start_hour && hour < block.end_hour) return 1.0;
    }
    return 0.0;
}

// Clear-sky shape: positive strictly between 06:00 and 18:00 UTC.
double solar_shape(Timestamp ts) {
    const double hour = static_cast<double>(((ts % 86400) + 86400) % 86400) / 3600.0;
    if (hour <= 6.0 || hour >= 18.0) return 0.0;
    return std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
}

}  // namespace

void SynthConfig::validate() const {
    if (days < 1) throw ConfigError("synth.days must be at least 1");
    if (!(inertia >= 0.0 && inertia < 1.0)) throw ConfigError("synth.inertia must lie in [0, 1)");
    for (double s : {temperature_noise, irradiance_noise, humidity_noise, co2_noise})
        if (s < 0.0) throw ConfigError("synth noise deviations must be non-negative");
    if (!(rain_probability >= 0.0 && rain_probability <= 1.0))
        throw ConfigError("synth.rain_probability must lie in [0, 1]");
    if (heating_power < 0.0 || heating_band < 0.0 || occupancy_jitter < 0.0) throw ConfigError("synth heating power, band and occupancy jitter must be non-negative");
    if (!(cloud_variability >= 0.0 && cloud_variability <= 1.0))
        throw ConfigError("synth.cloud_variability must lie in [0, 1]");
}

CsvSchema synth_schema() {
    CsvSchema schema;
    schema.timestamp_column = "timestamp";
    schema.columns = {{Channel::Temperature, "temperature"},
                      {Channel::Irradiance, "irradiance"},
                      {Channel::Humidity, "humidity"},
                      {Channel::Co2, "co2"},
                      {Channel::Rain, "rain"}};
    return schema;
}

std::vector<RawSeries> generate(const SynthConfig& config) {
    config.validate();
    const std::size_t minutes = config.days * 1440;
    Rng rng(config.seed);

    auto make = [&](Channel channel) {
        RawSeries s;
        s.channel = channel;
        s.period = 60;
        s.timestamps.resize(minutes);
        s.values.resize(minutes);
        for (std::size_t i = 0; i < minutes; ++i) s.timestamps[i] = config.start + static_cast<Timestamp>(i) * 60;
        return s;
    };
    auto temperature = make(Channel::Temperature);
    auto irradiance = make(Channel::Irradiance);
    auto humidity = make(Channel::Humidity);
    auto co2 = make(Channel::Co2);
    auto rain = make(Channel::Rain);

    // Day-level cloudiness and hour-level rain are drawn up front so that the
    // per-minute draw order does not depend on them.
    std::vector<double> cloud(config.days + 1);
    for (auto& c : cloud) c = 1.0 - config.cloud_variability * rng.uniform();
    std::vector<char> raining(config.days * 24 + 1);
    for (auto& r : raining) r = rng.uniform() < config.rain_probability ? 1 : 0;
    std::vector<double> shift(config.days + 1, 0.0);
    if (config.occupancy_jitter > 0.0)
        for (auto& s : shift) s = config.occupancy_jitter * (2.0 * rng.uniform() - 1.0);

    const double rho = config.inertia;
    const double co2_rho = 0.98;
    double d = config.base_temperature;
    double q = 420.0;
    double humid_noise = 0.0;
    bool heater_on = false;
    for (std::size_t i = 0; i < minutes; ++i) {
        const Timestamp ts = temperature.timestamps[i];
        const std::size_t day = i / 1440;
        const std::size_t hour_index = i / 60;
        const bool wet = raining[hour_index] != 0;
        const double occ = occupied(config, ts, shift[day]);

        const double shape = solar_shape(ts);
        double w = config.irradiance_peak * cloud[day] * shape * (wet ? 0.3 : 1.0);
        const double w_noise = rng.normal();
        if (w > 0.0) w *= std::exp(config.irradiance_noise * w_noise);

        if (config.heating_power > 0.0 && occ > 0.0) {
            if (d < config.heating_setpoint - 0.5 * config.heating_band) heater_on = true;
            else if (d > config.heating_setpoint + 0.5 * config.heating_band) heater_on = false;
        } else {
            heater_on = false;
        }
        const double drive = config.base_temperature + config.diurnal_amplitude * w / config.irradiance_peak +
                             config.occupancy_lift * occ + (heater_on ? config.heating_power : 0.0);
        d = rho * d + (1.0 - rho) * drive + config.temperature_noise * rng.normal();

        q = co2_rho * q + (1.0 - co2_rho) * (420.0 + 500.0 * occ) + config.co2_noise * rng.normal();
        humid_noise = 0.9 * humid_noise + config.humidity_noise * rng.normal();
        const double h = std::clamp(45.0 + 8.0 * occ - 5.0 * w / config.irradiance_peak + humid_noise, 0.0, 100.0);

        temperature.values[i] = d;
        irradiance.values[i] = w;
        humidity.values[i] = h;
        co2.values[i] = std::max(q, 0.0);
        rain.values[i] = wet ? 1.0 : 0.0;
    }
    return {std::move(temperature), std::move(irradiance), std::move(humidity), std::move(co2), std::move(rain)};
}

}  // namespace thermocast
