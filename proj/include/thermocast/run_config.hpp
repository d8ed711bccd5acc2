#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "thermocast/baselines.hpp"
#include "thermocast/ensemble.hpp"
#include "thermocast/ingest.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/pipeline.hpp"
#include "thermocast/search.hpp"
#include "thermocast/synth.hpp"

namespace thermocast {

inline constexpr const char* kRunFormat = "thermocast-run/1";

struct DataConfig {
    std::optional<std::filesystem::path> raw;    // minute-level CSV, ingested on load
    std::optional<std::filesystem::path> frame;  // already resampled frame CSV
    CsvSchema schema;
    IngestOptions ingest;
};

struct PartitionConfig {
    std::size_t train_days = 21;
    std::size_t validation_days = 7;
    std::size_t test_days = 7;
    std::optional<PartitionSpec> ranges;  // explicit sample ranges win over days
};

struct WindowConfig {
    std::vector<Channel> covariates;
    std::size_t target_past = 5;
    std::size_t covariate_past = 5;
    std::size_t horizon = 12;
    bool normalize_target_inputs = false;
};

struct RunConfig {
    std::filesystem::path base_dir;  // relative paths resolve against it
    DataConfig data;
    PartitionConfig partition;
    WindowConfig window;
    MlpConfig mlp;
    std::vector<std::size_t> past_sizes = default_past_sizes();
    Strategy strategy = Strategy::CombExp;
    GridSpec grid = default_grid();
    bool ets = true;
    std::vector<HourRegressors> arima{HourRegressors::None, HourRegressors::Factor, HourRegressors::Quadratic};
    SynthConfig synth;
    std::size_t mi_bins = 64;
    Split split = Split::Validation;
    /// Canonical text of the parsed document, hashed into manifests.
    std::string canonical;
};

/// Parses a run config. Any malformed or unknown field raises ConfigError
/// naming it by its dotted path.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

WindowSpec window_spec(const RunConfig& config);
WindowSpec window_spec(const RunConfig& config, std::size_t target_past);

/// Loads the configured data source, ingesting raw logs when needed, and
/// partitions the longest gap-free frame. Paths read are appended to `inputs`.
Dataset load_dataset(const RunConfig& config, std::vector<std::filesystem::path>* inputs = nullptr);

}  // namespace thermocast
