#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "thermocast/pipeline.hpp"

namespace thermocast {

inline constexpr const char* kModelFormat = "thermocast-model/1";

/// Writes an MLP, ETS or ARIMA model as one JSON document. Ensemble members
/// are written next to the ensemble file as `<stem>.<member id>.json` and
/// referenced by file name.
void save_model(const std::filesystem::path& path, const AnyModel& model);

/// Reads any model written by `save_model`. Malformed documents raise
/// ConfigError naming the offending field.
AnyModel load_model(const std::filesystem::path& path);

std::string window_to_text(const WindowSpec& window);

}  // namespace thermocast
