#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "csv_util.hpp"
#include "thermocast/error.hpp"

namespace thermocast::detail {

using json = nlohmann::json;

/// Member `key` of `object`, converted to T. Failures name the dotted path.
template <class T>
T field(const json& object, const std::string& key, const std::string& path) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!object.is_object() || !object.contains(key)) throw ConfigError(where + ": missing field");
    try {
        return object.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": wrong type");
    }
}

template <class T>
T field_or(const json& object, const std::string& key, const std::string& path, T fallback) {
    if (!object.is_object() || !object.contains(key)) return fallback;
    return field<T>(object, key, path);
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": not valid JSON (" + e.what() + ")");
    }
}

inline void write_json(const std::filesystem::path& path, const json& value) {
    auto out = open_output(path);
    out << value.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace thermocast::detail
