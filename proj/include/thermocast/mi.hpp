#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "thermocast/ingest.hpp"

namespace thermocast {

/// Equal-width joint histogram over each variable's [min, max].
struct HistogramPair {
    std::size_t bins = 0;
    std::vector<double> x_edges;  // bins + 1 edges
    std::vector<double> y_edges;
    std::vector<std::uint64_t> joint;  // bins x bins, row = x bin
    std::vector<std::uint64_t> x_marginal;
    std::vector<std::uint64_t> y_marginal;
    std::uint64_t samples = 0;
};

/// Bin index of every value; the maximum falls in the last bin. Throws
/// DataError("degenerate variable") on a zero-width range.
std::vector<std::uint32_t> bin_values(std::span<const double> values, std::size_t bins, std::vector<double>* edges = nullptr);

HistogramPair histogram_pair(std::span<const double> x, std::span<const double> y, std::size_t bins);

/// -sum p log2 p over nonempty bins.
double entropy(std::span<const std::uint64_t> counts);

/// I(X;Y) = H(X) + H(Y) - H(X,Y) in bits, clamped at zero.
double mutual_information(std::span<const double> x, std::span<const double> y, std::size_t bins);
double mutual_information(const HistogramPair& hist);

/// (H(X) + H(Y)) / H(X,Y): 2 for X = Y, 1 for independent variables.
double normalized_mi(std::span<const double> x, std::span<const double> y, std::size_t bins);

/// Keeps samples with irradiance above zero, in every channel. The result is
/// no longer evenly spaced, so the hour of each kept sample is carried as an
/// explicit Hour channel.
SensorFrame day_filter(const SensorFrame& frame);

struct MiRow {
    double mi = 0.0;
    double normalized = 0.0;
};

struct MiReport {
    std::size_t bins = 64;
    std::map<Channel, MiRow> all_hours;
    std::map<Channel, MiRow> day_only;
};

/// MI of every channel of the frame (hour included) against temperature.
MiReport mi_report(const SensorFrame& frame, std::size_t bins = 64);

/// Rows {MI, normalized MI} x {all, day}; columns d, h, W, H, R, Q.
void write_mi_csv(const std::filesystem::path& path, const MiReport& report);

}  // namespace thermocast
