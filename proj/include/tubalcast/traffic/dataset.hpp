#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "tubalcast/tensor3.hpp"

namespace tubalcast::traffic {

struct Normalization {
  double min = 0.0;
  double max = 1.0;
  bool applied = false;

  double normalize(double x) const noexcept { return applied ? (x - min) / (max - min) : x; }
  double denormalize(double x) const noexcept { return applied ? x * (max - min) + min : x; }
};

/// Time-ordered n x n traffic matrices stacked along mode 3: data(i, j, t) is
/// the volume from origin i to destination j at step t.
struct TrafficDataset {
  std::string name;
  std::size_t n = 0;
  double interval_seconds = 300.0;
  Tensor3 data;
  Normalization norm;

  std::size_t frames() const noexcept { return data.dims().n3; }
};

enum class InputFormat { t3f, csv_matrix_sequence };
InputFormat input_format_from_string(std::string_view s);
/// ".t3f" means t3f, anything else csv.
InputFormat guess_format(const std::filesystem::path& path);

/// CSV: one n-row block per matrix, comma-separated, blocks in time order;
/// '#' lines and blank lines are skipped.
TrafficDataset parse_csv(std::istream& is, std::string name = "csv");
TrafficDataset ingest(const std::filesystem::path& path, InputFormat format);
/// Checks square slices, nonnegative and finite entries.
void validate(const TrafficDataset& d);

enum class OutlierAction { zero_max_outlier, none };
OutlierAction outlier_action_from_string(std::string_view s);

/// Outlier threshold median + 10 * IQR of the positive entries.
double outlier_threshold(const Tensor3& data);

/// Zeroes outliers (zero_max_outlier) and min-max normalizes to [0, 1].
TrafficDataset preprocess(TrafficDataset d, OutlierAction action);

void write_normalization(const std::filesystem::path& path, const Normalization& norm);
Normalization read_normalization(const std::filesystem::path& path);

/// Nonnegative traffic: sum_r 0.6^r c_r(t) a_r b_r^T, times (1 + noise * N(0,1))
/// per entry. Spatial factor r concentrates on nodes i with i mod rank == r;
/// c_r is a smooth daily profile (period in steps) with phases spread over the
/// cycle.
TrafficDataset synthetic_traffic(std::size_t n, std::size_t frames, std::size_t rank, std::uint64_t seed,
                                 double period = 288.0, double noise = 0.01);

}  // namespace tubalcast::traffic
