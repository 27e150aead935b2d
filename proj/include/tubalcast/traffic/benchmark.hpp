#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tubalcast/completion.hpp"
#include "tubalcast/gmf/inference.hpp"
#include "tubalcast/traffic/dataset.hpp"
#include "tubalcast/window.hpp"

namespace tubalcast::traffic {

enum class Method { gmf_tl, gmf_fc, tnn_admm_then_hold, naive_last_value };

std::string_view to_string(Method m) noexcept;
/// InvalidArgument naming the valid methods on failure.
Method method_from_string(std::string_view s);
std::vector<Method> all_methods();

struct GmfModel {
  gmf::GeneratorParams generator;
  gmf::LearnedOptimizerParams optimizer;
};

struct MetricsReport {
  std::string method;
  std::string dataset;
  double missing_rate = 0.0;
  double mae = 0.0;
  double nrmse = 0.0;
  double latency_ms = 0.0;  // median per window
  std::size_t windows = 0;
};

struct BenchmarkConfig {
  std::size_t th = 10;
  std::size_t tp = 1;
  double split = 0.8;
  std::uint64_t seed = 0;
  bool raw_metrics = false;
  gmf::InferOptions infer;  // seed is replaced per window
  std::optional<double> tau;
  std::size_t admm_iters = 500;
  std::size_t threads = 0;      // 0: TUBALCAST_THREADS, else hardware concurrency
  std::size_t max_windows = 0;  // 0: every test window
  const GmfModel* gmf_tl = nullptr;
  const GmfModel* gmf_fc = nullptr;
};

/// Most recent observed value of every OD pair, repeated over the horizon.
/// Pairs never observed in the window take the mean observed value.
Tensor3 forecast_naive_last_value(const Tensor3& m, const ObservationMask& mask, std::size_t tp);
/// TNN completion of the window, then the last historical slice held over the horizon.
Tensor3 forecast_tnn_then_hold(const Tensor3& m, const ObservationMask& mask, std::size_t tp,
                               const CompletionConfig& cfg);

/// Worker count: requested if nonzero, else TUBALCAST_THREADS, else hardware
/// concurrency; TUBALCAST_THREADS also caps an explicit request.
std::size_t worker_count(std::size_t requested);

/// Forecast every window with one method and aggregate. Results do not
/// depend on the worker count.
MetricsReport evaluate_windows(Method method, const std::vector<WindowSample>& windows, const BenchmarkConfig& cfg,
                               const Normalization& norm, double missing_rate, const std::string& dataset);

/// Every (method, missing rate) pair over the test split of d.
std::vector<MetricsReport> benchmark(const TrafficDataset& d, std::span<const Method> methods,
                                     std::span<const double> missing_rates, const BenchmarkConfig& cfg);

/// Fixed-width text table, one row per method and one column pair per rate.
std::string format_table(const std::vector<MetricsReport>& reports);

}  // namespace tubalcast::traffic
