#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tubalcast/error.hpp"
#include "tubalcast/traffic/benchmark.hpp"
#include "tubalcast/traffic/dataset.hpp"
#include "tubalcast/traffic/metrics.hpp"
#include "tubalcast/traffic/windows.hpp"

namespace tubalcast::traffic {
namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TrafficDataset ramp(std::size_t n, std::size_t frames) {
  TrafficDataset d;
  d.name = "ramp";
  d.n = n;
  d.data = Tensor3({n, n, frames});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t t = 0; t < frames; ++t) d.data(i, j, t) = static_cast<double>(t) + 0.01 * static_cast<double>(i * n + j);
  return d;
}

TEST(ParseCsv, TwoMatricesWithCommentsAndBlanks) {
  std::istringstream is("# od volumes\n1,2\n3,4\n\n# next\n5,6\n7,8\n");
  const TrafficDataset d = parse_csv(is, "tiny");
  EXPECT_EQ(d.n, 2U);
  EXPECT_EQ(d.frames(), 2U);
  EXPECT_EQ(d.data(0, 1, 0), 2.0);  // origin 0 -> destination 1
  EXPECT_EQ(d.data(1, 0, 1), 7.0);
  EXPECT_EQ(d.name, "tiny");
}

TEST(ParseCsv, BadNumberNamesLineAndColumn) {
  std::istringstream is("1,2\n3,x\n");
  std::string msg;
  EXPECT_EQ(kind_of([&] { parse_csv(is); }), ErrorKind::ParseError);
  std::istringstream again("1,2\n3,x\n");
  msg = message_of([&] { parse_csv(again); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
}

TEST(ParseCsv, NegativeEntryNamesTheCell) {
  std::istringstream is("1,2\n3,4\n5,6\n-7,8\n");
  EXPECT_EQ(kind_of([&] { parse_csv(is); }), ErrorKind::NegativeTraffic);
  std::istringstream again("1,2\n3,4\n5,6\n-7,8\n");
  const std::string msg = message_of([&] { parse_csv(again); });
  EXPECT_NE(msg.find("matrix 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("2,1"), std::string::npos) << msg;
}

TEST(ParseCsv, ShapeAndEmptyErrors) {
  std::istringstream partial("1,2\n3,4\n5,6\n");
  EXPECT_EQ(kind_of([&] { parse_csv(partial); }), ErrorKind::ShapeError);
  std::istringstream ragged("1,2\n3,4,5\n");
  EXPECT_EQ(kind_of([&] { parse_csv(ragged); }), ErrorKind::ParseError);
  std::istringstream empty("# nothing\n\n");
  EXPECT_EQ(kind_of([&] { parse_csv(empty); }), ErrorKind::ParseError);
}

TEST(Ingest, CsvAndT3fAgree) {
  const auto dir = std::filesystem::temp_directory_path() / "tubalcast_traffic_test";
  std::filesystem::create_directories(dir);
  const TrafficDataset d = ramp(3, 5);
  {
    std::ofstream os(dir / "a.csv");
    os.precision(17);
    for (std::size_t t = 0; t < 5; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        os << d.data(i, 0, t) << "," << d.data(i, 1, t) << "," << d.data(i, 2, t) << "\n";
  }
  write_t3f((dir / "a.t3f").string(), d.data);
  const TrafficDataset c = ingest(dir / "a.csv", guess_format(dir / "a.csv"));
  const TrafficDataset b = ingest(dir / "a.t3f", guess_format(dir / "a.t3f"));
  EXPECT_EQ(c.data, d.data);
  EXPECT_EQ(b.data, d.data);
  EXPECT_EQ(kind_of([&] { ingest(dir / "missing.csv", InputFormat::csv_matrix_sequence); }), ErrorKind::IoError);
  std::filesystem::remove_all(dir);
}

TEST(Preprocess, SpikeIsZeroedAndRestRescaled) {
  // 1e6 entries around 1e5..1e6 plus one 1e9 spike
  TrafficDataset d;
  d.n = 10;
  d.data = Tensor3({10, 10, 10000});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e5, 1e6);
  for (double& x : d.data.data()) x = u(rng);
  d.data(4, 7, 5000) = 1e9;
  double rest_max = 0.0;
  for (std::size_t i = 0; i < d.data.size(); ++i)
    if (d.data.data()[i] < 1e9) rest_max = std::max(rest_max, d.data.data()[i]);

  const TrafficDataset p = preprocess(d, OutlierAction::zero_max_outlier);
  EXPECT_EQ(p.data(4, 7, 5000), 0.0);
  EXPECT_EQ(p.norm.min, 0.0);
  EXPECT_EQ(p.norm.max, rest_max);
  EXPECT_NEAR(p.data(0, 0, 0), d.data(0, 0, 0) / rest_max, 1e-15);
  for (double x : p.data.data()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(Preprocess, NormalizedDataWithNoActionIsUnchanged) {
  TrafficDataset d;
  d.n = 3;
  d.data = Tensor3({3, 3, 4});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& x : d.data.data()) x = u(rng);
  d.data(0, 0, 0) = 0.0;
  d.data(1, 1, 1) = 1.0;
  const TrafficDataset p = preprocess(d, OutlierAction::none);
  EXPECT_EQ(p.data, d.data);
}

TEST(Preprocess, RoundTripAndDegenerate) {
  const TrafficDataset d = ramp(3, 20);
  const TrafficDataset p = preprocess(d, OutlierAction::none);
  for (std::size_t i = 0; i < d.data.size(); ++i)
    EXPECT_NEAR(p.norm.denormalize(p.data.data()[i]), d.data.data()[i], 1e-12);
  TrafficDataset flat;
  flat.n = 2;
  flat.data = Tensor3({2, 2, 5}, 3.0);
  EXPECT_EQ(kind_of([&] { preprocess(flat, OutlierAction::zero_max_outlier); }), ErrorKind::DegenerateRange);
}

TEST(Windows, CountsMatchEnumeration) {
  const TrafficDataset d = ramp(2, 100);
  const WindowSplit s = make_windows(d, 10, 1, 0.8, 0.3, 9);
  // enumerate starts whose 11 frames sit inside [0, 80) or [80, 100)
  std::size_t train = 0, test = 0;
  for (std::size_t start = 0; start + 11 <= 100; ++start) {
    if (start + 11 <= 80) ++train;
    else if (start >= 80) ++test;
  }
  EXPECT_EQ(train, 70U);
  EXPECT_EQ(s.train.size(), train);
  EXPECT_EQ(s.test.size(), test);
  EXPECT_EQ(test, 10U);
}

TEST(Windows, IntegrityAndMaskConsistency) {
  const TrafficDataset d = ramp(3, 60);
  const WindowSplit s = make_windows(d, 6, 2, 0.5, 0.4, 1);
  for (const auto& w : s.train) EXPECT_LE(w.window_start_index + 8, 30U);
  for (const auto& w : s.test) EXPECT_GE(w.window_start_index, 30U);
  for (const auto* part : {&s.train, &s.test})
    for (const auto& w : *part) {
      EXPECT_EQ(w.measurement, apply_mask(w.truth, w.mask));
      EXPECT_GE(w.mask.trailing_unobserved_slices(), 2U);
      EXPECT_EQ(w.truth, d.data.frontal_range(w.window_start_index, 8));
    }
}

TEST(Windows, DeterministicUnderSeed) {
  const TrafficDataset d = ramp(3, 40);
  const WindowSplit a = make_windows(d, 4, 1, 0.5, 0.5, 7);
  const WindowSplit b = make_windows(d, 4, 1, 0.5, 0.5, 7);
  const WindowSplit c = make_windows(d, 4, 1, 0.5, 0.5, 8);
  ASSERT_EQ(a.test.size(), b.test.size());
  bool differs = false;
  for (std::size_t w = 0; w < a.test.size(); ++w) {
    EXPECT_EQ(a.test[w].mask, b.test[w].mask);
    differs = differs || !(a.test[w].mask == c.test[w].mask);
  }
  EXPECT_TRUE(differs);
}

TEST(Windows, HighMissingRateLeavesAboutOneTenth) {
  const TrafficDataset d = synthetic_traffic(12, 400, 2, 5);
  const WindowSplit s = make_windows(d, 10, 1, 0.8, 0.9, 2);
  const double sigma = std::sqrt(1440.0 * 0.1 * 0.9);
  double total = 0.0;
  for (const auto& w : s.test) {
    EXPECT_EQ(w.mask.observed_in_slice(10), 0U);
    EXPECT_LT(std::abs(static_cast<double>(w.mask.omega_size()) - 144.0), 4.0 * sigma);
    total += static_cast<double>(w.mask.omega_size());
  }
  EXPECT_NEAR(total / static_cast<double>(s.test.size()), 144.0, 2.0 * sigma);
}

TEST(Windows, Errors) {
  const TrafficDataset d = ramp(2, 15);
  EXPECT_EQ(kind_of([&] { make_windows(d, 20, 1, 0.8, 0.1, 0); }), ErrorKind::InsufficientData);
  EXPECT_EQ(kind_of([&] { make_windows(d, 10, 1, 0.8, 0.1, 0); }), ErrorKind::InsufficientData);
  EXPECT_EQ(kind_of([&] { make_windows(d, 2, 1, 1.0, 0.1, 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { make_windows(d, 2, 1, 0.5, 1.1, 0); }), ErrorKind::InvalidRate);
}

TEST(Metrics, MatchLoopOracles) {
  std::mt19937_64 rng(11);
  const Tensor3 a = oracle::random_tensor({5, 5, 2}, rng);
  const Tensor3 b = oracle::random_tensor({5, 5, 2}, rng);
  double abs_sum = 0.0, num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        abs_sum += std::abs(a(i, j, k) - b(i, j, k));
        num += (a(i, j, k) - b(i, j, k)) * (a(i, j, k) - b(i, j, k));
        den += b(i, j, k) * b(i, j, k);
      }
  EXPECT_NEAR(mae(a, b), abs_sum / 50.0, 1e-12);
  EXPECT_NEAR(nrmse(a, b), std::sqrt(num / den), 1e-12);
  EXPECT_DOUBLE_EQ(mae(a, b), mae(b, a));
}

TEST(Metrics, IdentitiesAndErrors) {
  std::mt19937_64 rng(12);
  const Tensor3 t = oracle::random_tensor({4, 4, 1}, rng);
  Tensor3 off = t, twice = t, scaled_t = t, scaled_p = t;
  const Tensor3 p = oracle::random_tensor({4, 4, 1}, rng);
  for (std::size_t i = 0; i < t.size(); ++i) {
    off.data()[i] += 0.5;
    twice.data()[i] *= 2.0;
    scaled_t.data()[i] *= 3.7;
    scaled_p.data()[i] = p.data()[i] * 3.7;
  }
  EXPECT_EQ(mae(t, t), 0.0);
  EXPECT_EQ(nrmse(t, t), 0.0);
  EXPECT_NEAR(mae(off, t), 0.5, 1e-15);
  EXPECT_NEAR(nrmse(twice, t), 1.0, 1e-15);
  EXPECT_NEAR(nrmse(scaled_p, scaled_t), nrmse(p, t), 1e-12);
  EXPECT_EQ(kind_of([&] { nrmse(t, Tensor3({4, 4, 1})); }), ErrorKind::ZeroTruth);
  EXPECT_EQ(kind_of([&] { mae(t, Tensor3({4, 4, 2})); }), ErrorKind::DimMismatch);
}

TEST(Naive, LastObservedAndFallback) {
  Tensor3 m({2, 1, 4});
  ObservationMask mask({2, 1, 4});
  m(0, 0, 0) = 1.0, mask.set(0, 0, 0, true);
  m(0, 0, 2) = 3.0, mask.set(0, 0, 2, true);
  m(1, 0, 1) = 5.0;  // masked out, ignored
  const Tensor3 out = forecast_naive_last_value(m, mask, 1);
  EXPECT_EQ(out(0, 0, 0), 3.0);
  EXPECT_EQ(out(1, 0, 0), 2.0);  // mean of observed values
}

TEST(Benchmark, NaiveOnConstantTrafficIsExact) {
  TrafficDataset d;
  d.name = "const";
  d.n = 4;
  d.data = Tensor3({4, 4, 60}, 0.25);
  BenchmarkConfig cfg;
  const std::vector<Method> methods{Method::naive_last_value};
  const std::vector<double> rates{0.1, 0.9};
  for (const auto& r : benchmark(d, methods, rates, cfg)) {
    EXPECT_EQ(r.mae, 0.0);
    EXPECT_EQ(r.nrmse, 0.0);
    EXPECT_EQ(r.windows, 2U);
  }
}

TEST(Benchmark, ReportPerMethodAndRate) {
  const TrafficDataset d = preprocess(synthetic_traffic(6, 120, 2, 1, 48.0), OutlierAction::none);
  BenchmarkConfig cfg;
  cfg.admm_iters = 50;
  cfg.max_windows = 3;
  const std::vector<Method> methods{Method::naive_last_value, Method::tnn_admm_then_hold};
  const std::vector<double> rates{0.1, 0.3, 0.5, 0.7, 0.9};
  const auto reports = benchmark(d, methods, rates, cfg);
  ASSERT_EQ(reports.size(), 10U);
  for (Method m : methods) {
    std::size_t c = 0;
    for (const auto& r : reports)
      if (r.method == to_string(m)) {
        ++c;
        EXPECT_GE(r.mae, 0.0);
        EXPECT_GE(r.nrmse, 0.0);
        EXPECT_EQ(r.windows, 3U);
      }
    EXPECT_EQ(c, 5U);
  }
  const std::string table = format_table(reports);
  EXPECT_NE(table.find("naive_last_value"), std::string::npos);
  EXPECT_NE(table.find("rate 0.9"), std::string::npos);
}

TEST(Benchmark, RawMetricsScaleByRange) {
  const TrafficDataset d = preprocess(synthetic_traffic(5, 80, 2, 3, 48.0), OutlierAction::none);
  BenchmarkConfig cfg;
  const std::vector<Method> methods{Method::naive_last_value};
  const std::vector<double> rates{0.5};
  const double norm_mae = benchmark(d, methods, rates, cfg)[0].mae;
  cfg.raw_metrics = true;
  const double raw_mae = benchmark(d, methods, rates, cfg)[0].mae;
  EXPECT_NEAR(raw_mae, norm_mae * (d.norm.max - d.norm.min), 1e-9 * raw_mae);
}

TEST(Benchmark, ResultsIndependentOfWorkerCount) {
  const TrafficDataset d = preprocess(synthetic_traffic(5, 100, 2, 4, 48.0), OutlierAction::none);
  const WindowSplit s = make_windows(d, 6, 1, 0.7, 0.5, 2);
  BenchmarkConfig cfg;
  cfg.tp = 1;
  cfg.admm_iters = 40;
  cfg.threads = 1;
  const MetricsReport one = evaluate_windows(Method::tnn_admm_then_hold, s.test, cfg, d.norm, 0.5, "x");
  cfg.threads = 3;
  const MetricsReport three = evaluate_windows(Method::tnn_admm_then_hold, s.test, cfg, d.norm, 0.5, "x");
  EXPECT_EQ(one.mae, three.mae);
  EXPECT_EQ(one.nrmse, three.nrmse);
  EXPECT_EQ(one.windows, s.test.size());
}

TEST(Benchmark, MissingModelsAndUnknownMethod) {
  const TrafficDataset d = preprocess(synthetic_traffic(4, 60, 2, 1, 48.0), OutlierAction::none);
  const std::vector<Method> methods{Method::gmf_tl};
  const std::vector<double> rates{0.1};
  EXPECT_EQ(kind_of([&] { benchmark(d, methods, rates, BenchmarkConfig{}); }), ErrorKind::MissingCheckpoint);
  const std::string msg = message_of([] { method_from_string("arima"); });
  EXPECT_NE(msg.find("naive_last_value"), std::string::npos) << msg;
  for (Method m : all_methods()) EXPECT_EQ(method_from_string(to_string(m)), m);
}

TEST(Synthetic, NonnegativeAndSeeded) {
  const TrafficDataset a = synthetic_traffic(6, 50, 3, 8);
  const TrafficDataset b = synthetic_traffic(6, 50, 3, 8);
  EXPECT_EQ(a.data, b.data);
  EXPECT_NO_THROW(validate(a));
  EXPECT_NE(a.data, synthetic_traffic(6, 50, 3, 9).data);
}

TEST(NormalizationFile, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "tubalcast_norm_test.txt";
  const Normalization n{0.125, 1234.5678901234567, true};
  write_normalization(path, n);
  const Normalization r = read_normalization(path);
  EXPECT_EQ(r.min, n.min);
  EXPECT_EQ(r.max, n.max);
  EXPECT_TRUE(r.applied);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace tubalcast::traffic
