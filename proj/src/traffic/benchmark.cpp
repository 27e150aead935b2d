#include "tubalcast/traffic/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"
#include "tubalcast/traffic/windows.hpp"

namespace tubalcast::traffic {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::gmf_tl: return "gmf_tl";
    case Method::gmf_fc: return "gmf_fc";
    case Method::tnn_admm_then_hold: return "tnn_admm_then_hold";
    case Method::naive_last_value: return "naive_last_value";
  }
  return "?";
}

std::vector<Method> all_methods() {
  return {Method::gmf_tl, Method::gmf_fc, Method::tnn_admm_then_hold, Method::naive_last_value};
}

Method method_from_string(std::string_view s) {
  std::string valid;
  for (Method m : all_methods()) {
    if (s == to_string(m)) return m;
    valid += (valid.empty() ? "" : ", ") + std::string(to_string(m));
  }
  fail(ErrorKind::InvalidArgument, "unknown method '" + std::string(s) + "'; valid methods: " + valid);
}

Tensor3 forecast_naive_last_value(const Tensor3& m, const ObservationMask& mask, std::size_t tp) {
  const Dims3 d = m.dims();
  require(mask.dims() == d && tp >= 1 && tp < d.n3, ErrorKind::DimMismatch, "naive forecast: bad shapes");
  const std::size_t hist = d.n3 - tp;
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (mask.observed_flat(i)) sum += m.data()[i], ++cnt;
  const double fallback = cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
  Tensor3 out({d.n1, d.n2, tp});
  for (std::size_t i = 0; i < d.n1; ++i)
    for (std::size_t j = 0; j < d.n2; ++j) {
      double v = fallback;
      for (std::size_t k = hist; k-- > 0;)
        if (mask.observed(i, j, k)) {
          v = m(i, j, k);
          break;
        }
      for (std::size_t k = 0; k < tp; ++k) out(i, j, k) = v;
    }
  return out;
}

Tensor3 forecast_tnn_then_hold(const Tensor3& m, const ObservationMask& mask, std::size_t tp, const CompletionConfig& cfg) {
  const Dims3 d = m.dims();
  require(tp >= 1 && tp < d.n3, ErrorKind::DimMismatch, "forecast horizon must be in [1, n3)");
  const Tensor3 done = tnn_admm_complete(m, mask, cfg).completed;
  const Eigen::MatrixXd last = done.frontal_slice(d.n3 - tp - 1);
  Tensor3 out({d.n1, d.n2, tp});
  for (std::size_t k = 0; k < tp; ++k) out.set_frontal_slice(k, last);
  return out;
}

std::size_t worker_count(std::size_t requested) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("TUBALCAST_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<std::size_t>(v);
  }
  std::size_t n = requested;
  if (n == 0) n = cap != 0 ? cap : std::max(1U, std::thread::hardware_concurrency());
  if (cap != 0) n = std::min(n, cap);
  return std::max<std::size_t>(n, 1);
}

namespace {

struct WindowResult {
  double abs_sum = 0.0;
  double sq_err = 0.0;
  double sq_truth = 0.0;
  std::size_t count = 0;
  double latency_ms = 0.0;
};

}  // namespace

MetricsReport evaluate_windows(Method method, const std::vector<WindowSample>& windows, const BenchmarkConfig& cfg,
                               const Normalization& norm, double missing_rate, const std::string& dataset) {
  require(!windows.empty(), ErrorKind::InsufficientData, "no windows to evaluate");
  const GmfModel* model = nullptr;
  if (method == Method::gmf_tl || method == Method::gmf_fc) {
    model = method == Method::gmf_tl ? cfg.gmf_tl : cfg.gmf_fc;
    require(model != nullptr, ErrorKind::MissingCheckpoint, "no trained model for " + std::string(to_string(method)));
  }
  const std::size_t count = cfg.max_windows > 0 ? std::min(cfg.max_windows, windows.size()) : windows.size();
  std::vector<WindowResult> results(count);
  const std::size_t tp = cfg.tp;

  auto run_one = [&](std::size_t w) {
    const WindowSample& s = windows[w];
    const Dims3 d = s.truth.dims();
    const auto t0 = std::chrono::steady_clock::now();
    Tensor3 pred;
    switch (method) {
      case Method::gmf_tl:
      case Method::gmf_fc: {
        gmf::InferOptions opts = cfg.infer;
        opts.tp = tp;
        opts.seed = derive_seed(cfg.seed, "infer", s.window_start_index);
        pred = gmf::infer(model->generator, &model->optimizer, s.measurement, s.mask, opts).forecast;
        break;
      }
      case Method::tnn_admm_then_hold: {
        CompletionConfig cc = CompletionConfig::defaults_for(d);
        if (cfg.tau) cc.tau = *cfg.tau;
        cc.max_iters = cfg.admm_iters;
        pred = forecast_tnn_then_hold(s.measurement, s.mask, tp, cc);
        break;
      }
      case Method::naive_last_value: pred = forecast_naive_last_value(s.measurement, s.mask, tp); break;
    }
    WindowResult r;
    r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const Tensor3 truth = s.truth.frontal_range(d.n3 - tp, tp);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      double p = pred.data()[i];
      double t = truth.data()[i];
      if (cfg.raw_metrics) p = norm.denormalize(p), t = norm.denormalize(t);
      r.abs_sum += std::abs(p - t);
      r.sq_err += (p - t) * (p - t);
      r.sq_truth += t * t;
    }
    r.count = truth.size();
    results[w] = r;
  };

  const std::size_t workers = std::min(worker_count(cfg.threads), count);
  if (workers <= 1) {
    for (std::size_t w = 0; w < count; ++w) run_one(w);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t id = 0; id < workers; ++id)
      pool.emplace_back([&, id] {
        try {
          for (std::size_t w = id; w < count; w += workers) run_one(w);
        } catch (...) {
          errors[id] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  MetricsReport rep;
  rep.method = std::string(to_string(method));
  rep.dataset = dataset;
  rep.missing_rate = missing_rate;
  rep.windows = count;
  double abs_sum = 0.0, sq_err = 0.0, sq_truth = 0.0;
  std::size_t entries = 0;
  std::vector<double> lat;
  for (const auto& r : results) {
    abs_sum += r.abs_sum;
    sq_err += r.sq_err;
    sq_truth += r.sq_truth;
    entries += r.count;
    lat.push_back(r.latency_ms);
  }
  require(sq_truth > 0.0, ErrorKind::ZeroTruth, "forecast truth is all zero; NRMSE undefined");
  rep.mae = abs_sum / static_cast<double>(entries);
  rep.nrmse = std::sqrt(sq_err / sq_truth);
  std::nth_element(lat.begin(), lat.begin() + static_cast<std::ptrdiff_t>(lat.size() / 2), lat.end());
  rep.latency_ms = lat[lat.size() / 2];
  return rep;
}

std::vector<MetricsReport> benchmark(const TrafficDataset& d, std::span<const Method> methods,
                                     std::span<const double> missing_rates, const BenchmarkConfig& cfg) {
  require(!methods.empty() && !missing_rates.empty(), ErrorKind::InvalidArgument, "need at least one method and one rate");
  for (Method m : methods) {
    if (m == Method::gmf_tl) require(cfg.gmf_tl != nullptr, ErrorKind::MissingCheckpoint, "gmf_tl needs trained checkpoints");
    if (m == Method::gmf_fc) require(cfg.gmf_fc != nullptr, ErrorKind::MissingCheckpoint, "gmf_fc needs trained checkpoints");
  }
  std::vector<MetricsReport> out;
  for (double rate : missing_rates) {
    const WindowSplit split = make_windows(d, cfg.th, cfg.tp, cfg.split, rate, cfg.seed);
    for (Method m : methods) out.push_back(evaluate_windows(m, split.test, cfg, d.norm, rate, d.name));
  }
  return out;
}

std::string format_table(const std::vector<MetricsReport>& reports) {
  std::vector<double> rates;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, double>, const MetricsReport*> cell;
  for (const auto& r : reports) {
    if (std::find(rates.begin(), rates.end(), r.missing_rate) == rates.end()) rates.push_back(r.missing_rate);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    cell[{r.method, r.missing_rate}] = &r;
  }
  std::ostringstream os;
  os << std::left << std::setw(20) << "method";
  for (double rate : rates) {
    std::ostringstream h;
    h << "rate " << rate;
    os << std::setw(26) << h.str();
  }
  os << "latency_ms\n" << std::setw(20) << "";
  for (std::size_t i = 0; i < rates.size(); ++i) os << std::setw(13) << "MAE" << std::setw(13) << "NRMSE";
  os << "\n";
  os << std::setprecision(4);
  for (const auto& m : methods) {
    os << std::setw(20) << m;
    double lat = 0.0;
    for (double rate : rates) {
      const auto it = cell.find({m, rate});
      if (it == cell.end()) {
        os << std::setw(13) << "-" << std::setw(13) << "-";
        continue;
      }
      os << std::setw(13) << it->second->mae << std::setw(13) << it->second->nrmse;
      lat = std::max(lat, it->second->latency_ms);
    }
    os << lat << "\n";
  }
  return os.str();
}

}  // namespace tubalcast::traffic
