#include "tubalcast/traffic/windows.hpp"

#include <cmath>
#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"

namespace tubalcast::traffic {

WindowSplit make_windows(const TrafficDataset& d, std::size_t th, std::size_t tp, double split, double missing_rate,
                         std::uint64_t seed) {
  require(th >= 1 && tp >= 1, ErrorKind::InvalidArgument, "th and tp must be >= 1");
  require(split > 0.0 && split < 1.0, ErrorKind::InvalidArgument, "split must lie in (0, 1)");
  require(missing_rate >= 0.0 && missing_rate <= 1.0, ErrorKind::InvalidRate, "missing rate must lie in [0, 1]");
  const std::size_t n3 = th + tp;
  const std::size_t frames = d.frames();
  require(n3 <= frames, ErrorKind::InsufficientData,
          "window of " + std::to_string(n3) + " frames needs at least that many matrices, have " + std::to_string(frames));
  const auto boundary = static_cast<std::size_t>(std::floor(split * static_cast<double>(frames)));
  require(boundary >= n3 && frames - boundary >= n3, ErrorKind::InsufficientData,
          "split at frame " + std::to_string(boundary) + " leaves fewer than " + std::to_string(n3) +
              " frames on one side");

  const Dims3 dims{d.n, d.n, n3};
  auto build = [&](std::size_t first, std::size_t last, std::vector<WindowSample>& out) {
    for (std::size_t s = first; s + n3 <= last; ++s)
      out.push_back(make_sample(d.data.frontal_range(s, n3), random_mask(dims, missing_rate, tp, derive_seed(seed, "mask", s)), s));
  };
  WindowSplit out;
  build(0, boundary, out.train);
  build(boundary, frames, out.test);
  return out;
}

void remask(std::vector<WindowSample>& windows, std::span<const double> rates, std::size_t tp, std::uint64_t seed) {
  require(!rates.empty(), ErrorKind::InvalidArgument, "need at least one missing rate");
  for (std::size_t w = 0; w < windows.size(); ++w) {
    WindowSample& s = windows[w];
    s.mask = random_mask(s.truth.dims(), rates[w % rates.size()], tp, derive_seed(seed, "mask", s.window_start_index));
    s.measurement = apply_mask(s.truth, s.mask);
  }
}

std::vector<Tensor3> truths(const std::vector<WindowSample>& windows) {
  std::vector<Tensor3> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.truth);
  return out;
}

}  // namespace tubalcast::traffic
