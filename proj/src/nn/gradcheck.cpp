#include "tubalcast/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"

namespace tubalcast::nn {

GradCheck finite_diff_check(const std::function<double()>& f, std::span<double> params,
                            std::span<const double> analytic, double h, std::size_t max_coords,
                            std::uint64_t seed) {
  require(h > 0.0, ErrorKind::InvalidArgument, "finite difference step must be positive");
  require(params.size() == analytic.size(), ErrorKind::DimMismatch, "gradient length differs from parameter length");

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (max_coords > 0 && max_coords < coords.size()) {
    Rng rng = make_rng(seed, "gradcheck");
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(max_coords);
    std::sort(coords.begin(), coords.end());
  }

  const double f0 = f();
  const double floor = 1e-6 * std::max(1.0, std::abs(f0));
  auto at = [&](std::size_t i, double delta) {
    const double keep = params[i];
    params[i] = keep + delta;
    const double v = f();
    params[i] = keep;
    return v;
  };

  GradCheck out;
  for (std::size_t i : coords) {
    const double p1 = at(i, h), m1 = at(i, -h);
    const double p2 = at(i, h / 2), m2 = at(i, -h / 2);
    const double c1 = (p1 - m1) / (2 * h);
    const double c2 = (p2 - m2) / h;
    // second differences scaled like a gradient: ~h f'' and ~h f''/2 when smooth
    const double d1 = (p1 - 2 * f0 + m1) / h;
    const double d2 = (p2 - 2 * f0 + m2) / (h / 2);
    const double scale = std::max({std::abs(c1), std::abs(c2), floor});
    if (std::abs(c1 - c2) > 1e-3 * scale || std::abs(d2 - d1 / 2) > 0.25 * std::abs(d1) + 10 * floor) {
      ++out.nonsmooth;
      continue;
    }
    const double a = analytic[i];
    const double rel = std::abs(a - c1) / std::max({std::abs(a), std::abs(c1), floor});
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.checked;
  }
  return out;
}

}  // namespace tubalcast::nn
