#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace tubalcast::nn {

struct GradCheck {
  double max_rel_error = 0.0;  // over checked coordinates
  std::size_t checked = 0;
  std::size_t nonsmooth = 0;   // flagged and excluded
};

/// Compare `analytic` against central differences of f around the current
/// `params` (perturbed in place and restored). A coordinate is flagged as a
/// non-smooth point when the differences at h and h/2 disagree the way a kink
/// inside the stencil makes them disagree.
///
/// Relative error is |a - c| / max(|a|, |c|, 1e-6 * max(1, |f(x)|)), the floor
/// sitting above the rounding noise of the difference quotient.
/// max_coords > 0 checks a seeded random subset of that many coordinates.
GradCheck finite_diff_check(const std::function<double()>& f, std::span<double> params,
                            std::span<const double> analytic, double h = 1e-5,
                            std::size_t max_coords = 0, std::uint64_t seed = 0);

}  // namespace tubalcast::nn
