#pragma once

#include <cstddef>

#include "tubalcast/mask.hpp"
#include "tubalcast/tensor3.hpp"

namespace tubalcast {

/// One sliding-window instance. measurement == apply_mask(truth, mask) and
/// the last tp frontal slices of mask are unobserved.
struct WindowSample {
  Tensor3 truth;
  Tensor3 measurement;
  ObservationMask mask;
  std::size_t window_start_index = 0;
};

/// Builds a sample from a truth window and its mask.
inline WindowSample make_sample(Tensor3 truth, ObservationMask mask, std::size_t start = 0) {
  WindowSample s;
  s.measurement = apply_mask(truth, mask);
  s.truth = std::move(truth);
  s.mask = std::move(mask);
  s.window_start_index = start;
  return s;
}

}  // namespace tubalcast
