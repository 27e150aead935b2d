#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tubalcast/traffic/dataset.hpp"
#include "tubalcast/window.hpp"

namespace tubalcast::traffic {

struct WindowSplit {
  std::vector<WindowSample> train;
  std::vector<WindowSample> test;
};

/// First floor(split * T) frames are the training region; every window of
/// th + tp consecutive frames lying wholly inside a region becomes a sample.
/// Mask of the window starting at frame s uses seed derive_seed(seed, "mask", s).
WindowSplit make_windows(const TrafficDataset& d, std::size_t th, std::size_t tp, double split, double missing_rate,
                         std::uint64_t seed);

/// Re-draws every mask, cycling the missing rate through `rates` window by window.
void remask(std::vector<WindowSample>& windows, std::span<const double> rates, std::size_t tp, std::uint64_t seed);

std::vector<Tensor3> truths(const std::vector<WindowSample>& windows);

}  // namespace tubalcast::traffic
