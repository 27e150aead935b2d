#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "tubalcast/gmf/generator.hpp"
#include "tubalcast/gmf/optimizer.hpp"

namespace tubalcast::gmf {

enum class InferMode { learned, gd };

std::string_view to_string(InferMode m) noexcept;
InferMode infer_mode_from_string(std::string_view s);

struct InferOptions {
  InferMode mode = InferMode::learned;
  std::size_t k_steps = 3;     // learned mode
  std::size_t gd_iters = 100;  // gd mode
  double rho = 0.01;           // gd step size
  double gamma = 0.01;         // weight of the spectral l1 term in the energy
  std::size_t tp = 1;
  std::size_t restarts = 1;    // best-energy latent wins
  std::uint64_t seed = 0;
};

struct InferResult {
  Tensor3 full;
  Tensor3 forecast;  // last tp frontal slices of full
  Eigen::VectorXd z;
  double energy = 0.0;  // latent energy of z
  double latency_ms = 0.0;
};

/// z_1 ~ N(0, 1), then K learned updates (or gd_iters plain gradient steps),
/// then G(z). Read-only over g and f; f may be null in gd mode.
InferResult infer(const GeneratorParams& g, const LearnedOptimizerParams* f, const Tensor3& m,
                  const ObservationMask& mask, const InferOptions& opts);

}  // namespace tubalcast::gmf
