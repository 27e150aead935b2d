#pragma once

#include <cstddef>
#include <vector>

namespace tubalcast::gmf {

/// Per-epoch trajectory of a training run. All per-epoch values are means
/// over the samples of that epoch.
struct TrainReport {
  std::vector<double> loss;         // total objective
  std::vector<double> recon;        // ||G(.) - T||_F^2
  std::vector<double> regularizer;  // pretraining: TNN(G(v)); f_phi: ||z_hat - v||_F^2
  std::size_t final_epoch = 0;
  bool converged = false;
  double seconds = 0.0;
};

}  // namespace tubalcast::gmf
