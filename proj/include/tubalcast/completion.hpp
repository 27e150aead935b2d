#pragma once

#include <cstddef>
#include <vector>

#include "tubalcast/mask.hpp"
#include "tubalcast/tensor3.hpp"

namespace tubalcast {

struct CompletionConfig {
  double tau = 0.0;  // weight of the TNN term
  std::size_t max_iters = 500;
  double tol = 1e-5;  // relative change stopping threshold
  /// Penalty, in units of reference_penalty(); see tnn_admm_complete.
  double rho_admm = 1.0;

  /// tau = 1/sqrt(max(n1, n2) * n3), everything else at its default.
  static CompletionConfig defaults_for(Dims3 dims);
  void validate() const;
};

struct CompletionResult {
  Tensor3 completed;
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective ||M - P(X)||_F^2 + tau*||X||_TNN of the returned iterate after
  /// each iteration; nonincreasing.
  std::vector<double> objective;
};

/// 10 tau / max_k sigma_1(fft(P(M))_k), or 1 when P(M) is zero.
double reference_penalty(const Tensor3& m, const ObservationMask& mask, double tau);

/// Objective of the TNN-regularized completion problem at x.
double completion_objective(const Tensor3& m, const ObservationMask& mask, const Tensor3& x,
                            double tau);

/// min_X ||M - P_Omega(X)||_F^2 + tau ||X||_TNN by ADMM on the split X = Z:
///   Z <- tsvt(X - U, tau/rho)                  (TNN proximal step)
///   X <- data-consistency solve on Omega        (closed form, entrywise)
///   U <- U + Z - X                              (scaled dual update)
/// rho = cfg.rho_admm * reference_penalty(m, mask, tau): the first threshold
/// tau/rho is then a tenth of the top spectral singular value of P(M), which
/// makes the iteration count independent of the data scale.
/// The returned iterate is the best Z seen so far, so the recorded objective is
/// monotone even when the raw ADMM sequence is not.
CompletionResult tnn_admm_complete(const Tensor3& m, const ObservationMask& mask,
                                   const CompletionConfig& cfg);

}  // namespace tubalcast
