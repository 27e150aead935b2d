#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace tubalcast {

using cplx = std::complex<double>;

/// Complex DFT of one fixed length, backed by FFTW.
///
/// Forward is unnormalized, inverse carries the 1/n factor. Plans are immutable
/// once built and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

  /// Real input to the n/2+1 non-redundant coefficients (unnormalized).
  void forward_real(std::span<const double> in, std::span<cplx> half) const;
  /// Inverse of forward_real including the 1/n factor. `half` is clobbered.
  void inverse_real(std::span<cplx> half, std::span<double> out) const;

 private:
  std::size_t n_ = 0;
  void* fwd_ = nullptr;  // fftw_plan
  void* inv_ = nullptr;
  void* r2c_ = nullptr;
  void* c2r_ = nullptr;
};

/// Per-thread cached plan for length n.
const FftPlan& fft_plan(std::size_t n);

}  // namespace tubalcast
