#include "tubalcast/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tubalcast/error.hpp"

namespace tubalcast {

namespace {

// the FFTW planner is not reentrant; execution is
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan make_plan(std::size_t n, int sign) {
  std::vector<cplx> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  return fftw_plan_dft_1d(static_cast<int>(n), p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

fftw_plan make_real_plan(std::size_t n, bool to_complex) {
  std::vector<double> re(n);
  std::vector<cplx> half(n / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(half.data());
  const int len = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  return to_complex ? fftw_plan_dft_r2c_1d(len, re.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED)
                    : fftw_plan_dft_c2r_1d(len, c, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  require(n > 0, ErrorKind::InvalidArgument, "FFT length must be positive");
  fwd_ = make_plan(n, FFTW_FORWARD);
  inv_ = make_plan(n, FFTW_BACKWARD);
  r2c_ = make_real_plan(n, true);
  c2r_ = make_real_plan(n, false);
  require(fwd_ && inv_ && r2c_ && c2r_, ErrorKind::InvalidArgument, "FFTW could not plan length " + std::to_string(n));
}

FftPlan::~FftPlan() {
  if (!fwd_ && !inv_ && !r2c_ && !c2r_) return;
  std::lock_guard lock(planner_mutex());
  for (void* p : {fwd_, inv_, r2c_, c2r_})
    if (p) fftw_destroy_plan(static_cast<fftw_plan>(p));
}

FftPlan::FftPlan(FftPlan&& o) noexcept
    : n_(o.n_),
      fwd_(std::exchange(o.fwd_, nullptr)),
      inv_(std::exchange(o.inv_, nullptr)),
      r2c_(std::exchange(o.r2c_, nullptr)),
      c2r_(std::exchange(o.c2r_, nullptr)) {}

FftPlan& FftPlan::operator=(FftPlan&& o) noexcept {
  std::swap(n_, o.n_);
  std::swap(fwd_, o.fwd_);
  std::swap(inv_, o.inv_);
  std::swap(r2c_, o.r2c_);
  std::swap(c2r_, o.c2r_);
  return *this;
}

void FftPlan::forward(std::span<cplx> data) const {
  require(data.size() == n_, ErrorKind::DimMismatch, "FFT input length does not match plan");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void FftPlan::inverse(std::span<cplx> data) const {
  require(data.size() == n_, ErrorKind::DimMismatch, "FFT input length does not match plan");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(inv_), p, p);
  const double s = 1.0 / static_cast<double>(n_);
  for (auto& x : data) x *= s;
}

void FftPlan::forward_real(std::span<const double> in, std::span<cplx> half) const {
  require(in.size() == n_ && half.size() == n_ / 2 + 1, ErrorKind::DimMismatch,
          "real FFT buffer lengths do not match plan");
  // r2c never writes its input, FFTW just lacks a const signature
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(half.data()));
}

void FftPlan::inverse_real(std::span<cplx> half, std::span<double> out) const {
  require(out.size() == n_ && half.size() == n_ / 2 + 1, ErrorKind::DimMismatch,
          "real FFT buffer lengths do not match plan");
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), reinterpret_cast<fftw_complex*>(half.data()),
                       out.data());
  const double s = 1.0 / static_cast<double>(n_);
  for (auto& x : out) x *= s;
}

const FftPlan& fft_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, FftPlan> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, FftPlan(n)).first;
  return it->second;
}

}  // namespace tubalcast
