#include "tubalcast/talgebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>

#include <lapacke.h>

#include "tubalcast/error.hpp"
#include "tubalcast/fft.hpp"

namespace tubalcast {

namespace {

Tensor3 real_part_inverse(const SpectralTensor3& s, double* max_imag = nullptr,
                          double* max_real = nullptr) {
  const Dims3 d = s.dims();
  const FftPlan& plan = fft_plan(d.n3);
  Tensor3 out(d);
  std::vector<cplx> tube(d.n3);
  double mi = 0.0;
  double mr = 0.0;
  auto src = s.data();
  auto dst = out.data();
  for (std::size_t t = 0; t < d.n1 * d.n2; ++t) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(t * d.n3), d.n3, tube.begin());
    plan.inverse(tube);
    for (std::size_t k = 0; k < d.n3; ++k) {
      dst[t * d.n3 + k] = tube[k].real();
      mi = std::max(mi, std::abs(tube[k].imag()));
      mr = std::max(mr, std::abs(tube[k].real()));
    }
  }
  if (max_imag) *max_imag = mi;
  if (max_real) *max_real = mr;
  return out;
}

// Fills slice n3-k with the conjugate of slice k for every non-self-conjugate k.
void mirror_conjugates(SpectralTensor3& s) {
  const Dims3 d = s.dims();
  for (std::size_t i = 0; i < d.n1; ++i)
    for (std::size_t j = 0; j < d.n2; ++j)
      for (std::size_t k = 1; k < unique_slices(d.n3); ++k)
        if (d.n3 - k != k) s(i, j, d.n3 - k) = std::conj(s(i, j, k));
}

// Non-redundant mode-3 coefficients, tube-major with n3/2+1 entries per tube.
std::vector<cplx> half_spectrum(const Tensor3& t) {
  const Dims3 d = t.dims();
  const std::size_t h = unique_slices(d.n3);
  const FftPlan& plan = fft_plan(d.n3);
  std::vector<cplx> out(d.n1 * d.n2 * h);
  auto src = t.data();
  for (std::size_t tb = 0; tb < d.n1 * d.n2; ++tb)
    plan.forward_real(src.subspan(tb * d.n3, d.n3), std::span(out).subspan(tb * h, h));
  return out;
}

Tensor3 from_half_spectrum(std::vector<cplx>& half, Dims3 d) {
  const std::size_t h = unique_slices(d.n3);
  const FftPlan& plan = fft_plan(d.n3);
  Tensor3 out(d);
  auto dst = out.data();
  for (std::size_t tb = 0; tb < d.n1 * d.n2; ++tb)
    plan.inverse_real(std::span(half).subspan(tb * h, h), dst.subspan(tb * d.n3, d.n3));
  return out;
}

bool self_conjugate(std::size_t k, std::size_t n3) { return k == 0 || 2 * k == n3; }

// LAPACK divide-and-conquer; several times faster than a Jacobi sweep at n ~ 12.
template <class M>
void gesdd(M a, char job, Eigen::VectorXd& sigma, M& u, M& vt) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int p = std::min(m, n);
  sigma.resize(p);
  const lapack_int ucols = job == 'A' ? m : p;
  const lapack_int vrows = job == 'A' ? n : p;
  if (job != 'N') {
    u.resize(m, ucols);
    vt.resize(vrows, n);
  }
  lapack_int info = 0;
  if (p == 0) return;
  if constexpr (std::is_same_v<typename M::Scalar, double>) {
    info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, job, m, n, a.data(), m, sigma.data(),
                          job == 'N' ? nullptr : u.data(), m, job == 'N' ? nullptr : vt.data(),
                          std::max<lapack_int>(vrows, 1));
  } else {
    auto z = [](auto* x) { return reinterpret_cast<lapack_complex_double*>(x); };
    info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, job, m, n, z(a.data()), m, sigma.data(),
                          job == 'N' ? nullptr : z(u.data()), m, job == 'N' ? nullptr : z(vt.data()),
                          std::max<lapack_int>(vrows, 1));
  }
  require(info == 0, ErrorKind::ConvergenceFailure, "slice SVD failed (info " + std::to_string(info) + ")");
}

SliceSvd slice_svd(const Eigen::MatrixXcd& m, bool real_slice, SvdVectors vectors) {
  SliceSvd out;
  const char job = vectors == SvdVectors::none ? 'N' : vectors == SvdVectors::thin ? 'S' : 'A';
  if (real_slice) {
    Eigen::MatrixXd u, vt;
    gesdd<Eigen::MatrixXd>(m.real(), job, out.sigma, u, vt);
    if (vectors != SvdVectors::none) {
      out.u = u.cast<cplx>();
      out.v = vt.transpose().cast<cplx>();
    }
  } else {
    Eigen::MatrixXcd u, vt;
    gesdd<Eigen::MatrixXcd>(m, job, out.sigma, u, vt);
    if (vectors != SvdVectors::none) {
      out.u = std::move(u);
      out.v = vt.adjoint();
    }
  }
  require(out.sigma.allFinite(), ErrorKind::ConvergenceFailure, "slice SVD produced non-finite values");
  return out;
}

}  // namespace

SpectralTensor3 fft_mode3(const Tensor3& t) {
  const Dims3 d = t.dims();
  require(d.positive(), ErrorKind::InvalidArgument, "tensor dims must be positive");
  const FftPlan& plan = fft_plan(d.n3);
  SpectralTensor3 s(d);
  auto src = t.data();
  auto dst = s.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
  for (std::size_t tb = 0; tb < d.n1 * d.n2; ++tb) plan.forward(dst.subspan(tb * d.n3, d.n3));
  return s;
}

Tensor3 ifft_mode3(const SpectralTensor3& s) {
  double max_imag = 0.0;
  double max_real = 0.0;
  Tensor3 out = real_part_inverse(s, &max_imag, &max_real);
  require(max_imag <= 1e-9 * std::max(1.0, max_real), ErrorKind::NonRealResult,
          "imaginary residue " + std::to_string(max_imag) + " after inverse transform");
  return out;
}

Tensor3 tproduct(const Tensor3& a, const Tensor3& b) {
  const Dims3 da = a.dims();
  const Dims3 db = b.dims();
  require(da.n2 == db.n1 && da.n3 == db.n3, ErrorKind::DimMismatch,
          "tproduct " + to_string(da) + " * " + to_string(db));
  const std::size_t h = unique_slices(da.n3);
  const auto fa = half_spectrum(a);
  const auto fb = half_spectrum(b);
  std::vector<cplx> fc(da.n1 * db.n2 * h);
  for (std::size_t i = 0; i < da.n1; ++i)
    for (std::size_t p = 0; p < da.n2; ++p) {
      const cplx* x = &fa[(i * da.n2 + p) * h];
      for (std::size_t j = 0; j < db.n2; ++j) {
        const cplx* y = &fb[(p * db.n2 + j) * h];
        cplx* z = &fc[(i * db.n2 + j) * h];
        // spelled out: std::complex operator* goes through __muldc3
        for (std::size_t k = 0; k < h; ++k)
          z[k] += cplx{x[k].real() * y[k].real() - x[k].imag() * y[k].imag(),
                       x[k].real() * y[k].imag() + x[k].imag() * y[k].real()};
      }
    }
  return from_half_spectrum(fc, {da.n1, db.n2, da.n3});
}

Tensor3 ttranspose(const Tensor3& t) {
  const Dims3 d = t.dims();
  Tensor3 out({d.n2, d.n1, d.n3});
  for (std::size_t i = 0; i < d.n1; ++i)
    for (std::size_t j = 0; j < d.n2; ++j) {
      out(j, i, 0) = t(i, j, 0);
      for (std::size_t k = 1; k < d.n3; ++k) out(j, i, k) = t(i, j, d.n3 - k);
    }
  return out;
}

double SpectralSvd::nuclear_sum() const {
  double s = 0.0;
  for (const auto& sl : slices) s += sl.sigma.sum();
  return s;
}

SpectralSvd spectral_svd(const Tensor3& t, SvdVectors vectors) {
  const Dims3 d = t.dims();
  const SpectralTensor3 ft = fft_mode3(t);
  SpectralSvd out{d, std::vector<SliceSvd>(d.n3)};
  for (std::size_t k = 0; k < unique_slices(d.n3); ++k) {
    out.slices[k] = slice_svd(ft.slice(k), self_conjugate(k, d.n3), vectors);
  }
  for (std::size_t k = unique_slices(d.n3); k < d.n3; ++k) {
    const SliceSvd& src = out.slices[d.n3 - k];
    out.slices[k].sigma = src.sigma;
    if (vectors != SvdVectors::none) {
      out.slices[k].u = src.u.conjugate();
      out.slices[k].v = src.v.conjugate();
    }
  }
  return out;
}

TSvdFactors tsvd(const Tensor3& t) {
  const Dims3 d = t.dims();
  const SpectralSvd svd = spectral_svd(t, SvdVectors::full);
  SpectralTensor3 fu({d.n1, d.n1, d.n3});
  SpectralTensor3 fs(d);
  SpectralTensor3 fv({d.n2, d.n2, d.n3});
  for (std::size_t k = 0; k < d.n3; ++k) {
    const SliceSvd& sl = svd.slices[k];
    fu.set_slice(k, sl.u);
    fv.set_slice(k, sl.v);
    for (Eigen::Index i = 0; i < sl.sigma.size(); ++i) fs(i, i, k) = sl.sigma(i);
  }
  return {real_part_inverse(fu), real_part_inverse(fs), real_part_inverse(fv)};
}

namespace {

std::vector<double> diagonal_tube_norms(const Tensor3& s) {
  const std::size_t r = std::min(s.dims().n1, s.dims().n2);
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    for (double x : s.tube(i, i)) acc += x * x;
    norms[i] = std::sqrt(acc);
  }
  return norms;
}

}  // namespace

std::size_t tubal_rank(const TSvdFactors& f, double tol) {
  require(tol >= 0.0, ErrorKind::InvalidArgument, "tubal_rank tolerance must be >= 0");
  const auto norms = diagonal_tube_norms(f.s);
  if (norms.empty()) return 0;
  const double largest = *std::max_element(norms.begin(), norms.end());
  if (largest == 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(norms.begin(), norms.end(), [&](double x) { return x > tol * largest; }));
}

double tnn(const Tensor3& t) { return spectral_svd(t, SvdVectors::none).nuclear_sum(); }

std::vector<double> singular_vector(const TSvdFactors& f, std::size_t r) {
  const std::size_t n3 = f.s.dims().n3;
  require(r >= 1 && r <= f.tube_count(), ErrorKind::RankOutOfRange,
          "r = " + std::to_string(r) + " outside [1, " + std::to_string(f.tube_count()) + "]");
  std::vector<double> v;
  v.reserve(r * n3);
  for (std::size_t i = 0; i < r; ++i) {
    auto tb = f.s.tube(i, i);
    v.insert(v.end(), tb.begin(), tb.end());
  }
  return v;
}

std::vector<double> singular_vector(const TSvdFactors& f) { return singular_vector(f, f.tube_count()); }

TsvtResult tsvt_with_norm(const Tensor3& t, double tau) {
  require(tau >= 0.0, ErrorKind::InvalidArgument, "tsvt threshold must be >= 0");
  const Dims3 d = t.dims();
  const SpectralSvd svd = spectral_svd(t, SvdVectors::thin);
  SpectralTensor3 out(d);
  double norm = 0.0;
  for (std::size_t k = 0; k < unique_slices(d.n3); ++k) {
    const SliceSvd& sl = svd.slices[k];
    const Eigen::VectorXd shrunk = (sl.sigma.array() - tau).max(0.0).matrix();
    const double weight = self_conjugate(k, d.n3) ? 1.0 : 2.0;
    norm += weight * shrunk.sum();
    out.set_slice(k, sl.u * shrunk.cast<cplx>().asDiagonal() * sl.v.adjoint());
  }
  mirror_conjugates(out);
  return {real_part_inverse(out), norm};
}

Tensor3 tsvt(const Tensor3& t, double tau) { return tsvt_with_norm(t, tau).value; }

std::vector<double> tube_energies(const Tensor3& t) {
  const SpectralSvd svd = spectral_svd(t, SvdVectors::none);
  const std::size_t r = std::min(t.dims().n1, t.dims().n2);
  std::vector<double> energy(r, 0.0);
  for (const auto& sl : svd.slices)
    for (std::size_t i = 0; i < r; ++i) energy[i] += sl.sigma(static_cast<Eigen::Index>(i)) * sl.sigma(static_cast<Eigen::Index>(i));
  // Parseval: ||S(i,i,:)||^2 = (1/n3) sum_k sigma_i(k)^2
  for (double& e : energy) e = std::sqrt(e / static_cast<double>(t.dims().n3));
  std::sort(energy.begin(), energy.end(), std::greater<>());
  return energy;
}

std::vector<double> energy_cdf(const Tensor3& t) {
  std::vector<double> e = tube_energies(t);
  const double total = std::accumulate(e.begin(), e.end(), 0.0);
  require(total > 0.0, ErrorKind::ZeroTensor, "energy CDF of a zero tensor is undefined");
  std::partial_sum(e.begin(), e.end(), e.begin());
  for (double& x : e) x /= total;
  e.back() = 1.0;
  return e;
}

double spectral_l1(std::span<const double> v, std::size_t n3) {
  require(n3 > 0 && v.size() % n3 == 0, ErrorKind::DimMismatch,
          "vector length " + std::to_string(v.size()) + " is not a multiple of n3");
  const FftPlan& plan = fft_plan(n3);
  std::vector<cplx> block(n3);
  double acc = 0.0;
  for (std::size_t b = 0; b < v.size() / n3; ++b) {
    for (std::size_t k = 0; k < n3; ++k) block[k] = v[b * n3 + k];
    plan.forward(block);
    for (const auto& x : block) acc += std::abs(x);
  }
  return acc;
}

std::vector<double> spectral_l1_subgradient(std::span<const double> v, std::size_t n3) {
  require(n3 > 0 && v.size() % n3 == 0, ErrorKind::DimMismatch,
          "vector length " + std::to_string(v.size()) + " is not a multiple of n3");
  const FftPlan& plan = fft_plan(n3);
  std::vector<cplx> block(n3);
  std::vector<double> grad(v.size());
  for (std::size_t b = 0; b < v.size() / n3; ++b) {
    double scale = 0.0;
    for (std::size_t k = 0; k < n3; ++k) {
      block[k] = v[b * n3 + k];
      scale = std::max(scale, std::abs(v[b * n3 + k]));
    }
    plan.forward(block);
    const double zero = 1e-14 * scale;
    for (auto& x : block) {
      const double mag = std::abs(x);
      x = mag > zero ? x / mag : cplx{};
    }
    plan.inverse(block);
    for (std::size_t k = 0; k < n3; ++k) grad[b * n3 + k] = static_cast<double>(n3) * block[k].real();
  }
  return grad;
}

Tensor3 tnn_subgradient(const Tensor3& t) { return tnn_with_subgradient(t).grad; }

TnnWithGrad tnn_with_subgradient(const Tensor3& t) {
  const Dims3 d = t.dims();
  const SpectralSvd svd = spectral_svd(t, SvdVectors::thin);
  SpectralTensor3 g(d);
  for (std::size_t k = 0; k < unique_slices(d.n3); ++k) {
    const SliceSvd& sl = svd.slices[k];
    const double top = sl.sigma.size() > 0 ? sl.sigma(0) : 0.0;
    Eigen::Index r = 0;
    while (r < sl.sigma.size() && sl.sigma(r) > 1e-12 * std::max(top, 1e-300)) ++r;
    if (r == 0) continue;
    g.set_slice(k, sl.u.leftCols(r) * sl.v.leftCols(r).adjoint());
  }
  mirror_conjugates(g);
  TnnWithGrad out{svd.nuclear_sum(), real_part_inverse(g)};
  out.grad *= static_cast<double>(d.n3);
  return out;
}

}  // namespace tubalcast
