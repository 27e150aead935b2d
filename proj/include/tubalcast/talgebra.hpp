#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tubalcast/tensor3.hpp"

/// t-algebra of third-order tensors: mode-3 transforms, t-product, transpose,
/// t-SVD and the quantities derived from it.
///
/// Transform convention: the forward mode-3 DFT is unnormalized and the inverse
/// carries 1/n3, so the tensor nuclear norm of the n x n x n3 identity is n*n3.
namespace tubalcast {

SpectralTensor3 fft_mode3(const Tensor3& t);

/// Inverse mode-3 DFT. Throws NonRealResult when the imaginary residue exceeds
/// 1e-9 relative to max(1, largest real magnitude).
Tensor3 ifft_mode3(const SpectralTensor3& s);

/// Number of distinct frontal slices of the spectrum of a real tensor.
constexpr std::size_t unique_slices(std::size_t n3) noexcept { return n3 / 2 + 1; }

/// C(i,j,:) = sum_l A(i,l,:) (circular conv) B(l,j,:); computed slice-wise in
/// the Fourier domain.
Tensor3 tproduct(const Tensor3& a, const Tensor3& b);

/// Transposes every frontal slice and reverses the order of slices 2..n3.
Tensor3 ttranspose(const Tensor3& t);

struct TSvdFactors {
  Tensor3 u;  // n1 x n1 x n3
  Tensor3 s;  // n1 x n2 x n3, f-diagonal
  Tensor3 v;  // n2 x n2 x n3

  std::size_t tube_count() const noexcept { return std::min(s.dims().n1, s.dims().n2); }
};

struct SliceSvd {
  Eigen::MatrixXcd u;
  Eigen::VectorXd sigma;  // nonincreasing, nonnegative
  Eigen::MatrixXcd v;
};

/// Per-frequency SVDs of a real tensor, all n3 slices populated. Only the first
/// unique_slices(n3) are factorized; the rest are conjugate mirrors.
struct SpectralSvd {
  Dims3 dims;
  std::vector<SliceSvd> slices;

  double nuclear_sum() const;
};

enum class SvdVectors { none, thin, full };

SpectralSvd spectral_svd(const Tensor3& t, SvdVectors vectors);

TSvdFactors tsvd(const Tensor3& t);

/// Diagonal tubes whose l2 norm exceeds tol * (largest tube l2 norm).
std::size_t tubal_rank(const TSvdFactors& f, double tol = 1e-8);

/// Sum of nuclear norms of all spectral frontal slices.
double tnn(const Tensor3& t);

/// Concatenation of the first r diagonal tubes S(i,i,:).
std::vector<double> singular_vector(const TSvdFactors& f, std::size_t r);
/// Full singular vector (all min(n1, n2) tubes).
std::vector<double> singular_vector(const TSvdFactors& f);

/// U * shrink(S, tau) * V^T, shrinking every spectral singular value by tau.
Tensor3 tsvt(const Tensor3& t, double tau);

/// Same, also returning the TNN of the result.
struct TsvtResult {
  Tensor3 value;
  double tnn = 0.0;
};
TsvtResult tsvt_with_norm(const Tensor3& t, double tau);

/// Cumulative, normalized l2 energies of the singular tubes (largest first).
std::vector<double> energy_cdf(const Tensor3& t);
std::vector<double> tube_energies(const Tensor3& t);

/// l1 norm of the blockwise (length-n3) DFT of v.
double spectral_l1(std::span<const double> v, std::size_t n3);
/// A subgradient of spectral_l1 (zero at vanishing spectral entries).
std::vector<double> spectral_l1_subgradient(std::span<const double> v, std::size_t n3);

/// Subgradient of tnn: n3 * ifft(U V^H) over the nonzero spectral singular
/// values of each slice.
Tensor3 tnn_subgradient(const Tensor3& t);

/// tnn and its subgradient from a single set of slice SVDs.
struct TnnWithGrad {
  double value = 0.0;
  Tensor3 grad;
};
TnnWithGrad tnn_with_subgradient(const Tensor3& t);

}  // namespace tubalcast
