#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tubalcast {

using cplx = std::complex<double>;

struct Dims3 {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;

  constexpr std::size_t size() const noexcept { return n1 * n2 * n3; }
  constexpr bool positive() const noexcept { return n1 > 0 && n2 > 0 && n3 > 0; }
  friend constexpr bool operator==(const Dims3&, const Dims3&) = default;
};

std::string to_string(const Dims3& d);

/// Dense real n1 x n2 x n3 tensor, row-major in (i, j, k): every mode-3 tube
/// T(i, j, :) is contiguous.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims3 dims, double fill = 0.0);
  Tensor3(Dims3 dims, std::vector<double> data);

  /// First frontal slice is the n x n identity, the rest are zero.
  static Tensor3 identity(std::size_t n, std::size_t n3);

  const Dims3& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[(i * dims_.n2 + j) * dims_.n3 + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[(i * dims_.n2 + j) * dims_.n3 + k];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  std::span<double> tube(std::size_t i, std::size_t j) noexcept {
    return {data_.data() + (i * dims_.n2 + j) * dims_.n3, dims_.n3};
  }
  std::span<const double> tube(std::size_t i, std::size_t j) const noexcept {
    return {data_.data() + (i * dims_.n2 + j) * dims_.n3, dims_.n3};
  }

  Eigen::MatrixXd frontal_slice(std::size_t k) const;
  void set_frontal_slice(std::size_t k, const Eigen::MatrixXd& m);
  /// Frontal slices [first, first + count) as a new tensor.
  Tensor3 frontal_range(std::size_t first, std::size_t count) const;

  double frobenius_norm() const noexcept;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s) noexcept;

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims3 dims_{};
  std::vector<double> data_;
};

/// Mode-3 DFT of a real tensor; same layout as Tensor3.
class SpectralTensor3 {
 public:
  SpectralTensor3() = default;
  explicit SpectralTensor3(Dims3 dims) : dims_(dims), data_(dims.size()) {}

  const Dims3& dims() const noexcept { return dims_; }

  cplx& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[(i * dims_.n2 + j) * dims_.n3 + k];
  }
  cplx operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[(i * dims_.n2 + j) * dims_.n3 + k];
  }
  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> tube(std::size_t i, std::size_t j) noexcept {
    return {data_.data() + (i * dims_.n2 + j) * dims_.n3, dims_.n3};
  }

  Eigen::MatrixXcd slice(std::size_t k) const;
  void set_slice(std::size_t k, const Eigen::MatrixXcd& m);

 private:
  Dims3 dims_{};
  std::vector<cplx> data_;
};

double relative_error(const Tensor3& estimate, const Tensor3& reference);

// T3F: "T3F1", three u64 LE dims, n1*n2*n3 f64 LE values in (i, j, k) row-major order.
void write_t3f(std::ostream& os, const Tensor3& t);
Tensor3 read_t3f(std::istream& is);
void write_t3f(const std::string& path, const Tensor3& t);
Tensor3 read_t3f(const std::string& path);

}  // namespace tubalcast
