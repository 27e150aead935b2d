#include "tubalcast/tensor3.hpp"

#include <cmath>
#include <fstream>

#include "tubalcast/binary_io.hpp"
#include "tubalcast/error.hpp"

namespace tubalcast {

std::string to_string(const Dims3& d) {
  return std::to_string(d.n1) + "x" + std::to_string(d.n2) + "x" + std::to_string(d.n3);
}

Tensor3::Tensor3(Dims3 dims, double fill) : dims_(dims), data_(dims.size(), fill) {}

Tensor3::Tensor3(Dims3 dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  require(data_.size() == dims_.size(), ErrorKind::DimMismatch,
          "data length " + std::to_string(data_.size()) + " does not match " + to_string(dims_));
}

Tensor3 Tensor3::identity(std::size_t n, std::size_t n3) {
  Tensor3 t({n, n, n3});
  for (std::size_t i = 0; i < n; ++i) t(i, i, 0) = 1.0;
  return t;
}

Eigen::MatrixXd Tensor3::frontal_slice(std::size_t k) const {
  Eigen::MatrixXd m(dims_.n1, dims_.n2);
  for (std::size_t i = 0; i < dims_.n1; ++i)
    for (std::size_t j = 0; j < dims_.n2; ++j) m(i, j) = (*this)(i, j, k);
  return m;
}

void Tensor3::set_frontal_slice(std::size_t k, const Eigen::MatrixXd& m) {
  require(static_cast<std::size_t>(m.rows()) == dims_.n1 &&
              static_cast<std::size_t>(m.cols()) == dims_.n2,
          ErrorKind::DimMismatch, "frontal slice shape mismatch");
  for (std::size_t i = 0; i < dims_.n1; ++i)
    for (std::size_t j = 0; j < dims_.n2; ++j) (*this)(i, j, k) = m(i, j);
}

Tensor3 Tensor3::frontal_range(std::size_t first, std::size_t count) const {
  require(first + count <= dims_.n3, ErrorKind::DimMismatch, "frontal range out of bounds");
  Tensor3 out({dims_.n1, dims_.n2, count});
  for (std::size_t i = 0; i < dims_.n1; ++i)
    for (std::size_t j = 0; j < dims_.n2; ++j) {
      auto src = tube(i, j);
      auto dst = out.tube(i, j);
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(first), count, dst.begin());
    }
  return out;
}

double Tensor3::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double Tensor3::max_abs() const noexcept {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

bool Tensor3::all_finite() const noexcept {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  require(dims_ == other.dims_, ErrorKind::DimMismatch,
          to_string(dims_) + " vs " + to_string(other.dims_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  require(dims_ == other.dims_, ErrorKind::DimMismatch,
          to_string(dims_) + " vs " + to_string(other.dims_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) noexcept {
  for (double& x : data_) x *= s;
  return *this;
}

Eigen::MatrixXcd SpectralTensor3::slice(std::size_t k) const {
  Eigen::MatrixXcd m(dims_.n1, dims_.n2);
  for (std::size_t i = 0; i < dims_.n1; ++i)
    for (std::size_t j = 0; j < dims_.n2; ++j) m(i, j) = (*this)(i, j, k);
  return m;
}

void SpectralTensor3::set_slice(std::size_t k, const Eigen::MatrixXcd& m) {
  for (std::size_t i = 0; i < dims_.n1; ++i)
    for (std::size_t j = 0; j < dims_.n2; ++j) (*this)(i, j, k) = m(i, j);
}

double relative_error(const Tensor3& estimate, const Tensor3& reference) {
  const double denom = reference.frobenius_norm();
  const double num = (estimate - reference).frobenius_norm();
  return denom > 0.0 ? num / denom : num;
}

void write_t3f(std::ostream& os, const Tensor3& t) {
  binio::write_magic(os, "T3F1");
  binio::write_u64(os, t.dims().n1);
  binio::write_u64(os, t.dims().n2);
  binio::write_u64(os, t.dims().n3);
  for (double x : t.data()) binio::write_f64(os, x);
  require(static_cast<bool>(os), ErrorKind::IoError, "failed writing T3F stream");
}

Tensor3 read_t3f(std::istream& is) {
  binio::expect_magic(is, "T3F1");
  Dims3 d;
  d.n1 = binio::read_u64(is);
  d.n2 = binio::read_u64(is);
  d.n3 = binio::read_u64(is);
  require(d.positive(), ErrorKind::FormatError, "T3F dims must be positive");
  require(d.n1 < (1ULL << 32) && d.n2 < (1ULL << 32) && d.n3 < (1ULL << 32) && d.size() < (1ULL << 34),
          ErrorKind::FormatError, "T3F dims implausibly large: " + to_string(d));
  std::vector<double> data(d.size());
  for (double& x : data) x = binio::read_f64(is);
  Tensor3 t(d, std::move(data));
  require(t.all_finite(), ErrorKind::NonFinite, "T3F payload contains NaN or Inf");
  return t;
}

void write_t3f(const std::string& path, const Tensor3& t) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::IoError, "cannot open " + path + " for writing");
  write_t3f(os, t);
}

Tensor3 read_t3f(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::IoError, "cannot open " + path);
  return read_t3f(is);
}

}  // namespace tubalcast
