#include "tubalcast/mask.hpp"

#include <fstream>
#include <random>

#include "tubalcast/binary_io.hpp"
#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"

namespace tubalcast {

ObservationMask::ObservationMask(Dims3 dims, bool observed)
    : dims_(dims), bits_(dims.size(), observed ? 1 : 0), omega_size_(observed ? dims.size() : 0) {}

void ObservationMask::set(std::size_t i, std::size_t j, std::size_t k, bool value) noexcept {
  set_flat((i * dims_.n2 + j) * dims_.n3 + k, value);
}

void ObservationMask::set_flat(std::size_t idx, bool value) noexcept {
  const bool old = bits_[idx] != 0;
  if (old == value) return;
  bits_[idx] = value ? 1 : 0;
  if (value)
    ++omega_size_;
  else
    --omega_size_;
}

std::size_t ObservationMask::observed_in_slice(std::size_t k) const noexcept {
  std::size_t count = 0;
  for (std::size_t t = 0; t < dims_.n1 * dims_.n2; ++t) count += bits_[t * dims_.n3 + k];
  return count;
}

std::size_t ObservationMask::trailing_unobserved_slices() const noexcept {
  std::size_t count = 0;
  for (std::size_t k = dims_.n3; k-- > 0;) {
    if (observed_in_slice(k) != 0) break;
    ++count;
  }
  return count;
}

Tensor3 apply_mask(const Tensor3& t, const ObservationMask& m) {
  require(t.dims() == m.dims(), ErrorKind::DimMismatch,
          "mask " + to_string(m.dims()) + " vs tensor " + to_string(t.dims()));
  Tensor3 out(t.dims());
  auto src = t.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = m.observed_flat(i) ? src[i] : 0.0;
  return out;
}

ObservationMask random_mask(Dims3 dims, double missing_rate, std::size_t protected_slices,
                            std::uint64_t seed) {
  require(missing_rate >= 0.0 && missing_rate <= 1.0, ErrorKind::InvalidRate,
          "missing rate " + std::to_string(missing_rate) + " outside [0, 1]");
  require(protected_slices <= dims.n3, ErrorKind::InvalidArgument,
          "protected slices exceed n3");
  ObservationMask mask(dims, false);
  Rng rng = make_rng(seed, "mask");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t history = dims.n3 - protected_slices;
  for (std::size_t i = 0; i < dims.n1; ++i)
    for (std::size_t j = 0; j < dims.n2; ++j)
      for (std::size_t k = 0; k < history; ++k) mask.set(i, j, k, unif(rng) >= missing_rate);
  return mask;
}

void write_m3f(std::ostream& os, const ObservationMask& m) {
  binio::write_magic(os, "M3F1");
  binio::write_u64(os, m.dims().n1);
  binio::write_u64(os, m.dims().n2);
  binio::write_u64(os, m.dims().n3);
  const std::size_t n = m.dims().size();
  std::vector<char> packed((n + 7) / 8, 0);
  for (std::size_t idx = 0; idx < n; ++idx)
    if (m.observed_flat(idx)) packed[idx / 8] = static_cast<char>(packed[idx / 8] | (1 << (idx % 8)));
  os.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  require(static_cast<bool>(os), ErrorKind::IoError, "failed writing M3F stream");
}

ObservationMask read_m3f(std::istream& is) {
  binio::expect_magic(is, "M3F1");
  Dims3 d;
  d.n1 = binio::read_u64(is);
  d.n2 = binio::read_u64(is);
  d.n3 = binio::read_u64(is);
  require(d.positive() && d.size() < (1ULL << 36), ErrorKind::FormatError, "bad M3F dims");
  std::vector<char> packed((d.size() + 7) / 8);
  is.read(packed.data(), static_cast<std::streamsize>(packed.size()));
  require(is.gcount() == static_cast<std::streamsize>(packed.size()), ErrorKind::FormatError,
          "truncated M3F payload");
  ObservationMask m(d, false);
  for (std::size_t idx = 0; idx < d.size(); ++idx)
    m.set_flat(idx, (static_cast<unsigned char>(packed[idx / 8]) >> (idx % 8)) & 1U);
  return m;
}

void write_m3f(const std::string& path, const ObservationMask& m) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::IoError, "cannot open " + path + " for writing");
  write_m3f(os, m);
}

ObservationMask read_m3f(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::IoError, "cannot open " + path);
  return read_m3f(is);
}

}  // namespace tubalcast
