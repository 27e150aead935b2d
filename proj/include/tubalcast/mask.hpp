#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tubalcast/tensor3.hpp"

namespace tubalcast {

/// Indicator of the observed index set; true means observed.
class ObservationMask {
 public:
  ObservationMask() = default;
  explicit ObservationMask(Dims3 dims, bool observed = false);

  static ObservationMask full(Dims3 dims) { return ObservationMask(dims, true); }

  const Dims3& dims() const noexcept { return dims_; }
  std::size_t omega_size() const noexcept { return omega_size_; }

  bool observed(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return bits_[(i * dims_.n2 + j) * dims_.n3 + k] != 0;
  }
  bool observed_flat(std::size_t idx) const noexcept { return bits_[idx] != 0; }
  void set(std::size_t i, std::size_t j, std::size_t k, bool value) noexcept;
  void set_flat(std::size_t idx, bool value) noexcept;

  /// Number of frontal slices at the end of the mask with no observed entry.
  std::size_t trailing_unobserved_slices() const noexcept;
  std::size_t observed_in_slice(std::size_t k) const noexcept;

  friend bool operator==(const ObservationMask&, const ObservationMask&) = default;

 private:
  Dims3 dims_{};
  std::vector<std::uint8_t> bits_;
  std::size_t omega_size_ = 0;
};

/// P_Omega: entrywise product with the indicator.
Tensor3 apply_mask(const Tensor3& t, const ObservationMask& m);

/// Drops entries of the first n3 - protected_slices frontal slices
/// independently at `missing_rate`; the last `protected_slices` are left
/// entirely unobserved (they are the forecast target).
ObservationMask random_mask(Dims3 dims, double missing_rate, std::size_t protected_slices,
                            std::uint64_t seed);

// M3F: "M3F1", three u64 LE dims, then ceil(n/8) bytes of bits in (i, j, k)
// row-major order, least significant bit first within each byte.
void write_m3f(std::ostream& os, const ObservationMask& m);
ObservationMask read_m3f(std::istream& is);
void write_m3f(const std::string& path, const ObservationMask& m);
ObservationMask read_m3f(const std::string& path);

}  // namespace tubalcast
