#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tubalcast/nn/layers.hpp"

namespace tubalcast::nn {

/// One named array of trainable values. The values live in the owning layer;
/// the block only holds a view plus gradient and Adam moments.
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<double> value;
  std::vector<double> grad;
  std::vector<double> m1, m2;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  ParamBlock& add(std::string name, std::vector<std::size_t> dims, std::span<double> value);
  void bind(const std::string& prefix, FcLayer& layer);
  void bind(const std::string& prefix, TensorLayer& layer);

  ParamBlock& block(std::string_view name);
  std::deque<ParamBlock>& blocks() noexcept { return blocks_; }
  const std::deque<ParamBlock>& blocks() const noexcept { return blocks_; }

  void zero_grad();
  std::size_t parameter_count() const noexcept;
  std::uint64_t steps() const noexcept { return steps_; }
  /// FNV-1a over block names and raw value bytes.
  std::uint64_t fingerprint() const;
  double grad_norm() const;

 private:
  friend void adam_step(ParamStore&, double, const AdamConfig&);
  std::deque<ParamBlock> blocks_;  // deque: references stay valid across add()
  std::uint64_t steps_ = 0;
};

/// One bias-corrected Adam update using the accumulated gradients.
void adam_step(ParamStore& store, double lr, const AdamConfig& cfg = AdamConfig{});

/// Cosine schedule from lr to lr_final over `epochs`; lr_final <= 0 keeps lr.
double cosine_lr(double lr, double lr_final, std::size_t epoch, std::size_t epochs);

// ---- NPK1 checkpoints ----------------------------------------------------
// "NPK1", u64 block count, then per block: u64 name length, name bytes,
// u64 rank, rank x u64 dims, prod(dims) x f64. Little-endian throughout.

struct NamedArray {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

void write_npk(std::ostream& os, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_npk(std::istream& is);
void write_npk(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_npk(const std::filesystem::path& path);

std::vector<NamedArray> snapshot(const ParamStore& store);
/// Copy values back into bound storage; names and dims must match exactly.
void restore(ParamStore& store, const std::vector<NamedArray>& arrays);

const NamedArray& find_array(const std::vector<NamedArray>& arrays, std::string_view name);

}  // namespace tubalcast::nn
