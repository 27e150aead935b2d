#include "tubalcast/nn/params.hpp"

#include <cmath>
#include <numbers>
#include <cstring>
#include <fstream>
#include <numeric>

#include "tubalcast/binary_io.hpp"
#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"

namespace tubalcast::nn {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

constexpr std::uint64_t kMaxRank = 8;
constexpr std::uint64_t kMaxName = 4096;
constexpr std::uint64_t kMaxElems = std::uint64_t{1} << 34;

}  // namespace

ParamBlock& ParamStore::add(std::string name, std::vector<std::size_t> dims, std::span<double> value) {
  require(product(dims) == value.size(), ErrorKind::ShapeError,
          "block '" + name + "' dims do not match its storage");
  for (const auto& b : blocks_)
    require(b.name != name, ErrorKind::InvalidArgument, "duplicate parameter block '" + name + "'");
  ParamBlock& b = blocks_.emplace_back();
  b.name = std::move(name);
  b.dims = std::move(dims);
  b.value = value;
  b.grad.assign(value.size(), 0.0);
  b.m1.assign(value.size(), 0.0);
  b.m2.assign(value.size(), 0.0);
  return b;
}

void ParamStore::bind(const std::string& prefix, FcLayer& layer) {
  add(prefix + ".weight", {layer.out_features(), layer.in_features()},
      {layer.weight.data(), static_cast<std::size_t>(layer.weight.size())});
  add(prefix + ".bias", {layer.out_features()},
      {layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
}

void ParamStore::bind(const std::string& prefix, TensorLayer& layer) {
  const Dims3 w = layer.weight.dims();
  const Dims3 b = layer.bias.dims();
  add(prefix + ".weight", {w.n1, w.n2, w.n3}, layer.weight.data());
  add(prefix + ".bias", {b.n1, b.n2, b.n3}, layer.bias.data());
}

ParamBlock& ParamStore::block(std::string_view name) {
  for (auto& b : blocks_)
    if (b.name == name) return b;
  fail(ErrorKind::InvalidArgument, "no parameter block '" + std::string(name) + "'");
}

void ParamStore::zero_grad() {
  for (auto& b : blocks_) std::fill(b.grad.begin(), b.grad.end(), 0.0);
}

std::size_t ParamStore::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

std::uint64_t ParamStore::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& b : blocks_) {
    mix(b.name.data(), b.name.size());
    mix(b.value.data(), b.value.size_bytes());
  }
  return h;
}

double ParamStore::grad_norm() const {
  double acc = 0.0;
  for (const auto& b : blocks_)
    for (double g : b.grad) acc += g * g;
  return std::sqrt(acc);
}

double cosine_lr(double lr, double lr_final, std::size_t epoch, std::size_t epochs) {
  if (lr_final <= 0.0 || epochs < 2) return lr;
  const double x = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return lr_final + 0.5 * (lr - lr_final) * (1.0 + std::cos(std::numbers::pi * x));
}

void adam_step(ParamStore& store, double lr, const AdamConfig& cfg) {
  ++store.steps_;
  const double t = static_cast<double>(store.steps_);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& b : store.blocks_) {
    for (std::size_t i = 0; i < b.value.size(); ++i) {
      const double g = b.grad[i];
      b.m1[i] = cfg.beta1 * b.m1[i] + (1.0 - cfg.beta1) * g;
      b.m2[i] = cfg.beta2 * b.m2[i] + (1.0 - cfg.beta2) * g * g;
      b.value[i] -= lr * (b.m1[i] / c1) / (std::sqrt(b.m2[i] / c2) + cfg.eps);
    }
  }
}

void write_npk(std::ostream& os, const std::vector<NamedArray>& arrays) {
  binio::write_magic(os, "NPK1");
  binio::write_u64(os, arrays.size());
  for (const auto& a : arrays) {
    require(product(a.dims) == a.values.size(), ErrorKind::ShapeError,
            "array '" + a.name + "' dims do not match its values");
    binio::write_u64(os, a.name.size());
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    binio::write_u64(os, a.dims.size());
    for (auto d : a.dims) binio::write_u64(os, d);
    for (double v : a.values) binio::write_f64(os, v);
  }
  require(static_cast<bool>(os), ErrorKind::IoError, "failed writing NPK1 stream");
}

std::vector<NamedArray> read_npk(std::istream& is) {
  binio::expect_magic(is, "NPK1");
  const std::uint64_t count = binio::read_u64(is);
  require(count < (1u << 20), ErrorKind::FormatError, "implausible NPK1 block count");
  std::vector<NamedArray> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray a;
    const std::uint64_t len = binio::read_u64(is);
    require(len <= kMaxName, ErrorKind::FormatError, "NPK1 name too long");
    a.name.resize(len);
    is.read(a.name.data(), static_cast<std::streamsize>(len));
    require(static_cast<bool>(is), ErrorKind::FormatError, "truncated NPK1 name");
    const std::uint64_t rank = binio::read_u64(is);
    require(rank <= kMaxRank, ErrorKind::FormatError, "NPK1 rank too large");
    std::uint64_t n = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      const std::uint64_t d = binio::read_u64(is);
      require(d > 0 && d <= kMaxElems && n * d <= kMaxElems, ErrorKind::FormatError,
              "NPK1 dims out of range");
      n *= d;
      a.dims.push_back(static_cast<std::size_t>(d));
    }
    a.values.resize(n);
    for (auto& v : a.values) v = binio::read_f64(is);
    out.push_back(std::move(a));
  }
  return out;
}

void write_npk(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  write_npk(os, arrays);
}

std::vector<NamedArray> read_npk(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::MissingCheckpoint, "cannot open '" + path.string() + "'");
  return read_npk(is);
}

std::vector<NamedArray> snapshot(const ParamStore& store) {
  std::vector<NamedArray> out;
  for (const auto& b : store.blocks())
    out.push_back({b.name, b.dims, std::vector<double>(b.value.begin(), b.value.end())});
  return out;
}

const NamedArray& find_array(const std::vector<NamedArray>& arrays, std::string_view name) {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  fail(ErrorKind::FormatError, "checkpoint has no array '" + std::string(name) + "'");
}

void restore(ParamStore& store, const std::vector<NamedArray>& arrays) {
  for (auto& b : store.blocks()) {
    const NamedArray& a = find_array(arrays, b.name);
    require(a.dims == b.dims, ErrorKind::ShapeError, "checkpoint array '" + b.name + "' has wrong shape");
    std::copy(a.values.begin(), a.values.end(), b.value.begin());
  }
}

}  // namespace tubalcast::nn
