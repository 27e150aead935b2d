#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tubalcast/gmf/train_report.hpp"
#include "tubalcast/nn/layers.hpp"
#include "tubalcast/nn/params.hpp"
#include "tubalcast/nn/tape.hpp"
#include "tubalcast/tensor3.hpp"

namespace tubalcast::gmf {

enum class GeneratorKind { tl, fc };

std::string_view to_string(GeneratorKind k) noexcept;
GeneratorKind generator_kind_from_string(std::string_view s);

/// G(z) = sigmoid(TL(relu(FC(z)))), or for the fc ablation
/// G(z) = sigmoid(FC2(relu(FC(z)))).
///
/// FC maps the latent (length rank * n3) to l1 * n * n3 values, read as an
/// l1 x n x n3 tensor in row-major (i, j, k) order. The TL weight is
/// n x l1 x n3 and its bias n x n x n3.
struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::tl;
  std::size_t n = 0;
  std::size_t n3 = 0;
  std::size_t l1 = 0;    // hidden tubal width
  std::size_t rank = 0;  // tubes kept in the latent; n unless truncated
  nn::FcLayer fc;
  nn::TensorLayer tl;    // kind == tl
  nn::FcLayer fc_out;    // kind == fc

  std::size_t latent_length() const noexcept { return rank * n3; }
  Dims3 output_dims() const noexcept { return {n, n, n3}; }

  /// l1 = 0 selects n; rank = 0 selects n.
  static GeneratorParams init(GeneratorKind kind, std::size_t n, std::size_t n3, std::size_t l1,
                              std::uint64_t seed, std::size_t rank = 0);
  static GeneratorParams zeros(GeneratorKind kind, std::size_t n, std::size_t n3, std::size_t l1,
                               std::size_t rank = 0);

  void bind(nn::ParamStore& store);
  std::uint64_t fingerprint() const;
};

Tensor3 generator_forward(const GeneratorParams& g, std::span<const double> z);

/// Tape handles for the generator weights: trainable parameters when a store
/// is given, otherwise constants (frozen generator).
struct GeneratorVars {
  nn::Tape::Var w1, b1, w2, b2;
};
GeneratorVars record_generator_params(nn::Tape& t, const GeneratorParams& g, nn::ParamStore* store);
/// z: latent_length x batch; result: n*n*n3 x batch, flattened (i, j, k).
nn::Tape::Var record_generator(nn::Tape& t, const GeneratorParams& g, const GeneratorVars& vars,
                               nn::Tape::Var z);

/// Latent target of a complete tensor: its first `rank` singular tubes.
Eigen::VectorXd latent_target(const Tensor3& t, std::size_t rank);

struct PretrainConfig {
  double gamma0 = 0.01;
  std::size_t max_epoch = 60;
  double lr = 3e-3;
  double lr_final = 1e-5;  // cosine decay target, 0 = constant lr
  std::size_t batch = 16;
  double tol = 0.0;  // stop once the epoch loss changes by less than tol (relative)
  std::uint64_t seed = 0;
};

/// Minimizes ||G(v) - T||_F^2 + gamma0 ||G(v)||_TNN over the corpus with Adam,
/// v the full singular vector of T. `g` must match the corpus dims.
TrainReport pretrain_generator(GeneratorParams& g, const std::vector<Tensor3>& corpus,
                               const PretrainConfig& cfg);

void save_generator(const std::filesystem::path& path, const GeneratorParams& g);
GeneratorParams load_generator(const std::filesystem::path& path);
std::vector<nn::NamedArray> generator_arrays(const GeneratorParams& g);
GeneratorParams generator_from_arrays(const std::vector<nn::NamedArray>& arrays);

}  // namespace tubalcast::gmf
