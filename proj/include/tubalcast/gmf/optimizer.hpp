#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tubalcast/gmf/generator.hpp"
#include "tubalcast/window.hpp"

namespace tubalcast::gmf {

/// f(M, z) = FC3(relu(FC2(relu(FC1(Cat(vec(M), z)))))), identity output.
struct LearnedOptimizerParams {
  std::size_t n = 0;
  std::size_t n3 = 0;
  std::size_t latent = 0;
  std::size_t hidden = 0;
  nn::FcLayer fc1, fc2, fc3;

  std::size_t input_length() const noexcept { return n * n * n3 + latent; }

  static LearnedOptimizerParams init(std::size_t n, std::size_t n3, std::size_t latent, std::size_t hidden,
                                     std::uint64_t seed);
  static LearnedOptimizerParams zeros(std::size_t n, std::size_t n3, std::size_t latent, std::size_t hidden);
  void bind(nn::ParamStore& store);
};

/// min(4 * latent, 512).
std::size_t default_fphi_hidden(std::size_t latent) noexcept;

Eigen::VectorXd fphi_forward(const LearnedOptimizerParams& f, const Tensor3& m, std::span<const double> z);

struct FphiVars {
  nn::Tape::Var w1, b1, w2, b2, w3, b3;
};
FphiVars record_fphi_params(nn::Tape& t, const LearnedOptimizerParams& f, nn::ParamStore* store);
/// m: n*n*n3 x batch, z: latent x batch.
nn::Tape::Var record_fphi(nn::Tape& t, const LearnedOptimizerParams& f, const FphiVars& vars, nn::Tape::Var m,
                          nn::Tape::Var z);

struct FphiTrainConfig {
  std::size_t k_steps = 3;
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t max_epoch = 40;
  double lr = 1e-3;
  double lr_final = 1e-5;  // cosine decay target, 0 = constant lr
  std::size_t batch = 16;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

/// Unrolls z_{t+1} = f(M, z_t) from z_1 ~ N(0, 1) for k_steps and minimizes
/// alpha ||z_hat - v||^2 + beta ||G(z_hat) - T||^2 with g frozen. Throws
/// IntegrityError if g's fingerprint changes.
TrainReport train_fphi(const GeneratorParams& g, LearnedOptimizerParams& f, const std::vector<WindowSample>& corpus,
                       const FphiTrainConfig& cfg);

void save_fphi(const std::filesystem::path& path, const LearnedOptimizerParams& f);
LearnedOptimizerParams load_fphi(const std::filesystem::path& path);

}  // namespace tubalcast::gmf
