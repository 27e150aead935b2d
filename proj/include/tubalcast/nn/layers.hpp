#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "tubalcast/rng.hpp"
#include "tubalcast/tensor3.hpp"

namespace tubalcast::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { relu, sigmoid, identity };

std::string_view to_string(Activation a) noexcept;
Activation activation_from_string(std::string_view s);

/// Numerically stable logistic function.
inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Derived>
void activate_inplace(Eigen::DenseBase<Derived>& x, Activation a) {
  switch (a) {
    case Activation::relu: x = x.derived().cwiseMax(0.0); break;
    case Activation::sigmoid: x = x.derived().unaryExpr([](double v) { return sigmoid(v); }); break;
    case Activation::identity: break;
  }
}

struct FcLayer {
  RowMatrix weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::identity;

  std::size_t in_features() const noexcept { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_features() const noexcept { return static_cast<std::size_t>(weight.rows()); }

  /// Weights uniform in +-sqrt(6 / (in + out)), zero bias.
  static FcLayer xavier(std::size_t in, std::size_t out, Activation act, Rng& rng);
  static FcLayer zeros(std::size_t in, std::size_t out, Activation act);
};

/// A_{j+1} = act(W * A_j + B) with * the t-product.
struct TensorLayer {
  Tensor3 weight;  // out x in x a
  Tensor3 bias;    // out x b x a
  Activation activation = Activation::identity;

  /// Weight tubes i.i.d. normal with std 1/sqrt(in * a), zero bias.
  static TensorLayer gaussian(std::size_t out, std::size_t in, std::size_t lateral, std::size_t a,
                              Activation act, Rng& rng);
  static TensorLayer zeros(std::size_t out, std::size_t in, std::size_t lateral, std::size_t a,
                           Activation act);
};

Eigen::VectorXd fc_forward(const FcLayer& layer, const Eigen::VectorXd& x);

Tensor3 tl_forward(const TensorLayer& layer, const Tensor3& a);
/// W * A + B without the activation.
Tensor3 tl_preactivation(const TensorLayer& layer, const Tensor3& a);

}  // namespace tubalcast::nn
