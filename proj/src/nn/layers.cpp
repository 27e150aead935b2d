#include "tubalcast/nn/layers.hpp"

#include <cmath>
#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/talgebra.hpp"

namespace tubalcast::nn {

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity") return Activation::identity;
  fail(ErrorKind::InvalidArgument, "unknown activation '" + std::string(s) + "'");
}

FcLayer FcLayer::xavier(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  FcLayer layer = zeros(in, out, act);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = unif(rng);
  return layer;
}

FcLayer FcLayer::zeros(std::size_t in, std::size_t out, Activation act) {
  FcLayer layer;
  layer.weight = RowMatrix::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
  layer.activation = act;
  return layer;
}

TensorLayer TensorLayer::gaussian(std::size_t out, std::size_t in, std::size_t lateral, std::size_t a,
                                  Activation act, Rng& rng) {
  TensorLayer layer = zeros(out, in, lateral, a, act);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(in * a)));
  for (double& w : layer.weight.data()) w = g(rng);
  return layer;
}

TensorLayer TensorLayer::zeros(std::size_t out, std::size_t in, std::size_t lateral, std::size_t a,
                               Activation act) {
  return {Tensor3({out, in, a}), Tensor3({out, lateral, a}), act};
}

Eigen::VectorXd fc_forward(const FcLayer& layer, const Eigen::VectorXd& x) {
  require(static_cast<std::size_t>(x.size()) == layer.in_features(), ErrorKind::DimMismatch,
          "fc input length " + std::to_string(x.size()) + ", layer expects " +
              std::to_string(layer.in_features()));
  Eigen::VectorXd y = layer.weight * x + layer.bias;
  activate_inplace(y, layer.activation);
  return y;
}

Tensor3 tl_preactivation(const TensorLayer& layer, const Tensor3& a) {
  const Dims3 w = layer.weight.dims();
  const Dims3 ad = a.dims();
  require(ad.n1 == w.n2 && ad.n3 == w.n3 && layer.bias.dims() == Dims3{w.n1, ad.n2, w.n3},
          ErrorKind::DimMismatch,
          "tensor layer " + to_string(w) + " with bias " + to_string(layer.bias.dims()) +
              " cannot take input " + to_string(ad));
  Tensor3 out = tproduct(layer.weight, a);
  out += layer.bias;
  return out;
}

Tensor3 tl_forward(const TensorLayer& layer, const Tensor3& a) {
  Tensor3 out = tl_preactivation(layer, a);
  Eigen::Map<Eigen::VectorXd> v(out.data().data(), static_cast<Eigen::Index>(out.size()));
  activate_inplace(v, layer.activation);
  return out;
}

}  // namespace tubalcast::nn
