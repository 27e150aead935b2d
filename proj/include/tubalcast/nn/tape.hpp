#pragma once

#include <functional>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tubalcast/nn/layers.hpp"
#include "tubalcast/nn/params.hpp"
#include "tubalcast/tensor3.hpp"

namespace tubalcast::nn {

/// Reverse-mode recorder for the handful of ops the models need.
///
/// Every value is a matrix whose columns are independent samples (features x
/// batch). Tensor-shaped values are stored flattened in row-major (i, j, k)
/// order, one sample per column. Parameters are single-column views of a
/// ParamStore block; backward() accumulates into ParamBlock::grad.
class Tape {
 public:
  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
  };

  Var constant(Eigen::MatrixXd value);
  /// Leaf whose gradient is kept and readable through grad().
  Var variable(Eigen::MatrixXd value);
  /// Gradients of parameters land in ParamBlock::grad only; grad() on a
  /// parameter var is not meaningful.
  Var parameter(ParamBlock& block);

  /// weight (out x in, row-major block) * x + bias.
  Var linear(Var x, Var weight, Var bias, std::size_t out, std::size_t in);
  Var activation(Var x, Activation act);
  /// Per column: reshape to in x lateral x n3, weight * x + bias (t-product),
  /// flatten to out x lateral x n3.
  Var tensor_affine(Var x, Var weight, Var bias, Dims3 weight_dims, std::size_t lateral);
  Var concat_rows(Var top, Var bottom);

  /// Scalar sum over all entries of mask .* (x - target)^2 (mask optional).
  Var squared_error(Var x, Eigen::MatrixXd target, Eigen::MatrixXd mask = {});
  /// Scalar sum of column-wise TNN, each column shaped as `shape`.
  Var tnn(Var x, Dims3 shape);
  /// Scalar sum of column-wise spectral l1 norms (blocks of length n3).
  Var spectral_l1(Var x, std::size_t n3);
  /// Scalar sum_k w_k * s_k of scalar vars.
  Var weighted_sum(std::initializer_list<std::pair<double, Var>> terms);

  const Eigen::MatrixXd& value(Var v) const;
  const Eigen::MatrixXd& grad(Var v) const;
  double scalar(Var v) const;

  /// Seed d(loss)/d(loss) = 1 and run the recorded ops in reverse.
  void backward(Var loss);
  void clear();
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    bool needs_grad = false;
    ParamBlock* param = nullptr;
    std::function<void(Tape&, const Node&)> backprop;
  };

  Var push(Eigen::MatrixXd value, bool needs_grad, std::function<void(Tape&, const Node&)> backprop = {});
  Node& node(Var v);
  const Node& node(Var v) const;
  bool needs(Var v) const { return node(v).needs_grad; }
  void accumulate(Var v, const Eigen::MatrixXd& g);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace tubalcast::nn
