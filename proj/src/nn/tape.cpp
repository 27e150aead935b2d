#include "tubalcast/nn/tape.hpp"

#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/talgebra.hpp"

namespace tubalcast::nn {

namespace {

// Columns of x (each in x lateral x n3) side by side: in x (lateral*B) x n3.
Tensor3 stack_lateral(const Eigen::MatrixXd& x, std::size_t rows, std::size_t lateral, std::size_t n3) {
  const auto batch = static_cast<std::size_t>(x.cols());
  Tensor3 t({rows, lateral * batch, n3});
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < lateral; ++j)
        for (std::size_t k = 0; k < n3; ++k)
          t(i, s * lateral + j, k) = x(static_cast<Eigen::Index>((i * lateral + j) * n3 + k), static_cast<Eigen::Index>(s));
  return t;
}

Eigen::MatrixXd unstack_lateral(const Tensor3& t, std::size_t lateral, std::size_t batch) {
  const Dims3 d = t.dims();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.n1 * lateral * d.n3), static_cast<Eigen::Index>(batch));
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t i = 0; i < d.n1; ++i)
      for (std::size_t j = 0; j < lateral; ++j)
        for (std::size_t k = 0; k < d.n3; ++k)
          x(static_cast<Eigen::Index>((i * lateral + j) * d.n3 + k), static_cast<Eigen::Index>(s)) =
              t(i, s * lateral + j, k);
  return x;
}

Tensor3 column_tensor(const Eigen::MatrixXd& x, Eigen::Index col, Dims3 shape) {
  Tensor3 t(shape);
  Eigen::Map<Eigen::VectorXd>(t.data().data(), static_cast<Eigen::Index>(t.size())) = x.col(col);
  return t;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const Tensor3& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.size())};
}

}  // namespace

Tape::Var Tape::push(Eigen::MatrixXd value, bool needs_grad, std::function<void(Tape&, const Node&)> backprop) {
  require(value.allFinite(), ErrorKind::NonFinite, "non-finite value recorded on tape");
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return Var{nodes_.size() - 1};
}

Tape::Node& Tape::node(Var v) {
  require(v.id < nodes_.size(), ErrorKind::GraphUnavailable, "variable is not on this tape");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  require(v.id < nodes_.size(), ErrorKind::GraphUnavailable, "variable is not on this tape");
  return nodes_[v.id];
}

void Tape::accumulate(Var v, const Eigen::MatrixXd& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

Tape::Var Tape::constant(Eigen::MatrixXd value) { return push(std::move(value), false); }

Tape::Var Tape::variable(Eigen::MatrixXd value) { return push(std::move(value), true, [](Tape&, const Node&) {}); }

Tape::Var Tape::parameter(ParamBlock& block) {
  Eigen::MatrixXd v = Eigen::Map<const Eigen::VectorXd>(block.value.data(), static_cast<Eigen::Index>(block.value.size()));
  Var out = push(std::move(v), true, [](Tape&, const Node&) {});
  nodes_[out.id].param = &block;
  return out;
}

Tape::Var Tape::linear(Var x, Var weight, Var bias, std::size_t out, std::size_t in) {
  const Eigen::MatrixXd& xv = value(x);
  require(static_cast<std::size_t>(xv.rows()) == in && static_cast<std::size_t>(value(weight).size()) == out * in &&
              static_cast<std::size_t>(value(bias).size()) == out,
          ErrorKind::DimMismatch, "linear: input has " + std::to_string(xv.rows()) + " rows, layer is " +
                                      std::to_string(out) + "x" + std::to_string(in));
  const auto o = static_cast<Eigen::Index>(out);
  const auto i = static_cast<Eigen::Index>(in);
  Eigen::Map<const RowMatrix> w(value(weight).data(), o, i);
  Eigen::MatrixXd y = w * xv;
  y.colwise() += value(bias).col(0);
  return push(std::move(y), needs(x) || needs(weight) || needs(bias), [=](Tape& t, const Node& self) {
    Eigen::Map<const RowMatrix> wm(t.value(weight).data(), o, i);
    if (t.needs(x)) t.accumulate(x, wm.transpose() * self.grad);
    if (t.needs(weight)) {
      if (ParamBlock* p = t.node(weight).param) {
        // straight into the block: the f_phi input layer is several MB
        Eigen::Map<RowMatrix>(p->grad.data(), o, i).noalias() += self.grad * t.value(x).transpose();
      } else {
        RowMatrix gw = self.grad * t.value(x).transpose();
        t.accumulate(weight, Eigen::Map<const Eigen::VectorXd>(gw.data(), gw.size()));
      }
    }
    if (t.needs(bias)) t.accumulate(bias, self.grad.rowwise().sum());
  });
}

Tape::Var Tape::activation(Var x, Activation act) {
  Eigen::MatrixXd y = value(x);
  activate_inplace(y, act);
  return push(std::move(y), needs(x), [=](Tape& t, const Node& self) {
    switch (act) {
      case Activation::identity: t.accumulate(x, self.grad); break;
      case Activation::relu:
        t.accumulate(x, (t.value(x).array() > 0.0).select(self.grad, 0.0));
        break;
      case Activation::sigmoid:
        t.accumulate(x, (self.grad.array() * self.value.array() * (1.0 - self.value.array())).matrix());
        break;
    }
  });
}

Tape::Var Tape::tensor_affine(Var x, Var weight, Var bias, Dims3 wd, std::size_t lateral) {
  const Eigen::MatrixXd& xv = value(x);
  require(static_cast<std::size_t>(xv.rows()) == wd.n2 * lateral * wd.n3 &&
              static_cast<std::size_t>(value(weight).size()) == wd.size() &&
              static_cast<std::size_t>(value(bias).size()) == wd.n1 * lateral * wd.n3,
          ErrorKind::DimMismatch,
          "tensor layer " + to_string(wd) + " cannot take " + std::to_string(xv.rows()) + "-row input");
  const auto batch = static_cast<std::size_t>(xv.cols());
  const Tensor3 w(wd, std::vector<double>(value(weight).data(), value(weight).data() + wd.size()));
  const Tensor3 xs = stack_lateral(xv, wd.n2, lateral, wd.n3);
  Eigen::MatrixXd y = unstack_lateral(tproduct(w, xs), lateral, batch);
  y.colwise() += value(bias).col(0);
  return push(std::move(y), needs(x) || needs(weight) || needs(bias), [=](Tape& t, const Node& self) {
    const Tensor3 dc = stack_lateral(self.grad, wd.n1, lateral, wd.n3);
    const Tensor3 wt(wd, std::vector<double>(t.value(weight).data(), t.value(weight).data() + wd.size()));
    if (t.needs(x)) t.accumulate(x, unstack_lateral(tproduct(ttranspose(wt), dc), lateral, batch));
    if (t.needs(weight)) {
      const Tensor3 xs2 = stack_lateral(t.value(x), wd.n2, lateral, wd.n3);
      const Tensor3 gw = tproduct(dc, ttranspose(xs2));
      t.accumulate(weight, as_vector(gw));
    }
    if (t.needs(bias)) t.accumulate(bias, self.grad.rowwise().sum());
  });
}

Tape::Var Tape::concat_rows(Var top, Var bottom) {
  const Eigen::MatrixXd& a = value(top);
  const Eigen::MatrixXd& b = value(bottom);
  require(a.cols() == b.cols(), ErrorKind::DimMismatch, "concat_rows: batch sizes differ");
  Eigen::MatrixXd y(a.rows() + b.rows(), a.cols());
  y << a, b;
  const Eigen::Index split = a.rows();
  return push(std::move(y), needs(top) || needs(bottom), [=](Tape& t, const Node& self) {
    if (t.needs(top)) t.accumulate(top, self.grad.topRows(split));
    if (t.needs(bottom)) t.accumulate(bottom, self.grad.bottomRows(self.grad.rows() - split));
  });
}

Tape::Var Tape::squared_error(Var x, Eigen::MatrixXd target, Eigen::MatrixXd mask) {
  const Eigen::MatrixXd& xv = value(x);
  require(target.rows() == xv.rows() && target.cols() == xv.cols(), ErrorKind::DimMismatch,
          "squared_error: target shape differs from input");
  require(mask.size() == 0 || (mask.rows() == xv.rows() && mask.cols() == xv.cols()), ErrorKind::DimMismatch,
          "squared_error: mask shape differs from input");
  Eigen::MatrixXd r = xv - target;
  if (mask.size() != 0) r.array() *= mask.array();
  Eigen::MatrixXd loss(1, 1);
  loss(0, 0) = r.squaredNorm();
  return push(std::move(loss), needs(x), [=, r = std::move(r), mask = std::move(mask)](Tape& t, const Node& self) {
    Eigen::MatrixXd g = 2.0 * self.grad(0, 0) * r;
    if (mask.size() != 0) g.array() *= mask.array();
    t.accumulate(x, g);
  });
}

Tape::Var Tape::tnn(Var x, Dims3 shape) {
  const Eigen::MatrixXd& xv = value(x);
  require(static_cast<std::size_t>(xv.rows()) == shape.size(), ErrorKind::DimMismatch,
          "tnn: column length does not match " + to_string(shape));
  Eigen::MatrixXd loss = Eigen::MatrixXd::Zero(1, 1);
  if (!needs(x)) {
    for (Eigen::Index c = 0; c < xv.cols(); ++c) loss(0, 0) += tubalcast::tnn(column_tensor(xv, c, shape));
    return push(std::move(loss), false, nullptr);
  }
  // one SVD per column; the subgradient is kept for backward
  Eigen::MatrixXd sub(xv.rows(), xv.cols());
  for (Eigen::Index c = 0; c < xv.cols(); ++c) {
    auto tg = tnn_with_subgradient(column_tensor(xv, c, shape));
    loss(0, 0) += tg.value;
    sub.col(c) = as_vector(tg.grad);
  }
  return push(std::move(loss), true, [=, sub = std::move(sub)](Tape& t, const Node& self) {
    t.accumulate(x, self.grad(0, 0) * sub);
  });
}

Tape::Var Tape::spectral_l1(Var x, std::size_t n3) {
  const Eigen::MatrixXd& xv = value(x);
  require(n3 > 0 && static_cast<std::size_t>(xv.rows()) % n3 == 0, ErrorKind::DimMismatch,
          "spectral_l1: column length is not a multiple of n3");
  Eigen::MatrixXd loss = Eigen::MatrixXd::Zero(1, 1);
  for (Eigen::Index c = 0; c < xv.cols(); ++c)
    loss(0, 0) += tubalcast::spectral_l1({xv.col(c).data(), static_cast<std::size_t>(xv.rows())}, n3);
  return push(std::move(loss), needs(x), [=](Tape& t, const Node& self) {
    const Eigen::MatrixXd& v = t.value(x);
    Eigen::MatrixXd g(v.rows(), v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      const auto sg = spectral_l1_subgradient({v.col(c).data(), static_cast<std::size_t>(v.rows())}, n3);
      g.col(c) = self.grad(0, 0) * Eigen::Map<const Eigen::VectorXd>(sg.data(), v.rows());
    }
    t.accumulate(x, g);
  });
}

Tape::Var Tape::weighted_sum(std::initializer_list<std::pair<double, Var>> terms) {
  std::vector<std::pair<double, Var>> ts(terms);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(1, 1);
  bool any = false;
  for (const auto& [w, v] : ts) {
    require(value(v).size() == 1, ErrorKind::DimMismatch, "weighted_sum takes scalar terms");
    s(0, 0) += w * value(v)(0, 0);
    any = any || needs(v);
  }
  return push(std::move(s), any, [ts](Tape& t, const Node& self) {
    for (const auto& [w, v] : ts) t.accumulate(v, Eigen::MatrixXd::Constant(1, 1, w * self.grad(0, 0)));
  });
}

const Eigen::MatrixXd& Tape::value(Var v) const { return node(v).value; }

const Eigen::MatrixXd& Tape::grad(Var v) const {
  const Node& n = node(v);
  require(backward_done_ && n.needs_grad, ErrorKind::GraphUnavailable, "no gradient recorded for this variable");
  return n.grad;
}

double Tape::scalar(Var v) const {
  const Node& n = node(v);
  require(n.value.size() == 1, ErrorKind::DimMismatch, "value is not a scalar");
  return n.value(0, 0);
}

void Tape::backward(Var loss) {
  Node& root = node(loss);
  require(root.value.size() == 1, ErrorKind::GraphUnavailable, "backward needs a scalar loss");
  require(!backward_done_, ErrorKind::GraphUnavailable, "backward already ran on this recording");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (root.needs_grad) root.grad = Eigen::MatrixXd::Ones(1, 1);
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad) continue;
    if (n.param != nullptr) {
      if (n.grad.size() != 0)
        Eigen::Map<Eigen::VectorXd>(n.param->grad.data(), static_cast<Eigen::Index>(n.param->grad.size())) +=
            Eigen::Map<const Eigen::VectorXd>(n.grad.data(), n.grad.size());
      continue;
    }
    if (n.grad.size() == 0) n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
    if (n.backprop) n.backprop(*this, n);
  }
  backward_done_ = true;
}

void Tape::clear() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace tubalcast::nn
