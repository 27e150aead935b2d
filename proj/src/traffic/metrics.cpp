#include "tubalcast/traffic/metrics.hpp"

#include <cmath>

#include "tubalcast/error.hpp"

namespace tubalcast::traffic {

namespace {
void same_dims(const Tensor3& a, const Tensor3& b) {
  require(a.dims() == b.dims() && a.size() > 0, ErrorKind::DimMismatch,
          "prediction " + to_string(a.dims()) + " vs truth " + to_string(b.dims()));
}
}  // namespace

double mae(const Tensor3& pred, const Tensor3& truth) {
  same_dims(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred.data()[i] - truth.data()[i]);
  return acc / static_cast<double>(pred.size());
}

double nrmse(const Tensor3& pred, const Tensor3& truth) {
  same_dims(pred, truth);
  const double denom = truth.frobenius_norm();
  require(denom > 0.0, ErrorKind::ZeroTruth, "truth is all zero; NRMSE undefined");
  return relative_error(pred, truth);
}

}  // namespace tubalcast::traffic
