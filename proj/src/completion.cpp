#include "tubalcast/completion.hpp"

#include <cmath>
#include <limits>

#include "tubalcast/error.hpp"
#include "tubalcast/talgebra.hpp"

namespace tubalcast {

CompletionConfig CompletionConfig::defaults_for(Dims3 dims) {
  CompletionConfig cfg;
  cfg.tau = 1.0 / std::sqrt(static_cast<double>(std::max(dims.n1, dims.n2) * dims.n3));
  return cfg;
}

void CompletionConfig::validate() const {
  require(tau > 0.0 && max_iters > 0 && tol > 0.0 && rho_admm > 0.0, ErrorKind::InvalidArgument,
          "completion config fields must be strictly positive");
}

namespace {

double masked_residual_sq(const Tensor3& m, const ObservationMask& mask, const Tensor3& x) {
  double acc = 0.0;
  auto md = m.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < md.size(); ++i) {
    if (!mask.observed_flat(i)) continue;
    const double r = md[i] - xd[i];
    acc += r * r;
  }
  return acc;
}

}  // namespace

double reference_penalty(const Tensor3& m, const ObservationMask& mask, double tau) {
  double top = 0.0;
  for (const auto& sl : spectral_svd(apply_mask(m, mask), SvdVectors::none).slices)
    if (sl.sigma.size() > 0) top = std::max(top, sl.sigma(0));
  return top > 0.0 ? 10.0 * tau / top : 1.0;
}

double completion_objective(const Tensor3& m, const ObservationMask& mask, const Tensor3& x,
                            double tau) {
  require(m.dims() == mask.dims() && x.dims() == m.dims(), ErrorKind::DimMismatch,
          "completion objective shape mismatch");
  return masked_residual_sq(m, mask, x) + tau * tnn(x);
}

CompletionResult tnn_admm_complete(const Tensor3& m, const ObservationMask& mask,
                                   const CompletionConfig& cfg) {
  cfg.validate();
  require(m.dims() == mask.dims(), ErrorKind::DimMismatch,
          "mask " + to_string(mask.dims()) + " vs measurement " + to_string(m.dims()));
  require(mask.omega_size() >= 1, ErrorKind::EmptyObservation, "no observations: the mask is empty");
  require(m.all_finite(), ErrorKind::NonFinite, "measurement contains NaN or Inf");

  const Dims3 d = m.dims();
  const double rho = cfg.rho_admm * reference_penalty(m, mask, cfg.tau);
  Tensor3 x = apply_mask(m, mask);
  Tensor3 u(d);
  Tensor3 z_prev = x;

  CompletionResult result;
  result.completed = x;
  double best = std::numeric_limits<double>::infinity();

  auto md = m.data();
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    TsvtResult prox = tsvt_with_norm(x - u, cfg.tau / rho);
    const Tensor3& z = prox.value;
    require(z.all_finite(), ErrorKind::NonFinite, "ADMM iterate diverged");

    auto xd = x.data();
    auto zd = z.data();
    auto ud = u.data();
    double primal = 0.0;
    for (std::size_t i = 0; i < xd.size(); ++i) {
      const double target = zd[i] + ud[i];
      const double xn = mask.observed_flat(i) ? (2.0 * md[i] + rho * target) / (2.0 + rho) : target;
      xd[i] = xn;
      ud[i] += zd[i] - xn;
      primal += (zd[i] - xn) * (zd[i] - xn);
    }

    const double objective = masked_residual_sq(m, mask, z) + cfg.tau * prox.tnn;
    if (objective <= best) {
      best = objective;
      result.completed = z;
    }
    result.objective.push_back(best);
    result.iterations = it + 1;

    const double z_norm = std::max(z.frobenius_norm(), std::numeric_limits<double>::min());
    const double change = (z - z_prev).frobenius_norm() / z_norm;
    z_prev = z;
    if (it > 0 && change < cfg.tol && std::sqrt(primal) / z_norm < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace tubalcast
