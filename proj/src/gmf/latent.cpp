#include "tubalcast/gmf/latent.hpp"

#include <cmath>
#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/talgebra.hpp"

namespace tubalcast::gmf {

namespace {

void check(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask, std::span<const double> z) {
  require(m.dims() == g.output_dims() && mask.dims() == m.dims(), ErrorKind::DimMismatch,
          "measurement " + to_string(m.dims()) + " / mask " + to_string(mask.dims()) + " vs generator " +
              to_string(g.output_dims()));
  require(z.size() == g.latent_length(), ErrorKind::DimMismatch,
          "latent length " + std::to_string(z.size()) + ", generator expects " + std::to_string(g.latent_length()));
}

Eigen::MatrixXd mask_matrix(const ObservationMask& mask) {
  const auto n = static_cast<Eigen::Index>(mask.dims().size());
  Eigen::MatrixXd w(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) w(i, 0) = mask.observed_flat(static_cast<std::size_t>(i)) ? 1.0 : 0.0;
  return w;
}

}  // namespace

double latent_energy(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask,
                     std::span<const double> z, double gamma) {
  check(g, m, mask, z);
  const Tensor3 out = generator_forward(g, z);
  double data = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.observed_flat(i)) continue;
    const double r = m.data()[i] - out.data()[i];
    data += r * r;
  }
  return data + (gamma != 0.0 ? gamma * spectral_l1(z, g.n3) : 0.0);
}

EnergyAndGradient latent_energy_grad(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask,
                                     std::span<const double> z, double gamma) {
  check(g, m, mask, z);
  nn::Tape t;
  const GeneratorVars vars = record_generator_params(t, g, nullptr);
  auto zv = t.variable(Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size())));
  auto out = record_generator(t, g, vars, zv);
  Eigen::MatrixXd target = Eigen::Map<const Eigen::VectorXd>(m.data().data(), static_cast<Eigen::Index>(m.size()));
  auto data = t.squared_error(out, std::move(target), mask_matrix(mask));
  auto energy = t.weighted_sum({{1.0, data}, {gamma, t.spectral_l1(zv, g.n3)}});
  t.backward(energy);
  return {t.scalar(energy), t.grad(zv).col(0)};
}

Eigen::VectorXd latent_grad_step(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask,
                                 std::span<const double> z, double gamma, double rho) {
  require(rho > 0.0, ErrorKind::InvalidArgument, "step size rho must be positive");
  const EnergyAndGradient eg = latent_energy_grad(g, m, mask, z, gamma);
  Eigen::VectorXd next = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size())) - rho * eg.grad;
  require(next.allFinite(), ErrorKind::NonFinite, "latent gradient step produced non-finite values");
  return next;
}

}  // namespace tubalcast::gmf
