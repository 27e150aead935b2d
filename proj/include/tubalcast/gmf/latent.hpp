#pragma once

#include <span>

#include <Eigen/Dense>

#include "tubalcast/gmf/generator.hpp"
#include "tubalcast/mask.hpp"

namespace tubalcast::gmf {

/// E(z) = ||M - P(G(z))||_F^2 + gamma * ||z~||_1, z~ the blockwise (length
/// n3) Fourier transform of z.
double latent_energy(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask,
                     std::span<const double> z, double gamma);

struct EnergyAndGradient {
  double energy = 0.0;
  Eigen::VectorXd grad;
};
/// Energy and its (sub)gradient in z; spectral zeros contribute 0.
EnergyAndGradient latent_energy_grad(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask,
                                     std::span<const double> z, double gamma);

/// z - rho * dE/dz.
Eigen::VectorXd latent_grad_step(const GeneratorParams& g, const Tensor3& m, const ObservationMask& mask,
                                 std::span<const double> z, double gamma, double rho);

}  // namespace tubalcast::gmf
