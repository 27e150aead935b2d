#include "tubalcast/gmf/inference.hpp"

#include <chrono>
#include <limits>
#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/gmf/latent.hpp"
#include "tubalcast/rng.hpp"
#include "tubalcast/talgebra.hpp"

namespace tubalcast::gmf {

std::string_view to_string(InferMode m) noexcept { return m == InferMode::learned ? "learned" : "gd"; }

InferMode infer_mode_from_string(std::string_view s) {
  if (s == "learned") return InferMode::learned;
  if (s == "gd") return InferMode::gd;
  fail(ErrorKind::InvalidArgument, "unknown inference mode '" + std::string(s) + "' (expected learned or gd)");
}

namespace {

double energy_of(const Tensor3& out, const Tensor3& m, const ObservationMask& mask, const Eigen::VectorXd& z,
                 double gamma, std::size_t n3) {
  double data = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.observed_flat(i)) continue;
    const double r = m.data()[i] - out.data()[i];
    data += r * r;
  }
  return data + (gamma != 0.0 ? gamma * spectral_l1({z.data(), static_cast<std::size_t>(z.size())}, n3) : 0.0);
}

}  // namespace

InferResult infer(const GeneratorParams& g, const LearnedOptimizerParams* f, const Tensor3& m,
                  const ObservationMask& mask, const InferOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const Dims3 d = g.output_dims();
  require(m.dims() == d && mask.dims() == d, ErrorKind::DimMismatch,
          "window " + to_string(m.dims()) + " / mask " + to_string(mask.dims()) + " vs generator " + to_string(d));
  require(opts.tp >= 1 && opts.tp < d.n3, ErrorKind::InvalidArgument, "forecast horizon must be in [1, n3)");
  require(mask.trailing_unobserved_slices() >= opts.tp, ErrorKind::InvalidArgument,
          "forecast slices must be unobserved in the mask");
  require(opts.restarts >= 1, ErrorKind::InvalidArgument, "restarts must be >= 1");
  if (opts.mode == InferMode::learned) {
    require(f != nullptr, ErrorKind::MissingCheckpoint, "learned inference needs a learned optimizer");
    require(f->n == g.n && f->n3 == g.n3 && f->latent == g.latent_length(), ErrorKind::DimMismatch,
            "learned optimizer shape does not match the generator");
    require(opts.k_steps >= 1, ErrorKind::InvalidArgument, "k_steps must be >= 1");
  } else {
    require(opts.rho > 0.0, ErrorKind::InvalidArgument, "gd step size must be positive");
  }

  InferResult best;
  best.energy = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Rng rng = make_rng(opts.seed, "z1.infer", r);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(g.latent_length()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);

    if (opts.mode == InferMode::learned) {
      for (std::size_t s = 0; s < opts.k_steps; ++s) z = fphi_forward(*f, m, {z.data(), static_cast<std::size_t>(z.size())});
    } else {
      for (std::size_t s = 0; s < opts.gd_iters; ++s)
        z = latent_grad_step(g, m, mask, {z.data(), static_cast<std::size_t>(z.size())}, opts.gamma, opts.rho);
    }
    require(z.allFinite(), ErrorKind::NonFinite, "latent iterate became non-finite");
    Tensor3 full = generator_forward(g, {z.data(), static_cast<std::size_t>(z.size())});
    const double e = opts.restarts > 1 ? energy_of(full, m, mask, z, opts.gamma, g.n3) : 0.0;
    if (r == 0 || e < best.energy) {
      best.energy = e;
      best.z = std::move(z);
      best.full = std::move(full);
    }
  }
  best.forecast = best.full.frontal_range(d.n3 - opts.tp, opts.tp);
  best.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (opts.restarts == 1) best.energy = energy_of(best.full, m, mask, best.z, opts.gamma, g.n3);
  return best;
}

}  // namespace tubalcast::gmf
