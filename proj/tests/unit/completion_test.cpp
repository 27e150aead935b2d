#include "tubalcast/completion.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tubalcast/error.hpp"

namespace tubalcast {
namespace {

struct Instance {
  Tensor3 truth;
  ObservationMask mask;
  Tensor3 measurement;
};

Instance rank2_instance(double missing_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.truth = oracle::low_tubal_rank_usv({12, 12, 11}, 2, rng);
  in.mask = random_mask(in.truth.dims(), missing_rate, 0, seed);
  in.measurement = apply_mask(in.truth, in.mask);
  return in;
}

TEST(CompletionConfig, Defaults) {
  const auto cfg = CompletionConfig::defaults_for({12, 12, 11});
  EXPECT_NEAR(cfg.tau, 1.0 / std::sqrt(132.0), 1e-15);
  EXPECT_EQ(cfg.max_iters, 500U);
  EXPECT_EQ(cfg.rho_admm, 1.0);
  EXPECT_EQ(cfg.tol, 1e-5);
  CompletionConfig bad = cfg;
  bad.rho_admm = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(TnnAdmm, FullyObservedSmallTauReturnsInput) {
  std::mt19937_64 rng(1);
  const Tensor3 t = oracle::random_tensor({6, 5, 4}, rng);
  auto cfg = CompletionConfig::defaults_for(t.dims());
  cfg.tau = 1e-6;
  const auto r = tnn_admm_complete(t, ObservationMask::full(t.dims()), cfg);
  EXPECT_LT(relative_error(r.completed, t), 1e-4);
}

TEST(TnnAdmm, ObservedEntriesConvergeAsTauVanishes) {
  const Instance in = rank2_instance(0.5, 3);
  auto cfg = CompletionConfig::defaults_for(in.truth.dims());
  cfg.tau = 1e-6;
  const auto r = tnn_admm_complete(in.measurement, in.mask, cfg);
  const Tensor3 diff = apply_mask(r.completed, in.mask) - in.measurement;
  EXPECT_LT(diff.frobenius_norm() / in.measurement.frobenius_norm(), 1e-3);
}

TEST(TnnAdmm, RecoversRankTwoAtHalfObserved) {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const Instance in = rank2_instance(0.5, seed);
    const auto r = tnn_admm_complete(in.measurement, in.mask, CompletionConfig::defaults_for(in.truth.dims()));
    EXPECT_LT(relative_error(r.completed, in.truth), 0.05) << "seed " << seed;
    EXPECT_LE(r.iterations, 500U);
  }
}

TEST(TnnAdmm, NinetyPercentMissingIsWorseButBounded) {
  const Instance half = rank2_instance(0.5, 21);
  const Instance sparse = rank2_instance(0.9, 21);
  const auto cfg = CompletionConfig::defaults_for(half.truth.dims());
  const double e_half = relative_error(tnn_admm_complete(half.measurement, half.mask, cfg).completed, half.truth);
  const double e_sparse =
      relative_error(tnn_admm_complete(sparse.measurement, sparse.mask, cfg).completed, sparse.truth);
  EXPECT_GT(e_sparse, e_half);
  EXPECT_LT(e_sparse, 0.5);
}

TEST(TnnAdmm, ObjectiveIsMonotone) {
  const Instance in = rank2_instance(0.3, 5);
  const auto cfg = CompletionConfig::defaults_for(in.truth.dims());
  const auto r = tnn_admm_complete(in.measurement, in.mask, cfg);
  for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-9);
  EXPECT_NEAR(r.objective.back(), completion_objective(in.measurement, in.mask, r.completed, cfg.tau),
              1e-6 * r.objective.back());
}

TEST(TnnAdmm, DeterministicTrajectory) {
  const Instance in = rank2_instance(0.5, 8);
  auto cfg = CompletionConfig::defaults_for(in.truth.dims());
  cfg.max_iters = 40;
  const auto a = tnn_admm_complete(in.measurement, in.mask, cfg);
  const auto b = tnn_admm_complete(in.measurement, in.mask, cfg);
  EXPECT_EQ(a.completed, b.completed);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(TnnAdmm, EmptyObservation) {
  try {
    (void)tnn_admm_complete(Tensor3({3, 3, 3}), ObservationMask({3, 3, 3}), CompletionConfig::defaults_for({3, 3, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyObservation);
  }
}

}  // namespace
}  // namespace tubalcast
