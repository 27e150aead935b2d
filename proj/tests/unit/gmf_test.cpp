#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tubalcast/error.hpp"
#include "tubalcast/gmf/generator.hpp"
#include "tubalcast/gmf/inference.hpp"
#include "tubalcast/gmf/latent.hpp"
#include "tubalcast/gmf/optimizer.hpp"
#include "tubalcast/mask.hpp"
#include "tubalcast/nn/gradcheck.hpp"
#include "tubalcast/talgebra.hpp"
#include "tubalcast/traffic/dataset.hpp"
#include "tubalcast/traffic/windows.hpp"

namespace tubalcast::gmf {
namespace {

namespace fs = std::filesystem;

std::vector<double> normal_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

Tensor3 uniform_tensor(Dims3 d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor3 t(d);
  for (double& x : t.data()) x = u(rng);
  return t;
}

// small normalized windows from the synthetic generator
traffic::WindowSplit small_windows(std::size_t n, std::size_t frames, double rate, std::uint64_t seed) {
  auto d = traffic::preprocess(traffic::synthetic_traffic(n, frames, 2, seed, 48.0),
                               traffic::OutlierAction::none);
  return traffic::make_windows(d, 4, 1, 0.8, rate, seed);
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("tubalcast_gmf_" + name); }

TEST(Generator, ZeroParametersGiveHalfEverywhere) {
  std::mt19937_64 rng(1);
  for (auto kind : {GeneratorKind::tl, GeneratorKind::fc}) {
    const auto g = GeneratorParams::zeros(kind, 3, 4, 0);
    const Tensor3 out = generator_forward(g, normal_vector(g.latent_length(), rng));
    EXPECT_EQ(out.dims(), (Dims3{3, 3, 4}));
    for (double x : out.data()) EXPECT_EQ(x, 0.5);
  }
}

TEST(Generator, SeededInitIsBitIdentical) {
  std::mt19937_64 rng(2);
  const auto z = normal_vector(5 * 6, rng);
  for (auto kind : {GeneratorKind::tl, GeneratorKind::fc}) {
    const auto a = GeneratorParams::init(kind, 5, 6, 0, 42);
    const auto b = GeneratorParams::init(kind, 5, 6, 0, 42);
    const auto c = GeneratorParams::init(kind, 5, 6, 0, 43);
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a.fingerprint(), c.fingerprint());
    const Tensor3 ya = generator_forward(a, z);
    const Tensor3 yb = generator_forward(b, z);
    EXPECT_TRUE(std::equal(ya.data().begin(), ya.data().end(), yb.data().begin()));
    for (double x : ya.data()) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
  }
}

TEST(Generator, LatentLengthAndRankTruncation) {
  const auto g = GeneratorParams::init(GeneratorKind::tl, 6, 5, 0, 1);
  EXPECT_EQ(g.latent_length(), 30U);
  EXPECT_EQ(g.l1, 6U);
  const auto r = GeneratorParams::init(GeneratorKind::tl, 6, 5, 2, 1, 3);
  EXPECT_EQ(r.latent_length(), 15U);
  EXPECT_EQ(r.l1, 2U);
  std::vector<double> bad(29);
  EXPECT_THROW((void)generator_forward(g, bad), Error);
}

TEST(Generator, TapeMatchesPlainForward) {
  std::mt19937_64 rng(3);
  for (auto kind : {GeneratorKind::tl, GeneratorKind::fc}) {
    const auto g = GeneratorParams::init(kind, 4, 5, 3, 9);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(g.latent_length()), 3);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal_vector(1, rng)[0];
    nn::Tape t;
    const auto vars = record_generator_params(t, g, nullptr);
    auto out = record_generator(t, g, vars, t.constant(z));
    for (Eigen::Index c = 0; c < 3; ++c) {
      const Tensor3 y = generator_forward(g, {z.col(c).data(), static_cast<std::size_t>(z.rows())});
      for (std::size_t i = 0; i < y.size(); ++i)
        EXPECT_NEAR(t.value(out)(static_cast<Eigen::Index>(i), c), y.data()[i], 1e-12);
    }
  }
}

TEST(Generator, PretrainLossGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const Dims3 d{3, 3, 4};
  for (auto kind : {GeneratorKind::tl, GeneratorKind::fc}) {
    auto g = GeneratorParams::init(kind, 3, 4, 0, 11);
    nn::ParamStore store;
    g.bind(store);
    for (int point = 0; point < 10; ++point) {
      for (auto& b : store.blocks())
        for (double& v : b.value) v += 0.1 * normal_vector(1, rng)[0];
      const Tensor3 target = uniform_tensor(d, rng);
      const auto v = latent_target(target, 3);
      auto run = [&](bool grad) {
        nn::Tape t;
        const auto vars = record_generator_params(t, g, &store);
        auto out = record_generator(t, g, vars, t.constant(v));
        Eigen::MatrixXd y = Eigen::Map<const Eigen::VectorXd>(target.data().data(), static_cast<Eigen::Index>(target.size()));
        auto loss = t.weighted_sum({{1.0, t.squared_error(out, y)}, {0.01, t.tnn(out, d)}});
        if (grad) t.backward(loss);
        return t.scalar(loss);
      };
      store.zero_grad();
      run(true);
      std::vector<double> values, grads;
      for (const auto& b : store.blocks()) {
        values.insert(values.end(), b.value.begin(), b.value.end());
        grads.insert(grads.end(), b.grad.begin(), b.grad.end());
      }
      auto push = [&] {
        std::size_t at = 0;
        for (auto& b : store.blocks())
          for (double& x : b.value) x = values[at++];
      };
      const nn::GradCheck gc = nn::finite_diff_check([&] { push(); return run(false); }, values, grads, 1e-5, 300,
                                                     static_cast<std::uint64_t>(point));
      push();
      EXPECT_LT(gc.max_rel_error, 1e-4) << to_string(kind) << " point " << point;
    }
  }
}

TEST(Pretrain, ConstantHalfTensorReachesRegularizerFloor) {
  // single sample at 0.5: the optimum shifts every entry by -gamma0 / (2n),
  // so recon = n^2 n3 (gamma0 / 2n)^2 and the loss sits at gamma0 * tnn(G).
  const std::size_t n = 2, n3 = 3;
  const Tensor3 half({n, n, n3}, 0.5);
  auto g = GeneratorParams::init(GeneratorKind::tl, n, n3, 0, 5);
  PretrainConfig cfg;
  cfg.max_epoch = 3000;
  cfg.lr = 1e-2;
  cfg.lr_final = 1e-4;
  const TrainReport rep = pretrain_generator(g, {half}, cfg);
  ASSERT_EQ(rep.loss.size(), 3000U);
  EXPECT_LT(rep.recon.back(), 1e-4);
  const double floor = cfg.gamma0 * tnn(half);
  EXPECT_NEAR(rep.loss.back() / floor, 1.0, 0.01);
}

TEST(Pretrain, WithoutRegularizerLossTrendsDown) {
  const auto split = small_windows(4, 120, 0.5, 6);
  auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 6);
  PretrainConfig cfg;
  cfg.gamma0 = 0.0;
  cfg.max_epoch = 20;
  const TrainReport rep = pretrain_generator(g, traffic::truths(split.train), cfg);
  ASSERT_EQ(rep.final_epoch, 20U);
  const double first_half = (rep.loss[0] + rep.loss[1] + rep.loss[2] + rep.loss[3]) / 4.0;
  const double last_half = (rep.loss[16] + rep.loss[17] + rep.loss[18] + rep.loss[19]) / 4.0;
  EXPECT_LT(last_half, first_half);
  for (double r : rep.regularizer) EXPECT_GT(r, 0.0);  // still reported
}

TEST(Pretrain, FinalReconstructionWithinTenPercentOfFirstEpoch) {
  const auto split = small_windows(4, 120, 0.5, 6);
  auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 6);
  const TrainReport rep = pretrain_generator(g, traffic::truths(split.train), PretrainConfig{});
  EXPECT_EQ(rep.final_epoch, PretrainConfig{}.max_epoch);
  EXPECT_LE(rep.recon.back(), 0.1 * rep.recon.front());
  // trained level carries over to the inputs it was trained on
  const Tensor3& t = split.train.front().truth;
  const auto v = latent_target(t, 4);
  const Tensor3 out = generator_forward(g, {v.data(), static_cast<std::size_t>(v.size())});
  double err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) err += (out.data()[i] - t.data()[i]) * (out.data()[i] - t.data()[i]);
  EXPECT_LT(err, 4.0 * rep.recon.back());
}

TEST(Pretrain, LargeGammaConcentratesEnergy) {
  const auto split = small_windows(4, 120, 0.5, 7);
  auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 7);
  PretrainConfig cfg;
  cfg.gamma0 = 10.0;
  cfg.max_epoch = 20;
  const auto corpus = traffic::truths(split.train);
  (void)pretrain_generator(g, corpus, cfg);
  double mean = 0.0;
  for (std::size_t s = 0; s < 10; ++s) {
    const auto v = latent_target(corpus[s], 4);
    mean += energy_cdf(generator_forward(g, {v.data(), static_cast<std::size_t>(v.size())}))[0] / 10.0;
  }
  EXPECT_GE(mean, 0.9);  // top n/4 = 1 tube
}

TEST(Pretrain, EmptyCorpusAndShapeErrors) {
  auto g = GeneratorParams::init(GeneratorKind::tl, 3, 4, 0, 1);
  try {
    (void)pretrain_generator(g, {}, PretrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
  }
  EXPECT_THROW((void)pretrain_generator(g, {Tensor3({3, 3, 5}, 0.5)}, PretrainConfig{}), Error);
}

TEST(LatentEnergy, EmptyMaskAndZeroGammaIsZero) {
  std::mt19937_64 rng(8);
  const auto g = GeneratorParams::init(GeneratorKind::tl, 3, 4, 0, 8);
  const Dims3 d = g.output_dims();
  const Tensor3 m = uniform_tensor(d, rng);
  EXPECT_EQ(latent_energy(g, m, ObservationMask(d), normal_vector(12, rng), 0.0), 0.0);
}

TEST(LatentEnergy, ZeroLatentZeroParamsIsDataTermOnly) {
  std::mt19937_64 rng(9);
  const auto g = GeneratorParams::zeros(GeneratorKind::tl, 3, 4, 0);
  const Dims3 d = g.output_dims();
  const Tensor3 m = uniform_tensor(d, rng);
  double expected = 0.0;
  for (double x : m.data()) expected += (x - 0.5) * (x - 0.5);
  EXPECT_NEAR(latent_energy(g, m, ObservationMask::full(d), std::vector<double>(12, 0.0), 1.0), expected, 1e-12);
}

TEST(LatentEnergy, RegularizerAtSingularVectorEqualsTnn) {
  std::mt19937_64 rng(10);
  const auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 10);
  const Dims3 d = g.output_dims();
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3 t = oracle::random_tensor(d, rng);
    const auto v = singular_vector(tsvd(t));
    // empty mask: the data term vanishes whatever G does
    const double e = latent_energy(g, t, ObservationMask(d), v, 0.3);
    EXPECT_NEAR(e, 0.3 * tnn(t), 1e-6 * std::max(1.0, tnn(t)));
  }
}

TEST(LatentEnergy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (auto kind : {GeneratorKind::tl, GeneratorKind::fc}) {
    const auto g = GeneratorParams::init(kind, 4, 5, 0, 12);
    const Dims3 d = g.output_dims();
    for (int point = 0; point < 10; ++point) {
      const Tensor3 m = uniform_tensor(d, rng);
      const auto mask = random_mask(d, 0.4, 1, static_cast<std::uint64_t>(point));
      auto z = normal_vector(g.latent_length(), rng);
      const auto eg = latent_energy_grad(g, m, mask, z, 0.01);
      EXPECT_NEAR(eg.energy, latent_energy(g, m, mask, z, 0.01), 1e-10);
      const nn::GradCheck gc = nn::finite_diff_check([&] { return latent_energy(g, m, mask, z, 0.01); }, z,
                                                     {eg.grad.data(), static_cast<std::size_t>(eg.grad.size())});
      EXPECT_LT(gc.max_rel_error, 1e-4) << to_string(kind) << " point " << point;
    }
  }
}

TEST(LatentGradStep, FixedPointWhenGradientVanishes) {
  std::mt19937_64 rng(12);
  const auto g = GeneratorParams::zeros(GeneratorKind::tl, 3, 4, 0);
  const Dims3 d = g.output_dims();
  const auto z = normal_vector(12, rng);
  const auto next = latent_grad_step(g, uniform_tensor(d, rng), ObservationMask::full(d), z, 0.0, 0.5);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(next(static_cast<Eigen::Index>(i)), z[i], 1e-12);
  EXPECT_THROW((void)latent_grad_step(g, uniform_tensor(d, rng), ObservationMask::full(d), z, 0.0, 0.0), Error);
}

TEST(LatentGradStep, SmallStepDescendsInMostTrials) {
  std::mt19937_64 rng(13);
  int descended = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, static_cast<std::uint64_t>(100 + trial));
    const Dims3 d = g.output_dims();
    const Tensor3 m = uniform_tensor(d, rng);
    const auto mask = random_mask(d, 0.5, 1, static_cast<std::uint64_t>(trial));
    const auto z = normal_vector(g.latent_length(), rng);
    const double before = latent_energy(g, m, mask, z, 0.01);
    const auto next = latent_grad_step(g, m, mask, z, 0.01, 1e-3);
    const double after = latent_energy(g, m, mask, {next.data(), static_cast<std::size_t>(next.size())}, 0.01);
    if (after <= before) ++descended;
  }
  EXPECT_GE(descended, 95);
}

TEST(Fphi, ZeroParametersGiveZeroLatent) {
  std::mt19937_64 rng(14);
  const auto f = LearnedOptimizerParams::zeros(3, 4, 12, 16);
  const auto out = fphi_forward(f, uniform_tensor({3, 3, 4}, rng), normal_vector(12, rng));
  ASSERT_EQ(out.size(), 12);
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(Fphi, SeededAndShapeChecked) {
  std::mt19937_64 rng(15);
  const auto a = LearnedOptimizerParams::init(3, 4, 12, 16, 3);
  const auto b = LearnedOptimizerParams::init(3, 4, 12, 16, 3);
  const Tensor3 m = uniform_tensor({3, 3, 4}, rng);
  const auto z = normal_vector(12, rng);
  EXPECT_EQ(fphi_forward(a, m, z), fphi_forward(b, m, z));
  EXPECT_EQ(a.input_length(), 36U + 12U);
  EXPECT_THROW((void)fphi_forward(a, m, std::vector<double>(11)), Error);
  EXPECT_THROW((void)fphi_forward(a, uniform_tensor({3, 3, 5}, rng), z), Error);
  EXPECT_EQ(default_fphi_hidden(12), 48U);
  EXPECT_EQ(default_fphi_hidden(1000), 512U);
}

TEST(Fphi, UnrolledLossGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(16);
  const auto g = GeneratorParams::init(GeneratorKind::tl, 3, 4, 0, 16);
  auto f = LearnedOptimizerParams::init(3, 4, 12, 10, 17);
  nn::ParamStore store;
  f.bind(store);
  const Dims3 d = g.output_dims();
  for (int point = 0; point < 10; ++point) {
    const Tensor3 truth = uniform_tensor(d, rng);
    const auto mask = random_mask(d, 0.5, 1, static_cast<std::uint64_t>(point));
    const Tensor3 m = apply_mask(truth, mask);
    const auto v = latent_target(truth, 3);
    Eigen::MatrixXd z1(12, 1);
    for (Eigen::Index i = 0; i < 12; ++i) z1(i, 0) = normal_vector(1, rng)[0];
    auto as_col = [](const Tensor3& t) {
      return Eigen::MatrixXd(Eigen::Map<const Eigen::VectorXd>(t.data().data(), static_cast<Eigen::Index>(t.size())));
    };
    auto run = [&](bool grad) {
      nn::Tape t;
      const auto fv = record_fphi_params(t, f, &store);
      const auto gv = record_generator_params(t, g, nullptr);
      auto mv = t.constant(as_col(m));
      auto z = t.constant(z1);
      for (int k = 0; k < 3; ++k) z = record_fphi(t, f, fv, mv, z);
      auto loss = t.weighted_sum({{1.0, t.squared_error(z, v)}, {1.0, t.squared_error(record_generator(t, g, gv, z), as_col(truth))}});
      if (grad) t.backward(loss);
      return t.scalar(loss);
    };
    store.zero_grad();
    run(true);
    std::vector<double> values, grads;
    for (const auto& b : store.blocks()) {
      values.insert(values.end(), b.value.begin(), b.value.end());
      grads.insert(grads.end(), b.grad.begin(), b.grad.end());
    }
    auto push = [&] {
      std::size_t at = 0;
      for (auto& b : store.blocks())
        for (double& x : b.value) x = values[at++];
    };
    const nn::GradCheck gc = nn::finite_diff_check([&] { push(); return run(false); }, values, grads, 1e-5, 300,
                                                   static_cast<std::uint64_t>(point));
    push();
    EXPECT_LT(gc.max_rel_error, 1e-4) << "point " << point;
  }
}

struct TrainedPair {
  GeneratorParams g;
  LearnedOptimizerParams f;
  traffic::WindowSplit split;
};

const TrainedPair& trained_pair() {
  static const TrainedPair pair = [] {
    TrainedPair p;
    p.split = small_windows(4, 200, 0.3, 21);
    p.g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 21);
    PretrainConfig pc;
    pc.max_epoch = 30;
    (void)pretrain_generator(p.g, traffic::truths(p.split.train), pc);
    p.f = LearnedOptimizerParams::init(4, 5, 20, default_fphi_hidden(20), 22);
    FphiTrainConfig fc;
    fc.max_epoch = 30;
    (void)train_fphi(p.g, p.f, p.split.train, fc);
    return p;
  }();
  return pair;
}

TEST(TrainFphi, LeavesGeneratorUntouched) {
  const auto split = small_windows(4, 80, 0.5, 23);
  const auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 23);
  const auto before = g.fingerprint();
  auto f = LearnedOptimizerParams::init(4, 5, 20, 32, 24);
  FphiTrainConfig cfg;
  cfg.max_epoch = 3;
  const TrainReport rep = train_fphi(g, f, split.train, cfg);
  EXPECT_EQ(g.fingerprint(), before);
  EXPECT_EQ(rep.loss.size(), 3U);
  EXPECT_THROW((void)train_fphi(g, f, {}, cfg), Error);
}

TEST(TrainFphi, LatentRegressionHalvesError) {
  const auto split = small_windows(4, 120, 0.5, 25);
  const auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 25);
  auto f = LearnedOptimizerParams::init(4, 5, 20, 64, 26);
  FphiTrainConfig cfg;
  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  cfg.max_epoch = 30;
  const TrainReport rep = train_fphi(g, f, split.train, cfg);
  EXPECT_LE(rep.regularizer.back(), 0.25 * rep.regularizer.front());  // squared norm: 50% in norm
}

TEST(TrainFphi, ReconstructionOnlyImproves) {
  const auto split = small_windows(4, 120, 0.5, 27);
  const auto g = GeneratorParams::init(GeneratorKind::tl, 4, 5, 0, 27);
  auto f = LearnedOptimizerParams::init(4, 5, 20, 64, 28);
  FphiTrainConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  cfg.max_epoch = 15;
  const TrainReport rep = train_fphi(g, f, split.train, cfg);
  EXPECT_LT(rep.recon.back(), rep.recon.front());
}

TEST(TrainFphi, DeeperUnrollIsNoWorse) {
  const auto& p = trained_pair();
  double final_loss[2] = {0.0, 0.0};
  const std::size_t ks[2] = {1, 3};
  for (int i = 0; i < 2; ++i) {
    auto f = LearnedOptimizerParams::init(4, 5, 20, default_fphi_hidden(20), 29);
    FphiTrainConfig cfg;
    cfg.k_steps = ks[i];
    cfg.max_epoch = 30;
    final_loss[i] = train_fphi(p.g, f, p.split.train, cfg).loss.back();
  }
  EXPECT_LE(final_loss[1], final_loss[0]);
}

TEST(TrainFphi, TrainedLatentBeatsRandomOnHeldOutWindows) {
  const auto& p = trained_pair();
  std::mt19937_64 rng(30);
  std::size_t closer = 0;
  for (const auto& w : p.split.test) {
    const auto v = latent_target(w.truth, 4);
    InferOptions opts;
    opts.seed = w.window_start_index;
    const InferResult r = infer(p.g, &p.f, w.measurement, w.mask, opts);
    const auto z = normal_vector(20, rng);
    const Eigen::VectorXd zr = Eigen::Map<const Eigen::VectorXd>(z.data(), 20);
    if ((r.z - v).norm() < (zr - v).norm()) ++closer;
  }
  ASSERT_FALSE(p.split.test.empty());
  EXPECT_GE(static_cast<double>(closer), 0.9 * static_cast<double>(p.split.test.size()));
}

TEST(Infer, DeterministicReadOnlyAndChecked) {
  const auto& p = trained_pair();
  const auto& w = p.split.test.front();
  const auto gf = p.g.fingerprint();
  InferOptions opts;
  opts.seed = 77;
  const InferResult a = infer(p.g, &p.f, w.measurement, w.mask, opts);
  const InferResult b = infer(p.g, &p.f, w.measurement, w.mask, opts);
  EXPECT_TRUE(std::equal(a.forecast.data().begin(), a.forecast.data().end(), b.forecast.data().begin()));
  EXPECT_EQ(a.forecast.dims(), (Dims3{4, 4, 1}));
  EXPECT_GE(a.latency_ms, 0.0);
  EXPECT_EQ(p.g.fingerprint(), gf);

  opts.mode = InferMode::gd;
  const InferResult c = infer(p.g, nullptr, w.measurement, w.mask, opts);
  EXPECT_EQ(c.full.dims(), (Dims3{4, 4, 5}));

  opts.mode = InferMode::learned;
  EXPECT_THROW((void)infer(p.g, nullptr, w.measurement, w.mask, opts), Error);
  const auto observed = ObservationMask::full(w.mask.dims());
  EXPECT_THROW((void)infer(p.g, &p.f, w.measurement, observed, opts), Error);

  opts.restarts = 3;
  const InferResult r3 = infer(p.g, &p.f, w.measurement, w.mask, opts);
  EXPECT_LE(r3.energy, latent_energy(p.g, w.measurement, w.mask, {a.z.data(), static_cast<std::size_t>(a.z.size())}, opts.gamma) + 1e-12);
}

TEST(Checkpoint, GeneratorAndFphiRoundTrip) {
  const auto& p = trained_pair();
  const fs::path gp = temp_file("gen.npk");
  const fs::path fp = temp_file("fphi.npk");
  save_generator(gp, p.g);
  save_fphi(fp, p.f);
  const auto g2 = load_generator(gp);
  const auto f2 = load_fphi(fp);
  EXPECT_EQ(g2.fingerprint(), p.g.fingerprint());
  const auto& w = p.split.test.front();
  InferOptions opts;
  const InferResult a = infer(p.g, &p.f, w.measurement, w.mask, opts);
  const InferResult b = infer(g2, &f2, w.measurement, w.mask, opts);
  EXPECT_TRUE(std::equal(a.full.data().begin(), a.full.data().end(), b.full.data().begin()));

  const auto fc = GeneratorParams::init(GeneratorKind::fc, 3, 4, 2, 5, 2);
  save_generator(gp, fc);
  const auto fc2 = load_generator(gp);
  EXPECT_EQ(fc2.kind, GeneratorKind::fc);
  EXPECT_EQ(fc2.rank, 2U);
  EXPECT_EQ(fc2.fingerprint(), fc.fingerprint());
  fs::remove(gp);
  fs::remove(fp);
}

TEST(Checkpoint, MissingAndCorruptFilesAreReported) {
  try {
    (void)load_generator(temp_file("does_not_exist.npk"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingCheckpoint);
  }
  const fs::path p = temp_file("corrupt.npk");
  save_generator(p, GeneratorParams::init(GeneratorKind::tl, 3, 4, 0, 1));
  fs::resize_file(p, fs::file_size(p) / 2);
  try {
    (void)load_generator(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  }
  // a generator checkpoint is not an f_phi checkpoint
  save_generator(p, GeneratorParams::init(GeneratorKind::tl, 3, 4, 0, 1));
  EXPECT_THROW((void)load_fphi(p), Error);
  fs::remove(p);
}

}  // namespace
}  // namespace tubalcast::gmf
