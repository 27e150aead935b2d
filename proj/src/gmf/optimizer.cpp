#include "tubalcast/gmf/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"

namespace tubalcast::gmf {

namespace {

using nn::Activation;
using nn::Tape;

Eigen::Map<const Eigen::VectorXd> vec(const Tensor3& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.size())};
}

Eigen::MatrixXd standard_normal(Eigen::Index rows, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) z(i, 0) = g(rng);
  return z;
}

}  // namespace

std::size_t default_fphi_hidden(std::size_t latent) noexcept { return std::min<std::size_t>(4 * latent, 512); }

LearnedOptimizerParams LearnedOptimizerParams::zeros(std::size_t n, std::size_t n3, std::size_t latent,
                                                     std::size_t hidden) {
  require(n > 0 && n3 > 0 && latent > 0 && hidden > 0, ErrorKind::InvalidArgument,
          "learned optimizer dims must be positive");
  LearnedOptimizerParams f;
  f.n = n;
  f.n3 = n3;
  f.latent = latent;
  f.hidden = hidden;
  f.fc1 = nn::FcLayer::zeros(f.input_length(), hidden, Activation::relu);
  f.fc2 = nn::FcLayer::zeros(hidden, hidden, Activation::relu);
  f.fc3 = nn::FcLayer::zeros(hidden, latent, Activation::identity);
  return f;
}

LearnedOptimizerParams LearnedOptimizerParams::init(std::size_t n, std::size_t n3, std::size_t latent,
                                                    std::size_t hidden, std::uint64_t seed) {
  LearnedOptimizerParams f = zeros(n, n3, latent, hidden);
  Rng rng = make_rng(seed, "init.fphi");
  f.fc1 = nn::FcLayer::xavier(f.input_length(), hidden, Activation::relu, rng);
  f.fc2 = nn::FcLayer::xavier(hidden, hidden, Activation::relu, rng);
  f.fc3 = nn::FcLayer::xavier(hidden, latent, Activation::identity, rng);
  return f;
}

void LearnedOptimizerParams::bind(nn::ParamStore& store) {
  store.bind("fphi.fc1", fc1);
  store.bind("fphi.fc2", fc2);
  store.bind("fphi.fc3", fc3);
}

Eigen::VectorXd fphi_forward(const LearnedOptimizerParams& f, const Tensor3& m, std::span<const double> z) {
  require(m.size() == f.n * f.n * f.n3 && z.size() == f.latent, ErrorKind::DimMismatch,
          "learned optimizer expects a " + to_string(Dims3{f.n, f.n, f.n3}) + " measurement and a length-" +
              std::to_string(f.latent) + " latent");
  Eigen::VectorXd in(static_cast<Eigen::Index>(f.input_length()));
  in << vec(m), Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  return nn::fc_forward(f.fc3, nn::fc_forward(f.fc2, nn::fc_forward(f.fc1, in)));
}

FphiVars record_fphi_params(Tape& t, const LearnedOptimizerParams& f, nn::ParamStore* store) {
  auto var = [&](const char* name, auto& m) {
    return store != nullptr ? t.parameter(store->block(name))
                            : t.constant(Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()));
  };
  return {var("fphi.fc1.weight", f.fc1.weight), var("fphi.fc1.bias", f.fc1.bias),
          var("fphi.fc2.weight", f.fc2.weight), var("fphi.fc2.bias", f.fc2.bias),
          var("fphi.fc3.weight", f.fc3.weight), var("fphi.fc3.bias", f.fc3.bias)};
}

Tape::Var record_fphi(Tape& t, const LearnedOptimizerParams& f, const FphiVars& v, Tape::Var m, Tape::Var z) {
  auto in = t.concat_rows(m, z);
  auto h1 = t.activation(t.linear(in, v.w1, v.b1, f.hidden, f.input_length()), Activation::relu);
  auto h2 = t.activation(t.linear(h1, v.w2, v.b2, f.hidden, f.hidden), Activation::relu);
  return t.linear(h2, v.w3, v.b3, f.latent, f.hidden);
}

TrainReport train_fphi(const GeneratorParams& g, LearnedOptimizerParams& f, const std::vector<WindowSample>& corpus,
                       const FphiTrainConfig& cfg) {
  require(!corpus.empty(), ErrorKind::EmptyCorpus, "learned-optimizer corpus is empty");
  require(cfg.k_steps >= 1 && cfg.batch > 0 && cfg.lr > 0.0, ErrorKind::InvalidArgument,
          "training needs k_steps >= 1, batch > 0, lr > 0");
  require(f.n == g.n && f.n3 == g.n3 && f.latent == g.latent_length(), ErrorKind::DimMismatch,
          "learned optimizer shape does not match the generator");
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t frozen = g.fingerprint();
  const Dims3 d = g.output_dims();

  const auto count = static_cast<Eigen::Index>(corpus.size());
  Eigen::MatrixXd meas(static_cast<Eigen::Index>(d.size()), count);
  Eigen::MatrixXd truth(static_cast<Eigen::Index>(d.size()), count);
  Eigen::MatrixXd latents(static_cast<Eigen::Index>(g.latent_length()), count);
  for (Eigen::Index s = 0; s < count; ++s) {
    const WindowSample& w = corpus[static_cast<std::size_t>(s)];
    require(w.truth.dims() == d && w.measurement.dims() == d, ErrorKind::DimMismatch,
            "window " + to_string(w.truth.dims()) + " vs generator " + to_string(d));
    meas.col(s) = vec(w.measurement);
    truth.col(s) = vec(w.truth);
    latents.col(s) = latent_target(w.truth, g.rank);
  }

  nn::ParamStore store;
  f.bind(store);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.max_epoch; ++epoch) {
    Rng rng = make_rng(cfg.seed, "order.fphi", epoch);
    std::shuffle(order.begin(), order.end(), rng);
    Rng zrng = make_rng(cfg.seed, "z1.fphi", epoch);
    const double lr = nn::cosine_lr(cfg.lr, cfg.lr_final, epoch, cfg.max_epoch);
    double recon_sum = 0.0;
    double lat_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch) {
      const std::size_t b = std::min(cfg.batch, order.size() - first);
      const auto bc = static_cast<Eigen::Index>(b);
      Eigen::MatrixXd mb(meas.rows(), bc), tb(truth.rows(), bc), vb(latents.rows(), bc), z1(latents.rows(), bc);
      for (Eigen::Index c = 0; c < bc; ++c) {
        const auto src = static_cast<Eigen::Index>(order[first + static_cast<std::size_t>(c)]);
        mb.col(c) = meas.col(src);
        tb.col(c) = truth.col(src);
        vb.col(c) = latents.col(src);
        z1.col(c) = standard_normal(latents.rows(), zrng);
      }
      Tape t;
      const FphiVars fv = record_fphi_params(t, f, &store);
      const GeneratorVars gv = record_generator_params(t, g, nullptr);
      auto m = t.constant(std::move(mb));
      auto z = t.constant(std::move(z1));
      for (std::size_t step = 0; step < cfg.k_steps; ++step) z = record_fphi(t, f, fv, m, z);
      auto lat = t.squared_error(z, std::move(vb));
      auto recon = t.squared_error(record_generator(t, g, gv, z), std::move(tb));
      const double inv = 1.0 / static_cast<double>(b);
      auto loss = t.weighted_sum({{cfg.alpha * inv, lat}, {cfg.beta * inv, recon}});
      t.backward(loss);
      adam_step(store, lr);
      store.zero_grad();
      lat_sum += t.scalar(lat);
      recon_sum += t.scalar(recon);
    }
    const double n = static_cast<double>(corpus.size());
    const double total = (cfg.alpha * lat_sum + cfg.beta * recon_sum) / n;
    require(std::isfinite(total), ErrorKind::NonFinite, "learned-optimizer training diverged at epoch " + std::to_string(epoch + 1));
    report.loss.push_back(total);
    report.recon.push_back(recon_sum / n);
    report.regularizer.push_back(lat_sum / n);
    report.final_epoch = epoch + 1;
    if (cfg.tol > 0.0 && epoch > 0) {
      const double prev = report.loss[epoch - 1];
      if (std::abs(prev - total) <= cfg.tol * std::max(prev, 1e-300)) {
        report.converged = true;
        break;
      }
    }
  }
  require(g.fingerprint() == frozen, ErrorKind::IntegrityError, "generator parameters changed while training f_phi");
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void save_fphi(const std::filesystem::path& path, const LearnedOptimizerParams& f) {
  std::vector<nn::NamedArray> arrays{{"fphi.meta", {4},
                                      {static_cast<double>(f.n), static_cast<double>(f.n3),
                                       static_cast<double>(f.latent), static_cast<double>(f.hidden)}}};
  auto add = [&](const std::string& name, const nn::FcLayer& l) {
    arrays.push_back({name + ".weight", {l.out_features(), l.in_features()},
                      std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size())});
    arrays.push_back({name + ".bias", {l.out_features()}, std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())});
  };
  add("fphi.fc1", f.fc1);
  add("fphi.fc2", f.fc2);
  add("fphi.fc3", f.fc3);
  nn::write_npk(path, arrays);
}

LearnedOptimizerParams load_fphi(const std::filesystem::path& path) {
  const auto arrays = nn::read_npk(path);
  const nn::NamedArray& meta = nn::find_array(arrays, "fphi.meta");
  require(meta.values.size() == 4, ErrorKind::FormatError, "fphi.meta must hold 4 values");
  for (double v : meta.values)
    require(v >= 1.0 && v == std::floor(v) && v < 1e7, ErrorKind::FormatError, "fphi.meta values must be positive integers");
  LearnedOptimizerParams f = LearnedOptimizerParams::zeros(
      static_cast<std::size_t>(meta.values[0]), static_cast<std::size_t>(meta.values[1]),
      static_cast<std::size_t>(meta.values[2]), static_cast<std::size_t>(meta.values[3]));
  nn::ParamStore store;
  f.bind(store);
  try {
    nn::restore(store, arrays);
  } catch (const Error& e) {
    fail(ErrorKind::FormatError, e.what());
  }
  for (const auto& b : store.blocks())
    for (double v : b.value) require(std::isfinite(v), ErrorKind::FormatError, "non-finite value in " + b.name);
  return f;
}

}  // namespace tubalcast::gmf
