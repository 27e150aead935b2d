#include "tubalcast/gmf/generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"
#include "tubalcast/talgebra.hpp"

namespace tubalcast::gmf {

namespace {

using nn::Activation;
using nn::Tape;

template <typename G, typename F>
void for_each_block(G& g, F&& f) {
  auto span_of = [](auto* p, auto n) { return std::span(p, static_cast<std::size_t>(n)); };
  f("gen.fc.weight", std::vector<std::size_t>{g.fc.out_features(), g.fc.in_features()},
    span_of(g.fc.weight.data(), g.fc.weight.size()));
  f("gen.fc.bias", std::vector<std::size_t>{g.fc.out_features()}, span_of(g.fc.bias.data(), g.fc.bias.size()));
  if (g.kind == GeneratorKind::tl) {
    const Dims3 w = g.tl.weight.dims();
    const Dims3 b = g.tl.bias.dims();
    f("gen.tl.weight", std::vector<std::size_t>{w.n1, w.n2, w.n3}, g.tl.weight.data());
    f("gen.tl.bias", std::vector<std::size_t>{b.n1, b.n2, b.n3}, g.tl.bias.data());
  } else {
    f("gen.fc_out.weight", std::vector<std::size_t>{g.fc_out.out_features(), g.fc_out.in_features()},
      span_of(g.fc_out.weight.data(), g.fc_out.weight.size()));
    f("gen.fc_out.bias", std::vector<std::size_t>{g.fc_out.out_features()},
      span_of(g.fc_out.bias.data(), g.fc_out.bias.size()));
  }
}

Eigen::MatrixXd column(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_shape(std::size_t n, std::size_t n3, std::size_t l1, std::size_t rank) {
  require(n > 0 && n3 > 0 && l1 > 0 && rank > 0 && rank <= n, ErrorKind::InvalidArgument,
          "generator needs n, n3, l1 > 0 and 0 < rank <= n");
}

}  // namespace

std::string_view to_string(GeneratorKind k) noexcept { return k == GeneratorKind::tl ? "tl" : "fc"; }

GeneratorKind generator_kind_from_string(std::string_view s) {
  if (s == "tl") return GeneratorKind::tl;
  if (s == "fc") return GeneratorKind::fc;
  fail(ErrorKind::InvalidArgument, "unknown generator kind '" + std::string(s) + "' (expected tl or fc)");
}

GeneratorParams GeneratorParams::zeros(GeneratorKind kind, std::size_t n, std::size_t n3, std::size_t l1,
                                       std::size_t rank) {
  if (l1 == 0) l1 = n;
  if (rank == 0) rank = n;
  check_shape(n, n3, l1, rank);
  GeneratorParams g;
  g.kind = kind;
  g.n = n;
  g.n3 = n3;
  g.l1 = l1;
  g.rank = rank;
  g.fc = nn::FcLayer::zeros(rank * n3, l1 * n * n3, Activation::relu);
  if (kind == GeneratorKind::tl)
    g.tl = nn::TensorLayer::zeros(n, l1, n, n3, Activation::sigmoid);
  else
    g.fc_out = nn::FcLayer::zeros(l1 * n * n3, n * n * n3, Activation::sigmoid);
  return g;
}

GeneratorParams GeneratorParams::init(GeneratorKind kind, std::size_t n, std::size_t n3, std::size_t l1,
                                      std::uint64_t seed, std::size_t rank) {
  GeneratorParams g = zeros(kind, n, n3, l1, rank);
  Rng rng = make_rng(seed, "init.generator");
  g.fc = nn::FcLayer::xavier(g.fc.in_features(), g.fc.out_features(), Activation::relu, rng);
  if (kind == GeneratorKind::tl)
    g.tl = nn::TensorLayer::gaussian(n, g.l1, n, n3, Activation::sigmoid, rng);
  else
    g.fc_out = nn::FcLayer::xavier(g.fc_out.in_features(), g.fc_out.out_features(), Activation::sigmoid, rng);
  return g;
}

void GeneratorParams::bind(nn::ParamStore& store) {
  for_each_block(*this, [&](const char* name, std::vector<std::size_t> dims, std::span<double> v) {
    store.add(name, std::move(dims), v);
  });
}

std::uint64_t GeneratorParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for_each_block(*this, [&](const char* name, const std::vector<std::size_t>&, std::span<const double> v) {
    h = fnv1a(name, std::char_traits<char>::length(name), h);
    h = fnv1a(v.data(), v.size_bytes(), h);
  });
  return h;
}

Tensor3 generator_forward(const GeneratorParams& g, std::span<const double> z) {
  require(z.size() == g.latent_length(), ErrorKind::DimMismatch,
          "latent length " + std::to_string(z.size()) + ", generator expects " + std::to_string(g.latent_length()));
  const Eigen::VectorXd h = nn::fc_forward(g.fc, Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size())));
  if (g.kind == GeneratorKind::tl) {
    const Tensor3 a({g.l1, g.n, g.n3}, std::vector<double>(h.data(), h.data() + h.size()));
    return nn::tl_forward(g.tl, a);
  }
  const Eigen::VectorXd y = nn::fc_forward(g.fc_out, h);
  return Tensor3(g.output_dims(), std::vector<double>(y.data(), y.data() + y.size()));
}

GeneratorVars record_generator_params(Tape& t, const GeneratorParams& g, nn::ParamStore* store) {
  std::vector<Tape::Var> vars;
  for_each_block(g, [&](const char* name, const std::vector<std::size_t>&, std::span<const double> v) {
    vars.push_back(store != nullptr ? t.parameter(store->block(name)) : t.constant(column(v)));
  });
  return {vars[0], vars[1], vars[2], vars[3]};
}

Tape::Var record_generator(Tape& t, const GeneratorParams& g, const GeneratorVars& vars, Tape::Var z) {
  const std::size_t hidden = g.l1 * g.n * g.n3;
  auto h = t.activation(t.linear(z, vars.w1, vars.b1, hidden, g.latent_length()), Activation::relu);
  auto pre = g.kind == GeneratorKind::tl
                 ? t.tensor_affine(h, vars.w2, vars.b2, {g.n, g.l1, g.n3}, g.n)
                 : t.linear(h, vars.w2, vars.b2, g.n * g.n * g.n3, hidden);
  return t.activation(pre, Activation::sigmoid);
}

Eigen::VectorXd latent_target(const Tensor3& t, std::size_t rank) {
  const auto v = singular_vector(tsvd(t), rank);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

TrainReport pretrain_generator(GeneratorParams& g, const std::vector<Tensor3>& corpus, const PretrainConfig& cfg) {
  require(!corpus.empty(), ErrorKind::EmptyCorpus, "pretraining corpus is empty");
  require(cfg.batch > 0 && cfg.lr > 0.0 && cfg.gamma0 >= 0.0, ErrorKind::InvalidArgument,
          "pretraining needs batch > 0, lr > 0, gamma0 >= 0");
  const auto start = std::chrono::steady_clock::now();
  const Dims3 d = g.output_dims();
  const auto count = static_cast<Eigen::Index>(corpus.size());
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(d.size()), count);
  Eigen::MatrixXd latents(static_cast<Eigen::Index>(g.latent_length()), count);
  for (Eigen::Index s = 0; s < count; ++s) {
    const Tensor3& t = corpus[static_cast<std::size_t>(s)];
    require(t.dims() == d, ErrorKind::DimMismatch, "corpus tensor " + to_string(t.dims()) + " vs generator " + to_string(d));
    targets.col(s) = column(t.data());
    latents.col(s) = latent_target(t, g.rank);
  }

  nn::ParamStore store;
  g.bind(store);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.max_epoch; ++epoch) {
    Rng rng = make_rng(cfg.seed, "order.pretrain", epoch);
    const double lr = nn::cosine_lr(cfg.lr, cfg.lr_final, epoch, cfg.max_epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double recon_sum = 0.0;
    double reg_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch) {
      const std::size_t b = std::min(cfg.batch, order.size() - first);
      Eigen::MatrixXd z(latents.rows(), static_cast<Eigen::Index>(b));
      Eigen::MatrixXd y(targets.rows(), static_cast<Eigen::Index>(b));
      for (std::size_t c = 0; c < b; ++c) {
        z.col(static_cast<Eigen::Index>(c)) = latents.col(static_cast<Eigen::Index>(order[first + c]));
        y.col(static_cast<Eigen::Index>(c)) = targets.col(static_cast<Eigen::Index>(order[first + c]));
      }
      Tape t;
      const GeneratorVars vars = record_generator_params(t, g, &store);
      auto out = record_generator(t, g, vars, t.constant(std::move(z)));
      auto recon = t.squared_error(out, std::move(y));
      auto reg = t.tnn(out, d);
      const double inv = 1.0 / static_cast<double>(b);
      auto loss = t.weighted_sum({{inv, recon}, {cfg.gamma0 * inv, reg}});
      t.backward(loss);
      adam_step(store, lr);
      store.zero_grad();
      recon_sum += t.scalar(recon);
      reg_sum += t.scalar(reg);
    }
    const double n = static_cast<double>(corpus.size());
    const double total = (recon_sum + cfg.gamma0 * reg_sum) / n;
    require(std::isfinite(total), ErrorKind::NonFinite, "pretraining diverged at epoch " + std::to_string(epoch + 1));
    report.loss.push_back(total);
    report.recon.push_back(recon_sum / n);
    report.regularizer.push_back(reg_sum / n);
    report.final_epoch = epoch + 1;
    if (cfg.tol > 0.0 && epoch > 0) {
      const double prev = report.loss[epoch - 1];
      if (std::abs(prev - total) <= cfg.tol * std::max(prev, 1e-300)) {
        report.converged = true;
        break;
      }
    }
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<nn::NamedArray> generator_arrays(const GeneratorParams& g) {
  std::vector<nn::NamedArray> out;
  out.push_back({"gen.meta", {5},
                 {g.kind == GeneratorKind::tl ? 0.0 : 1.0, static_cast<double>(g.n), static_cast<double>(g.n3),
                  static_cast<double>(g.l1), static_cast<double>(g.rank)}});
  for_each_block(g, [&](const char* name, std::vector<std::size_t> dims, std::span<const double> v) {
    out.push_back({name, std::move(dims), std::vector<double>(v.begin(), v.end())});
  });
  return out;
}

GeneratorParams generator_from_arrays(const std::vector<nn::NamedArray>& arrays) {
  const nn::NamedArray& meta = nn::find_array(arrays, "gen.meta");
  require(meta.values.size() == 5, ErrorKind::FormatError, "gen.meta must hold 5 values");
  for (double v : meta.values)
    require(v >= 0.0 && v == std::floor(v) && v < 1e7, ErrorKind::FormatError, "gen.meta values must be small integers");
  require(meta.values[0] == 0.0 || meta.values[0] == 1.0, ErrorKind::FormatError, "unknown generator kind in checkpoint");
  auto as = [&](int i) { return static_cast<std::size_t>(meta.values[static_cast<std::size_t>(i)]); };
  GeneratorParams g;
  try {
    g = GeneratorParams::zeros(meta.values[0] == 0.0 ? GeneratorKind::tl : GeneratorKind::fc, as(1), as(2), as(3), as(4));
  } catch (const Error& e) {
    fail(ErrorKind::FormatError, std::string("bad generator shape in checkpoint: ") + e.what());
  }
  nn::ParamStore store;
  g.bind(store);
  try {
    nn::restore(store, arrays);
  } catch (const Error& e) {
    fail(ErrorKind::FormatError, e.what());
  }
  for (const auto& b : store.blocks())
    for (double v : b.value) require(std::isfinite(v), ErrorKind::FormatError, "non-finite value in " + b.name);
  return g;
}

void save_generator(const std::filesystem::path& path, const GeneratorParams& g) {
  nn::write_npk(path, generator_arrays(g));
}

GeneratorParams load_generator(const std::filesystem::path& path) {
  return generator_from_arrays(nn::read_npk(path));
}

}  // namespace tubalcast::gmf
