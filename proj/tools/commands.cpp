#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>

#include "cli.hpp"
#include "tubalcast/completion.hpp"
#include "tubalcast/gmf/generator.hpp"
#include "tubalcast/gmf/inference.hpp"
#include "tubalcast/gmf/optimizer.hpp"
#include "tubalcast/mask.hpp"
#include "tubalcast/rng.hpp"
#include "tubalcast/talgebra.hpp"
#include "tubalcast/traffic/benchmark.hpp"
#include "tubalcast/traffic/metrics.hpp"
#include "tubalcast/traffic/windows.hpp"

namespace tubalcast::cli {
namespace {

void check_finite(const gmf::TrainReport& r, const char* what) {
  for (std::size_t e = 0; e < r.loss.size(); ++e)
    if (!std::isfinite(r.loss[e]))
      throw Failure(kNumerical, std::string(what) + " diverged: non-finite loss at epoch " + std::to_string(e + 1));
}

json report_json(const gmf::TrainReport& r) {
  return {{"loss", r.loss},       {"recon", r.recon},         {"regularizer", r.regularizer},
          {"final_epoch", r.final_epoch}, {"converged", r.converged}, {"seconds", r.seconds}};
}

}  // namespace

// ---------------------------------------------------------------- synth

void add_synth(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string kind = "traffic", output;
    std::size_t n = 12, frames = 2000, rank = 3;
    std::uint64_t seed = 0;
    double period = 288.0, noise = 0.01;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "synth", "Write a synthetic traffic sequence or low-tubal-rank tensor");
  sub->add_option("--kind", o->kind, "traffic | lowrank")->check(CLI::IsMember({"traffic", "lowrank"}))->capture_default_str();
  sub->add_option("-o,--output", o->output, "output path (.t3f or .csv)")->required();
  sub->add_option("--n", o->n, "nodes (traffic) or slice size (lowrank)")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--frames", o->frames, "matrices (traffic) or n3 (lowrank)")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--rank", o->rank, "number of temporal/tubal components")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--period", o->period, "daily period in steps (traffic)")->capture_default_str();
  sub->add_option("--noise", o->noise, "multiplicative noise level (traffic)")->capture_default_str();
  sub->add_option("--seed", o->seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      Tensor3 t;
      if (o->kind == "traffic") {
        t = traffic::synthetic_traffic(o->n, o->frames, o->rank, o->seed, o->period, o->noise).data;
      } else {
        // U * S * V^T with orthogonal U, V from the t-SVD of Gaussian tensors and
        // singular tubes 2^-i (1 + 0.5 cos(2 pi k / n3)), i < rank
        Rng rng = make_rng(o->seed, "synth.lowrank");
        std::normal_distribution<double> g;
        Tensor3 a({o->n, o->n, o->frames}), b({o->n, o->n, o->frames});
        for (double& x : a.data()) x = g(rng);
        for (double& x : b.data()) x = g(rng);
        Tensor3 sv({o->n, o->n, o->frames});
        for (std::size_t i = 0; i < std::min(o->rank, o->n); ++i)
          for (std::size_t k = 0; k < o->frames; ++k)
            sv(i, i, k) = std::ldexp(1.0, -static_cast<int>(i)) *
                          (1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(o->frames)));
        t = tproduct(tproduct(tsvd(a).u, sv), ttranspose(tsvd(b).u));
      }
      write_tensor(o->output, t);
      emit({{"command", "synth"}, {"kind", o->kind}, {"shape", to_string(t.dims())}, {"output", o->output}});
      return kOk;
    };
  });
}

// ---------------------------------------------------------------- ingest

void add_ingest(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string input, output, format = "auto", outlier = "zero_max_outlier";
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "ingest", "Parse, validate and normalize a traffic matrix sequence");
  sub->add_option("-i,--input", o->input, "CSV matrix sequence or T3F tensor")->required();
  sub->add_option("-o,--output", o->output, "normalized T3F output; the record goes to <output>.norm")->required();
  sub->add_option("--format", o->format, "auto | csv | t3f")->check(CLI::IsMember({"auto", "csv", "t3f"}))->capture_default_str();
  sub->add_option("--outlier", o->outlier, "zero_max_outlier | none")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      const auto action = traffic::outlier_action_from_string(o->outlier);
      const auto fmt = o->format == "auto" ? traffic::guess_format(o->input)
                       : o->format == "csv" ? traffic::InputFormat::csv_matrix_sequence
                                            : traffic::InputFormat::t3f;
      const traffic::TrafficDataset raw = as_input([&] { return traffic::ingest(o->input, fmt); });
      const traffic::TrafficDataset d = as_input([&] { return traffic::preprocess(raw, action); });
      std::size_t zeroed = 0;
      for (std::size_t i = 0; i < raw.data.size(); ++i)
        if (raw.data.data()[i] > 0.0 && d.data.data()[i] == 0.0 && raw.data.data()[i] != d.norm.min) ++zeroed;
      as_input([&] { write_t3f(o->output, d.data); });
      as_input([&] { traffic::write_normalization(norm_path_for(o->output), d.norm); });
      std::cout << raw.name << ": " << d.n << "×" << d.n << "×" << d.frames() << " traffic matrices, range ["
                << d.norm.min << ", " << d.norm.max << "], " << zeroed << " outliers zeroed\n";
      emit({{"command", "ingest"},
            {"dataset", raw.name},
            {"n", d.n},
            {"frames", d.frames()},
            {"min", d.norm.min},
            {"max", d.norm.max},
            {"outliers_zeroed", zeroed},
            {"output", o->output}});
      return kOk;
    };
  });
}

// ---------------------------------------------------------------- pretrain

void add_pretrain(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string data, output, report, kind = "tl";
    std::size_t th = 10, tp = 1, l1 = 0, rank = 0, max_windows = 0;
    double split = 0.8;
    std::uint64_t seed = 0;
    gmf::PretrainConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "pretrain", "Pre-train the generator on complete training windows");
  sub->add_option("-d,--data", o->data, "normalized dataset (T3F from ingest)")->required();
  sub->add_option("-o,--output", o->output, "generator checkpoint (NPK1)")->required();
  sub->add_option("--report", o->report, "training report JSON (default <output>.report.json)");
  sub->add_option("--kind", o->kind, "tl | fc")->check(CLI::IsMember({"tl", "fc"}))->capture_default_str();
  sub->add_option("--th", o->th, "historical slices per window")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--tp", o->tp, "forecast slices per window")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--split", o->split, "training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--l1", o->l1, "hidden tubal width, 0 = n")->capture_default_str();
  sub->add_option("--rank", o->rank, "latent tubes, 0 = n")->capture_default_str();
  sub->add_option("--gamma0", o->cfg.gamma0, "TNN weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--epochs", o->cfg.max_epoch, "training epochs")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--lr", o->cfg.lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--lr-final", o->cfg.lr_final, "cosine decay target, 0 = constant")->capture_default_str();
  sub->add_option("--batch", o->cfg.batch, "minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--tol", o->cfg.tol, "relative loss change that stops training")->capture_default_str();
  sub->add_option("--max-windows", o->max_windows, "use at most this many training windows, 0 = all")->capture_default_str();
  sub->add_option("--seed", o->seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      const traffic::TrafficDataset d = load_dataset(o->data);
      std::vector<Tensor3> corpus = traffic::truths(traffic::make_windows(d, o->th, o->tp, o->split, 0.0, o->seed).train);
      if (o->max_windows > 0 && corpus.size() > o->max_windows) corpus.resize(o->max_windows);
      gmf::GeneratorParams g = gmf::GeneratorParams::init(gmf::generator_kind_from_string(o->kind), d.n, o->th + o->tp,
                                                          o->l1, derive_seed(o->seed, "generator.init"), o->rank);
      gmf::PretrainConfig cfg = o->cfg;
      cfg.seed = derive_seed(o->seed, "pretrain");
      const gmf::TrainReport r = gmf::pretrain_generator(g, corpus, cfg);
      check_finite(r, "pretraining");
      as_artifact([&] { gmf::save_generator(o->output, g); });
      json rep = report_json(r);
      rep["kind"] = o->kind;
      rep["windows"] = corpus.size();
      rep["gamma0"] = cfg.gamma0;
      rep["fingerprint"] = hex64(g.fingerprint());
      write_json(o->report.empty() ? o->output + ".report.json" : o->report, rep);
      emit({{"command", "pretrain"},
            {"kind", o->kind},
            {"windows", corpus.size()},
            {"epochs", r.final_epoch},
            {"initial_loss", r.loss.front()},
            {"final_loss", r.loss.back()},
            {"final_tnn", r.regularizer.back()},
            {"seconds", r.seconds},
            {"fingerprint", hex64(g.fingerprint())},
            {"checkpoint", o->output}});
      return kOk;
    };
  });
}

// ---------------------------------------------------------------- train-optimizer

void add_train_optimizer(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string data, generator, output, report, generator_hash;
    std::size_t tp = 1, hidden = 0, max_windows = 0;
    double split = 0.8;
    std::vector<double> rates{0.1, 0.5, 0.9};
    std::uint64_t seed = 0;
    gmf::FphiTrainConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "train-optimizer", "Train the learned latent optimizer against a frozen generator");
  sub->add_option("-d,--data", o->data, "normalized dataset (T3F from ingest)")->required();
  sub->add_option("-g,--generator", o->generator, "pre-trained generator checkpoint")->required();
  sub->add_option("-o,--output", o->output, "optimizer checkpoint (NPK1)")->required();
  sub->add_option("--report", o->report, "training report JSON (default <output>.report.json)");
  sub->add_option("--generator-hash", o->generator_hash, "expected generator fingerprint (hex)");
  sub->add_option("--tp", o->tp, "forecast slices per window")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--split", o->split, "training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--missing-rates", o->rates, "training masks cycle through these rates")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--hidden", o->hidden, "hidden width, 0 = min(4 * latent, 512)")->capture_default_str();
  sub->add_option("--k", o->cfg.k_steps, "unrolled steps K")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--alpha", o->cfg.alpha, "latent error weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--beta", o->cfg.beta, "reconstruction weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--epochs", o->cfg.max_epoch, "training epochs")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--lr", o->cfg.lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--lr-final", o->cfg.lr_final, "cosine decay target, 0 = constant")->capture_default_str();
  sub->add_option("--batch", o->cfg.batch, "minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--tol", o->cfg.tol, "relative change stopping threshold")->capture_default_str();
  sub->add_option("--max-windows", o->max_windows, "0 = all training windows")->capture_default_str();
  sub->add_option("--seed", o->seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      const gmf::GeneratorParams g = as_artifact([&] { return gmf::load_generator(o->generator); });
      const std::uint64_t fp = g.fingerprint();
      if (!o->generator_hash.empty() && o->generator_hash != hex64(fp))
        throw Failure(kArtifact, "generator fingerprint " + hex64(fp) + " does not match " + o->generator_hash);
      const traffic::TrafficDataset d = load_dataset(o->data);
      if (d.n != g.n) throw Failure(kUsage, "dataset has " + std::to_string(d.n) + " nodes, generator " + std::to_string(g.n));
      if (o->tp >= g.n3) throw Failure(kUsage, "--tp must be smaller than the generator window");
      std::vector<WindowSample> corpus =
          traffic::make_windows(d, g.n3 - o->tp, o->tp, o->split, o->rates.front(), o->seed).train;
      if (o->max_windows > 0 && corpus.size() > o->max_windows) corpus.resize(o->max_windows);
      traffic::remask(corpus, o->rates, o->tp, derive_seed(o->seed, "remask"));

      const std::size_t hidden = o->hidden > 0 ? o->hidden : gmf::default_fphi_hidden(g.latent_length());
      gmf::LearnedOptimizerParams f =
          gmf::LearnedOptimizerParams::init(g.n, g.n3, g.latent_length(), hidden, derive_seed(o->seed, "fphi.init"));
      gmf::FphiTrainConfig cfg = o->cfg;
      cfg.seed = derive_seed(o->seed, "fphi.train");
      const gmf::TrainReport r = gmf::train_fphi(g, f, corpus, cfg);
      check_finite(r, "optimizer training");
      // the checkpoint on disk must still be the generator we trained against
      const std::uint64_t after = as_artifact([&] { return gmf::load_generator(o->generator).fingerprint(); });
      if (after != fp) throw Failure(kArtifact, "generator checkpoint changed during training");
      as_artifact([&] { gmf::save_fphi(o->output, f); });
      json rep = report_json(r);
      rep["k"] = cfg.k_steps;
      rep["alpha"] = cfg.alpha;
      rep["beta"] = cfg.beta;
      rep["hidden"] = hidden;
      rep["windows"] = corpus.size();
      rep["generator_fingerprint"] = hex64(fp);
      write_json(o->report.empty() ? o->output + ".report.json" : o->report, rep);
      emit({{"command", "train-optimizer"},
            {"k", cfg.k_steps},
            {"windows", corpus.size()},
            {"epochs", r.final_epoch},
            {"initial_loss", r.loss.front()},
            {"final_loss", r.loss.back()},
            {"final_latent_error", r.regularizer.back()},
            {"seconds", r.seconds},
            {"generator_fingerprint", hex64(fp)},
            {"checkpoint", o->output}});
      return kOk;
    };
  });
}

}  // namespace tubalcast::cli
