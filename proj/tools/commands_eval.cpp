#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
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

traffic::GmfModel load_model(const std::string& gen, const std::string& opt, const char* method) {
  if (gen.empty() || opt.empty())
    throw Failure(kArtifact, std::string(method) + " needs a generator and an optimizer checkpoint");
  traffic::GmfModel m;
  m.generator = as_artifact([&] { return gmf::load_generator(gen); });
  m.optimizer = as_artifact([&] { return gmf::load_fphi(opt); });
  if (m.optimizer.n != m.generator.n || m.optimizer.n3 != m.generator.n3 ||
      m.optimizer.latent != m.generator.latent_length())
    throw Failure(kArtifact, std::string(method) + ": optimizer checkpoint does not match the generator");
  return m;
}

}  // namespace

// ---------------------------------------------------------------- forecast

void add_forecast(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string generator, optimizer, window, mask, data, output, mode = "learned";
    std::optional<double> missing_rate;
    std::size_t index = 0, tp = 1;
    double split = 0.8;
    std::uint64_t seed = 0;
    gmf::InferOptions infer;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "forecast", "Forecast the last tp slices of a partially observed window");
  sub->add_option("-g,--generator", o->generator, "generator checkpoint")->required();
  sub->add_option("--optimizer", o->optimizer, "learned optimizer checkpoint (learned mode)");
  auto* win = sub->add_option("-w,--window", o->window, "n x n x n3 window (T3F)");
  auto* dat = sub->add_option("-d,--data", o->data, "normalized dataset; forecasts test window --index");
  win->excludes(dat);
  sub->add_option("--mask", o->mask, "observation mask (M3F) for --window")->needs(win);
  sub->add_option("--index", o->index, "test window index for --data")->capture_default_str();
  sub->add_option("--split", o->split, "training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--missing-rate", o->missing_rate, "draw a random mask at this rate")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--tp", o->tp, "forecast slices")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--mode", o->mode, "learned | gd")->check(CLI::IsMember({"learned", "gd"}))->capture_default_str();
  sub->add_option("--k", o->infer.k_steps, "learned steps")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--iters", o->infer.gd_iters, "gradient steps (gd mode)")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--rho", o->infer.rho, "gradient step size (gd mode)")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--gamma", o->infer.gamma, "spectral l1 weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--restarts", o->infer.restarts, "random starts, best energy wins")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("-o,--output", o->output, "forecast slices (.t3f or .csv); CSV on stdout when absent");
  sub->add_option("--seed", o->seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      if (o->window.empty() && o->data.empty()) throw Failure(kUsage, "need --window or --data");
      const gmf::GeneratorParams g = as_artifact([&] { return gmf::load_generator(o->generator); });
      const gmf::InferMode mode = gmf::infer_mode_from_string(o->mode);
      std::optional<gmf::LearnedOptimizerParams> f;
      if (mode == gmf::InferMode::learned) {
        if (o->optimizer.empty()) throw Failure(kArtifact, "learned mode needs --optimizer");
        f = as_artifact([&] { return gmf::load_fphi(o->optimizer); });
      }
      if (o->tp >= g.n3) throw Failure(kUsage, "--tp must be smaller than the generator window");

      WindowSample s;
      bool have_truth = false;
      if (!o->data.empty()) {
        const traffic::TrafficDataset d = load_dataset(o->data);
        auto split = traffic::make_windows(d, g.n3 - o->tp, o->tp, o->split, o->missing_rate.value_or(0.0), o->seed);
        if (o->index >= split.test.size())
          throw Failure(kUsage, "--index " + std::to_string(o->index) + " but only " + std::to_string(split.test.size()) +
                                    " test windows");
        s = std::move(split.test[o->index]);
        have_truth = true;
      } else {
        Tensor3 t = as_input([&] { return read_t3f(o->window); });
        ObservationMask m = !o->mask.empty() ? as_input([&] { return read_m3f(o->mask); })
                                             : random_mask(t.dims(), o->missing_rate.value_or(0.0), o->tp,
                                                           derive_seed(o->seed, "mask"));
        if (m.dims() != t.dims()) throw Failure(kUsage, "mask " + to_string(m.dims()) + " vs window " + to_string(t.dims()));
        s = make_sample(std::move(t), std::move(m));
      }

      gmf::InferOptions opts = o->infer;
      opts.mode = mode;
      opts.tp = o->tp;
      opts.seed = derive_seed(o->seed, "infer");
      const gmf::InferResult r = gmf::infer(g, f ? &*f : nullptr, s.measurement, s.mask, opts);

      if (o->output.empty()) write_csv(std::cout, r.forecast);
      else write_tensor(o->output, r.forecast);
      json out{{"command", "forecast"},
               {"mode", o->mode},
               {"shape", to_string(r.forecast.dims())},
               {"latency_ms", r.latency_ms},
               {"energy", r.energy}};
      if (have_truth) {
        const Tensor3 truth = s.truth.frontal_range(g.n3 - o->tp, o->tp);
        out["mae"] = traffic::mae(r.forecast, truth);
        out["window_start"] = s.window_start_index;
      }
      emit(out);
      return kOk;
    };
  });
}

// ---------------------------------------------------------------- benchmark

void add_benchmark(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string data, tl_gen, tl_opt, fc_gen, fc_opt, jsonl, table;
    std::vector<std::string> methods{"gmf_tl", "gmf_fc", "tnn_admm_then_hold", "naive_last_value"};
    std::vector<double> rates{0.1, 0.3, 0.5, 0.7, 0.9};
    std::optional<std::size_t> th;
    bool no_table = false;
    traffic::BenchmarkConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "benchmark", "Evaluate methods over missing rates on the test split");
  sub->add_option("-d,--data", o->data, "normalized dataset (T3F from ingest)")->required();
  sub->add_option("--methods", o->methods, "gmf_tl, gmf_fc, tnn_admm_then_hold, naive_last_value")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--missing-rates", o->rates, "comma-separated missing rates")->delimiter(',')->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--tl-generator", o->tl_gen, "gmf_tl generator checkpoint");
  sub->add_option("--tl-optimizer", o->tl_opt, "gmf_tl optimizer checkpoint");
  sub->add_option("--fc-generator", o->fc_gen, "gmf_fc generator checkpoint");
  sub->add_option("--fc-optimizer", o->fc_opt, "gmf_fc optimizer checkpoint");
  sub->add_option("--th", o->th, "historical slices (default: generator window - tp, else 10)");
  sub->add_option("--tp", o->cfg.tp, "forecast slices per window")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--split", o->cfg.split, "training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--seed", o->cfg.seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->add_flag("--raw-metrics", o->cfg.raw_metrics, "metrics on the denormalized scale");
  sub->add_option("--k", o->cfg.infer.k_steps, "learned steps")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--restarts", o->cfg.infer.restarts, "random starts per window")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--gamma", o->cfg.infer.gamma, "spectral l1 weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--tau", o->cfg.tau, "TNN weight of the completion baseline");
  sub->add_option("--admm-iters", o->cfg.admm_iters, "iteration cap of the completion baseline")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--max-windows", o->cfg.max_windows, "0 = every test window")->capture_default_str();
  sub->add_option("--threads", o->cfg.threads, "0 = TUBALCAST_THREADS or all cores")->capture_default_str();
  sub->add_option("--jsonl", o->jsonl, "JSON-lines records (default: stdout)");
  sub->add_option("--table", o->table, "text table file (default: stdout)");
  sub->add_flag("--no-table", o->no_table, "skip the text table");
  sub->callback([o, &selected] {
    selected = [o] {
      std::vector<traffic::Method> methods;
      for (const auto& m : o->methods) methods.push_back(traffic::method_from_string(m));
      std::optional<traffic::GmfModel> tl, fc;
      std::optional<std::size_t> n3;
      for (auto m : methods) {
        if (m == traffic::Method::gmf_tl && !tl) tl = load_model(o->tl_gen, o->tl_opt, "gmf_tl");
        if (m == traffic::Method::gmf_fc && !fc) fc = load_model(o->fc_gen, o->fc_opt, "gmf_fc");
      }
      for (const auto* model : {tl ? &*tl : nullptr, fc ? &*fc : nullptr}) {
        if (model == nullptr) continue;
        if (n3 && *n3 != model->generator.n3) throw Failure(kArtifact, "gmf_tl and gmf_fc windows differ");
        n3 = model->generator.n3;
      }
      traffic::BenchmarkConfig cfg = o->cfg;
      if (n3 && cfg.tp >= *n3) throw Failure(kUsage, "--tp must be smaller than the generator window");
      cfg.th = o->th.value_or(n3 ? *n3 - cfg.tp : 10);
      if (n3 && cfg.th + cfg.tp != *n3)
        throw Failure(kUsage, "--th + --tp = " + std::to_string(cfg.th + cfg.tp) + " but checkpoints expect " +
                                  std::to_string(*n3));
      cfg.gmf_tl = tl ? &*tl : nullptr;
      cfg.gmf_fc = fc ? &*fc : nullptr;

      const traffic::TrafficDataset d = load_dataset(o->data);
      const auto reports = traffic::benchmark(d, methods, o->rates, cfg);

      if (!o->no_table) {
        const std::string table = traffic::format_table(reports);
        if (o->table.empty()) std::cout << table << std::flush;
        else std::ofstream(o->table) << table;
      }
      std::ofstream file;
      if (!o->jsonl.empty()) {
        file.open(o->jsonl);
        if (!file) throw Failure(kUsage, "cannot write '" + o->jsonl + "'");
      }
      for (const auto& r : reports) {
        const json j{{"method", r.method},   {"dataset", r.dataset},       {"missing_rate", r.missing_rate},
                     {"mae", r.mae},         {"nrmse", r.nrmse},           {"latency_ms", r.latency_ms},
                     {"windows", r.windows}, {"raw_metrics", cfg.raw_metrics}};
        if (file.is_open()) file << j.dump() << "\n";
        else emit(j);
      }
      return kOk;
    };
  });
}

// ---------------------------------------------------------------- complete

void add_complete(CLI::App& app, Runner& selected) {
  struct Opts {
    std::string input, mask, truth, output;
    std::optional<double> missing_rate, tau;
    std::uint64_t seed = 0;
    CompletionConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "complete", "TNN-regularized completion of a masked tensor");
  sub->add_option("-i,--input", o->input, "tensor (T3F); unobserved entries are ignored")->required();
  auto* mask = sub->add_option("--mask", o->mask, "observation mask (M3F); default: fully observed");
  sub->add_option("--missing-rate", o->missing_rate, "draw a random mask instead")->check(CLI::Range(0.0, 1.0))->excludes(mask);
  sub->add_option("--truth", o->truth, "ground truth (T3F) for the recovery error");
  sub->add_option("--tau", o->tau, "TNN weight (default 1/sqrt(max(n1, n2) n3))")->check(CLI::PositiveNumber);
  sub->add_option("--iters", o->cfg.max_iters, "ADMM iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--tol", o->cfg.tol, "relative change stopping threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--rho", o->cfg.rho_admm, "ADMM penalty in units of the reference penalty")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("-o,--output", o->output, "completed tensor (.t3f or .csv)");
  sub->add_option("--seed", o->seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      const Tensor3 x = as_input([&] { return read_t3f(o->input); });
      ObservationMask mask = !o->mask.empty()   ? as_input([&] { return read_m3f(o->mask); })
                             : o->missing_rate ? random_mask(x.dims(), *o->missing_rate, 0, derive_seed(o->seed, "mask"))
                                               : ObservationMask::full(x.dims());
      if (mask.dims() != x.dims()) throw Failure(kUsage, "mask " + to_string(mask.dims()) + " vs input " + to_string(x.dims()));
      CompletionConfig cfg = CompletionConfig::defaults_for(x.dims());
      cfg.max_iters = o->cfg.max_iters;
      cfg.tol = o->cfg.tol;
      cfg.rho_admm = o->cfg.rho_admm;
      if (o->tau) cfg.tau = *o->tau;
      const CompletionResult r = tnn_admm_complete(apply_mask(x, mask), mask, cfg);
      if (!o->output.empty()) write_tensor(o->output, r.completed);
      json out{{"command", "complete"},
               {"shape", to_string(x.dims())},
               {"observed", mask.omega_size()},
               {"tau", cfg.tau},
               {"iterations", r.iterations},
               {"converged", r.converged},
               {"objective", r.objective.empty() ? 0.0 : r.objective.back()}};
      if (!o->truth.empty()) {
        const Tensor3 truth = as_input([&] { return read_t3f(o->truth); });
        out["relative_error"] = relative_error(r.completed, truth);
      }
      emit(out);
      return kOk;
    };
  });
}

// ---------------------------------------------------------------- analyze-rank

void add_analyze_rank(CLI::App& app, Runner& selected) {
  struct Opts {
    std::vector<std::string> inputs;
    std::string generator, output;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = subcommand(app, "analyze-rank", "Energy CDF of the singular tubes, as CSV");
  sub->add_option("inputs", o->inputs, "tensors (T3F)");
  auto* gen = sub->add_option("-g,--generator", o->generator, "generator checkpoint for --from-generator");
  sub->add_option("--from-generator", o->samples, "N generator samples with z ~ N(0, 1)")->needs(gen);
  sub->add_option("-o,--output", o->output, "CSV file (default: stdout)");
  sub->add_option("--seed", o->seed, "master seed; every random stream derives from it")->capture_default_str();
  sub->callback([o, &selected] {
    selected = [o] {
      if (o->inputs.empty() && o->samples == 0) throw Failure(kUsage, "need input tensors or --from-generator N");
      std::vector<std::pair<std::string, std::vector<double>>> rows;
      for (const auto& path : o->inputs) {
        const Tensor3 t = as_input([&] { return read_t3f(path); });
        rows.emplace_back(path, energy_cdf(t));
      }
      if (o->samples > 0) {
        const gmf::GeneratorParams g = as_artifact([&] { return gmf::load_generator(o->generator); });
        for (std::size_t s = 0; s < o->samples; ++s) {
          Rng rng = make_rng(o->seed, "analyze.z", s);
          std::normal_distribution<double> normal;
          std::vector<double> z(g.latent_length());
          for (double& v : z) v = normal(rng);
          rows.emplace_back("sample" + std::to_string(s), energy_cdf(gmf::generator_forward(g, z)));
        }
      }
      std::size_t width = 0;
      for (const auto& r : rows) width = std::max(width, r.second.size());
      std::ofstream file;
      if (!o->output.empty()) {
        file.open(o->output);
        if (!file) throw Failure(kUsage, "cannot write '" + o->output + "'");
      }
      std::ostream& os = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
      os.precision(10);
      os << "source";
      for (std::size_t k = 1; k <= width; ++k) os << ",tube" << k;
      os << "\n";
      for (const auto& [name, cdf] : rows) {
        os << name;
        for (double c : cdf) os << "," << c;
        os << "\n";
      }
      return kOk;
    };
  });
}

}  // namespace tubalcast::cli
