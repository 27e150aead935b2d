// Python bindings. Tensors cross the boundary as float64 arrays of shape
// (n1, n2, n3) in C order, masks as bool arrays of the same shape.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "tubalcast/completion.hpp"
#include "tubalcast/error.hpp"
#include "tubalcast/gmf/generator.hpp"
#include "tubalcast/gmf/inference.hpp"
#include "tubalcast/gmf/optimizer.hpp"
#include "tubalcast/mask.hpp"
#include "tubalcast/talgebra.hpp"
#include "tubalcast/traffic/dataset.hpp"
#include "tubalcast/traffic/metrics.hpp"

namespace py = pybind11;
using namespace tubalcast;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

Tensor3 to_tensor(const Array& a) {
  if (a.ndim() != 3) throw py::value_error("expected a 3-d array, got " + std::to_string(a.ndim()) + "-d");
  const Dims3 d{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                static_cast<std::size_t>(a.shape(2))};
  return Tensor3(d, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Tensor3& t) {
  const Dims3 d = t.dims();
  py::array_t<double> out({d.n1, d.n2, d.n3});
  std::memcpy(out.mutable_data(), t.data().data(), t.size() * sizeof(double));
  return out;
}

ObservationMask to_mask(const BoolArray& a) {
  if (a.ndim() != 3) throw py::value_error("mask must be a 3-d bool array");
  ObservationMask m({static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                     static_cast<std::size_t>(a.shape(2))});
  for (py::ssize_t i = 0; i < a.size(); ++i) m.set_flat(static_cast<std::size_t>(i), a.data()[i]);
  return m;
}

py::array_t<bool> to_bool_array(const ObservationMask& m) {
  const Dims3 d = m.dims();
  py::array_t<bool> out({d.n1, d.n2, d.n3});
  for (std::size_t i = 0; i < d.size(); ++i) out.mutable_data()[i] = m.observed_flat(i);
  return out;
}

}  // namespace

PYBIND11_MODULE(_tubalcast, m) {
  m.doc() = "Tensor algebra, TNN completion and generative traffic forecasting";

  py::register_exception<Error>(m, "TubalcastError", PyExc_ValueError);

  // t-algebra
  m.def("tproduct", [](const Array& a, const Array& b) { return to_array(tproduct(to_tensor(a), to_tensor(b))); });
  m.def("ttranspose", [](const Array& a) { return to_array(ttranspose(to_tensor(a))); });
  m.def("identity", [](std::size_t n, std::size_t n3) { return to_array(Tensor3::identity(n, n3)); });
  m.def("tsvd", [](const Array& a) {
    const TSvdFactors f = tsvd(to_tensor(a));
    return py::make_tuple(to_array(f.u), to_array(f.s), to_array(f.v));
  }, "Returns (U, S, V) with A = U * S * V^T.");
  m.def("tnn", [](const Array& a) { return tnn(to_tensor(a)); });
  m.def("tsvt", [](const Array& a, double tau) { return to_array(tsvt(to_tensor(a), tau)); });
  m.def("energy_cdf", [](const Array& a) { return energy_cdf(to_tensor(a)); });
  m.def("tubal_rank", [](const Array& a, double tol) { return tubal_rank(tsvd(to_tensor(a)), tol); }, py::arg("a"),
        py::arg("tol") = 1e-8);

  // masks and completion
  m.def("random_mask", [](std::size_t n1, std::size_t n2, std::size_t n3, double missing_rate,
                          std::size_t protected_slices, std::uint64_t seed) {
    return to_bool_array(random_mask({n1, n2, n3}, missing_rate, protected_slices, seed));
  }, py::arg("n1"), py::arg("n2"), py::arg("n3"), py::arg("missing_rate"), py::arg("protected_slices") = 0,
        py::arg("seed") = 0);
  m.def("complete", [](const Array& measurement, const BoolArray& mask, std::optional<double> tau,
                       std::size_t max_iters, double tol) {
    const Tensor3 x = to_tensor(measurement);
    const ObservationMask msk = to_mask(mask);
    CompletionConfig cfg = CompletionConfig::defaults_for(x.dims());
    if (tau) cfg.tau = *tau;
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    CompletionResult r;
    {
      py::gil_scoped_release release;
      r = tnn_admm_complete(x, msk, cfg);
    }
    py::dict out;
    out["completed"] = to_array(r.completed);
    out["iterations"] = r.iterations;
    out["converged"] = r.converged;
    out["objective"] = r.objective;
    return out;
  }, py::arg("measurement"), py::arg("mask"), py::arg("tau") = py::none(), py::arg("max_iters") = 500,
        py::arg("tol") = 1e-5);

  // traffic helpers
  m.def("synthetic_traffic", [](std::size_t n, std::size_t frames, std::size_t rank, std::uint64_t seed, double period,
                                double noise) {
    return to_array(traffic::synthetic_traffic(n, frames, rank, seed, period, noise).data);
  }, py::arg("n"), py::arg("frames"), py::arg("rank"), py::arg("seed") = 0, py::arg("period") = 288.0,
        py::arg("noise") = 0.01);
  m.def("mae", [](const Array& p, const Array& t) { return traffic::mae(to_tensor(p), to_tensor(t)); });
  m.def("nrmse", [](const Array& p, const Array& t) { return traffic::nrmse(to_tensor(p), to_tensor(t)); });

  // generator and learned optimizer checkpoints
  py::class_<gmf::GeneratorParams>(m, "Generator")
      .def_static("load", [](const std::string& path) { return gmf::load_generator(path); })
      .def_static("init", [](const std::string& kind, std::size_t n, std::size_t n3, std::size_t l1, std::uint64_t seed,
                             std::size_t rank) {
        return gmf::GeneratorParams::init(gmf::generator_kind_from_string(kind), n, n3, l1, seed, rank);
      }, py::arg("kind"), py::arg("n"), py::arg("n3"), py::arg("l1") = 0, py::arg("seed") = 0, py::arg("rank") = 0)
      .def("save", [](const gmf::GeneratorParams& g, const std::string& path) { gmf::save_generator(path, g); })
      .def_property_readonly("kind", [](const gmf::GeneratorParams& g) { return std::string(gmf::to_string(g.kind)); })
      .def_readonly("n", &gmf::GeneratorParams::n)
      .def_readonly("n3", &gmf::GeneratorParams::n3)
      .def_property_readonly("latent_length", &gmf::GeneratorParams::latent_length)
      .def("fingerprint", &gmf::GeneratorParams::fingerprint)
      .def("__call__", [](const gmf::GeneratorParams& g, const std::vector<double>& z) {
        return to_array(gmf::generator_forward(g, z));
      });

  py::class_<gmf::LearnedOptimizerParams>(m, "LearnedOptimizer")
      .def_static("load", [](const std::string& path) { return gmf::load_fphi(path); })
      .def_static("init", [](const gmf::GeneratorParams& g, std::size_t hidden, std::uint64_t seed) {
        return gmf::LearnedOptimizerParams::init(g.n, g.n3, g.latent_length(),
                                                 hidden > 0 ? hidden : gmf::default_fphi_hidden(g.latent_length()), seed);
      }, py::arg("generator"), py::arg("hidden") = 0, py::arg("seed") = 0)
      .def("save", [](const gmf::LearnedOptimizerParams& f, const std::string& path) { gmf::save_fphi(path, f); })
      .def_readonly("hidden", &gmf::LearnedOptimizerParams::hidden);

  m.def("infer", [](const gmf::GeneratorParams& g, const gmf::LearnedOptimizerParams* f, const Array& measurement,
                    const BoolArray& mask, const std::string& mode, std::size_t k, std::size_t iters, double rho,
                    double gamma, std::size_t tp, std::size_t restarts, std::uint64_t seed) {
    gmf::InferOptions opts;
    opts.mode = gmf::infer_mode_from_string(mode);
    opts.k_steps = k;
    opts.gd_iters = iters;
    opts.rho = rho;
    opts.gamma = gamma;
    opts.tp = tp;
    opts.restarts = restarts;
    opts.seed = seed;
    const Tensor3 x = to_tensor(measurement);
    const ObservationMask msk = to_mask(mask);
    gmf::InferResult r;
    {
      py::gil_scoped_release release;
      r = gmf::infer(g, f, x, msk, opts);
    }
    py::dict out;
    out["forecast"] = to_array(r.forecast);
    out["full"] = to_array(r.full);
    out["z"] = std::vector<double>(r.z.data(), r.z.data() + r.z.size());
    out["energy"] = r.energy;
    out["latency_ms"] = r.latency_ms;
    return out;
  }, py::arg("generator"), py::arg("optimizer"), py::arg("measurement"), py::arg("mask"), py::arg("mode") = "learned",
        py::arg("k") = 3, py::arg("iters") = 100, py::arg("rho") = 0.01, py::arg("gamma") = 0.01, py::arg("tp") = 1,
        py::arg("restarts") = 1, py::arg("seed") = 0);
}
