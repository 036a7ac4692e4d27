#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gelk/error.hpp"
#include "gelk/experiment.hpp"
#include "gelk/irg.hpp"
#include "gelk/model_io.hpp"
#include "gelk/moments.hpp"
#include "gelk/restricted.hpp"
#include "gelk/spectral.hpp"
#include "gelk/stochastic.hpp"
#include "gelk/survival.hpp"

namespace py = pybind11;
using namespace gelk;

namespace {

py::dict snapshot_dict(const Snapshot& s) {
  py::dict d;
  d["t"] = s.t;
  d["n_particles"] = s.n_particles;
  d["first"] = s.first;
  d["sol_q"] = s.sol_q;
  d["sol_z"] = s.sol_z;
  d["g_largest"] = s.g_largest;
  d["g_threshold"] = s.g_threshold;
  d["largest_pi0"] = s.largest_pi0;
  d["histogram"] = s.histogram;
  return d;
}

py::dict checkpoint_dict(const ComponentCheckpoint& c) {
  py::dict d;
  d["t"] = c.t;
  d["c1"] = c.c1;
  d["c1_over_n"] = c.c1_over_n;
  d["pi_c1"] = c.pi_c1;
  d["meso_sum"] = c.meso_sum;
  d["n_components"] = c.n_components;
  d["histogram"] = c.histogram;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gelk, m) {
  m.doc() = "Bilinear coagulation: gelation time, gel data, moments, simulation and random graphs.";
  m.attr("__version__") = GELK_VERSION;

  static py::exception<Error> base(m, "GelkError");
  static py::exception<Error> config(m, "ConfigError", base.ptr());
  static py::exception<Error> numeric(m, "NumericError", base.ptr());
  static py::exception<Error> budget(m, "BudgetError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.error_class()) {
        case ErrorClass::config:
          py::set_error(config, e.what());
          return;
        case ErrorClass::numeric:
          py::set_error(numeric, e.what());
          return;
        case ErrorClass::budget:
          py::set_error(budget, e.what());
          return;
      }
    }
  });

  py::class_<TypeVector>(m, "TypeVector")
      .def(py::init([](std::int64_t pi0, Vector plus, Vector par) { return TypeVector{pi0, plus, par}; }),
           py::arg("pi0"), py::arg("plus"), py::arg("par") = Vector(0))
      .def_readwrite("pi0", &TypeVector::pi0)
      .def_readwrite("plus", &TypeVector::plus)
      .def_readwrite("par", &TypeVector::par)
      .def("phi", &TypeVector::phi)
      .def("__repr__", [](const TypeVector& x) { return "TypeVector(pi0=" + std::to_string(x.pi0) + ")"; });

  py::class_<BilinearSystem>(m, "BilinearSystem")
      .def(py::init<Matrix, Matrix, std::vector<std::string>>(), py::arg("a_plus"), py::arg("a_par"),
           py::arg("names") = std::vector<std::string>{})
      .def_property_readonly("n", &BilinearSystem::n)
      .def_property_readonly("m", &BilinearSystem::m)
      .def_property_readonly("a_plus", &BilinearSystem::a_plus)
      .def_property_readonly("a_par", &BilinearSystem::a_par)
      .def("scaled", &BilinearSystem::scaled);

  py::class_<AtomicMeasure>(m, "AtomicMeasure")
      .def(py::init([](int n, int mm, const std::vector<TypeVector>& xs, const std::vector<double>& ws) {
             if (xs.size() != ws.size()) throw InvalidArgument("atoms and weights differ in length");
             std::vector<Atom> atoms;
             for (std::size_t k = 0; k < xs.size(); ++k) atoms.push_back({xs[k], ws[k]});
             return AtomicMeasure(n, mm, atoms);
           }),
           py::arg("n"), py::arg("m"), py::arg("atoms"), py::arg("weights"))
      .def("__len__", &AtomicMeasure::size)
      .def("total_mass", &AtomicMeasure::total_mass)
      .def("first_moments", &AtomicMeasure::first_moments);

  py::class_<Model>(m, "Model")
      .def(py::init<BilinearSystem, AtomicMeasure>(), py::arg("system"), py::arg("measure"))
      .def_readonly("system", &Model::system)
      .def_readonly("measure", &Model::measure);

  m.def("load_model", &resolve_model, py::arg("spec"), "builtin:<name> or a path to a model JSON file");
  m.def("kbar", [](const BilinearSystem& s, const TypeVector& x, const TypeVector& y) { return kbar(s, x, y); });
  m.def("merge", &merge);

  m.def("gelation_time", [](const Model& md) { return gelation_time(md.system, md.measure); });
  m.def("spectrum", [](const Model& md) {
    const SpectralResult r = analyze_spectrum(md.system, md.measure);
    py::dict d;
    d["t_g"] = r.t_g;
    d["radius"] = r.radius;
    d["psi"] = r.psi;
    d["lambda_matrix"] = r.lambda_matrix;
    return d;
  });
  m.def("survival_coefficients", [](const Model& md, double t) { return solve_c(md.system, md.measure, t).c; });
  m.def("gel_data", [](const Model& md, double t) { return gel_data(md.system, md.measure, t).g; });
  m.def("critical_slope", [](const Model& md) { return critical_slope(md.system, md.measure).g_prime; });
  m.def("size_bias", [](const Model& md) {
    const SizeBiasReport r = size_bias_check(md.system, md.measure);
    return py::make_tuple(r.lhs, r.rhs, r.strict);
  });
  m.def("explosion_time", [](const Model& md) { return explosion_time(md.system, initial_moments(md.measure)); });
  m.def("sol_moments", [](const Model& md, double t) {
    const PhasedMoments p = sol_moments(md.system, md.measure, t);
    py::dict d;
    d["t"] = t;
    d["phase"] = phase_name(p.phase);
    d["q"] = p.state.q;
    d["z"] = p.state.z;
    d["first"] = p.state.first;
    d["energy"] = p.state.energy();
    return d;
  });

  m.def(
      "truncated_flory",
      [](const Model& md, double xi, const std::vector<double>& checkpoints) {
        const TruncatedTrajectory tr = integrate_truncated(md.system, md.measure, xi, checkpoints);
        py::list states;
        for (const TruncatedState& s : tr.states) {
          py::dict d;
          d["t"] = s.t;
          d["densities"] = s.densities;
          d["gel"] = s.gel;
          states.append(d);
        }
        std::vector<std::vector<int>> types;
        for (const CompositionType& c : tr.types) types.push_back(c.counts);
        return py::make_tuple(types, states);
      },
      py::arg("model"), py::arg("xi"), py::arg("checkpoints"));

  m.def(
      "simulate",
      [](const Model& md, double scale, const std::vector<double>& checkpoints, std::uint64_t seed, double xi) {
        ParticleSystem ps = ParticleSystem::init_poisson(md.system, md.measure, scale, seed);
        py::list out;
        {
          py::gil_scoped_release release;
          const auto snaps = ps.run(checkpoints, xi > 0 ? xi : default_xi(scale));
          py::gil_scoped_acquire acquire;
          for (const Snapshot& s : snaps) out.append(snapshot_dict(s));
        }
        return out;
      },
      py::arg("model"), py::arg("n_scale"), py::arg("checkpoints"), py::arg("seed"), py::arg("xi") = 0.0);

  m.def(
      "graph_trajectory",
      [](const Model& md, double scale, const std::vector<double>& checkpoints, std::uint64_t seed, double xi) {
        Rng rng(derive_seed(seed, 0));
        const std::vector<TypeVector> vertices = sample_poisson_types(md.measure, scale, rng);
        double horizon = 0.0;
        for (double t : checkpoints) horizon = std::max(horizon, t);
        const GraphRealization g = sample_graph(md.system, vertices, scale, horizon, derive_seed(seed, 1));
        py::list out;
        for (const ComponentCheckpoint& c : trajectory(g, checkpoints, xi > 0 ? xi : default_xi(scale)))
          out.append(checkpoint_dict(c));
        return out;
      },
      py::arg("model"), py::arg("n_scale"), py::arg("checkpoints"), py::arg("seed"), py::arg("xi") = 0.0);

  m.def(
      "coupling_test",
      [](const Model& md, double scale, double t, std::size_t replicas, std::uint64_t seed, double alpha,
         double particle_rate_factor) {
        const BilinearSystem particle_sys = md.system.scaled(particle_rate_factor);
        CouplingReport r;
        {
          py::gil_scoped_release release;
          r = coupling_test(md.system, particle_sys, md.measure, scale, t, replicas, seed, alpha);
        }
        py::dict d;
        d["p_phi"] = r.p_phi;
        d["p_clusters"] = r.p_clusters;
        d["ks_phi"] = r.ks_phi;
        d["ks_clusters"] = r.ks_clusters;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("model"), py::arg("n_scale"), py::arg("t"), py::arg("replicas"), py::arg("seed"),
      py::arg("alpha") = 1e-3, py::arg("particle_rate_factor") = 1.0);

  m.def(
      "_run_config",
      [](const std::string& doc, const std::string& base_dir) {
        const ExperimentConfig config = parse_config(nlohmann::json::parse(doc), base_dir);
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = run_experiment(config);
        }
        py::dict artifacts;
        for (const Artifact& a : out.artifacts) {
          artifacts[py::str(a.name)] = a.binary ? py::object(py::bytes(a.content)) : py::object(py::str(a.content));
        }
        return py::make_tuple(artifacts, config_hash(config));
      },
      py::arg("doc"), py::arg("base_dir") = ".");
}
