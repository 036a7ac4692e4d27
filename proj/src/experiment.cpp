#include "gelk/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gelk/error.hpp"
#include "gelk/irg.hpp"
#include "gelk/moments.hpp"
#include "gelk/parallel.hpp"
#include "gelk/restricted.hpp"
#include "gelk/spectral.hpp"
#include "gelk/stats.hpp"
#include "gelk/stochastic.hpp"
#include "gelk/survival.hpp"

namespace gelk {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what) {
  throw SchemaError(pointer + ": " + what);
}

// Reads kind parameters, filling defaults and rejecting unknown keys.
class ParamReader {
 public:
  ParamReader(const json& obj, std::string pointer) : obj_(obj), pointer_(std::move(pointer)) {
    if (!obj_.is_null() && !obj_.is_object()) schema_error(pointer_, "expected an object");
  }

  double number(const std::string& key, std::optional<double> fallback, bool positive = false) {
    const json* v = get(key);
    double x;
    if (!v) {
      if (!fallback) schema_error(at(key), "required number is missing");
      x = *fallback;
    } else {
      if (!v->is_number()) schema_error(at(key), "expected a number");
      x = v->get<double>();
    }
    if (!std::isfinite(x)) schema_error(at(key), "must be finite");
    if (positive && !(x > 0.0)) schema_error(at(key), "must be positive");
    if (!positive && x < 0.0) schema_error(at(key), "must be nonnegative");
    out_[key] = x;
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min) {
    const json* v = get(key);
    std::int64_t x = fallback;
    if (v) {
      if (!v->is_number_integer()) schema_error(at(key), "expected an integer");
      x = v->get<std::int64_t>();
    }
    if (x < min) schema_error(at(key), "must be at least " + std::to_string(min));
    out_[key] = x;
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    bool x = fallback;
    if (v) {
      if (!v->is_boolean()) schema_error(at(key), "expected a boolean");
      x = v->get<bool>();
    }
    out_[key] = x;
    return x;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback, bool positive = false) {
    const json* v = get(key);
    std::vector<double> x = std::move(fallback);
    if (v) {
      if (!v->is_array() || v->empty()) schema_error(at(key), "expected a nonempty array of numbers");
      x.clear();
      for (std::size_t k = 0; k < v->size(); ++k) {
        const json& e = (*v)[k];
        if (!e.is_number()) schema_error(at(key) + "/" + std::to_string(k), "expected a number");
        const double d = e.get<double>();
        if (!std::isfinite(d) || d < 0.0 || (positive && d == 0.0)) {
          schema_error(at(key) + "/" + std::to_string(k), positive ? "must be positive" : "must be nonnegative");
        }
        x.push_back(d);
      }
    }
    out_[key] = x;
    return x;
  }

  json finish() {
    if (obj_.is_object()) {
      for (auto it = obj_.begin(); it != obj_.end(); ++it) {
        if (!used_.count(it.key())) schema_error(at(it.key()), "unknown parameter");
      }
    }
    return out_.is_null() ? json::object() : out_;
  }

 private:
  const json* get(const std::string& key) {
    used_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return pointer_ + "/" + key; }

  const json& obj_;
  std::string pointer_;
  std::set<std::string> used_;
  json out_ = json::object();
};

std::vector<double> scaled(std::initializer_list<double> values, double factor) {
  std::vector<double> out;
  for (double v : values) out.push_back(v * factor);
  return out;
}

std::vector<double> convergence_grid(double t_g) {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) out.push_back(0.3 * k * t_g);
  return out;
}

json fill_params(const std::string& kind, const json& params, const Model& model) {
  ParamReader r(params, "/params");
  const double t_g = gelation_time(model.system, model.measure);
  if (kind == "gel-curve") {
    r.number("t_min", 0.0);
    r.number("t_max", 3.0 * t_g, true);
    r.integer("steps", 100, 1);
  } else if (kind == "moments") {
    r.numbers("t_grid", scaled({0.0, 0.25, 0.5, 0.75, 0.9, 1.0, 1.25, 1.5, 2.0, 3.0}, t_g));
  } else if (kind == "simulate") {
    const double n = r.number("n_scale", std::nullopt, true);
    r.numbers("checkpoints", scaled({0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, t_g));
    r.number("xi", default_xi(n), true);
    r.boolean("dump_snapshot", false);
    r.integer("resync_interval", std::int64_t{1} << 20, 1);
  } else if (kind == "graph") {
    const double n = r.number("n_scale", std::nullopt, true);
    r.numbers("checkpoints", scaled({0.5, 1.0, 1.5, 2.0}, t_g));
    r.number("xi", default_xi(n), true);
    r.integer("max_vertices", 30000, 1);
  } else if (kind == "restricted") {
    r.number("xi", std::nullopt, true);
    r.number("t_end", std::nullopt, true);
    r.integer("steps", 10, 1);
    r.boolean("dump_types", true);
    r.integer("max_types", 100000, 1);
  } else if (kind == "convergence") {
    r.numbers("n_scales", {1e3, 1e4, 1e5}, true);
    r.integer("replicas", 50, 1);
    r.numbers("checkpoints", convergence_grid(t_g));
  } else if (kind == "coupling") {
    r.number("n_scale", 2000.0, true);
    r.number("t", 1.5 * t_g);
    r.integer("replicas", 200, 1);
    r.number("alpha", 1e-3, true);
    r.boolean("control", true);
  } else if (kind == "duality") {
    r.number("n_scale", 1e4, true);
    r.number("t_minus", std::nullopt, true);
    r.number("t_plus", std::nullopt, true);
    r.integer("max_vertices", 30000, 1);
  }
  return r.finish();
}

Model load_model_spec(const json& spec, const std::string& base_dir) {
  if (spec.is_object()) return model_from_json(spec, "/model");
  if (!spec.is_string()) schema_error("/model", "expected a model object or a string");
  const std::string s = spec.get<std::string>();
  if (s.rfind("builtin:", 0) == 0) {
    try {
      return builtin_model(s.substr(8));
    } catch (const InvalidArgument& e) {
      schema_error("/model", e.what());
    }
  }
  std::filesystem::path p(s);
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  if (!std::filesystem::exists(p)) schema_error("/model", "model file '" + p.string() + "' does not exist");
  return load_model_file(p.string());
}

std::string join_header(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k) out += ',';
    out += cols[k];
  }
  return out + '\n';
}

class CsvRow {
 public:
  CsvRow& num(double x) {
    sep();
    s_ += format_double(x);
    return *this;
  }
  CsvRow& integer(long long x) {
    sep();
    s_ += std::to_string(x);
    return *this;
  }
  CsvRow& text(const std::string& x) {
    sep();
    s_ += x;
    return *this;
  }
  CsvRow& vec(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) num(v[i]);
    return *this;
  }
  std::string line() const { return s_ + '\n'; }

 private:
  void sep() {
    if (!first_) s_ += ',';
    first_ = false;
  }
  std::string s_;
  bool first_ = true;
};

std::vector<std::string> indexed(const std::string& stem, int count, int start = 1) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(stem + std::to_string(start + i));
  return out;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

std::uint64_t seed_of(const ExperimentConfig& c) { return c.seed.value_or(0); }

Vector deterministic_gel(const Model& model, double t, double t_g) {
  if (t <= t_g) return Vector::Zero(1 + model.system.dim());
  return gel_data(model.system, model.measure, t).g;
}

RunOutput run_tg(const ExperimentConfig&, const Model& model) {
  const SpectralResult s = analyze_spectrum(model.system, model.measure);
  const PowerIterationResult p = spectral_radius(s.lambda_matrix);
  const HypothesisReport h = check_hypotheses(model.system, model.measure);
  json doc;
  doc["t_g"] = s.t_g;
  doc["radius"] = s.radius;
  doc["psi"] = vector_json(s.psi);
  doc["lambda_matrix"] = matrix_json(s.lambda_matrix);
  doc["power_iteration"] = {{"radius", p.radius}, {"iterations", p.iterations}, {"residual", p.residual}};
  doc["mean_free_time"] = mean_free_time(model.system, model.measure);
  json hyp;
  hyp["A1"] = h.a1_reflection_symmetric;
  hyp["A2"] = h.a2_third_moments_finite;
  hyp["A3"] = h.a3_independent;
  hyp["A4"] = h.a4_irreducible;
  hyp["A5"] = h.a5_unit_pi0;
  hyp["gram_min_eigenvalue"] = h.a3_min_eigenvalue;
  hyp["components"] = h.a4_components;
  hyp["point_mass"] = h.point_mass;
  hyp["messages"] = h.messages;
  doc["hypotheses"] = hyp;
  return {{{"tg.json", doc.dump(2) + "\n"}}, 0.0};
}

RunOutput run_gel_curve(const ExperimentConfig& c, const Model& model) {
  const int n = model.system.n();
  const double t_min = c.params["t_min"], t_max = c.params["t_max"];
  const int steps = c.params["steps"];
  if (t_max < t_min) schema_error("/params/t_max", "must not be below t_min");
  std::vector<std::string> cols{"t"};
  append(cols, indexed("c_", n));
  cols.push_back("M");
  append(cols, indexed("E_", n));
  std::string csv = join_header(cols);
  for (int k = 0; k < steps; ++k) {
    const double t = steps == 1 ? t_max : t_min + (t_max - t_min) * k / (steps - 1);
    const SurvivalCoefficients sc = solve_c(model.system, model.measure, t);
    const GelData g = gel_from_coefficients(model.measure, sc.c);
    csv += CsvRow().num(t).vec(sc.c).vec(g.g.head(1 + n)).line();
  }
  return {{{"gel_curve.csv", csv}}, 0.0};
}

RunOutput run_moments(const ExperimentConfig& c, const Model& model) {
  const int n = model.system.n();
  std::vector<std::string> cols{"t"};
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) cols.push_back("Q_" + std::to_string(i) + "_" + std::to_string(j));
  }
  append(cols, indexed("z_", n + 1, 0));
  cols.push_back("E");
  cols.push_back("phase");
  std::string csv = join_header(cols);
  for (double t : c.params["t_grid"].get<std::vector<double>>()) {
    const PhasedMoments pm = sol_moments(model.system, model.measure, t);
    CsvRow row;
    row.num(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) row.num(pm.state.q(i, j));
    }
    row.vec(pm.state.z).num(pm.state.energy()).text(phase_name(pm.phase));
    csv += row.line();
  }
  return {{{"moments.csv", csv}}, 0.0};
}

std::string little_endian_u64(std::uint64_t v) {
  std::string out(8, '\0');
  for (int k = 0; k < 8; ++k) out[static_cast<std::size_t>(k)] = static_cast<char>((v >> (8 * k)) & 0xFF);
  return out;
}

std::string little_endian_u32(std::uint32_t v) {
  std::string out(4, '\0');
  for (int k = 0; k < 4; ++k) out[static_cast<std::size_t>(k)] = static_cast<char>((v >> (8 * k)) & 0xFF);
  return out;
}

std::string little_endian_f64(double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  return little_endian_u64(bits);
}

std::string binary_snapshot(const ParticleSystem& ps, int n, int m) {
  std::string out = "GELK1";
  out += little_endian_u32(static_cast<std::uint32_t>(n));
  out += little_endian_u32(static_cast<std::uint32_t>(m));
  out += little_endian_f64(ps.t());
  out += little_endian_f64(ps.scale());
  out += little_endian_u64(ps.count());
  for (std::size_t p = 0; p < ps.count(); ++p) {
    const TypeVector x = ps.particle(p);
    out += little_endian_u64(static_cast<std::uint64_t>(x.pi0));
    for (int i = 0; i < n; ++i) out += little_endian_f64(x.plus[i]);
    for (int i = 0; i < m; ++i) out += little_endian_f64(x.par[i]);
  }
  return out;
}

RunOutput run_simulate(const ExperimentConfig& c, const Model& model) {
  const int n = model.system.n(), m = model.system.m();
  const double scale = c.params["n_scale"], xi = c.params["xi"];
  SimulatorOptions opts;
  opts.resync_interval = c.params["resync_interval"].get<std::uint64_t>();
  ParticleSystem ps = ParticleSystem::init_poisson(model.system, model.measure, scale, seed_of(c), opts);
  const std::vector<Snapshot> snaps = ps.run(c.params["checkpoints"].get<std::vector<double>>(), xi);

  std::vector<std::string> cols{"t", "M_N"};
  append(cols, indexed("E_N_", n));
  append(cols, indexed("P_N_", m));
  cols.push_back("Mthr_N");
  append(cols, indexed("Ethr_N_", n));
  append(cols, indexed("Pthr_N_", m));
  cols.push_back("n_particles");
  std::string csv = join_header(cols);
  for (const Snapshot& s : snaps) {
    csv += CsvRow().num(s.t).vec(s.g_largest).vec(s.g_threshold).integer(static_cast<long long>(s.n_particles)).line();
  }
  RunOutput out{{{"simulate.csv", csv}}, 0.0};
  if (c.params["dump_snapshot"].get<bool>()) out.artifacts.push_back({"simulate.snapshot.bin", binary_snapshot(ps, n, m), true});
  return out;
}

RunOutput run_graph(const ExperimentConfig& c, const Model& model) {
  const int n = model.system.n(), m = model.system.m();
  const double scale = c.params["n_scale"], xi = c.params["xi"];
  const std::vector<double> checkpoints = c.params["checkpoints"].get<std::vector<double>>();
  IrgOptions opts;
  opts.max_vertices = c.params["max_vertices"].get<std::size_t>();
  Rng vrng(derive_seed(seed_of(c), 0));
  const auto vertices = sample_poisson_types(model.measure, scale, vrng);
  double horizon = 0.0;
  for (double t : checkpoints) horizon = std::max(horizon, t);
  const GraphRealization g = sample_graph(model.system, vertices, scale, horizon, derive_seed(seed_of(c), 1), opts);
  std::vector<std::string> cols{"t", "C1_over_N", "pi0_C1"};
  append(cols, indexed("pi", n + m, 1));
  for (std::size_t k = 3; k < cols.size(); ++k) cols[k] += "_C1";
  cols.push_back("meso_sum");
  cols.push_back("n_components");
  std::string csv = join_header(cols);
  for (const ComponentCheckpoint& cp : trajectory(g, checkpoints, xi)) {
    csv += CsvRow().num(cp.t).num(cp.c1_over_n).vec(cp.pi_c1).num(cp.meso_sum).integer(static_cast<long long>(cp.n_components)).line();
  }
  return {{{"graph.csv", csv}}, 0.0};
}

RunOutput run_restricted(const ExperimentConfig& c, const Model& model) {
  const double xi = c.params["xi"], t_end = c.params["t_end"];
  const int steps = c.params["steps"];
  TruncatedOptions opts;
  opts.max_types = c.params["max_types"].get<std::size_t>();
  std::vector<double> checkpoints;
  for (int k = 1; k <= steps; ++k) checkpoints.push_back(t_end * k / steps);
  const TruncatedFlory space(model.system, model.measure, xi, opts);
  const std::vector<TruncatedState> states = space.integrate(checkpoints);
  const int n = model.system.n(), m = model.system.m();

  std::vector<std::string> cols{"t", "phi_sol", "M_xi"};
  append(cols, indexed("E_xi_", n));
  append(cols, indexed("P_xi_", m));
  std::string csv = join_header(cols);
  for (const TruncatedState& s : states) csv += CsvRow().num(s.t).num(s.phi_sol(space)).vec(s.gel).line();
  RunOutput out{{{"restricted.csv", csv}}, 0.0};

  if (c.params["dump_types"].get<bool>()) {
    std::vector<std::string> tcols{"t", "type"};
    append(tcols, indexed("count_", static_cast<int>(model.measure.size())));
    tcols.push_back("density");
    std::string types = join_header(tcols);
    for (const TruncatedState& s : states) {
      for (std::size_t k = 0; k < space.size(); ++k) {
        CsvRow row;
        row.num(s.t).integer(static_cast<long long>(k));
        for (int count : space.types()[k].counts) row.integer(count);
        types += row.num(s.densities[k]).line();
      }
    }
    out.artifacts.push_back({"restricted_types.csv", types});
  }
  return out;
}

RunOutput run_convergence(const ExperimentConfig& c, const Model& model) {
  const auto scales = c.params["n_scales"].get<std::vector<double>>();
  const auto replicas = c.params["replicas"].get<std::size_t>();
  const auto checkpoints = c.params["checkpoints"].get<std::vector<double>>();
  const double t_g = gelation_time(model.system, model.measure);
  std::vector<Vector> exact;
  for (double t : checkpoints) exact.push_back(deterministic_gel(model, t, t_g));

  std::string summary = join_header({"N", "replicas", "median_sup_error", "mean_sup_error", "max_sup_error"});
  std::string detail = join_header({"N", "replica", "seed", "sup_error"});
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const double scale = scales[si];
    const std::uint64_t level_seed = derive_seed(seed_of(c), si);
    std::vector<double> errors(replicas);
    parallel_for(
        replicas,
        [&](std::size_t k) {
          ParticleSystem ps = ParticleSystem::init_poisson(model.system, model.measure, scale, derive_seed(level_seed, k));
          const auto snaps = ps.run(checkpoints, default_xi(scale));
          double worst = 0.0;
          for (std::size_t j = 0; j < snaps.size(); ++j) {
            worst = std::max(worst, (snaps[j].g_largest - exact[j]).cwiseAbs().maxCoeff());
          }
          errors[k] = worst;
        },
        c.threads);
    for (std::size_t k = 0; k < replicas; ++k) {
      detail += CsvRow().num(scale).integer(static_cast<long long>(k)).text(std::to_string(derive_seed(level_seed, k))).num(errors[k]).line();
    }
    summary += CsvRow()
                   .num(scale)
                   .integer(static_cast<long long>(replicas))
                   .num(median(errors))
                   .num(mean(errors))
                   .num(*std::max_element(errors.begin(), errors.end()))
                   .line();
  }
  return {{{"convergence.csv", summary}, {"convergence_replicas.csv", detail}}, 0.0};
}

json coupling_json(const CouplingReport& r) {
  return {{"n_scale", r.scale},   {"t", r.t},
          {"replicas", r.replicas}, {"alpha", r.alpha},
          {"ks_phi", r.ks_phi},   {"p_phi", r.p_phi},
          {"ks_clusters", r.ks_clusters}, {"p_clusters", r.p_clusters},
          {"pass", r.pass}};
}

RunOutput run_coupling(const ExperimentConfig& c, const Model& model) {
  const double scale = c.params["n_scale"], t = c.params["t"], alpha = c.params["alpha"];
  const auto replicas = c.params["replicas"].get<std::size_t>();
  const CouplingReport r =
      coupling_test(model.system, model.system, model.measure, scale, t, replicas, seed_of(c), alpha, c.threads);
  json doc = coupling_json(r);
  if (c.params["control"].get<bool>()) {
    const CouplingReport ctl = coupling_test(model.system, model.system.scaled(2.0), model.measure, scale, t, replicas,
                                             derive_seed(seed_of(c), 0xC0), alpha, c.threads);
    doc["control"] = coupling_json(ctl);
    doc["control"]["description"] = "coagulant rates doubled";
  }
  return {{{"coupling.json", doc.dump(2) + "\n"}}, 0.0};
}

RunOutput run_duality(const ExperimentConfig& c, const Model& model) {
  IrgOptions opts;
  opts.max_vertices = c.params["max_vertices"].get<std::size_t>();
  const DualityReport r = duality_experiment(model.system, model.measure, c.params["n_scale"], c.params["t_minus"],
                                             c.params["t_plus"], seed_of(c), opts);
  json doc = {{"n_scale", r.scale},
              {"t_minus", r.t_minus},
              {"t_plus", r.t_plus},
              {"t_g", r.t_g},
              {"dual_t_g", r.dual_t_g},
              {"gel_mass_t_minus", r.gel_mass},
              {"surviving_fraction", r.surviving_fraction},
              {"expected_surviving_fraction", 1.0 - r.gel_mass},
              {"dual_c1_over_n", r.dual_c1_over_n},
              {"fresh_c1_over_n", r.fresh_c1_over_n},
              {"ks_component_sizes", r.ks_sizes},
              {"p_component_sizes", r.p_sizes}};
  return {{{"duality.json", doc.dump(2) + "\n"}}, 0.0};
}

}  // namespace

bool is_stochastic_kind(const std::string& kind) {
  return kind == "simulate" || kind == "graph" || kind == "convergence" || kind == "coupling" || kind == "duality";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) schema_error("/", "expected an object");
  static const std::set<std::string> allowed = {"kind",    "model",      "seed",   "paper_convention",
                                                "threads", "output_dir", "params", "description"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!allowed.count(it.key())) schema_error("/" + it.key(), "unknown field");
  }
  ExperimentConfig c;
  if (!doc.contains("kind") || !doc["kind"].is_string()) schema_error("/kind", "required string is missing");
  c.kind = doc["kind"].get<std::string>();
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
    schema_error("/kind", "unknown experiment kind '" + c.kind + "'");
  }
  if (!doc.contains("model")) schema_error("/model", "required field is missing");
  c.model = doc["model"];
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      schema_error("/seed", "expected a nonnegative 64-bit integer");
    }
    c.seed = s.get<std::uint64_t>();
  } else if (is_stochastic_kind(c.kind)) {
    schema_error("/seed", "a seed is required for kind '" + c.kind + "'");
  }
  if (doc.contains("paper_convention")) {
    if (!doc["paper_convention"].is_boolean()) schema_error("/paper_convention", "expected a boolean");
    c.paper_convention = doc["paper_convention"].get<bool>();
  }
  if (doc.contains("threads")) {
    if (!doc["threads"].is_number_unsigned()) schema_error("/threads", "expected a nonnegative integer");
    c.threads = doc["threads"].get<unsigned>();
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) schema_error("/output_dir", "expected a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("description") && !doc["description"].is_string()) schema_error("/description", "expected a string");

  // Resolve file references now so that the config is self-contained.
  if (c.model.is_string() && c.model.get<std::string>().rfind("builtin:", 0) != 0) {
    std::filesystem::path p(c.model.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.model = p.lexically_normal().string();
  }
  const Model model = config_model(c);
  c.params = fill_params(c.kind, doc.contains("params") ? doc["params"] : json(), model);

  c.source = doc;
  c.source["params"] = c.params;
  c.source["model"] = c.model;
  c.source.erase("output_dir");
  c.source.erase("threads");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("/: cannot read config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw SchemaError("/: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, std::filesystem::path(path).parent_path().string().empty()
                               ? std::string(".")
                               : std::filesystem::path(path).parent_path().string());
}

Model config_model(const ExperimentConfig& config) {
  Model m = load_model_spec(config.model, ".");
  if (config.paper_convention) m.system = m.system.scaled(2.0);
  return m;
}

RunOutput run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Model model = config_model(config);
  RunOutput out;
  const std::string& k = config.kind;
  if (k == "tg") {
    out = run_tg(config, model);
  } else if (k == "gel-curve") {
    out = run_gel_curve(config, model);
  } else if (k == "moments") {
    out = run_moments(config, model);
  } else if (k == "simulate") {
    out = run_simulate(config, model);
  } else if (k == "graph") {
    out = run_graph(config, model);
  } else if (k == "restricted") {
    out = run_restricted(config, model);
  } else if (k == "convergence") {
    out = run_convergence(config, model);
  } else if (k == "coupling") {
    out = run_coupling(config, model);
  } else if (k == "duality") {
    out = run_duality(config, model);
  } else {
    schema_error("/kind", "unknown experiment kind '" + k + "'");
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.source.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string resolve_output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv("GELK_OUTPUT_DIR"); env && *env) return env;
  return config.output_dir;
}

std::vector<std::string> write_artifacts(const ExperimentConfig& config, const RunOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  json names = json::array();
  for (const Artifact& a : out.artifacts) {
    const std::string path = (std::filesystem::path(dir) / a.name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + path);
    f.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
    paths.push_back(path);
    names.push_back(a.name);
  }
  json manifest = {{"config_hash", config_hash(config)},
                   {"kind", config.kind},
                   {"version", GELK_VERSION},
                   {"wall_seconds", out.wall_seconds},
                   {"artifacts", names},
                   {"config", config.source}};
  const std::string path = (std::filesystem::path(dir) / (config.kind + ".manifest.json")).string();
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write " + path);
  f << manifest.dump(2) << '\n';
  paths.push_back(path);
  return paths;
}

}  // namespace gelk
