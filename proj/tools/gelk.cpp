// gelk: command-line front end. Every subcommand builds an experiment
// config and goes through the same validation and runner as `gelk run`.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gelk/error.hpp"
#include "gelk/experiment.hpp"
#include "gelk/model_io.hpp"

using nlohmann::json;

namespace {

int exit_code(gelk::ErrorClass c) {
  switch (c) {
    case gelk::ErrorClass::config:
      return 2;
    case gelk::ErrorClass::numeric:
      return 3;
    case gelk::ErrorClass::budget:
      return 4;
  }
  return 1;
}

struct Common {
  std::string model = "builtin:multiplicative";
  bool paper_convention = false;
  std::string out;
  unsigned threads = 0;
  std::uint64_t seed = 0;
};

CLI::Option* add_common(CLI::App* app, Common& c, bool with_seed, bool seed_required = true) {
  app->add_option("--model", c.model, "builtin:<name> or a model JSON file")->capture_default_str();
  app->add_flag("--paper-convention", c.paper_convention, "double every rate (the alternative normalization)");
  app->add_option("--out", c.out, "output directory (default: primary artifact to stdout)");
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores");
  if (!with_seed) return nullptr;
  auto* seed = app->add_option("--seed", c.seed, "64-bit random seed");
  if (seed_required) seed->required();
  return seed;
}

json base_config(const std::string& kind, const Common& c, bool with_seed) {
  json doc = {{"kind", kind}, {"model", c.model}, {"paper_convention", c.paper_convention}};
  if (with_seed) doc["seed"] = c.seed;
  if (c.threads) doc["threads"] = c.threads;
  doc["params"] = json::object();
  return doc;
}

template <class T>
void put(json& doc, CLI::Option* opt, const std::string& key, const T& value) {
  if (opt->count() > 0) doc["params"][key] = value;
}

int execute(const json& doc, const std::string& base_dir, const std::string& out_flag) {
  const gelk::ExperimentConfig config = gelk::parse_config(doc, base_dir);
  const gelk::RunOutput out = gelk::run_experiment(config);
  const std::string dir = out_flag.empty() ? gelk::resolve_output_dir(config) : out_flag;
  if (!dir.empty()) {
    for (const std::string& path : gelk::write_artifacts(config, out, dir)) std::cerr << "wrote " << path << '\n';
    return 0;
  }
  const gelk::Artifact& primary = out.artifacts.front();
  std::fwrite(primary.content.data(), 1, primary.content.size(), stdout);
  if (out.artifacts.size() > 1) std::cerr << "further artifacts are written only with --out\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilinear coagulation: gelation time, gel curves, moments, simulation and random graphs"};
  app.require_subcommand(1);
  Common common;

  auto* tg = app.add_subcommand("tg", "gelation time and spectral data as JSON");
  add_common(tg, common, false);

  auto* curve = app.add_subcommand("gel-curve", "survival coefficients and gel data on a time grid");
  add_common(curve, common, false);
  double t_min = 0, t_max = 0;
  int steps = 0;
  auto* o_tmin = curve->add_option("--t-min", t_min);
  auto* o_tmax = curve->add_option("--t-max", t_max);
  auto* o_steps = curve->add_option("--steps", steps);

  auto* moments = app.add_subcommand("moments", "second moments of the sol");
  add_common(moments, common, false);
  std::vector<double> t_grid;
  auto* o_grid = moments->add_option("--t-grid", t_grid, "comma-separated times")->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "stochastic coagulant");
  add_common(simulate, common, true);
  double n_scale = 0, xi = 0;
  std::vector<double> checkpoints;
  bool dump = false;
  simulate->add_option("--n-scale,--n", n_scale, "scale parameter N")->required();
  auto* o_sim_cp = simulate->add_option("--checkpoints", checkpoints)->delimiter(',');
  auto* o_sim_xi = simulate->add_option("--xi", xi, "gel threshold (default ceil(sqrt N))");
  simulate->add_flag("--dump-snapshot", dump, "also write the final particle store (binary)");

  auto* graph = app.add_subcommand("graph", "dynamic inhomogeneous random graph");
  auto* o_graph_seed = add_common(graph, common, true, false);
  double graph_t = 0;
  graph->add_option("--n,--n-scale", n_scale, "scale parameter N");
  auto* o_graph_t = graph->add_option("--t", graph_t, "single checkpoint");
  auto* o_graph_cp = graph->add_option("--checkpoints", checkpoints)->delimiter(',');
  auto* o_graph_xi = graph->add_option("--xi", xi, "mesoscopic threshold (default ceil(sqrt N))");
  graph->require_subcommand(0, 1);

  double t_minus = 0, t_plus = 0;
  auto* gdual = graph->add_subcommand("duality", "delete the giant, compare with the tilted graph");
  add_common(gdual, common, true);
  gdual->add_option("--n,--n-scale", n_scale, "scale parameter N");
  gdual->add_option("--t-minus", t_minus)->required();
  gdual->add_option("--t-plus", t_plus)->required();

  auto* restricted = app.add_subcommand("restricted", "Flory dynamics truncated at size xi");
  add_common(restricted, common, false);
  double t_end = 0;
  restricted->add_option("--xi", xi)->required();
  restricted->add_option("--t-end", t_end)->required();
  auto* o_r_steps = restricted->add_option("--steps", steps, "number of checkpoints");

  auto* convergence = app.add_subcommand("convergence", "largest-particle error against the fixed point over N");
  add_common(convergence, common, true);
  std::vector<double> n_scales;
  int replicas = 0;
  auto* o_conv_n = convergence->add_option("--n-scales", n_scales)->delimiter(',');
  auto* o_conv_rep = convergence->add_option("--replicas", replicas);

  auto* coupling = app.add_subcommand("coupling", "graph vs coagulant equality in law");
  add_common(coupling, common, true);
  double coupling_t = 0, alpha = 0;
  bool no_control = false;
  auto* o_c_n = coupling->add_option("--n,--n-scale", n_scale);
  auto* o_c_t = coupling->add_option("--t", coupling_t);
  auto* o_c_rep = coupling->add_option("--replicas", replicas);
  auto* o_c_alpha = coupling->add_option("--alpha", alpha);
  coupling->add_flag("--no-control", no_control, "skip the mis-scaled control run");

  auto* duality = app.add_subcommand("duality", "same as `graph duality`");
  add_common(duality, common, true);
  duality->add_option("--n,--n-scale", n_scale);
  duality->add_option("--t-minus", t_minus)->required();
  duality->add_option("--t-plus", t_plus)->required();

  auto* run = app.add_subcommand("run", "run an experiment config file");
  std::string config_path, run_out;
  run->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "output directory");

  auto* model = app.add_subcommand("model", "model utilities");
  model->require_subcommand(1);
  auto* mexport = model->add_subcommand("export", "print a model as JSON");
  std::string model_spec;
  mexport->add_option("model", model_spec, "builtin:<name> or a file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*tg) return execute(base_config("tg", common, false), ".", common.out);
    if (*curve) {
      json doc = base_config("gel-curve", common, false);
      put(doc, o_tmin, "t_min", t_min);
      put(doc, o_tmax, "t_max", t_max);
      put(doc, o_steps, "steps", steps);
      return execute(doc, ".", common.out);
    }
    if (*moments) {
      json doc = base_config("moments", common, false);
      put(doc, o_grid, "t_grid", t_grid);
      return execute(doc, ".", common.out);
    }
    if (*simulate) {
      json doc = base_config("simulate", common, true);
      doc["params"]["n_scale"] = n_scale;
      put(doc, o_sim_cp, "checkpoints", checkpoints);
      put(doc, o_sim_xi, "xi", xi);
      if (dump) doc["params"]["dump_snapshot"] = true;
      return execute(doc, ".", common.out);
    }
    if (*gdual || *duality) {
      json doc = base_config("duality", common, true);
      if (n_scale > 0) doc["params"]["n_scale"] = n_scale;
      doc["params"]["t_minus"] = t_minus;
      doc["params"]["t_plus"] = t_plus;
      return execute(doc, ".", common.out);
    }
    if (*graph) {
      json doc = base_config("graph", common, true);
      if (n_scale <= 0) throw gelk::InvalidArgument("graph needs --n");
      if (o_graph_seed->count() == 0) throw gelk::InvalidArgument("graph needs --seed");
      doc["params"]["n_scale"] = n_scale;
      if (o_graph_t->count()) doc["params"]["checkpoints"] = std::vector<double>{graph_t};
      put(doc, o_graph_cp, "checkpoints", checkpoints);
      put(doc, o_graph_xi, "xi", xi);
      return execute(doc, ".", common.out);
    }
    if (*restricted) {
      json doc = base_config("restricted", common, false);
      doc["params"]["xi"] = xi;
      doc["params"]["t_end"] = t_end;
      put(doc, o_r_steps, "steps", steps);
      return execute(doc, ".", common.out);
    }
    if (*convergence) {
      json doc = base_config("convergence", common, true);
      put(doc, o_conv_n, "n_scales", n_scales);
      put(doc, o_conv_rep, "replicas", replicas);
      return execute(doc, ".", common.out);
    }
    if (*coupling) {
      json doc = base_config("coupling", common, true);
      put(doc, o_c_n, "n_scale", n_scale);
      put(doc, o_c_t, "t", coupling_t);
      put(doc, o_c_rep, "replicas", replicas);
      put(doc, o_c_alpha, "alpha", alpha);
      if (no_control) doc["params"]["control"] = false;
      return execute(doc, ".", common.out);
    }
    if (*run) {
      const gelk::ExperimentConfig config = gelk::load_config(config_path);
      const gelk::RunOutput out = gelk::run_experiment(config);
      std::string dir = run_out.empty() ? gelk::resolve_output_dir(config) : run_out;
      if (dir.empty()) dir = ".";
      for (const std::string& path : gelk::write_artifacts(config, out, dir)) std::cerr << "wrote " << path << '\n';
      return 0;
    }
    if (*mexport) {
      std::cout << gelk::model_to_json(gelk::resolve_model(model_spec)).dump(2) << '\n';
      return 0;
    }
  } catch (const gelk::Error& e) {
    std::cerr << "gelk: " << e.what() << '\n';
    return exit_code(e.error_class());
  } catch (const json::exception& e) {
    std::cerr << "gelk: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gelk: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
