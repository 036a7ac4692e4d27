// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelk/experiment.hpp"
#include "gelk/irg.hpp"
#include "gelk/model_io.hpp"
#include "gelk/moments.hpp"
#include "gelk/parallel.hpp"
#include "gelk/restricted.hpp"
#include "gelk/spectral.hpp"
#include "gelk/stats.hpp"
#include "gelk/stochastic.hpp"
#include "gelk/survival.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace gelk;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<std::vector<double>> read_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

Outcome criterion1() {
  const Model m = multiplicative_monodisperse();
  const auto start = Clock::now();
  const double t_g = gelation_time(m.system, m.measure);
  const double elapsed = seconds_since(start);
  return {std::abs(t_g - 1.0) <= 1e-12 && elapsed < 1e-3, fmt("t_g=%.17g time=%.3gms", t_g, elapsed * 1e3)};
}

Outcome criterion2() {
  const Model m = multiplicative_monodisperse();
  const double mass = gel_data(m.system, m.measure, 2.0).mass();
  const double expected = oracle::giant_fraction(2.0);
  const auto start = Clock::now();
  const RunOutput curve = run_experiment(parse_config(
      {{"kind", "gel-curve"}, {"model", "builtin:multiplicative"}, {"params", {{"t_min", 0.0}, {"t_max", 3.0}, {"steps", 100}}}}));
  const double elapsed = seconds_since(start);
  const std::size_t points = read_csv(curve.artifacts.front().content).size();
  return {std::abs(mass - expected) <= 1e-9 && elapsed < 1.0 && points >= 100,
          fmt("M(2)=%.12f oracle=%.12f |diff|=%.2g curve(%g pts)=%.3fs", mass, expected, std::abs(mass - expected),
              double(points)) +
              fmt(" %.3fs", elapsed)};
}

Outcome criterion3() {
  const Model m = multiplicative_monodisperse();
  const double slope = critical_slope(m.system, m.measure).g_prime[0];
  auto quotient = [&](double h) { return gel_data(m.system, m.measure, 1.0 + h).mass() / h; };
  const double fd = oracle::richardson(quotient, 2e-3);
  return {std::abs(slope - 2.0) <= 1e-9 && std::abs(fd - slope) / slope < 0.02,
          fmt("M'=%.12f fd_richardson=%.6f rel=%.2g", slope, fd, std::abs(fd - slope) / slope)};
}

Outcome criterion4() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"multiplicative", "two-atom", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    const auto start = Clock::now();
    const double zeta = explosion_time(m.system, initial_moments(m.measure));
    const double elapsed = seconds_since(start);
    const double t_g = gelation_time(m.system, m.measure);
    const double rel = std::abs(zeta - t_g) / t_g;
    ok = ok && rel <= 1e-3 && elapsed < 5.0;
    detail += std::string(name) + fmt(": zeta=%.10f t_g=%.10f rel=%.1e %.3fs; ", zeta, t_g, rel, elapsed);
  }
  const double kac_exact = 1.0 / (3.0 + std::sqrt(15.0));
  const Model kac = kac_gaussian(5);
  ok = ok && std::abs(gelation_time(kac.system, kac.measure) - kac_exact) < 1e-12;
  return {ok, detail};
}

Outcome criterion5() {
  const auto start = Clock::now();
  const Model m = multiplicative_monodisperse();
  const PhasedMoments pm = sol_moments(m.system, m.measure, 2.0);
  const Vector expected = m.measure.first_moments() - gel_data(m.system, m.measure, 2.0).g;
  const double first_gap = (pm.state.first - expected).cwiseAbs().maxCoeff();
  const std::size_t seeds = 50;
  const double n = 1e5;
  std::vector<double> q(seeds);
  parallel_for(seeds, [&](std::size_t k) {
    ParticleSystem ps = ParticleSystem::init_poisson(m.system, m.measure, n, derive_seed(0x5EED5, k));
    q[k] = ps.run({2.0}, default_xi(n)).front().sol_q(0, 0);
  });
  const double se = stddev(q) / std::sqrt(double(seeds));
  const double gap = std::abs(mean(q) - pm.state.q(0, 0));
  const double elapsed = seconds_since(start);
  return {first_gap <= 1e-8 && gap <= 3 * se && elapsed < 300,
          fmt("first-moment gap=%.1e Q_dual=%.8f Q_emp=%.8f", first_gap, pm.state.q(0, 0), mean(q)) +
              fmt(" SE=%.2e |diff|/SE=%.2f %.1fs", se, gap / se, elapsed)};
}

Outcome criterion6() {
  const auto start = Clock::now();
  const RunOutput out = run_experiment(parse_config({{"kind", "convergence"},
                                                     {"model", "builtin:multiplicative"},
                                                     {"seed", 6},
                                                     {"params", {{"n_scales", {1e3, 1e4, 1e5}}, {"replicas", 50}}}}));
  const double elapsed = seconds_since(start);
  const auto rows = read_csv(out.artifacts.front().content);
  bool ok = rows.size() == 3 && elapsed < 600;
  std::string detail = "median sup error:";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    detail += fmt(" N=%g:%.4f", rows[k][0], rows[k][2]);
    if (k > 0) ok = ok && rows[k][2] < rows[k - 1][2];
  }
  ok = ok && rows.back()[2] < 0.02;
  return {ok, detail + fmt(" %.1fs", elapsed)};
}

Outcome criterion7() {
  const Model m = multiplicative_monodisperse();
  const double n = 1e5;
  ParticleSystem ps = ParticleSystem::init_poisson(m.system, m.measure, n, 7);
  const auto snaps = ps.run({0.5, 2.0}, default_xi(n));
  const double early = snaps[0].g_largest[0];
  const double late = snaps[1].g_largest[0];
  const double thr_gap = (snaps[1].g_threshold - snaps[1].g_largest).cwiseAbs().maxCoeff();
  return {early < 1e-3 && std::abs(late - 0.796812) <= 0.02 && thr_gap <= 0.01,
          fmt("largest/N t=0.5: %.2e t=2: %.5f threshold gap=%.2e", early, late, thr_gap)};
}

Outcome criterion8() {
  const auto start = Clock::now();
  const Model m = multiplicative_monodisperse();
  const CouplingReport r = coupling_test(m.system, m.system, m.measure, 2000, 1.5, 200, 8, 1e-3);
  const CouplingReport ctl =
      coupling_test(m.system, m.system.scaled(2.0), m.measure, 2000, 1.5, 200, derive_seed(8, 0xC0), 1e-3);
  return {r.pass && !ctl.pass,
          fmt("p_phi=%.3g p_clusters=%.3g | control p_phi=%.2g p_clusters=%.2g", r.p_phi, r.p_clusters, ctl.p_phi,
              ctl.p_clusters) +
              fmt(" %.1fs", seconds_since(start))};
}

Outcome criterion9() {
  const Model m = multiplicative_monodisperse();
  const std::size_t n = 10000;
  const std::vector<double> checkpoints{0.5, 1.0, 1.5, 2.0};
  const double xi = std::sqrt(double(n));
  auto meso = [&](std::uint64_t seed) {
    const GraphRealization g = sample_graph(m.system, std::vector<TypeVector>(n, m.measure.atoms()[0].x), double(n),
                                            2.0, seed);
    std::vector<double> out;
    for (const ComponentCheckpoint& cp : trajectory(g, checkpoints, xi)) out.push_back(cp.meso_sum);
    return out;
  };
  const std::vector<double> fixed = meso(9);
  bool ok = true;
  std::string detail = "seed 9:";
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    detail += fmt(" t=%.1f:%.4f", checkpoints[k], fixed[k]);
    ok = ok && fixed[k] < 0.05;
  }
  // Spread over further realizations, reported only.
  std::vector<double> at_tg(20);
  parallel_for(at_tg.size(), [&](std::size_t k) { at_tg[k] = meso(derive_seed(9, k))[1]; });
  const auto above = std::count_if(at_tg.begin(), at_tg.end(), [](double v) { return v >= 0.05; });
  detail += fmt(" | 20 more at t=1: median=%.4f max=%.4f, %g >= 0.05", median(at_tg),
                *std::max_element(at_tg.begin(), at_tg.end()), double(above));
  return {ok, detail};
}

Outcome criterion10() {
  const Model m = multiplicative_monodisperse();
  // Default grid of `restricted --t-end 2`.
  std::vector<double> checkpoints;
  for (int k = 1; k <= 10; ++k) checkpoints.push_back(0.2 * k);
  TruncatedFlory mono(m.system, m.measure, 1.0);
  const long idx = mono.index_of(CompositionType{{1}});
  const double density = mono.integrate({1.0}).front().densities[idx];
  const double mono_gap = std::abs(density - std::exp(-1.0));
  bool monotone = true;
  std::vector<TruncatedState> prev;
  std::vector<TruncatedState> last;
  for (double xi : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    last = TruncatedFlory(m.system, m.measure, xi).integrate(checkpoints);
    if (!prev.empty()) {
      for (std::size_t k = 0; k < checkpoints.size(); ++k) monotone = monotone && last[k].gel[0] <= prev[k].gel[0] + 1e-10;
    }
    prev = last;
  }
  double worst = 0.0;
  std::string detail = fmt("monomer gap=%.1e monotone=%g xi=64 gel gaps:", mono_gap, monotone ? 1.0 : 0.0);
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const double gap = std::abs(last[k].gel[0] - gel_data(m.system, m.measure, checkpoints[k]).mass());
    detail += fmt(" t=%.1f:%.2e", checkpoints[k], gap);
    worst = std::max(worst, gap);
  }
  return {mono_gap <= 1e-8 && monotone && worst <= 5e-3, detail};
}

Outcome criterion11() {
  const auto start = Clock::now();
  const double kernel = props::kernel_identities(2024, 2000);
  const double additivity = props::merge_additivity(7, 2000);
  const double cs = props::cauchy_schwarz(11, 40);
  const double restricted = props::restricted_conservation(5, 10);
  const double equivalence = props::simulator_vs_direct(31, 4, 400);
  const double conservation = props::simulator_conservation(77, 10);
  const double elapsed = seconds_since(start);
  const bool ok = kernel < 1e-14 && additivity < 1e-12 && cs <= 1e-12 && restricted < 1e-8 && equivalence > 1e-3 &&
                  conservation < 1e-10 && elapsed < 120;
  return {ok, fmt("kernel=%.1e additivity=%.1e cauchy_schwarz=%.1e restricted_drift=%.1e", kernel, additivity, cs,
                  restricted) +
                  fmt(" min_ks_p=%.3g sim_drift=%.1e %.1fs", equivalence, conservation, elapsed)};
}

Outcome criterion12() {
  const Model mono = multiplicative_monodisperse();
  const SizeBiasReport r0 = size_bias_check(mono.system, mono.measure);
  bool ok = std::abs(r0.lhs - r0.rhs) <= 1e-10;
  std::string detail = fmt("monodisperse |lhs-rhs|=%.1e;", std::abs(r0.lhs - r0.rhs));
  for (const char* name : {"two-atom", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    const SizeBiasReport r = size_bias_check(m.system, m.measure);
    ok = ok && r.lhs - r.rhs > 0.0;
    detail += std::string(" ") + name + fmt(": lhs=%.6f rhs=%.6f margin=%.4f;", r.lhs, r.rhs, r.lhs - r.rhs);
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"multiplicative gelation time", criterion1},
      {"gel curve against bisection", criterion2},
      {"critical slope", criterion3},
      {"explosion time equals gelation time", criterion4},
      {"supercritical moment duality", criterion5},
      {"stochastic hydrodynamic limit", criterion6},
      {"largest particle phase transition", criterion7},
      {"coupling in law", criterion8},
      {"mesoscopic clusters", criterion9},
      {"truncated Flory", criterion10},
      {"invariant suites", criterion11},
      {"size biasing", criterion12},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %2zu %-38s [%.2fs] %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                seconds_since(start), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
