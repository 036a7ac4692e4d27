#include <doctest.h>

#include <cmath>

#include "gelk/error.hpp"
#include "gelk/model_io.hpp"
#include "gelk/moments.hpp"
#include "gelk/spectral.hpp"
#include "gelk/survival.hpp"
#include "support/oracles.hpp"

using namespace gelk;

TEST_CASE("moment right-hand side on the Kac example") {
  const Model kac = kac_gaussian(5);
  const MomentState s = initial_moments(kac.measure);
  const MomentDerivative d = moment_rhs(kac.system, s);
  Matrix expected(2, 2);
  expected << 6.0, 24.0, 24.0, 90.0;
  CHECK((d.dq - expected).norm() < 1e-10);
}

TEST_CASE("subcritical moments follow the closed form") {
  const Model kac = kac_gaussian(5);
  const MomentState s0 = initial_moments(kac.measure);
  const double t_g = gelation_time(kac.system, kac.measure);
  for (double frac : {0.3, 0.6, 0.9}) {
    const double t = frac * t_g;
    const MomentState s = integrate_subcritical(kac.system, s0, t);
    const Matrix q = oracle::riccati(s0.q, kac.system.a_plus(), t);
    INFO(frac);
    CHECK((s.q - q).norm() / q.norm() < 1e-7);
    const Vector z = q * s0.q.inverse() * s0.z.tail(2);
    CHECK((s.z.tail(2) - z).norm() / z.norm() < 1e-7);
  }
}

TEST_CASE("monodisperse energy is 4/(1-t)") {
  const Model m = multiplicative_monodisperse();
  const MomentState s = integrate_subcritical(m.system, initial_moments(m.measure), 0.5);
  CHECK(s.energy() == doctest::Approx(8.0).epsilon(1e-8));
  CHECK_THROWS_AS(integrate_subcritical(m.system, initial_moments(m.measure), 1.5), ExplosionReached);
}

TEST_CASE("explosion time equals t_g and scales with the rates") {
  for (const char* name : {"multiplicative", "two-atom", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    const double t_g = gelation_time(m.system, m.measure);
    const double zeta = explosion_time(m.system, initial_moments(m.measure));
    INFO(name);
    CHECK(std::abs(zeta - t_g) / t_g < 1e-3);
    const double zeta2 = explosion_time(m.system.scaled(2.0), initial_moments(m.measure));
    CHECK(std::abs(zeta2 - t_g / 2) / t_g < 1e-3);
  }
}

TEST_CASE("explosion time is continuous in the measure") {
  const Model m = two_atom_multiplicative();
  std::vector<double> factors{1.0, 1.0 + 1e-4};
  const AtomicMeasure perturbed = m.measure.reweighted(factors);
  const double a = explosion_time(m.system, initial_moments(m.measure));
  const double b = explosion_time(m.system, initial_moments(perturbed));
  CHECK(std::abs(a - b) < 1e-3);
}

TEST_CASE("supercritical moments from the tilted dual") {
  const Model m = multiplicative_monodisperse();
  const PhasedMoments pm = sol_moments(m.system, m.measure, 2.0);
  CHECK(pm.phase == MomentPhase::supercritical_dual);
  const GelData g = gel_data(m.system, m.measure, 2.0);
  const Vector expected = m.measure.first_moments() - g.g;
  CHECK((pm.state.first - expected).cwiseAbs().maxCoeff() < 1e-8);
  const double w = 1.0 - oracle::giant_fraction(2.0);
  CHECK(pm.state.q(0, 0) == doctest::Approx(w / (1 - 2 * w)).epsilon(1e-8));
  CHECK(sol_moments(m.system, m.measure, 1.0).phase == MomentPhase::critical);
  CHECK(std::isinf(sol_moments(m.system, m.measure, 1.0).state.energy()));
  CHECK(sol_moments(m.system, m.measure, 0.5).phase == MomentPhase::sol_subcritical);
}

TEST_CASE("gel ODE reproduces the fixed point") {
  const Model kac = kac_gaussian(5);
  const double t_g = gelation_time(kac.system, kac.measure);
  const std::vector<double> reports{1.05 * t_g, 1.5 * t_g, 2.0 * t_g};
  const std::vector<GelPoint> pts = gel_ode(kac.system, kac.measure, 2.0 * t_g, reports);
  REQUIRE(pts.size() >= 3);
  for (const GelPoint& p : pts) {
    if (p.t < 1.05 * t_g - 1e-12) continue;
    const GelData g = gel_data(kac.system, kac.measure, p.t);
    INFO(p.t);
    CHECK((p.g - g.g.head(3)).cwiseAbs().maxCoeff() < 1e-3);
  }
  const Model m = multiplicative_monodisperse();
  const std::vector<GelPoint> mono = gel_ode(m.system, m.measure, 2.0, {1.05, 2.0});
  CHECK(std::abs(mono.back().g[0] - oracle::giant_fraction(2.0)) < 1e-3);
}

TEST_CASE("gel ODE derivative near t_g matches the critical slope") {
  for (const char* name : {"multiplicative", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    const double t_g = gelation_time(m.system, m.measure);
    const double t = t_g * (1 + 1e-3);
    const GelData g = gel_data(m.system, m.measure, t);
    const Vector dg = gel_ode_rhs(m.system, m.measure, t, g.g.head(1 + m.system.n()));
    const CriticalSlope s = critical_slope(m.system, m.measure);
    INFO(name);
    CHECK(std::abs(dg[0] - s.g_prime[0]) / s.g_prime[0] < 0.05);
  }
}

TEST_CASE("Cauchy-Schwarz along the subcritical flow") {
  const Model kac = kac_gaussian(5);
  const double t_g = gelation_time(kac.system, kac.measure);
  double worst = -1.0;
  integrate_subcritical(kac.system, initial_moments(kac.measure), 0.95 * t_g, {},
                        [&](const MomentState& s) { worst = std::max(worst, s.cauchy_schwarz_excess() / s.q.squaredNorm()); });
  CHECK(worst <= 1e-12);
}
