#include <doctest.h>

#include <cmath>

#include "gelk/model_io.hpp"
#include "gelk/spectral.hpp"
#include "gelk/survival.hpp"
#include "support/oracles.hpp"

using namespace gelk;

TEST_CASE("F on the monodisperse case") {
  const Model m = multiplicative_monodisperse();
  const Vector c = Vector::Constant(1, 0.7);
  CHECK(f_map(m.system, m.measure, c)[0] == doctest::Approx(1.0 - std::exp(-0.7)));
  CHECK(f_map(m.system, m.measure, Vector::Zero(1))[0] == 0.0);
}

TEST_CASE("gel mass matches the bisection oracle") {
  const Model m = multiplicative_monodisperse();
  for (double t : {1.2, 1.5, 2.0, 3.0, 5.0}) {
    INFO(t);
    const GelData g = gel_data(m.system, m.measure, t);
    CHECK(std::abs(g.mass() - oracle::giant_fraction(t)) < 1e-9);
    CHECK(std::abs(solve_c(m.system, m.measure, t).c[0] - oracle::monodisperse_c(t)) < 1e-9);
  }
}

TEST_CASE("two-atom fixed point against bisection") {
  const Model m = two_atom_multiplicative();
  const double t = 1.0;
  const double c = oracle::bisect(
      [t](double x) { return x - t * (0.5 * (1 - std::exp(-x)) + (1 - std::exp(-2 * x))); }, 1e-9, 10.0);
  const SurvivalCoefficients s = solve_c(m.system, m.measure, t);
  CHECK(s.c[0] == doctest::Approx(c).epsilon(1e-9));
  CHECK(s.residual < 1e-10);
  const GelData g = gel_from_coefficients(m.measure, s.c);
  CHECK(g.mass() == doctest::Approx(0.5 * (1 - std::exp(-c)) + 0.5 * (1 - std::exp(-2 * c))));
  CHECK(g.g[1] == doctest::Approx(0.5 * (1 - std::exp(-c)) + (1 - std::exp(-2 * c))));
}

TEST_CASE("no gel at or below t_g, gel just above") {
  for (const char* name : {"multiplicative", "two-atom", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    const double t_g = gelation_time(m.system, m.measure);
    INFO(name);
    CHECK(solve_c(m.system, m.measure, t_g * (1 - 1e-3)).c.norm() == 0.0);
    CHECK(solve_c(m.system, m.measure, t_g).c.norm() == 0.0);
    CHECK(solve_c(m.system, m.measure, t_g * (1 + 1e-2)).c.minCoeff() > 0.0);
  }
}

TEST_CASE("Jacobian spectral radius crosses one at t_g") {
  const Model kac = kac_gaussian(5);
  const double t_g = gelation_time(kac.system, kac.measure);
  const Matrix lambda = lambda_matrix(kac.system, kac.measure);
  CHECK(spectral_radius(t_g * (1 - 1e-3) * lambda).radius < 1.0);
  CHECK(spectral_radius(t_g * (1 + 1e-3) * lambda).radius > 1.0);
}

TEST_CASE("gel data are monotone in time") {
  const Model kac = kac_gaussian(5);
  const double t_g = gelation_time(kac.system, kac.measure);
  Vector prev = Vector::Zero(3);
  for (int k = 1; k <= 20; ++k) {
    const GelData g = gel_data(kac.system, kac.measure, t_g * (1.0 + 0.1 * k));
    for (int i = 0; i < 3; ++i) CHECK(g.g[i] >= prev[i] - 1e-12);
    CHECK(g.mass() <= 1.0 + 1e-12);
    CHECK(std::abs(g.g[3]) + std::abs(g.g[4]) + std::abs(g.g[5]) < 1e-12);
    prev = g.g.head(3);
  }
}

TEST_CASE("critical slope: analytic value and finite differences") {
  const Model m = multiplicative_monodisperse();
  const CriticalSlope s = critical_slope(m.system, m.measure);
  CHECK(std::abs(s.g_prime[0] - 2.0) < 1e-9);
  auto quotient = [&](double h) { return gel_data(m.system, m.measure, 1.0 + h).mass() / h; };
  const double fd = oracle::richardson(quotient, 2e-3);
  CHECK(std::abs(fd - 2.0) / 2.0 < 0.02);

  for (const char* name : {"two-atom", "kac-gaussian"}) {
    const Model other = builtin_model(name);
    const double t_g = gelation_time(other.system, other.measure);
    const CriticalSlope cs = critical_slope(other.system, other.measure);
    auto q = [&](double h) { return gel_data(other.system, other.measure, t_g * (1 + h)).mass() / (t_g * h); };
    INFO(name);
    CHECK(std::abs(oracle::richardson(q, 2e-3) - cs.g_prime[0]) / cs.g_prime[0] < 0.02);
  }
}

TEST_CASE("size-biasing inequality") {
  const Model mono = multiplicative_monodisperse();
  const SizeBiasReport r0 = size_bias_check(mono.system, mono.measure);
  CHECK(std::abs(r0.lhs - r0.rhs) < 1e-10);
  CHECK(r0.holds);
  CHECK_FALSE(r0.strict);
  for (const char* name : {"two-atom", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    const SizeBiasReport r = size_bias_check(m.system, m.measure);
    INFO(name);
    CHECK(r.strict);
    CHECK(r.lhs > r.rhs);
  }
}

TEST_CASE("tilted measure is subcritical") {
  const Model m = multiplicative_monodisperse();
  const SurvivalCoefficients s = solve_c(m.system, m.measure, 2.0);
  const AtomicMeasure tilted = tilted_measure(m.measure, s.c);
  CHECK(tilted.total_mass() == doctest::Approx(1.0 - oracle::giant_fraction(2.0)));
  CHECK(gelation_time(m.system, tilted) > 2.0);
}
