#pragma once

#include "gelk/core.hpp"

namespace gelk {

/// Gel data g = (M, E_1..E_n, P_1..P_m) = <pi, mu0 - mu_t>.
struct GelData {
  Vector g;  // length 1+n+m

  double mass() const { return g[0]; }
  /// phi(g) = M + sum E.
  double phi(int n) const { return g.head(1 + n).sum(); }
};

struct SurvivalCoefficients {
  double t = 0.0;
  Vector c;
  /// sup-norm of c - t F(c) at the returned point.
  double residual = 0.0;
  int iterations = 0;
};

struct SurvivalOptions {
  double step_tol = 1e-12;
  int max_iter = 100000;
};

/// F(c)_i = sum_j a+_ij <(1 - exp(-c . pi_plus)) pi_j, mu0>.
Vector f_map(const BilinearSystem& sys, const AtomicMeasure& mu, const Vector& c);

/// Maximal solution of c = t F(c), by monotone iteration downward from
/// t A_plus <pi_plus, mu0>. Returns 0 when t <= t_g. Throws SlowConvergence
/// when the step budget runs out (critical slowing just above t_g).
SurvivalCoefficients solve_c(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                             const SurvivalOptions& opts = {});

/// g_i = <(1 - exp(-c . pi_plus)) pi_i, mu0> for every coordinate.
GelData gel_from_coefficients(const AtomicMeasure& mu, const Vector& c);
GelData gel_data(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                 const SurvivalOptions& opts = {});

/// Survival probabilities rho(x) = 1 - exp(-c . pi_plus(x)) at each atom.
std::vector<double> survival_function(const AtomicMeasure& mu, const Vector& c);
/// (1 - rho_t) mu0: the sol seen as a subcritical system.
AtomicMeasure tilted_measure(const AtomicMeasure& mu, const Vector& c);

struct CriticalSlope {
  Vector c_prime;  // n
  Vector g_prime;  // 1+n, right-derivatives of (M, E) at t_g
};

/// Right-derivatives at t_g from the quadratic expansion of F.
/// Throws DegenerateCubic when the cubic moments vanish along psi.
CriticalSlope critical_slope(const BilinearSystem& sys, const AtomicMeasure& mu);

struct SizeBiasReport {
  Vector theta;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool strict = false;
  double s_variance = 0.0;
};

SizeBiasReport size_bias_check(const BilinearSystem& sys, const AtomicMeasure& mu,
                               double tol = 1e-10);

}  // namespace gelk
