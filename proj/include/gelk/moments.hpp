#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gelk/core.hpp"
#include "gelk/ode.hpp"

namespace gelk {

/// Second moments of the sol: Q_ij = <pi_i pi_j> (1<=i,j<=n),
/// z_i = <pi_0 pi_i> (0<=i<=n), plus the first moments when known.
struct MomentState {
  double t = 0.0;
  Matrix q;
  Vector z;
  Vector first;  // <pi_i> for 0<=i<=n+m; empty if not tracked

  /// E = <phi^2> = z_0 + 2 sum_{i>=1} z_i + sum_ij Q_ij.
  double energy() const;
  /// Largest |Q_ij|^2 - Q_ii Q_jj over the pairs; <= 0 when Cauchy-Schwarz holds.
  double cauchy_schwarz_excess() const;
};

MomentState initial_moments(const AtomicMeasure& mu);

struct MomentDerivative {
  Matrix dq;
  Vector dz;
};

/// dQ/dt = Q A+ Q; dz_i/dt = (z_+^T A+ Q)_i for i>=1; dz_0/dt = z_+^T A+ z_+.
MomentDerivative moment_rhs(const BilinearSystem& sys, const MomentState& state);

using MomentObserver = std::function<void(const MomentState&)>;

struct MomentOptions {
  double rtol = 1e-9;
  double atol = 1e-14;
  double blowup_threshold = 1e12;
};

/// Integrates the closed second-moment system to t_end. Throws
/// ExplosionReached if the solution blows up first.
MomentState integrate_subcritical(const BilinearSystem& sys, const MomentState& state0, double t_end,
                                  const MomentOptions& opts = {}, const MomentObserver& observer = {});

/// Blowup time of the second-moment system started at state0.t, from a
/// 1/(zeta - t) fit over the last decade of growth.
double explosion_time(const BilinearSystem& sys, const MomentState& state0, const MomentOptions& opts = {});

/// Sol moments for t > t_g from the tilted measure (1 - rho_t) mu0, which is
/// subcritical at t. Throws DualNotSubcritical otherwise.
MomentState supercritical_moments(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                                  const MomentOptions& opts = {});

enum class MomentPhase { sol_subcritical, critical, supercritical_dual };
std::string phase_name(MomentPhase phase);

struct PhasedMoments {
  MomentState state;
  MomentPhase phase;
};

/// Subcritical integration below t_g, the tilted dual above. At t == t_g the
/// moments are infinite.
PhasedMoments sol_moments(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                          const MomentOptions& opts = {});

struct GelPoint {
  double t = 0.0;
  Vector g;  // (M, E_1..E_n)
};

struct GelOdeOptions {
  double start_offset = 1e-3;  // start at t_g (1 + offset)
  double rtol = 1e-9;
  double atol = 1e-12;
};

/// Integrates dg_i/dt = sum_jk <pi_i pi_j, mu_t> a+_jk g_k from just above
/// t_g to t_to. Reports at `report_times` (those inside the interval), or at
/// every accepted step when empty. The first point is the start.
std::vector<GelPoint> gel_ode(const BilinearSystem& sys, const AtomicMeasure& mu, double t_to,
                              const std::vector<double>& report_times = {},
                              const GelOdeOptions& opts = {});

/// Right-hand side of the gel ODE at (t, g); exposed for diagnostics.
Vector gel_ode_rhs(const BilinearSystem& sys, const AtomicMeasure& mu, double t, const Vector& g);

}  // namespace gelk
