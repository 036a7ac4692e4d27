#pragma once

// Randomized invariant checks shared by the property suite and the
// acceptance binary. Each returns the worst violation seen.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gelk/core.hpp"
#include "gelk/moments.hpp"
#include "gelk/restricted.hpp"
#include "gelk/rng.hpp"
#include "gelk/spectral.hpp"
#include "gelk/stats.hpp"
#include "gelk/stochastic.hpp"
#include "support/direct_reference.hpp"

namespace props {

using namespace gelk;

// Nonnegative A+ >= 0.1 and a small negative A_par, so Kbar > 0 on particles
// with plus >= 0.5 and |par| <= 1 per constituent.
inline BilinearSystem random_system(Rng& rng, int n, int m) {
  Matrix a_plus(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) a_plus(i, j) = a_plus(j, i) = 0.1 + rng.uniform();
  }
  Matrix a_par = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) a_par(i, i) = -0.005 * rng.uniform() - 0.001;
  return BilinearSystem(a_plus, a_par);
}

inline TypeVector random_particle(Rng& rng, int n, int m, bool unit_pi0 = false) {
  TypeVector x;
  x.pi0 = unit_pi0 ? 1 : 1 + static_cast<std::int64_t>(rng.below(3));
  x.plus = Vector(n);
  for (int i = 0; i < n; ++i) x.plus[i] = 0.5 + 2.0 * rng.uniform();
  x.par = Vector(m);
  for (int i = 0; i < m; ++i) x.par[i] = 2.0 * rng.uniform() - 1.0;
  return x;
}

inline int random_dim(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); }

/// Largest relative violation of Kbar(x,y) = Kbar(y,x) and reflection invariance,
/// or +inf if the envelope fails to dominate.
inline double kernel_identities(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const int n = random_dim(rng, 1, 3), m = random_dim(rng, 0, 2);
    const BilinearSystem sys = random_system(rng, n, m);
    const TypeVector x = random_particle(rng, n, m), y = random_particle(rng, n, m);
    const double kxy = kbar(sys, x, y);
    worst = std::max(worst, std::abs(kxy - kbar(sys, y, x)) / kxy);
    worst = std::max(worst, std::abs(kxy - kbar(sys, reflect(x), reflect(y))) / kxy);
    if (kbar_envelope(sys, x, y) < kxy * (1 - 1e-14)) return INFINITY;
  }
  return worst;
}

/// Largest violation of pi(x+y) = pi(x)+pi(y) and Kbar(x+y, z) = Kbar(x,z)+Kbar(y,z).
inline double merge_additivity(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const int n = random_dim(rng, 1, 3), m = random_dim(rng, 0, 2);
    const BilinearSystem sys = random_system(rng, n, m);
    const TypeVector x = random_particle(rng, n, m), y = random_particle(rng, n, m), z = random_particle(rng, n, m);
    const TypeVector xy = merge(x, y);
    worst = std::max(worst, (xy.coords() - x.coords() - y.coords()).cwiseAbs().maxCoeff());
    if (!(xy == merge(y, x))) return INFINITY;
    const double k_xy = kbar(sys, xy, z);
    worst = std::max(worst, std::abs(k_xy - kbar(sys, x, z) - kbar(sys, y, z)) / k_xy);
  }
  return worst;
}

/// Largest (Q_ij^2 - Q_ii Q_jj) / |Q|^2 along subcritical flows up to 0.9 t_g.
inline double cauchy_schwarz(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double worst = -INFINITY;
  for (int k = 0; k < trials; ++k) {
    const int n = random_dim(rng, 1, 3);
    const BilinearSystem sys = random_system(rng, n, 0);
    std::vector<Atom> atoms;
    const int size = n + 2 + static_cast<int>(rng.below(4));
    for (int a = 0; a < size; ++a) atoms.push_back({random_particle(rng, n, 0, true), 0.2 + rng.uniform()});
    const AtomicMeasure mu(n, 0, atoms);
    const double t_g = gelation_time(sys, mu);
    integrate_subcritical(sys, initial_moments(mu), 0.9 * t_g, {}, [&](const MomentState& s) {
      worst = std::max(worst, s.cauchy_schwarz_excess() / s.q.squaredNorm());
    });
  }
  return worst;
}

/// Largest drift of sol + truncated gel pi-data from <pi, mu0>.
inline double restricted_conservation(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const BilinearSystem sys(Matrix::Constant(1, 1, 0.5 + rng.uniform()), Matrix(0, 0));
    std::vector<Atom> atoms;
    for (double mass : {1.0, 2.0, 3.0}) atoms.push_back({TypeVector{1, Vector::Constant(1, mass), Vector(0)}, 0.1 + rng.uniform()});
    const AtomicMeasure mu(1, 0, atoms);
    TruncatedFlory space(sys, mu, 8.0);
    for (const TruncatedState& s : space.integrate({0.5, 1.5, 3.0})) {
      Vector total = s.gel - s.clamp_adjustment;
      for (std::size_t t = 0; t < space.size(); ++t) total += s.densities[t] * space.type_data()[t].coords();
      worst = std::max(worst, (total - mu.first_moments()).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

/// Smallest two-sample KS p-value between the thinned simulator and the
/// direct-rate chain, on random systems of 10..50 particles. Statistic: time
/// until half the particles have merged away.
inline double simulator_vs_direct(std::uint64_t seed, int systems, int runs) {
  Rng rng(seed);
  double worst = 1.0;
  for (int trial = 0; trial < systems; ++trial) {
    const int n = random_dim(rng, 1, 2), m = random_dim(rng, 1, 2);
    const BilinearSystem sys = random_system(rng, n, m);
    const std::size_t k = 10 + rng.below(41);
    std::vector<TypeVector> start;
    for (std::size_t p = 0; p < k; ++p) start.push_back(random_particle(rng, n, m));
    const std::uint64_t base = rng.bits();
    std::vector<double> fast, direct;
    for (int s = 0; s < runs; ++s) {
      ParticleSystem ps(sys, start, double(k), derive_seed(base, 2 * s));
      while (ps.count() > k / 2) ps.step();
      fast.push_back(ps.t());
      reference::DirectCoagulant ref(sys, start, double(k), derive_seed(base, 2 * s + 1));
      while (ref.particles().size() > k / 2) ref.step();
      direct.push_back(ref.t());
    }
    worst = std::min(worst, ks_two_sample(fast, direct).p_value);
  }
  return worst;
}

/// Largest relative change of the coordinate sums over a run, plus the
/// maintained-sum drift.
inline double simulator_conservation(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = random_dim(rng, 1, 3), m = random_dim(rng, 0, 2);
    const BilinearSystem sys = random_system(rng, n, m);
    std::vector<TypeVector> start;
    for (int p = 0; p < 200; ++p) start.push_back(random_particle(rng, n, m));
    ParticleSystem ps(sys, start, 200.0, rng.bits());
    const Vector before = ps.coordinate_sums();
    for (int e = 0; e < 150 && ps.count() > 1; ++e) ps.step();
    worst = std::max(worst, (ps.coordinate_sums() - before).cwiseAbs().maxCoeff() / (1.0 + before.cwiseAbs().maxCoeff()));
    worst = std::max(worst, ps.sum_drift());
  }
  return worst;
}

}  // namespace props
