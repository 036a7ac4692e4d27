#pragma once

// Marcus-Lushnikov coagulant for a bilinear system. Unordered pairs merge at
// rate Kbar(x, y) / N. Events are proposed from the product envelope
// (1/2N) sum_ij |a_ij| S^_i S^_j, with S^_i = sum_p |pi_i(x_p)|, and thinned
// by Kbar / Khat.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "gelk/core.hpp"
#include "gelk/fenwick.hpp"
#include "gelk/rng.hpp"

namespace gelk {

/// Internal evolution of one particle. Must leave pi_0..pi_n unchanged.
using JumpHook = std::function<void(TypeVector&, Rng&)>;

struct SimulatorOptions {
  std::uint64_t resync_interval = std::uint64_t{1} << 20;
  /// Per-particle jump rate is jump_rate * phi(x); 0 disables the hook.
  double jump_rate = 0.0;
  JumpHook hook;
};

struct EventRecord {
  enum class Kind { merge, rejected, jump };
  Kind kind = Kind::rejected;
  double t = 0.0;
  std::size_t p = 0;  // surviving slot for merges, the particle for jumps
  std::size_t q = 0;  // absorbed slot for merges
};

struct Snapshot {
  double t = 0.0;
  std::size_t n_particles = 0;
  Vector first;        // <pi_i, mu^N_t>, i = 0..n+m
  Matrix sol_q;        // (1/N) sum over non-largest particles of pi_i pi_j, 1<=i,j<=n
  Vector sol_z;        // (1/N) sum over non-largest particles of pi_0 pi_i, 0<=i<=n
  Vector g_largest;    // pi(largest particle) / N
  Vector g_threshold;  // sum of pi over particles with pi_0 >= xi_N, / N
  std::int64_t largest_pi0 = 0;
  std::size_t largest_index = 0;
  std::map<std::int64_t, std::size_t> histogram;  // pi_0 -> count
};

/// Default mesoscopic threshold ceil(sqrt(N)).
double default_xi(double scale);

/// Poisson(N mu(S)) types drawn independently from mu / mu(S).
std::vector<TypeVector> sample_poisson_types(const AtomicMeasure& mu, double scale, Rng& rng);

class ParticleSystem {
 public:
  ParticleSystem(const BilinearSystem& sys, const std::vector<TypeVector>& particles, double scale,
                 std::uint64_t seed, SimulatorOptions opts = {});

  /// Poisson(N mu0(S)) particles with types drawn from mu0 / mu0(S).
  static ParticleSystem init_poisson(const BilinearSystem& sys, const AtomicMeasure& mu, double scale,
                                     std::uint64_t seed, SimulatorOptions opts = {});

  double t() const { return t_; }
  double scale() const { return scale_; }
  std::size_t count() const { return count_; }
  std::uint64_t merges() const { return merges_; }
  std::uint64_t proposals() const { return proposals_; }
  std::uint64_t jumps() const { return jumps_; }
  TypeVector particle(std::size_t p) const;
  std::vector<TypeVector> particles() const;

  /// Envelope rate of coagulation proposals.
  double envelope_rate() const;
  /// Exact total rate sum over unordered pairs of Kbar / N, by brute force.
  double exact_rate() const;

  /// One proposal (merge, rejection or jump). Throws RateUnderflow when no
  /// event can occur.
  EventRecord step();

  /// Advances to each checkpoint in turn and snapshots there.
  std::vector<Snapshot> run(const std::vector<double>& checkpoints, double xi_n);
  /// Runs to `t_end` without snapshots.
  void advance_to(double t_end);

  Snapshot snapshot(double xi_n) const;

  /// Signed coordinate sums S_i, i = 1..n+m, and their absolute versions.
  const Vector& coordinate_sums() const { return sums_; }
  const Vector& absolute_sums() const { return abs_sums_; }
  /// Largest relative gap between the maintained sums and a recount.
  double sum_drift() const;
  /// Rebuilds sums and samplers from the particle store.
  void resync();

 private:
  double* row(std::size_t p) { return x_.data() + p * static_cast<std::size_t>(dim_); }
  const double* row(std::size_t p) const { return x_.data() + p * static_cast<std::size_t>(dim_); }
  void rates(const double* x, const double* y, double& k, double& khat) const;
  std::size_t sample_from(std::size_t coord);
  EventRecord propose();
  EventRecord jump();
  void do_merge(std::size_t p, std::size_t q);
  void write_particle(std::size_t p, std::int64_t pi0, const double* x);
  double jump_total() const;
  bool advance_until(double t_stop);

  int n_ = 0;
  int m_ = 0;
  int dim_ = 0;
  Matrix a_;
  Matrix abs_a_;
  double scale_ = 1.0;
  SimulatorOptions opts_;
  Rng rng_;
  double t_ = 0.0;
  std::size_t count_ = 0;
  std::vector<std::int64_t> pi0_;
  std::vector<double> x_;  // count x (n+m), coordinates 1..n+m
  Vector sums_;
  Vector abs_sums_;
  std::int64_t pi0_sum_ = 0;
  std::vector<Fenwick> samplers_;  // one per coordinate 1..n+m on |pi_i|
  Fenwick pi0_sampler_;            // only used by the jump hook
  std::uint64_t merges_ = 0;
  std::uint64_t proposals_ = 0;
  std::uint64_t jumps_ = 0;
  std::uint64_t since_resync_ = 0;
};

}  // namespace gelk
