#include "gelk/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gelk/error.hpp"

namespace gelk {

double default_xi(double scale) { return std::ceil(std::sqrt(scale)); }

ParticleSystem::ParticleSystem(const BilinearSystem& sys, const std::vector<TypeVector>& particles,
                               double scale, std::uint64_t seed, SimulatorOptions opts)
    : n_(sys.n()),
      m_(sys.m()),
      dim_(sys.dim()),
      a_(sys.block_matrix()),
      abs_a_(sys.block_matrix().cwiseAbs()),
      scale_(scale),
      opts_(std::move(opts)),
      rng_(seed) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale parameter N must be positive");
  if (opts_.jump_rate < 0.0) throw InvalidArgument("jump rate must be nonnegative");
  if (opts_.jump_rate > 0.0 && !opts_.hook) throw InvalidArgument("jump rate set without a hook");
  if (opts_.resync_interval == 0) throw InvalidArgument("resync interval must be positive");
  count_ = particles.size();
  pi0_.resize(count_);
  x_.resize(count_ * static_cast<std::size_t>(dim_));
  for (std::size_t p = 0; p < count_; ++p) {
    const TypeVector& v = particles[p];
    if (v.n() != n_ || v.m() != m_) throw InvalidArgument("particle dimensions do not match the system");
    if (v.pi0 < 1 || (v.plus.array() < 0.0).any()) throw InvalidArgument("invalid particle type vector");
    pi0_[p] = v.pi0;
    double* r = row(p);
    for (int i = 0; i < n_; ++i) r[i] = v.plus[i];
    for (int i = 0; i < m_; ++i) r[n_ + i] = v.par[i];
  }
  resync();
}

std::vector<TypeVector> sample_poisson_types(const AtomicMeasure& mu, double scale, Rng& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale parameter N must be positive");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const Atom& a : mu.atoms()) {
    total += a.w;
    cumulative.push_back(total);
  }
  const std::int64_t count = rng.poisson(scale * total);
  std::vector<TypeVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    out.push_back(mu.atoms()[static_cast<std::size_t>(it - cumulative.begin())].x);
  }
  return out;
}

ParticleSystem ParticleSystem::init_poisson(const BilinearSystem& sys, const AtomicMeasure& mu, double scale,
                                            std::uint64_t seed, SimulatorOptions opts) {
  if (mu.n() != sys.n() || mu.m() != sys.m()) throw InvalidArgument("measure dimensions do not match the system");
  Rng rng(derive_seed(seed, 0));
  return ParticleSystem(sys, sample_poisson_types(mu, scale, rng), scale, derive_seed(seed, 1), std::move(opts));
}

TypeVector ParticleSystem::particle(std::size_t p) const {
  TypeVector v{pi0_[p], Vector(n_), Vector(m_)};
  const double* r = row(p);
  for (int i = 0; i < n_; ++i) v.plus[i] = r[i];
  for (int i = 0; i < m_; ++i) v.par[i] = r[n_ + i];
  return v;
}

std::vector<TypeVector> ParticleSystem::particles() const {
  std::vector<TypeVector> out;
  out.reserve(count_);
  for (std::size_t p = 0; p < count_; ++p) out.push_back(particle(p));
  return out;
}

void ParticleSystem::resync() {
  const std::size_t cap = pi0_.size();
  sums_ = Vector::Zero(dim_);
  abs_sums_ = Vector::Zero(dim_);
  pi0_sum_ = 0;
  samplers_.assign(static_cast<std::size_t>(dim_), Fenwick());
  std::vector<double> w(cap, 0.0);
  for (int i = 0; i < dim_; ++i) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t p = 0; p < count_; ++p) {
      const double v = row(p)[i];
      w[p] = std::abs(v);
      sums_[i] += v;
      abs_sums_[i] += w[p];
    }
    samplers_[static_cast<std::size_t>(i)].build(w);
  }
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t p = 0; p < count_; ++p) {
    pi0_sum_ += pi0_[p];
    w[p] = static_cast<double>(pi0_[p]);
  }
  if (opts_.jump_rate > 0.0) pi0_sampler_.build(w);
  since_resync_ = 0;
}

double ParticleSystem::sum_drift() const {
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0, a = 0.0;
    for (std::size_t p = 0; p < count_; ++p) {
      s += row(p)[i];
      a += std::abs(row(p)[i]);
    }
    if (a == 0.0) {
      worst = std::max({worst, std::abs(sums_[i]), std::abs(abs_sums_[i])});
      continue;
    }
    worst = std::max(worst, std::abs(sums_[i] - s) / a);
    worst = std::max(worst, std::abs(abs_sums_[i] - a) / a);
  }
  return worst;
}

void ParticleSystem::rates(const double* x, const double* y, double& k, double& khat) const {
  k = 0.0;
  khat = 0.0;
  for (int i = 0; i < dim_; ++i) {
    if (x[i] == 0.0) continue;
    double row_k = 0.0, row_hat = 0.0;
    for (int j = 0; j < dim_; ++j) {
      row_k += a_(i, j) * y[j];
      row_hat += abs_a_(i, j) * std::abs(y[j]);
    }
    k += x[i] * row_k;
    khat += std::abs(x[i]) * row_hat;
  }
}

double ParticleSystem::envelope_rate() const {
  double total = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double si = samplers_[static_cast<std::size_t>(i)].total();
    if (si == 0.0) continue;
    for (int j = 0; j < dim_; ++j) total += abs_a_(i, j) * si * samplers_[static_cast<std::size_t>(j)].total();
  }
  return count_ < 2 ? 0.0 : total / (2.0 * scale_);
}

double ParticleSystem::exact_rate() const {
  double total = 0.0;
  for (std::size_t p = 0; p < count_; ++p) {
    for (std::size_t q = p + 1; q < count_; ++q) {
      double k, khat;
      rates(row(p), row(q), k, khat);
      total += std::max(k, 0.0);
    }
  }
  return total / scale_;
}

double ParticleSystem::jump_total() const {
  if (opts_.jump_rate <= 0.0 || count_ == 0) return 0.0;
  double phi = static_cast<double>(pi0_sum_);
  for (int i = 0; i < n_; ++i) phi += samplers_[static_cast<std::size_t>(i)].total();
  return opts_.jump_rate * phi;
}

std::size_t ParticleSystem::sample_from(std::size_t coord) {
  const Fenwick& f = samplers_[coord];
  const double total = f.total();
  for (;;) {
    const std::size_t p = f.find(rng_.uniform() * total);
    if (p < count_ && f.value(p) > 0.0) return p;
  }
}

void ParticleSystem::write_particle(std::size_t p, std::int64_t pi0, const double* x) {
  double* r = row(p);
  for (int i = 0; i < dim_; ++i) {
    sums_[i] += x[i] - r[i];
    abs_sums_[i] += std::abs(x[i]) - std::abs(r[i]);
    r[i] = x[i];
    samplers_[static_cast<std::size_t>(i)].set(p, std::abs(x[i]));
  }
  pi0_sum_ += pi0 - pi0_[p];
  pi0_[p] = pi0;
  if (opts_.jump_rate > 0.0) pi0_sampler_.set(p, static_cast<double>(pi0));
}

void ParticleSystem::do_merge(std::size_t p, std::size_t q) {
  std::vector<double> merged(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) merged[static_cast<std::size_t>(i)] = row(p)[i] + row(q)[i];
  const std::int64_t pi0 = pi0_[p] + pi0_[q];
  const std::vector<double> zero(static_cast<std::size_t>(dim_), 0.0);
  // Clear q first so the merged particle never counts twice in the sums.
  write_particle(q, 0, zero.data());
  write_particle(p, pi0, merged.data());
  const std::size_t last = count_ - 1;
  if (q != last) {
    const std::vector<double> moved(row(last), row(last) + dim_);
    const std::int64_t moved_pi0 = pi0_[last];
    write_particle(last, 0, zero.data());
    write_particle(q, moved_pi0, moved.data());
  }
  --count_;
  ++merges_;
}

EventRecord ParticleSystem::propose() {
  ++proposals_;
  EventRecord rec;
  rec.t = t_;
  std::vector<double> totals(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) totals[static_cast<std::size_t>(i)] = samplers_[static_cast<std::size_t>(i)].total();
  double weight = 0.0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) weight += abs_a_(i, j) * totals[static_cast<std::size_t>(i)] * totals[static_cast<std::size_t>(j)];
  }
  // Cell (i, j) with probability proportional to |a_ij| S^_i S^_j. If
  // rounding runs past the end, the last positive cell is used.
  double u = rng_.uniform() * weight;
  int ci = -1, cj = -1;
  for (int cell = 0; cell < dim_ * dim_; ++cell) {
    const int i = cell / dim_, j = cell % dim_;
    const double w = abs_a_(i, j) * totals[static_cast<std::size_t>(i)] * totals[static_cast<std::size_t>(j)];
    if (w <= 0.0) continue;
    ci = i;
    cj = j;
    if (u < w) break;
    u -= w;
  }
  const std::size_t p = sample_from(static_cast<std::size_t>(ci));
  const std::size_t q = sample_from(static_cast<std::size_t>(cj));
  if (p == q) return rec;
  double k, khat;
  rates(row(p), row(q), k, khat);
  if (k < -kDefaultTolerance * std::max(khat, 1.0)) {
    std::ostringstream os;
    os << "negative merge rate " << k << " between particles " << p << " and " << q;
    throw NegativeRate(os.str());
  }
  if (!(rng_.uniform() * khat < k)) return rec;
  do_merge(p, q);
  rec.kind = EventRecord::Kind::merge;
  rec.p = p == count_ ? q : p;  // p was the last slot and moved into q
  rec.q = q;
  return rec;
}

EventRecord ParticleSystem::jump() {
  ++jumps_;
  double totals[2] = {static_cast<double>(pi0_sum_), 0.0};
  std::vector<double> plus(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    plus[static_cast<std::size_t>(i)] = samplers_[static_cast<std::size_t>(i)].total();
    totals[1] += plus[static_cast<std::size_t>(i)];
  }
  double u = rng_.uniform() * (totals[0] + totals[1]);
  std::size_t p;
  if (u < totals[0]) {
    const double t0 = pi0_sampler_.total();
    for (;;) {
      p = pi0_sampler_.find(rng_.uniform() * t0);
      if (p < count_ && pi0_sampler_.value(p) > 0.0) break;
    }
  } else {
    u -= totals[0];
    int c = 0;
    while (c + 1 < n_ && u >= plus[static_cast<std::size_t>(c)]) {
      u -= plus[static_cast<std::size_t>(c)];
      ++c;
    }
    p = sample_from(static_cast<std::size_t>(c));
  }
  const TypeVector before = particle(p);
  TypeVector after = before;
  opts_.hook(after, rng_);
  if (after.pi0 != before.pi0 || after.plus.size() != before.plus.size() ||
      after.par.size() != before.par.size() || after.plus != before.plus) {
    throw HookViolatesConservation("internal jump hook changed a conserved coordinate");
  }
  std::vector<double> x(static_cast<std::size_t>(dim_));
  for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] = after.plus[i];
  for (int i = 0; i < m_; ++i) x[static_cast<std::size_t>(n_ + i)] = after.par[i];
  write_particle(p, after.pi0, x.data());
  EventRecord rec;
  rec.kind = EventRecord::Kind::jump;
  rec.t = t_;
  rec.p = p;
  return rec;
}

EventRecord ParticleSystem::step() {
  const double merge_rate = envelope_rate();
  const double jump_rate = jump_total();
  const double total = merge_rate + jump_rate;
  if (!(total > 0.0)) throw RateUnderflow("no event can occur: the total rate is zero");
  t_ += rng_.exponential() / total;
  EventRecord rec = (rng_.uniform() * total < jump_rate) ? jump() : propose();
  if (++since_resync_ >= opts_.resync_interval) resync();
  return rec;
}

bool ParticleSystem::advance_until(double t_stop) {
  for (;;) {
    const double merge_rate = envelope_rate();
    const double jump_rate = jump_total();
    const double total = merge_rate + jump_rate;
    if (!(total > 0.0)) {
      t_ = std::max(t_, t_stop);
      return false;
    }
    const double dt = rng_.exponential() / total;
    if (t_ + dt > t_stop) {
      // Memoryless: the next event is redrawn from t_stop.
      t_ = t_stop;
      return true;
    }
    t_ += dt;
    if (rng_.uniform() * total < jump_rate) {
      jump();
    } else {
      propose();
    }
    if (++since_resync_ >= opts_.resync_interval) resync();
  }
}

void ParticleSystem::advance_to(double t_end) {
  if (t_end < t_) throw InvalidArgument("cannot advance backwards in time");
  advance_until(t_end);
}

std::vector<Snapshot> ParticleSystem::run(const std::vector<double>& checkpoints, double xi_n) {
  std::vector<double> stops = checkpoints;
  std::sort(stops.begin(), stops.end());
  std::vector<Snapshot> out;
  for (double stop : stops) {
    if (stop < t_) throw InvalidArgument("checkpoint precedes the current time");
    advance_until(stop);
    out.push_back(snapshot(xi_n));
  }
  return out;
}

Snapshot ParticleSystem::snapshot(double xi_n) const {
  Snapshot s;
  s.t = t_;
  s.n_particles = count_;
  s.first = Vector::Zero(1 + dim_);
  s.g_largest = Vector::Zero(1 + dim_);
  s.g_threshold = Vector::Zero(1 + dim_);
  s.sol_q = Matrix::Zero(n_, n_);
  s.sol_z = Vector::Zero(1 + n_);

  std::size_t best = 0;
  double best_phi = -1.0;
  for (std::size_t p = 0; p < count_; ++p) {
    const double* r = row(p);
    const double pi0 = static_cast<double>(pi0_[p]);
    s.first[0] += pi0;
    for (int i = 0; i < dim_; ++i) s.first[1 + i] += r[i];
    double phi = pi0;
    for (int i = 0; i < n_; ++i) phi += r[i];
    if (pi0_[p] > s.largest_pi0 || (pi0_[p] == s.largest_pi0 && phi > best_phi)) {
      s.largest_pi0 = pi0_[p];
      best_phi = phi;
      best = p;
    }
    if (pi0 >= xi_n) {
      s.g_threshold[0] += pi0;
      for (int i = 0; i < dim_; ++i) s.g_threshold[1 + i] += r[i];
    }
    ++s.histogram[pi0_[p]];
  }
  for (std::size_t p = 0; p < count_; ++p) {
    if (p == best) continue;
    const double* r = row(p);
    const double pi0 = static_cast<double>(pi0_[p]);
    s.sol_z[0] += pi0 * pi0;
    for (int i = 0; i < n_; ++i) {
      s.sol_z[1 + i] += pi0 * r[i];
      for (int j = 0; j < n_; ++j) s.sol_q(i, j) += r[i] * r[j];
    }
  }
  if (count_ > 0) {
    s.largest_index = best;
    s.g_largest[0] = static_cast<double>(pi0_[best]);
    for (int i = 0; i < dim_; ++i) s.g_largest[1 + i] = row(best)[i];
  }
  const double inv = 1.0 / scale_;
  s.first *= inv;
  s.g_largest *= inv;
  s.g_threshold *= inv;
  s.sol_q *= inv;
  s.sol_z *= inv;
  return s;
}

}  // namespace gelk
