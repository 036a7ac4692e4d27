#include "gelk/restricted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gelk/error.hpp"
#include "gelk/ode.hpp"

namespace gelk {

namespace {

constexpr double kSizeSlack = 1e-12;

}  // namespace

double truncation_size(const TypeVector& x) { return x.plus.sum(); }

std::vector<CompositionType> enumerate_types(const std::vector<TypeVector>& species, double xi,
                                             std::size_t max_types) {
  std::vector<double> sizes;
  for (const TypeVector& s : species) {
    const double size = truncation_size(s);
    if (!(size > 0.0)) throw InvalidArgument("enumerate_types: a species has zero size");
    sizes.push_back(size);
  }
  std::vector<CompositionType> out;
  std::vector<int> counts(species.size(), 0);
  const double limit = xi * (1.0 + kSizeSlack);

  // Depth-first over species with the remaining size budget.
  auto recurse = [&](auto& self, std::size_t s, double used, bool any) -> void {
    if (s == species.size()) {
      if (any) {
        if (out.size() >= max_types) {
          throw BudgetExceeded("type enumeration exceeds " + std::to_string(max_types) + " types");
        }
        out.push_back(CompositionType{counts});
      }
      return;
    }
    for (int k = 0;; ++k) {
      const double total = used + k * sizes[s];
      if (total > limit) break;
      counts[s] = k;
      self(self, s + 1, total, any || k > 0);
    }
    counts[s] = 0;
  };
  recurse(recurse, 0, 0.0, false);
  return out;
}

double TruncatedState::phi_sol(const TruncatedFlory& space) const {
  double total = 0.0;
  for (std::size_t k = 0; k < densities.size(); ++k) total += densities[k] * space.type_data()[k].phi();
  return total;
}

TruncatedFlory::TruncatedFlory(const BilinearSystem& sys, const AtomicMeasure& mu, double xi,
                               const TruncatedOptions& opts)
    : sys_(sys), mu_(mu), xi_(xi), opts_(opts) {
  if (!(xi > 0.0)) throw InvalidArgument("truncation level must be positive");
  std::vector<TypeVector> species;
  for (const Atom& a : mu.atoms()) species.push_back(a.x);

  types_ = enumerate_types(species, xi, opts.max_types);

  // Mixed-radix keys with digit range 2*max+1 so that adding two in-range
  // keys never carries.
  std::uint64_t place = 1;
  for (const TypeVector& s : species) {
    const auto max_count = static_cast<std::uint64_t>(std::floor(xi * (1.0 + kSizeSlack) / truncation_size(s)));
    const std::uint64_t radix = 2 * max_count + 1;
    radix_.push_back(place);
    if (place > std::numeric_limits<std::uint64_t>::max() / radix) {
      throw BudgetExceeded("composition keys overflow 64 bits");
    }
    place *= radix;
  }

  const int dim = sys.dim();
  for (const CompositionType& c : types_) {
    TypeVector x{0, Vector::Zero(sys.n()), Vector::Zero(sys.m())};
    for (std::size_t s = 0; s < species.size(); ++s) {
      if (c.counts[s] == 0) continue;
      x.pi0 += c.counts[s] * species[s].pi0;
      x.plus += c.counts[s] * species[s].plus;
      x.par += c.counts[s] * species[s].par;
    }
    Vector coords = x.coords();
    a_coords_.push_back(sys.block_matrix() * coords.tail(dim));
    coords_.push_back(std::move(coords));
    phi_.push_back(x.phi());
    data_.push_back(std::move(x));
    const std::uint64_t key = key_of(c.counts);
    keys_.push_back(key);
    index_.emplace(key, static_cast<long>(keys_.size() - 1));
  }
  for (std::size_t s = 0; s < species.size(); ++s) {
    std::vector<int> unit(species.size(), 0);
    unit[s] = 1;
    singleton_.push_back(index_of(CompositionType{unit}));
  }
}

std::uint64_t TruncatedFlory::key_of(const std::vector<int>& counts) const {
  std::uint64_t key = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) key += static_cast<std::uint64_t>(counts[s]) * radix_[s];
  return key;
}

long TruncatedFlory::index_of(const CompositionType& c) const {
  if (c.counts.size() != radix_.size()) return -1;
  for (std::size_t s = 0; s < c.counts.size(); ++s) {
    if (c.counts[s] < 0) return -1;
  }
  auto it = index_.find(key_of(c.counts));
  if (it == index_.end() || !(types_[static_cast<std::size_t>(it->second)] == c)) return -1;
  return it->second;
}

TruncatedState TruncatedFlory::initial_state() const {
  TruncatedState s;
  s.t = 0.0;
  s.densities.assign(types_.size(), 0.0);
  s.gel = Vector::Zero(1 + sys_.dim());
  s.clamp_adjustment = Vector::Zero(1 + sys_.dim());
  for (std::size_t k = 0; k < mu_.size(); ++k) {
    const Atom& a = mu_.atoms()[k];
    if (singleton_[k] >= 0) {
      s.densities[static_cast<std::size_t>(singleton_[k])] += a.w;
    } else {
      s.gel += a.w * a.x.coords();
    }
  }
  return s;
}

void TruncatedFlory::rhs_raw(const double* u, const double* gel, double* du, double* dgel) const {
  const std::size_t count = types_.size();
  const int dim = sys_.dim();
  const Eigen::Map<const Vector> g(gel, 1 + dim);
  Eigen::Map<Vector> dg(dgel, 1 + dim);
  std::fill(du, du + count, 0.0);
  dg.setZero();

  for (std::size_t a = 0; a < count; ++a) {
    const double ua = u[a];
    if (ua == 0.0) continue;
    // Absorption by the truncated gel.
    const double absorb = ua * a_coords_[a].dot(g.tail(dim));
    if (absorb != 0.0) {
      du[a] -= absorb;
      dg += absorb * coords_[a];
    }
    for (std::size_t b = a; b < count; ++b) {
      const double ub = u[b];
      if (ub == 0.0) continue;
      const double k = a_coords_[a].dot(coords_[b].tail(dim));
      if (k <= 0.0) continue;
      // Ordered-pair integral with the 1/2: a != b contributes once per
      // unordered pair, a == b contributes half.
      const double rate = (a == b ? 0.5 : 1.0) * k * ua * ub;
      du[a] -= rate;
      du[b] -= rate;
      auto it = index_.find(keys_[a] + keys_[b]);
      if (it != index_.end()) {
        du[it->second] += rate;
      } else {
        dg += rate * (coords_[a] + coords_[b]);
      }
    }
  }
}

TruncatedDerivative TruncatedFlory::rhs(const TruncatedState& state) const {
  TruncatedDerivative d;
  d.densities.assign(types_.size(), 0.0);
  d.gel = Vector::Zero(1 + sys_.dim());
  rhs_raw(state.densities.data(), state.gel.data(), d.densities.data(), d.gel.data());
  return d;
}

std::vector<TruncatedState> TruncatedFlory::integrate(const std::vector<double>& checkpoints) const {
  const std::size_t count = types_.size();
  const int gdim = 1 + sys_.dim();
  TruncatedState state = initial_state();
  std::vector<double> y(count + static_cast<std::size_t>(gdim));
  std::copy(state.densities.begin(), state.densities.end(), y.begin());
  std::copy(state.gel.data(), state.gel.data() + gdim, y.begin() + static_cast<long>(count));

  OdeRhs f = [this, count](double, std::span<const double> s, std::span<double> ds) {
    rhs_raw(s.data(), s.data() + count, ds.data(), ds.data() + count);
  };
  OdeOptions ode;
  ode.rtol = opts_.rtol;
  ode.atol = opts_.atol;

  std::vector<double> stops = checkpoints;
  std::sort(stops.begin(), stops.end());
  std::vector<TruncatedState> out;
  double t = 0.0;
  for (double stop : stops) {
    if (stop < 0.0) throw InvalidArgument("checkpoints must be nonnegative");
    if (stop > t) {
      const OdeResult res = integrate_dopri5(f, t, stop, y, ode);
      if (res.status != OdeStatus::reached_end) {
        throw ToleranceFailure("truncated Flory integration failed");
      }
      t = stop;
    }
    for (std::size_t k = 0; k < count; ++k) {
      if (y[k] < 0.0) {
        if (y[k] < opts_.clamp_floor) throw ToleranceFailure("density dropped below the clamp floor");
        state.clamp_adjustment -= y[k] * coords_[k];
        y[k] = 0.0;
      }
    }
    state.t = t;
    state.densities.assign(y.begin(), y.begin() + static_cast<long>(count));
    state.gel = Eigen::Map<const Vector>(y.data() + count, gdim);
    out.push_back(state);
  }
  return out;
}

TruncatedTrajectory integrate_truncated(const BilinearSystem& sys, const AtomicMeasure& mu, double xi,
                                        const std::vector<double>& checkpoints,
                                        const TruncatedOptions& opts) {
  TruncatedFlory space(sys, mu, xi, opts);
  TruncatedTrajectory out;
  out.states = space.integrate(checkpoints);
  out.types = space.types();
  out.type_data = space.type_data();
  return out;
}

}  // namespace gelk
