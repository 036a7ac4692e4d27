#include "gelk/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gelk/error.hpp"
#include "gelk/spectral.hpp"
#include "gelk/survival.hpp"

namespace gelk {

double MomentState::energy() const {
  double e = z[0];
  for (Eigen::Index i = 1; i < z.size(); ++i) e += 2.0 * z[i];
  return e + q.sum();
}

double MomentState::cauchy_schwarz_excess() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      worst = std::max(worst, q(i, j) * q(i, j) - q(i, i) * q(j, j));
    }
  }
  return worst;
}

MomentState initial_moments(const AtomicMeasure& mu) {
  MomentState s;
  s.t = 0.0;
  s.q = gram_matrix(mu);
  s.z = moment_matrix(mu, {0}, coordinate_range(0, mu.n())).row(0).transpose();
  s.first = mu.first_moments();
  return s;
}

MomentDerivative moment_rhs(const BilinearSystem& sys, const MomentState& state) {
  const Matrix& a = sys.a_plus();
  const int n = sys.n();
  MomentDerivative d;
  const Matrix aq = a * state.q;
  d.dq = state.q * aq;
  d.dq = 0.5 * (d.dq + d.dq.transpose()).eval();
  const Vector zp = state.z.tail(n);
  d.dz = Vector(n + 1);
  d.dz[0] = zp.dot(a * zp);
  d.dz.tail(n) = (zp.transpose() * aq).transpose();
  return d;
}

namespace {

std::vector<double> pack(const MomentState& s) {
  const Eigen::Index n = s.q.rows();
  std::vector<double> y(static_cast<std::size_t>(n * n + n + 1));
  std::copy(s.q.data(), s.q.data() + n * n, y.begin());
  std::copy(s.z.data(), s.z.data() + n + 1, y.begin() + n * n);
  return y;
}

void unpack(std::span<const double> y, int n, MomentState& s) {
  s.q = Eigen::Map<const Matrix>(y.data(), n, n);
  s.z = Eigen::Map<const Vector>(y.data() + n * n, n + 1);
}

OdeRhs moment_ode(const BilinearSystem& sys) {
  const int n = sys.n();
  return [&sys, n](double, std::span<const double> y, std::span<double> dy) {
    MomentState s;
    unpack(y, n, s);
    const MomentDerivative d = moment_rhs(sys, s);
    std::copy(d.dq.data(), d.dq.data() + n * n, dy.begin());
    std::copy(d.dz.data(), d.dz.data() + n + 1, dy.begin() + n * n);
  };
}

double max_abs(std::span<const double> y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

MomentState integrate_subcritical(const BilinearSystem& sys, const MomentState& state0, double t_end,
                                  const MomentOptions& opts, const MomentObserver& observer) {
  if (t_end < state0.t) throw InvalidArgument("integrate_subcritical: t_end precedes the start");
  if (state0.q.rows() != sys.n() || state0.z.size() != sys.n() + 1) {
    throw InvalidArgument("integrate_subcritical: state dimensions do not match the system");
  }
  MomentState out = state0;
  if (t_end == state0.t) return out;

  const int n = sys.n();
  std::vector<double> y = pack(state0);
  bool blew_up = false;
  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;
  auto obs = [&](double t, std::span<const double> state) {
    if (max_abs(state) > opts.blowup_threshold) {
      blew_up = true;
      return false;
    }
    if (observer) {
      MomentState s;
      s.t = t;
      unpack(state, n, s);
      s.first = state0.first;
      observer(s);
    }
    return true;
  };
  const OdeResult res = integrate_dopri5(moment_ode(sys), state0.t, t_end, y, ode, obs);
  if (blew_up || res.status != OdeStatus::reached_end) {
    std::ostringstream os;
    os << "second moments explode before t=" << t_end << " (stopped at t=" << res.t << ")";
    throw ExplosionReached(os.str());
  }
  out.t = t_end;
  unpack(y, n, out);
  return out;
}

double explosion_time(const BilinearSystem& sys, const MomentState& state0, const MomentOptions& opts) {
  std::vector<double> y = pack(state0);
  struct Sample {
    double t;
    double q;
  };
  std::vector<Sample> samples;
  samples.push_back({state0.t, max_abs(y)});
  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;
  auto obs = [&](double t, std::span<const double> state) {
    const double q = max_abs(state);
    samples.push_back({t, q});
    return q <= opts.blowup_threshold;
  };
  const double scale = sys.a_plus().norm() * std::max(max_abs(y), 1e-300);
  const double horizon = state0.t + 1e6 / scale;
  const OdeResult res = integrate_dopri5(moment_ode(sys), state0.t, horizon, y, ode, obs);
  if (res.status == OdeStatus::reached_end || res.status == OdeStatus::max_steps) {
    throw NoConvergence("second moments did not blow up within the search horizon");
  }
  if (samples.size() < 3) throw NoConvergence("too few steps to locate the blowup");

  // Least-squares fit of 1/q = (zeta - t)/C over the last decade of growth.
  const double top = samples.back().q;
  std::vector<Sample> fit;
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (it->q < top / 10.0 && fit.size() >= 3) break;
    fit.push_back(*it);
  }
  double st = 0, su = 0, stt = 0, stu = 0;
  const double t_ref = fit.front().t;
  for (const Sample& s : fit) {
    const double dt = s.t - t_ref;
    const double u = 1.0 / s.q;
    st += dt;
    su += u;
    stt += dt * dt;
    stu += dt * u;
  }
  const double k = static_cast<double>(fit.size());
  const double slope = (k * stu - st * su) / (k * stt - st * st);
  const double intercept = (su - slope * st) / k;
  if (!(slope < 0.0)) return t_ref;
  return t_ref - intercept / slope;
}

MomentState supercritical_moments(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                                  const MomentOptions& opts) {
  const double t_g = gelation_time(sys, mu);
  if (!(t > t_g)) throw InvalidArgument("supercritical_moments requires t > t_g");
  const SurvivalCoefficients c = solve_c(sys, mu, t);
  const AtomicMeasure dual = tilted_measure(mu, c.c);
  const double t_dual = gelation_time(sys, dual);
  if (t >= t_dual * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "tilted measure is not subcritical: t=" << t << ", dual gelation time " << t_dual;
    throw DualNotSubcritical(os.str());
  }
  MomentState out = integrate_subcritical(sys, initial_moments(dual), t, opts);
  out.first = dual.first_moments();
  return out;
}

std::string phase_name(MomentPhase phase) {
  switch (phase) {
    case MomentPhase::sol_subcritical:
      return "sol-subcritical";
    case MomentPhase::critical:
      return "critical";
    case MomentPhase::supercritical_dual:
      return "supercritical-dual";
  }
  return "unknown";
}

PhasedMoments sol_moments(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                          const MomentOptions& opts) {
  const double t_g = gelation_time(sys, mu);
  if (t < t_g) {
    MomentState s = integrate_subcritical(sys, initial_moments(mu), t, opts);
    s.first = mu.first_moments();
    return {s, MomentPhase::sol_subcritical};
  }
  if (t > t_g) return {supercritical_moments(sys, mu, t, opts), MomentPhase::supercritical_dual};
  MomentState s;
  s.t = t;
  const double inf = std::numeric_limits<double>::infinity();
  s.q = Matrix::Constant(sys.n(), sys.n(), inf);
  s.z = Vector::Constant(sys.n() + 1, inf);
  s.first = mu.first_moments();
  return {s, MomentPhase::critical};
}

Vector gel_ode_rhs(const BilinearSystem& sys, const AtomicMeasure& mu, double t, const Vector& g) {
  const int n = sys.n();
  const MomentState s = supercritical_moments(sys, mu, t);
  Matrix mixed(n + 1, n);
  mixed.row(0) = s.z.tail(n).transpose();
  mixed.bottomRows(n) = s.q;
  return mixed * (sys.a_plus() * g.tail(n));
}

std::vector<GelPoint> gel_ode(const BilinearSystem& sys, const AtomicMeasure& mu, double t_to,
                              const std::vector<double>& report_times, const GelOdeOptions& opts) {
  const int n = sys.n();
  const double t_g = gelation_time(sys, mu);
  const double t0 = t_g * (1.0 + opts.start_offset);
  if (!(t_to > t0)) throw InvalidArgument("gel_ode: t_to must exceed t_g (1 + offset)");

  const GelData g0 = gel_data(sys, mu, t0);
  std::vector<double> y(g0.g.data(), g0.g.data() + n + 1);
  std::vector<GelPoint> out;
  out.push_back({t0, g0.g.head(n + 1)});

  OdeRhs rhs = [&](double t, std::span<const double> state, std::span<double> dstate) {
    const Vector g = Eigen::Map<const Vector>(state.data(), n + 1);
    const Vector d = gel_ode_rhs(sys, mu, t, g);
    std::copy(d.data(), d.data() + n + 1, dstate.begin());
  };
  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;

  std::vector<double> stops;
  for (double t : report_times) {
    if (t > t0 && t <= t_to) stops.push_back(t);
  }
  std::sort(stops.begin(), stops.end());
  if (stops.empty() || stops.back() < t_to) {
    if (!report_times.empty()) stops.push_back(t_to);
  }

  if (report_times.empty()) {
    auto obs = [&](double t, std::span<const double> state) {
      out.push_back({t, Eigen::Map<const Vector>(state.data(), n + 1)});
      return true;
    };
    integrate_dopri5(rhs, t0, t_to, y, ode, obs);
    return out;
  }
  double t = t0;
  for (double stop : stops) {
    const OdeResult res = integrate_dopri5(rhs, t, stop, y, ode);
    if (res.status != OdeStatus::reached_end) throw ToleranceFailure("gel ODE integration failed");
    t = stop;
    out.push_back({t, Eigen::Map<const Vector>(y.data(), n + 1)});
  }
  return out;
}

}  // namespace gelk
