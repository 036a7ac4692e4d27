#include "gelk/survival.hpp"

#include <cmath>
#include <sstream>

#include "gelk/error.hpp"
#include "gelk/spectral.hpp"

namespace gelk {

namespace {

// Atom data in matrix form: rows are atoms, columns the nonnegative coordinates.
struct PlusTable {
  Matrix p;
  Vector w;

  explicit PlusTable(const AtomicMeasure& mu)
      : p(static_cast<Eigen::Index>(mu.size()), mu.n()), w(static_cast<Eigen::Index>(mu.size())) {
    for (std::size_t k = 0; k < mu.size(); ++k) {
      p.row(static_cast<Eigen::Index>(k)) = mu.atoms()[k].x.plus.transpose();
      w[static_cast<Eigen::Index>(k)] = mu.atoms()[k].w;
    }
  }

  Vector survival(const Vector& c) const {
    Vector exponent = p * c;
    return exponent.unaryExpr([](double u) { return -std::expm1(-u); });
  }

  Vector f(const Matrix& a_plus, const Vector& c) const {
    return a_plus * (p.transpose() * survival(c).cwiseProduct(w));
  }
};

}  // namespace

Vector f_map(const BilinearSystem& sys, const AtomicMeasure& mu, const Vector& c) {
  if (c.size() != sys.n()) throw InvalidArgument("f_map: c must have n components");
  return PlusTable(mu).f(sys.a_plus(), c);
}

SurvivalCoefficients solve_c(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                             const SurvivalOptions& opts) {
  if (!(t >= 0.0)) throw InvalidArgument("solve_c: t must be nonnegative");
  SurvivalCoefficients out;
  out.t = t;
  out.c = Vector::Zero(sys.n());
  const SpectralResult spec = analyze_spectrum(sys, mu);
  // c_t = 0 exactly for t <= t_g; iterating there only exhibits critical slowing.
  if (t * spec.radius <= 1.0) return out;

  const PlusTable table(mu);
  Vector c = t * sys.a_plus() * (table.p.transpose() * table.w);
  int it = 0;
  double step = 0.0;
  for (; it < opts.max_iter; ++it) {
    Vector next = t * table.f(sys.a_plus(), c);
    step = (next - c).cwiseAbs().maxCoeff();
    c = std::move(next);
    if (step < opts.step_tol) break;
  }
  if (it == opts.max_iter) {
    std::ostringstream os;
    os << "fixed point iteration at t=" << t << " stalled (last step " << step << ")";
    throw SlowConvergence(os.str());
  }
  if (c.cwiseAbs().maxCoeff() < 10.0 * opts.step_tol) c.setZero();
  out.c = c;
  out.iterations = it + 1;
  out.residual = (c - t * table.f(sys.a_plus(), c)).cwiseAbs().maxCoeff();
  return out;
}

std::vector<double> survival_function(const AtomicMeasure& mu, const Vector& c) {
  std::vector<double> rho;
  rho.reserve(mu.size());
  for (const Atom& a : mu.atoms()) rho.push_back(-std::expm1(-a.x.plus.dot(c)));
  return rho;
}

GelData gel_from_coefficients(const AtomicMeasure& mu, const Vector& c) {
  GelData gel{Vector::Zero(1 + mu.n() + mu.m())};
  for (const Atom& a : mu.atoms()) {
    const double rho = -std::expm1(-a.x.plus.dot(c));
    if (rho != 0.0) gel.g += (a.w * rho) * a.x.coords();
  }
  return gel;
}

GelData gel_data(const BilinearSystem& sys, const AtomicMeasure& mu, double t,
                 const SurvivalOptions& opts) {
  return gel_from_coefficients(mu, solve_c(sys, mu, t, opts).c);
}

AtomicMeasure tilted_measure(const AtomicMeasure& mu, const Vector& c) {
  std::vector<double> factors;
  factors.reserve(mu.size());
  for (const Atom& a : mu.atoms()) factors.push_back(std::exp(-a.x.plus.dot(c)));
  return mu.reweighted(factors);
}

CriticalSlope critical_slope(const BilinearSystem& sys, const AtomicMeasure& mu) {
  const SpectralResult spec = analyze_spectrum(sys, mu);
  const int n = sys.n();
  // b_j = <pi_j (psi . pi)^2, mu0>
  Vector b = Vector::Zero(n);
  for (const Atom& a : mu.atoms()) {
    const double f = a.x.plus.dot(spec.psi);
    b += (a.w * f * f) * a.x.plus;
  }
  if (b.cwiseAbs().maxCoeff() <= 1e-300) {
    throw DegenerateCubic("cubic moments vanish along the Perron direction");
  }
  const Vector sigma = 0.5 * sys.a_plus() * b;
  const Matrix q = gram_matrix(mu);
  const double denom = spec.t_g * spec.t_g * spec.psi.dot(q * sigma);
  if (!(denom > 0.0)) throw DegenerateCubic("quadratic coefficient is not positive");

  CriticalSlope out;
  out.c_prime = spec.psi / denom;
  const Matrix mixed = moment_matrix(mu, coordinate_range(0, n), coordinate_range(1, n));
  out.g_prime = mixed * out.c_prime;
  return out;
}

SizeBiasReport size_bias_check(const BilinearSystem& sys, const AtomicMeasure& mu, double tol) {
  const SpectralResult spec = analyze_spectrum(sys, mu);
  const CriticalSlope slope = critical_slope(sys, mu);
  const int n = sys.n();
  const Vector first = mu.first_moments();

  SizeBiasReport out;
  out.theta = spec.psi / spec.psi.sum();
  out.lhs = out.theta.dot(slope.g_prime.tail(n));
  out.rhs = out.theta.dot(first.segment(1, n)) / first[0] * slope.g_prime[0];
  out.holds = out.lhs >= out.rhs - tol * std::max(1.0, std::abs(out.rhs));

  const Vector s = interaction_rates(sys, mu);
  const double mass = mu.total_mass();
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double sk = s[static_cast<Eigen::Index>(k)];
    mean += mu.atoms()[k].w * sk;
    second += mu.atoms()[k].w * sk * sk;
  }
  mean /= mass;
  second /= mass;
  out.s_variance = std::max(0.0, second - mean * mean);
  out.strict = out.s_variance > tol * std::max(mean * mean, 1e-300);
  return out;
}

}  // namespace gelk
