#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  if (flo * f(hi) > 0) throw std::invalid_argument("bisect: no sign change");
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Positive root of M = 1 - exp(-t M) for t > 1 (Erdos-Renyi giant fraction).
inline double giant_fraction(double t) {
  if (t <= 1.0) return 0.0;
  return bisect([t](double m) { return m - (1.0 - std::exp(-t * m)); }, 1e-9, 1.0);
}

/// Positive root of c = t (1 - exp(-c)), the monodisperse survival coefficient.
inline double monodisperse_c(double t) {
  if (t <= 1.0) return 0.0;
  return bisect([t](double c) { return c - t * (1.0 - std::exp(-c)); }, 1e-9, t + 1.0);
}

/// Closed-form solution of dQ/dt = Q A Q: Q(t) = (Q0^{-1} - t A)^{-1}.
inline Eigen::MatrixXd riccati(const Eigen::MatrixXd& q0, const Eigen::MatrixXd& a, double t) {
  return (q0.inverse() - t * a).inverse();
}

/// Richardson extrapolation to h -> 0 of a first-order difference quotient.
inline double richardson(const std::function<double(double)>& quotient, double h) {
  return 2.0 * quotient(h / 2.0) - quotient(h);
}

}  // namespace oracle
