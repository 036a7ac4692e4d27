#include "gelk/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gelk {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeResult integrate_dopri5(const OdeRhs& rhs, double t0, double t1, std::vector<double>& y,
                           const OdeOptions& opts, const OdeObserver& observer) {
  OdeResult result;
  result.t = t0;
  const std::size_t dim = y.size();
  if (t1 <= t0 || dim == 0) return result;

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  std::vector<double> tmp(dim), y_new(dim);
  auto eval = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    rhs(t, std::span<const double>(state), std::span<double>(out));
  };

  double t = t0;
  eval(t, y, k1);

  double h = opts.initial_step;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, t1 - t0);
  }
  const double max_step = opts.max_step > 0.0 ? opts.max_step : (t1 - t0);
  double err_prev = 1e-4;

  while (t < t1) {
    if (result.accepted + result.rejected >= opts.max_steps) {
      result.status = OdeStatus::max_steps;
      break;
    }
    h = std::min({h, max_step, t1 - t});
    const double h_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < h_floor) {
      result.status = OdeStatus::step_collapse;
      break;
    }

    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    eval(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    eval(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    eval(t + h, tmp, k6);
    for (std::size_t i = 0; i < dim; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    eval(t + h, y_new, k7);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < dim; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double r = e / sc;
      err += r * r;
      if (!std::isfinite(y_new[i])) finite = false;
    }
    err = std::sqrt(err / static_cast<double>(dim));
    if (!finite || !std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      t = (t1 - t - h <= h_floor) ? t1 : t + h;
      y.swap(y_new);
      k1.swap(k7);
      ++result.accepted;
      result.t = t;
      // PI controller (Hairer-Wanner constants for order 5).
      const double err_c = std::max(err, 1e-10);
      double factor = 0.9 * std::pow(err_c, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      factor = std::clamp(factor, 0.2, 5.0);
      err_prev = err_c;
      h *= factor;
      if (observer && !observer(t, std::span<const double>(y))) {
        result.status = OdeStatus::stopped_by_observer;
        return result;
      }
    } else {
      ++result.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  if (result.status == OdeStatus::reached_end) result.t = t1;
  return result;
}

}  // namespace gelk
