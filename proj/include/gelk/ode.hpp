#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gelk {

/// dy/dt = f(t, y), written into the third argument.
using OdeRhs = std::function<void(double, std::span<const double>, std::span<double>)>;
/// Called after every accepted step; returning false stops the integration.
using OdeObserver = std::function<bool(double, std::span<const double>)>;

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 picks a step from the initial derivative
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 10'000'000;
};

enum class OdeStatus { reached_end, stopped_by_observer, step_collapse, max_steps };

struct OdeResult {
  OdeStatus status = OdeStatus::reached_end;
  double t = 0.0;
  long accepted = 0;
  long rejected = 0;
};

/// Dormand-Prince 5(4) with PI step control. `y` holds the initial state and
/// receives the final one.
OdeResult integrate_dopri5(const OdeRhs& rhs, double t0, double t1, std::vector<double>& y,
                           const OdeOptions& opts = {}, const OdeObserver& observer = {});

}  // namespace gelk
