#pragma once

// Flory dynamics truncated to types of bounded size. Types are compositions
// (counts of each initial species), particles larger than the cutoff are
// moved into a truncated gel that only keeps pi-data.
//
// The size of a type is the sum of its nonnegative coordinates pi_1..pi_n
// (pi_0 excluded, so a unit-mass monomer has size 1).

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gelk/core.hpp"

namespace gelk {

struct CompositionType {
  std::vector<int> counts;
  friend bool operator==(const CompositionType&, const CompositionType&) = default;
};

/// Truncation size of a type vector.
double truncation_size(const TypeVector& x);

/// All compositions with at least one particle and size <= xi. Throws
/// BudgetExceeded beyond `max_types` and InvalidArgument when a species has
/// zero size (the type space would be infinite).
std::vector<CompositionType> enumerate_types(const std::vector<TypeVector>& species, double xi,
                                             std::size_t max_types = 100000);

struct TruncatedState {
  double t = 0.0;
  std::vector<double> densities;  // indexed like TruncatedFlory::types()
  Vector gel;                     // truncated gel pi-data, length 1+n+m
  Vector clamp_adjustment;        // pi-data added back by clamping negatives

  /// <phi, mu> over the tracked types.
  double phi_sol(const class TruncatedFlory& space) const;
};

struct TruncatedDerivative {
  std::vector<double> densities;
  Vector gel;
};

struct TruncatedOptions {
  double rtol = 1e-10;
  double atol = 1e-14;
  std::size_t max_types = 100000;
  double clamp_floor = -1e-12;
};

class TruncatedFlory {
 public:
  TruncatedFlory(const BilinearSystem& sys, const AtomicMeasure& mu, double xi,
                 const TruncatedOptions& opts = {});

  double xi() const { return xi_; }
  const std::vector<CompositionType>& types() const { return types_; }
  const std::vector<TypeVector>& type_data() const { return data_; }
  std::size_t size() const { return types_.size(); }

  /// Index of a composition, or -1 when it lies outside the truncation.
  long index_of(const CompositionType& c) const;

  /// mu0 restricted to S_xi, gel = pi-data of mu0 outside S_xi.
  TruncatedState initial_state() const;

  TruncatedDerivative rhs(const TruncatedState& state) const;

  /// Integrates to each checkpoint; returns one state per checkpoint.
  std::vector<TruncatedState> integrate(const std::vector<double>& checkpoints) const;

 private:
  void rhs_raw(const double* u, const double* gel, double* du, double* dgel) const;
  std::uint64_t key_of(const std::vector<int>& counts) const;

  const BilinearSystem& sys_;
  const AtomicMeasure& mu_;
  double xi_;
  TruncatedOptions opts_;
  std::vector<CompositionType> types_;
  std::vector<TypeVector> data_;
  std::vector<Vector> coords_;    // (1+n+m) coordinates per type
  std::vector<Vector> a_coords_;  // A applied to coordinates 1..n+m
  std::vector<double> phi_;
  std::vector<std::uint64_t> radix_;
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, long> index_;
  std::vector<long> singleton_;  // species -> type index or -1
};

struct TruncatedTrajectory {
  std::vector<CompositionType> types;
  std::vector<TypeVector> type_data;
  std::vector<TruncatedState> states;
};

TruncatedTrajectory integrate_truncated(const BilinearSystem& sys, const AtomicMeasure& mu, double xi,
                                        const std::vector<double>& checkpoints,
                                        const TruncatedOptions& opts = {});

}  // namespace gelk
