#pragma once

// Bilinear coagulation systems: conserved type vectors, the rate matrix and
// weighted atomic measures on type space.
//
// Coordinates are indexed 0..n+m. Index 0 is the integer particle count pi0,
// indices 1..n are the nonnegative conserved quantities and n+1..n+m the
// sign-odd ones (flipped by the reflection). The total merge rate of two
// particles is Kbar(x, y) = sum_{i,j>=1} a_ij pi_i(x) pi_j(y) with
// A = diag(A_plus, A_par).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gelk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultTolerance = 1e-9;

struct TypeVector {
  std::int64_t pi0 = 1;
  Vector plus;  // n nonnegative coordinates
  Vector par;   // m sign-odd coordinates

  int n() const { return static_cast<int>(plus.size()); }
  int m() const { return static_cast<int>(par.size()); }

  /// Coordinate i in 0..n+m (pi0 returned as a double).
  double coord(int i) const;
  /// phi(x) = pi0 + sum of the nonnegative coordinates.
  double phi() const;
  /// Full coordinate vector of length 1+n+m.
  Vector coords() const;

  static TypeVector from_coords(const Vector& coords, int n);

  friend bool operator==(const TypeVector& a, const TypeVector& b);
};

TypeVector merge(const TypeVector& x, const TypeVector& y);

class BilinearSystem {
 public:
  /// Validates symmetry (1e-12), nonnegativity of A_plus and that no row of
  /// the block matrix vanishes. Throws InvalidModel.
  BilinearSystem(Matrix a_plus, Matrix a_par, std::vector<std::string> names = {});

  int n() const { return static_cast<int>(a_plus_.rows()); }
  int m() const { return static_cast<int>(a_par_.rows()); }
  int dim() const { return n() + m(); }

  const Matrix& a_plus() const { return a_plus_; }
  const Matrix& a_par() const { return a_par_; }
  /// Block matrix entry for 1-based coordinates i, j in 1..n+m.
  double a(int i, int j) const;
  /// Full (n+m)x(n+m) block matrix.
  Matrix block_matrix() const;
  const std::vector<std::string>& names() const { return names_; }

  /// Same system with every rate multiplied by `factor`.
  BilinearSystem scaled(double factor) const;

 private:
  Matrix a_plus_;
  Matrix a_par_;
  std::vector<std::string> names_;
};

/// Total merge rate. Exactly symmetric in (x, y) and invariant under
/// simultaneous reflection. Values in [-tol, 0) are clamped to 0; anything
/// more negative throws NegativeRate.
double kbar(const BilinearSystem& sys, const TypeVector& x, const TypeVector& y,
            double tol = kDefaultTolerance);

/// Dominating rate sum_{ij} |a_ij| |pi_i(x)| |pi_j(y)| >= kbar(x, y).
double kbar_envelope(const BilinearSystem& sys, const TypeVector& x, const TypeVector& y);

TypeVector reflect(const TypeVector& x);

struct Atom {
  TypeVector x;
  double w = 0.0;
};

class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  /// Checks positive weights, consistent dimensions and pairwise distinct
  /// atoms; when `initial` is set every atom must have pi0 = 1.
  AtomicMeasure(int n, int m, std::vector<Atom> atoms, bool initial = true);

  int n() const { return n_; }
  int m() const { return m_; }
  bool initial() const { return initial_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_mass() const;

  /// <pi_i, mu> for i in 0..n+m.
  double moment(int i) const;
  /// <pi_i, mu> for all coordinates.
  Vector first_moments() const;
  /// Smallest C with sum_{i>n} pi_i^2 <= C phi^2 on the support.
  double bound_constant() const;

  /// Same atoms with weights multiplied by `factor`.
  AtomicMeasure scaled(double factor) const;
  /// Atom weights replaced by w_k * factors[k]; zero-weight atoms are dropped.
  AtomicMeasure reweighted(const std::vector<double>& factors) const;

 private:
  int n_ = 0;
  int m_ = 0;
  bool initial_ = false;
  std::vector<Atom> atoms_;
};

/// Matrix (<pi_i pi_j, mu>) over the given coordinate index sets.
Matrix moment_matrix(const AtomicMeasure& mu, const std::vector<int>& i_set,
                     const std::vector<int>& j_set);

/// Gram matrix of the nonnegative coordinates, (<pi_i pi_j, mu>)_{1<=i,j<=n}.
Matrix gram_matrix(const AtomicMeasure& mu);

std::vector<int> coordinate_range(int first, int last);

struct HypothesisReport {
  bool a1_reflection_symmetric = false;
  bool a2_third_moments_finite = false;
  bool a3_independent = false;
  bool a4_irreducible = false;
  bool a5_unit_pi0 = false;
  double a3_min_eigenvalue = 0.0;
  std::size_t a4_components = 0;
  bool point_mass = false;
  std::vector<std::string> messages;

  bool all() const {
    return a1_reflection_symmetric && a2_third_moments_finite && a3_independent &&
           a4_irreducible && a5_unit_pi0;
  }
};

HypothesisReport check_hypotheses(const BilinearSystem& sys, const AtomicMeasure& mu,
                                  double tol = kDefaultTolerance);

}  // namespace gelk
