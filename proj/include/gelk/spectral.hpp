#pragma once

#include "gelk/core.hpp"

namespace gelk {

/// Spectral data of Lambda(mu0)_ij = sum_k a+_ik <pi_k pi_j, mu0>.
struct SpectralResult {
  Matrix lambda_matrix;
  double radius = 0.0;
  /// Perron eigenvector, componentwise positive, normalised so that
  /// psi^T Q psi = 1 with Q the Gram matrix of mu0.
  Vector psi;
  double t_g = 0.0;
};

/// Lambda = A_plus * Q. Throws DegenerateMeasure when Q is singular.
Matrix lambda_matrix(const BilinearSystem& sys, const AtomicMeasure& mu);

/// Largest eigenvalue of A_plus Q through the Cholesky symmetrisation
/// L^T A_plus L with Q = L L^T.
SpectralResult analyze_spectrum(const BilinearSystem& sys, const AtomicMeasure& mu);

struct PowerIterationResult {
  double radius = 0.0;
  Vector psi;  // unit Euclidean norm, positive sum
  int iterations = 0;
  double residual = 0.0;  // |M psi - r psi| / |r|
};

/// Shifted power iteration for a matrix with real spectrum whose largest
/// eigenvalue dominates. Throws NoConvergence when the relative residual
/// does not drop below `tol` within `max_iter` steps.
PowerIterationResult spectral_radius(const Matrix& m, double tol = 1e-10, int max_iter = 1'000'000);

/// 1 / radius(Lambda(mu0)).
double gelation_time(const BilinearSystem& sys, const AtomicMeasure& mu);

/// s(x) = int Kbar(x, y) mu0(dy) at every atom.
Vector interaction_rates(const BilinearSystem& sys, const AtomicMeasure& mu);

/// 1 / (mean of s over the normalised measure).
double mean_free_time(const BilinearSystem& sys, const AtomicMeasure& mu);

}  // namespace gelk
