#include "gelk/spectral.hpp"

#include <cmath>
#include <sstream>

#include "gelk/error.hpp"

namespace gelk {

namespace {

Eigen::LLT<Matrix> checked_cholesky(const Matrix& q) {
  Eigen::LLT<Matrix> llt(q);
  const double scale = std::max(1.0, q.diagonal().cwiseAbs().maxCoeff());
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().array().square().minCoeff() <= 1e-14 * scale) {
    throw DegenerateMeasure("Gram matrix of the nonnegative coordinates is singular");
  }
  return llt;
}

}  // namespace

Matrix lambda_matrix(const BilinearSystem& sys, const AtomicMeasure& mu) {
  const Matrix q = gram_matrix(mu);
  checked_cholesky(q);
  return sys.a_plus() * q;
}

SpectralResult analyze_spectrum(const BilinearSystem& sys, const AtomicMeasure& mu) {
  const Matrix q = gram_matrix(mu);
  const auto llt = checked_cholesky(q);
  const Matrix l = llt.matrixL();
  const Matrix sym = l.transpose() * sys.a_plus() * l;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()));
  if (eig.info() != Eigen::Success) throw NoConvergence("symmetric eigensolver failed");

  SpectralResult out;
  out.lambda_matrix = sys.a_plus() * q;
  const Eigen::Index top = eig.eigenvalues().size() - 1;
  out.radius = eig.eigenvalues()[top];
  if (!(out.radius > 0.0)) throw DegenerateMeasure("Lambda has no positive eigenvalue");
  // A_plus Q c = r c  <=>  L^T A_plus L u = r u with c = L^{-T} u.
  Vector u = eig.eigenvectors().col(top);
  Vector psi = l.transpose().triangularView<Eigen::Upper>().solve(u);
  if (psi.sum() < 0.0) psi = -psi;
  psi /= std::sqrt(psi.dot(q * psi));
  out.psi = psi;
  out.t_g = 1.0 / out.radius;
  return out;
}

PowerIterationResult spectral_radius(const Matrix& m, double tol, int max_iter) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("spectral_radius: square matrix required");
  const Eigen::Index k = m.rows();
  // Shift by the row-sum bound so every eigenvalue of M + sI is >= 0 and the
  // largest one of M stays dominant.
  const double shift = m.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix shifted = m + shift * Matrix::Identity(k, k);
  Vector v = Vector::Ones(k) / std::sqrt(static_cast<double>(k));

  PowerIterationResult out;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = shifted * v;
    const double norm = w.norm();
    if (!(norm > 0.0)) throw NoConvergence("power iteration collapsed to zero");
    v = w / norm;
    if (it % 8 != 0 && it != max_iter) continue;
    const Vector mv = m * v;
    const double r = v.dot(mv);
    const double residual = (mv - r * v).norm() / std::max(std::abs(r), 1e-300);
    if (residual <= tol) {
      out.radius = r;
      out.psi = v.sum() < 0.0 ? Vector(-v) : v;
      out.iterations = it;
      out.residual = residual;
      return out;
    }
  }
  std::ostringstream os;
  os << "power iteration did not converge in " << max_iter << " iterations";
  throw NoConvergence(os.str());
}

double gelation_time(const BilinearSystem& sys, const AtomicMeasure& mu) {
  return analyze_spectrum(sys, mu).t_g;
}

Vector interaction_rates(const BilinearSystem& sys, const AtomicMeasure& mu) {
  // s(x) = sum_ij a_ij pi_i(x) <pi_j, mu0>
  const Vector first = mu.first_moments();
  const Vector a_first = sys.block_matrix() * first.tail(sys.dim());
  Vector s(static_cast<Eigen::Index>(mu.size()));
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const TypeVector& x = mu.atoms()[k].x;
    s[static_cast<Eigen::Index>(k)] = x.coords().tail(sys.dim()).dot(a_first);
  }
  return s;
}

double mean_free_time(const BilinearSystem& sys, const AtomicMeasure& mu) {
  const Vector s = interaction_rates(sys, mu);
  double mean = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) mean += mu.atoms()[k].w * s[static_cast<Eigen::Index>(k)];
  mean /= mu.total_mass();
  return 1.0 / mean;
}

}  // namespace gelk
