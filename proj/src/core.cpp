#include "gelk/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gelk/error.hpp"
#include "gelk/union_find.hpp"

namespace gelk {

double TypeVector::coord(int i) const {
  if (i == 0) return static_cast<double>(pi0);
  if (i <= n()) return plus[i - 1];
  return par[i - 1 - n()];
}

double TypeVector::phi() const { return static_cast<double>(pi0) + plus.sum(); }

Vector TypeVector::coords() const {
  Vector out(1 + n() + m());
  out[0] = static_cast<double>(pi0);
  out.segment(1, n()) = plus;
  out.tail(m()) = par;
  return out;
}

TypeVector TypeVector::from_coords(const Vector& coords, int n) {
  TypeVector x;
  x.pi0 = std::llround(coords[0]);
  x.plus = coords.segment(1, n);
  x.par = coords.tail(coords.size() - 1 - n);
  return x;
}

bool operator==(const TypeVector& a, const TypeVector& b) {
  return a.pi0 == b.pi0 && a.plus.size() == b.plus.size() && a.par.size() == b.par.size() &&
         a.plus == b.plus && a.par == b.par;
}

TypeVector merge(const TypeVector& x, const TypeVector& y) {
  return TypeVector{x.pi0 + y.pi0, x.plus + y.plus, x.par + y.par};
}

TypeVector reflect(const TypeVector& x) { return TypeVector{x.pi0, x.plus, -x.par}; }

namespace {

void check_symmetric_block(const Matrix& a, const char* label) {
  if (a.rows() != a.cols()) {
    throw InvalidModel(std::string(label) + " must be square");
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12) {
        std::ostringstream os;
        os << label << " is not symmetric at (" << i << "," << j << ")";
        throw InvalidModel(os.str());
      }
    }
  }
}

// Exactly symmetric bilinear form over one diagonal block.
double block_form(const Matrix& a, const Vector& x, const Vector& y) {
  double total = 0.0;
  const Eigen::Index k = a.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    total += a(i, i) * (x[i] * y[i]);
    for (Eigen::Index j = i + 1; j < k; ++j) {
      total += a(i, j) * (x[i] * y[j] + x[j] * y[i]);
    }
  }
  return total;
}

double block_envelope(const Matrix& a, const Vector& x, const Vector& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      total += std::abs(a(i, j)) * std::abs(x[i]) * std::abs(y[j]);
    }
  }
  return total;
}

}  // namespace

BilinearSystem::BilinearSystem(Matrix a_plus, Matrix a_par, std::vector<std::string> names)
    : a_plus_(std::move(a_plus)), a_par_(std::move(a_par)), names_(std::move(names)) {
  if (a_plus_.rows() < 1) throw InvalidModel("n must be positive");
  if (a_par_.size() == 0) a_par_.resize(0, 0);
  check_symmetric_block(a_plus_, "A_plus");
  check_symmetric_block(a_par_, "A_par");
  // Store exactly symmetric blocks so that kbar is exactly symmetric.
  a_plus_ = 0.5 * (a_plus_ + a_plus_.transpose()).eval();
  a_par_ = 0.5 * (a_par_ + a_par_.transpose()).eval();
  if ((a_plus_.array() < 0.0).any()) throw InvalidModel("A_plus has a negative entry");
  for (Eigen::Index i = 0; i < a_plus_.rows(); ++i) {
    if ((a_plus_.row(i).array() == 0.0).all()) {
      throw InvalidModel("row " + std::to_string(i + 1) + " of the rate matrix vanishes");
    }
  }
  for (Eigen::Index i = 0; i < a_par_.rows(); ++i) {
    if ((a_par_.row(i).array() == 0.0).all()) {
      throw InvalidModel("row " + std::to_string(n() + i + 1) + " of the rate matrix vanishes");
    }
  }
  if (names_.empty()) {
    for (int i = 0; i <= dim(); ++i) names_.push_back("pi" + std::to_string(i));
  }
  if (static_cast<int>(names_.size()) != dim() + 1) {
    throw InvalidModel("coordinate_names must have n+m+1 entries");
  }
}

double BilinearSystem::a(int i, int j) const {
  const int nn = n();
  if (i <= nn && j <= nn) return a_plus_(i - 1, j - 1);
  if (i > nn && j > nn) return a_par_(i - 1 - nn, j - 1 - nn);
  return 0.0;
}

Matrix BilinearSystem::block_matrix() const {
  Matrix out = Matrix::Zero(dim(), dim());
  out.topLeftCorner(n(), n()) = a_plus_;
  out.bottomRightCorner(m(), m()) = a_par_;
  return out;
}

BilinearSystem BilinearSystem::scaled(double factor) const {
  return BilinearSystem(factor * a_plus_, factor * a_par_, names_);
}

double kbar(const BilinearSystem& sys, const TypeVector& x, const TypeVector& y, double tol) {
  double value = block_form(sys.a_plus(), x.plus, y.plus);
  if (sys.m() > 0) value += block_form(sys.a_par(), x.par, y.par);
  if (value < 0.0) {
    if (value < -tol) {
      std::ostringstream os;
      os << "negative merge rate " << value;
      throw NegativeRate(os.str());
    }
    value = 0.0;
  }
  return value;
}

double kbar_envelope(const BilinearSystem& sys, const TypeVector& x, const TypeVector& y) {
  double value = block_envelope(sys.a_plus(), x.plus, y.plus);
  if (sys.m() > 0) value += block_envelope(sys.a_par(), x.par, y.par);
  return value;
}

AtomicMeasure::AtomicMeasure(int n, int m, std::vector<Atom> atoms, bool initial)
    : n_(n), m_(m), initial_(initial), atoms_(std::move(atoms)) {
  for (const Atom& a : atoms_) {
    if (a.x.n() != n_ || a.x.m() != m_) throw InvalidModel("atom dimension mismatch");
    if (!(a.w > 0.0) || !std::isfinite(a.w)) throw InvalidModel("atom weights must be positive");
    if (a.x.pi0 < 1) throw InvalidModel("pi0 must be a positive integer");
    if ((a.x.plus.array() < 0.0).any()) throw InvalidModel("nonnegative coordinate below zero");
    if (initial_ && a.x.pi0 != 1) throw InvalidModel("initial measure requires pi0 = 1 on every atom");
  }
  std::vector<const TypeVector*> order;
  order.reserve(atoms_.size());
  for (const Atom& a : atoms_) order.push_back(&a.x);
  auto less = [](const TypeVector* a, const TypeVector* b) {
    if (a->pi0 != b->pi0) return a->pi0 < b->pi0;
    const Vector ca = a->coords();
    const Vector cb = b->coords();
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (*order[k] == *order[k - 1]) throw InvalidModel("atoms must be pairwise distinct");
  }
}

double AtomicMeasure::total_mass() const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.w;
  return total;
}

double AtomicMeasure::moment(int i) const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.w * a.x.coord(i);
  return total;
}

Vector AtomicMeasure::first_moments() const {
  Vector out = Vector::Zero(1 + n_ + m_);
  for (const Atom& a : atoms_) out += a.w * a.x.coords();
  return out;
}

double AtomicMeasure::bound_constant() const {
  double c = 0.0;
  for (const Atom& a : atoms_) {
    const double phi = a.x.phi();
    c = std::max(c, a.x.par.squaredNorm() / (phi * phi));
  }
  return c;
}

AtomicMeasure AtomicMeasure::scaled(double factor) const {
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.w *= factor;
  return AtomicMeasure(n_, m_, std::move(atoms), initial_);
}

AtomicMeasure AtomicMeasure::reweighted(const std::vector<double>& factors) const {
  if (factors.size() != atoms_.size()) throw InvalidArgument("reweighted: size mismatch");
  std::vector<Atom> atoms;
  atoms.reserve(atoms_.size());
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const double w = atoms_[k].w * factors[k];
    if (w > 0.0) atoms.push_back(Atom{atoms_[k].x, w});
  }
  return AtomicMeasure(n_, m_, std::move(atoms), initial_);
}

std::vector<int> coordinate_range(int first, int last) {
  std::vector<int> out;
  for (int i = first; i <= last; ++i) out.push_back(i);
  return out;
}

Matrix moment_matrix(const AtomicMeasure& mu, const std::vector<int>& i_set,
                     const std::vector<int>& j_set) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(i_set.size()),
                            static_cast<Eigen::Index>(j_set.size()));
  for (const Atom& a : mu.atoms()) {
    for (std::size_t r = 0; r < i_set.size(); ++r) {
      const double xi = a.x.coord(i_set[r]);
      for (std::size_t c = 0; c < j_set.size(); ++c) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +=
            a.w * xi * a.x.coord(j_set[c]);
      }
    }
  }
  return out;
}

Matrix gram_matrix(const AtomicMeasure& mu) {
  const auto idx = coordinate_range(1, mu.n());
  return moment_matrix(mu, idx, idx);
}

HypothesisReport check_hypotheses(const BilinearSystem& sys, const AtomicMeasure& mu, double tol) {
  HypothesisReport report;
  const auto& atoms = mu.atoms();

  // A1: R-evenness. Pairing by coordinate tolerance.
  report.a1_reflection_symmetric = true;
  for (const Atom& a : atoms) {
    const TypeVector r = reflect(a.x);
    bool found = false;
    for (const Atom& b : atoms) {
      if (b.x.pi0 != r.pi0) continue;
      if ((b.x.plus - r.plus).cwiseAbs().maxCoeff() > tol) continue;
      if (r.m() > 0 && (b.x.par - r.par).cwiseAbs().maxCoeff() > tol) continue;
      if (std::abs(b.w - a.w) > tol) continue;
      found = true;
      break;
    }
    if (!found) {
      report.a1_reflection_symmetric = false;
      report.messages.push_back("A1: an atom has no mirrored counterpart of equal weight");
      break;
    }
  }

  // A2 holds for every finite atomic measure.
  report.a2_third_moments_finite = true;

  // A3: the Gram matrix of pi_1..pi_n is positive definite.
  if (atoms.empty()) {
    report.a3_min_eigenvalue = 0.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_matrix(mu), Eigen::EigenvaluesOnly);
    report.a3_min_eigenvalue = eig.eigenvalues().minCoeff();
  }
  report.a3_independent = report.a3_min_eigenvalue > tol;
  if (!report.a3_independent) report.messages.push_back("A3: Gram matrix is singular");

  // A4: atoms connected under {Kbar > 0}. A point mass is flagged separately
  // so that monodisperse data still passes.
  UnionFind uf(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (uf.find(i) == uf.find(j)) continue;
      if (kbar(sys, atoms[i].x, atoms[j].x, tol) > tol) uf.unite(i, j);
    }
  }
  report.a4_components = uf.components();
  report.a4_irreducible = uf.components() <= 1;
  report.point_mass = atoms.size() == 1;
  if (!report.a4_irreducible) report.messages.push_back("A4: kernel is reducible on the support");
  if (report.point_mass) report.messages.push_back("note: the measure is a point mass");

  report.a5_unit_pi0 =
      std::all_of(atoms.begin(), atoms.end(), [](const Atom& a) { return a.x.pi0 == 1; });
  if (!report.a5_unit_pi0) report.messages.push_back("A5: an atom has pi0 != 1");
  return report;
}

}  // namespace gelk
