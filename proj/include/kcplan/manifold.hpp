#pragma once

// Implicit manifolds {x | F(x) = 0} and the numerical primitives used to stay
// on them: residuals, Jacobians, Newton projections and tangent bases.

#include "kcplan/types.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace kcplan {

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraint map F: A -> R^(n-k) with its analytic Jacobian and the
/// sampling box of the ambient space. Immutable once built.
class ConstraintSystem {
 public:
  using ConstraintFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  static constexpr double kDefaultTolerance = 1e-8;
  static constexpr int kDefaultMaxNewtonIters = 50;

  ConstraintSystem(int n, int k, ConstraintFn constraint, JacobianFn jacobian, Box ambient_box,
                   double tol_f = kDefaultTolerance, int max_newton_iters = kDefaultMaxNewtonIters)
      : n_(n),
        k_(k),
        constraint_(std::move(constraint)),
        jacobian_(std::move(jacobian)),
        box_(std::move(ambient_box)),
        tol_f_(tol_f),
        max_newton_iters_(max_newton_iters) {
    if (!(n > k && k > 0)) {
      throw std::invalid_argument("ConstraintSystem: requires n > k > 0");
    }
    if (box_.dim() != n || !box_.non_degenerate()) {
      throw std::invalid_argument("ConstraintSystem: ambient box must be finite and non-degenerate");
    }
    if (!(tol_f > 0.0) || max_newton_iters <= 0) {
      throw std::invalid_argument("ConstraintSystem: invalid numerical tolerances");
    }
    if (!constraint_ || !jacobian_) {
      throw std::invalid_argument("ConstraintSystem: missing constraint or Jacobian");
    }
  }

  int n() const { return n_; }
  int k() const { return k_; }
  int codim() const { return n_ - k_; }
  double tol_f() const { return tol_f_; }
  int max_newton_iters() const { return max_newton_iters_; }
  const Box& ambient_box() const { return box_; }

  Vector evaluate(const Vector& x) const {
    require_dimension(x, n_, "evaluate");
    return constraint_(x);
  }

  Matrix jacobian(const Vector& x) const {
    require_dimension(x, n_, "jacobian");
    return jacobian_(x);
  }

  bool on_manifold(const Vector& x) const { return max_norm(evaluate(x)) <= tol_f_; }

 private:
  int n_;
  int k_;
  ConstraintFn constraint_;
  JacobianFn jacobian_;
  Box box_;
  double tol_f_;
  int max_newton_iters_;
};

/// Central-difference Jacobian, column by column. Validation oracle for the
/// analytic Jacobians.
inline Matrix jacobian_fd(const ConstraintSystem& sys, const Vector& x, double h) {
  require_dimension(x, sys.n(), "jacobian_fd");
  if (!(h > 0.0)) throw std::invalid_argument("jacobian_fd: step must be positive");
  Matrix jac(sys.codim(), sys.n());
  Vector xp = x;
  Vector xm = x;
  for (int i = 0; i < sys.n(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    jac.col(i) = (sys.evaluate(xp) - sys.evaluate(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return jac;
}

enum class ProjectionStatus { Converged, MaxIterations, Singular, NonFinite, Diverged };

inline const char* to_string(ProjectionStatus s) {
  switch (s) {
    case ProjectionStatus::Converged: return "converged";
    case ProjectionStatus::MaxIterations: return "max-iterations";
    case ProjectionStatus::Singular: return "singular";
    case ProjectionStatus::NonFinite: return "non-finite";
    case ProjectionStatus::Diverged: return "diverged";
  }
  return "?";
}

struct ProjectionResult {
  Vector point;
  ProjectionStatus status = ProjectionStatus::MaxIterations;
  int iterations = 0;

  bool ok() const { return status == ProjectionStatus::Converged; }
};

namespace detail {

// Relative cutoff on the smallest/largest singular value (or eigenvalue for
// the Gram matrix) below which a linear solve is treated as singular.
inline constexpr double kSingularCutoff = 1e-12;
inline constexpr double kDivergenceFactor = 1e6;

inline bool diverged(const Vector& x, double initial_norm) {
  return x.norm() > kDivergenceFactor * std::max(initial_norm, 1.0);
}

}  // namespace detail

/// Newton correction x <- x - J^T (J J^T)^{-1} F(x) until the max-norm
/// residual drops below tol_f.
inline ProjectionResult project_pseudoinverse(const ConstraintSystem& sys, const Vector& x0) {
  require_dimension(x0, sys.n(), "project_pseudoinverse");
  ProjectionResult out;
  out.point = x0;
  if (!all_finite(x0)) {
    out.status = ProjectionStatus::NonFinite;
    return out;
  }
  const double initial_norm = x0.norm();
  Vector& x = out.point;
  for (int it = 0;; ++it) {
    const Vector f = sys.evaluate(x);
    if (!all_finite(f)) {
      out.status = ProjectionStatus::NonFinite;
      return out;
    }
    if (max_norm(f) <= sys.tol_f()) {
      out.status = ProjectionStatus::Converged;
      return out;
    }
    if (it >= sys.max_newton_iters()) {
      out.status = ProjectionStatus::MaxIterations;
      return out;
    }
    const Matrix jac = sys.jacobian(x);
    const Matrix gram = jac * jac.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo < detail::kSingularCutoff * hi) {
      out.status = ProjectionStatus::Singular;
      return out;
    }
    x -= jac.transpose() * gram.ldlt().solve(f);
    out.iterations = it + 1;
    if (!all_finite(x)) {
      out.status = ProjectionStatus::NonFinite;
      return out;
    }
    if (detail::diverged(x, initial_norm)) {
      out.status = ProjectionStatus::Diverged;
      return out;
    }
  }
}

/// Orthonormal basis of the tangent space at a manifold point. Only the
/// projector basis * basis^T is unique; sign and ordering of columns are not.
struct TangentBasis {
  Vector chart_point;
  Matrix basis;  // n x k

  Matrix projector() const { return basis * basis.transpose(); }
};

/// Tangent basis from the null space of J, read off a column-pivoted QR of J^T.
inline TangentBasis tangent_basis(const ConstraintSystem& sys, const Vector& x) {
  require_dimension(x, sys.n(), "tangent_basis");
  const Matrix jt = sys.jacobian(x).transpose();  // n x (n-k)
  Eigen::ColPivHouseholderQR<Matrix> qr(jt);
  qr.setThreshold(detail::kSingularCutoff);
  if (qr.rank() < sys.codim()) {
    throw RankDeficientError("tangent_basis: Jacobian has rank " + std::to_string(qr.rank()) +
                             " < " + std::to_string(sys.codim()));
  }
  const Matrix q = qr.householderQ() * Matrix::Identity(sys.n(), sys.n());
  return {x, q.rightCols(sys.k())};
}

/// Newton solve of F(x) = 0, basis^T (x - x_prime) = 0 starting at x_prime.
inline ProjectionResult project_orthogonal(const ConstraintSystem& sys, const TangentBasis& tb,
                                           const Vector& x_prime) {
  require_dimension(x_prime, sys.n(), "project_orthogonal");
  ProjectionResult out;
  out.point = x_prime;
  if (!all_finite(x_prime)) {
    out.status = ProjectionStatus::NonFinite;
    return out;
  }
  const int n = sys.n();
  const int m = sys.codim();
  const double initial_norm = x_prime.norm();
  const Matrix phi_t = tb.basis.transpose();
  Vector& x = out.point;
  Vector rhs(n);
  Matrix lhs(n, n);
  for (int it = 0;; ++it) {
    rhs.head(m) = sys.evaluate(x);
    rhs.tail(n - m) = phi_t * (x - x_prime);
    if (!all_finite(rhs)) {
      out.status = ProjectionStatus::NonFinite;
      return out;
    }
    if (max_norm(rhs) <= sys.tol_f()) {
      out.status = ProjectionStatus::Converged;
      return out;
    }
    if (it >= sys.max_newton_iters()) {
      out.status = ProjectionStatus::MaxIterations;
      return out;
    }
    lhs.topRows(m) = sys.jacobian(x);
    lhs.bottomRows(n - m) = phi_t;
    Eigen::JacobiSVD<Matrix> svd(lhs, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv[0] > 0.0) || sv[n - 1] < detail::kSingularCutoff * sv[0]) {
      out.status = ProjectionStatus::Singular;
      return out;
    }
    x -= svd.solve(rhs);
    out.iterations = it + 1;
    if (!all_finite(x)) {
      out.status = ProjectionStatus::NonFinite;
      return out;
    }
    if (detail::diverged(x, initial_norm)) {
      out.status = ProjectionStatus::Diverged;
      return out;
    }
  }
}

}  // namespace kcplan
