#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace kcplan {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the ambient space, one real per joint variable.
using AmbientPoint = Eigen::VectorXd;

inline double max_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Axis-aligned box [lower, upper] in some subset of coordinates.
struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("Box: corner dimensions differ");
    }
  }

  static Box unbounded(Eigen::Index dim) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(dim, -inf), Vector::Constant(dim, inf)};
  }

  Eigen::Index dim() const { return lower.size(); }

  /// Finite and strictly positive extent in every coordinate.
  bool non_degenerate() const {
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
        return false;
      }
    }
    return dim() > 0;
  }

  double volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      v *= std::max(0.0, upper[i] - lower[i]);
    }
    return v;
  }

  bool contains(const Vector& x) const {
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    }
    return true;
  }

  Box intersect(const Box& other) const {
    Box out{lower.cwiseMax(other.lower), upper.cwiseMin(other.upper)};
    return out;
  }

  /// Squared Euclidean distance from x to the closest point of the box.
  double squared_distance(const Vector& x) const {
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      double d = 0.0;
      if (x[i] < lower[i]) {
        d = lower[i] - x[i];
      } else if (x[i] > upper[i]) {
        d = x[i] - upper[i];
      }
      d2 += d * d;
    }
    return d2;
  }
};

inline void require_dimension(const Vector& x, Eigen::Index n, const char* what) {
  if (x.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " + std::to_string(n) +
                                ", got " + std::to_string(x.size()));
  }
}

}  // namespace kcplan
