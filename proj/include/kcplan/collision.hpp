#pragma once

// Obstacles living directly in ambient coordinates and the instrumented
// point-wise collision predicate. Obstacles are closed sets: a point exactly
// on an obstacle boundary collides, so the free space stays open.

#include "kcplan/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace kcplan {

/// Closed ball over a subset of coordinates (all of them when `coords` is empty).
struct Ball {
  std::vector<int> coords;
  Vector center;
  double radius = 0.0;
};

/// Closed axis-aligned box over a subset of coordinates.
struct AxisBox {
  std::vector<int> coords;
  Vector lower;
  Vector upper;
};

/// Slab |x[axis] - value| <= thickness/2 with an open square window of
/// half-width `slot_half_width` around `slot_center`, which is expressed in the
/// remaining coordinates (in increasing index order, `axis` skipped).
struct SlottedWall {
  int axis = 0;
  double value = 0.0;
  double thickness = 0.0;
  Vector slot_center;
  double slot_half_width = 0.0;
};

/// Closed half-space normal . x >= offset.
struct HalfSpace {
  Vector normal;
  double offset = 0.0;
};

using Obstacle = std::variant<Ball, AxisBox, SlottedWall, HalfSpace>;

namespace detail {

inline Vector gather(const Vector& x, const std::vector<int>& coords) {
  if (coords.empty()) return x;
  Vector out(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) out[static_cast<Eigen::Index>(i)] = x[coords[i]];
  return out;
}

inline void check_coords(const std::vector<int>& coords, Eigen::Index dim, int n) {
  const auto expect = coords.empty() ? n : static_cast<Eigen::Index>(coords.size());
  if (dim != expect) throw std::invalid_argument("obstacle: coordinate subset size mismatch");
  for (int c : coords) {
    if (c < 0 || c >= n) throw std::invalid_argument("obstacle: coordinate index out of range");
  }
}

struct Contains {
  const Vector& x;

  bool operator()(const Ball& b) const {
    return (gather(x, b.coords) - b.center).squaredNorm() <= b.radius * b.radius;
  }
  bool operator()(const AxisBox& b) const {
    const Vector p = gather(x, b.coords);
    return (p.array() >= b.lower.array()).all() && (p.array() <= b.upper.array()).all();
  }
  bool operator()(const SlottedWall& w) const {
    if (std::abs(x[w.axis] - w.value) > 0.5 * w.thickness) return false;
    Eigen::Index j = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i == w.axis) continue;
      if (std::abs(x[i] - w.slot_center[j]) >= w.slot_half_width) return true;
      ++j;
    }
    return false;  // inside the open slot window
  }
  bool operator()(const HalfSpace& h) const { return h.normal.dot(x) >= h.offset; }
};

struct Validate {
  int n;

  void operator()(const Ball& b) const {
    check_coords(b.coords, b.center.size(), n);
    if (!(b.radius > 0.0)) throw std::invalid_argument("Ball: radius must be positive");
  }
  void operator()(const AxisBox& b) const {
    check_coords(b.coords, b.lower.size(), n);
    if (b.lower.size() != b.upper.size() || !(b.lower.array() < b.upper.array()).all()) {
      throw std::invalid_argument("AxisBox: lower must be < upper in every coordinate");
    }
  }
  void operator()(const SlottedWall& w) const {
    if (w.axis < 0 || w.axis >= n) throw std::invalid_argument("SlottedWall: axis out of range");
    if (w.slot_center.size() != n - 1) {
      throw std::invalid_argument("SlottedWall: slot center must span the remaining coordinates");
    }
    if (!(w.thickness > 0.0) || !(w.slot_half_width > 0.0)) {
      throw std::invalid_argument("SlottedWall: thickness and slot half-width must be positive");
    }
  }
  void operator()(const HalfSpace& h) const {
    if (h.normal.size() != n || !(h.normal.norm() > 0.0)) {
      throw std::invalid_argument("HalfSpace: normal must be a non-zero ambient vector");
    }
  }
};

}  // namespace detail

/// Obstacles plus the collision-detection test counter. Each planning trial
/// owns its own instance; the counter is not synchronized.
class ObstacleSet {
 public:
  explicit ObstacleSet(int n, std::vector<Obstacle> obstacles = {})
      : n_(n), obstacles_(std::move(obstacles)) {
    for (const auto& o : obstacles_) std::visit(detail::Validate{n_}, o);
  }

  void add(Obstacle o) {
    std::visit(detail::Validate{n_}, o);
    obstacles_.push_back(std::move(o));
  }

  /// Counts as one CD test.
  bool in_collision(const Vector& x) {
    require_dimension(x, n_, "in_collision");
    ++cd_counter_;
    return contains(x);
  }

  /// Geometry query that does not touch the counter (used for validation).
  bool contains(const Vector& x) const {
    for (const auto& o : obstacles_) {
      if (std::visit(detail::Contains{x}, o)) return true;
    }
    return false;
  }

  std::uint64_t cd_count() const { return cd_counter_; }
  void reset_cd() { cd_counter_ = 0; }

  int n() const { return n_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }

 private:
  int n_;
  std::vector<Obstacle> obstacles_;
  std::uint64_t cd_counter_ = 0;
};

}  // namespace kcplan
