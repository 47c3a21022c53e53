#pragma once

// Ambient-space samplers: the uniform baseline and the dynamic-domain filter
// that confines boundary nodes to a ball of radius R.

#include "kcplan/kdtree.hpp"
#include "kcplan/types.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace kcplan {

template <class Rng>
Vector sample_ambient_uniform(const Box& box, Rng& rng) {
  if (!box.non_degenerate()) throw std::invalid_argument("sample_ambient_uniform: degenerate box");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector out(box.dim());
  for (Eigen::Index i = 0; i < box.dim(); ++i) {
    out[i] = box.lower[i] + unit(rng) * (box.upper[i] - box.lower[i]);
  }
  return out;
}

/// Uniform point in the k-ball of the given radius: Gaussian direction,
/// radius scaled by U^(1/k).
template <class Rng>
Vector sample_ball(int k, double radius, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector dir(k);
  double norm = 0.0;
  do {
    for (int i = 0; i < k; ++i) dir[i] = gauss(rng);
    norm = dir.norm();
  } while (!(norm > 0.0));
  return dir * (radius * std::pow(unit(rng), 1.0 / k) / norm);
}

/// Per-node boundary flags of one search tree plus the fixed radius R.
class DynamicDomainState {
 public:
  explicit DynamicDomainState(double radius = std::numeric_limits<double>::infinity())
      : radius_(radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("DynamicDomainState: R must be positive");
  }

  double radius() const { return radius_; }

  /// Registers node ids up to `id` as non-boundary.
  void ensure(std::size_t id) {
    if (id >= boundary_.size()) boundary_.resize(id + 1, false);
  }

  /// Monotone: once set the flag is never cleared.
  void mark_boundary(std::size_t id) {
    ensure(id);
    boundary_[id] = true;
  }

  bool is_boundary(std::size_t id) const { return id < boundary_.size() && boundary_[id]; }

  /// Accepts a draw whose nearest node is `nearest_id` at `distance`. Rejections
  /// are counted.
  bool dd_accept(std::size_t nearest_id, double distance) {
    if (!is_boundary(nearest_id) || distance <= radius_) return true;
    ++rejections_;
    return false;
  }

  std::uint64_t rejections() const { return rejections_; }
  std::size_t boundary_count() const {
    return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), true));
  }

 private:
  double radius_;
  std::vector<bool> boundary_;
  std::uint64_t rejections_ = 0;
};

}  // namespace kcplan
