#pragma once

// Incremental atlas of tangent-space charts. Each chart parametrizes the
// manifold around its center through an orthonormal tangent basis; charts
// crop each other's sampling balls with bisector half-planes, and a global
// scaling factor adapts the sampling radius to the branch outcomes.

#include "kcplan/manifold.hpp"
#include "kcplan/sampling.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace kcplan {

/// Half-plane {u : u . normal <= offset} in chart coordinates.
struct CropHalfPlane {
  Vector normal;
  double offset = 0.0;
};

class Chart {
 public:
  Chart(std::size_t id, TangentBasis tb) : id_(id), tb_(std::move(tb)) {}

  std::size_t id() const { return id_; }
  const Vector& center() const { return tb_.chart_point; }
  const Matrix& basis() const { return tb_.basis; }
  const TangentBasis& tangent() const { return tb_; }
  int k() const { return static_cast<int>(tb_.basis.cols()); }

  Vector coordinates(const Vector& x) const { return tb_.basis.transpose() * (x - center()); }
  Vector lift(const Vector& u) const { return center() + tb_.basis * u; }

  /// The origin must stay strictly inside every crop.
  void add_crop(Vector normal, double offset) {
    if (normal.size() != k()) throw std::invalid_argument("Chart::add_crop: normal dimension");
    if (!(offset > 0.0)) throw std::invalid_argument("Chart::add_crop: crop must contain the origin");
    crops_.push_back({std::move(normal), offset});
  }

  bool inside_crops(const Vector& u) const {
    for (const auto& c : crops_) {
      if (u.dot(c.normal) > c.offset) return false;
    }
    return true;
  }

  const std::vector<CropHalfPlane>& crops() const { return crops_; }
  const std::vector<std::size_t>& neighbors() const { return neighbors_; }
  void add_neighbor(std::size_t id) { neighbors_.push_back(id); }

 private:
  std::size_t id_;
  TangentBasis tb_;
  std::vector<CropHalfPlane> crops_;
  std::vector<std::size_t> neighbors_;
};

inline Chart new_chart(const ConstraintSystem& sys, const Vector& center, std::size_t id = 0) {
  if (!sys.on_manifold(center)) throw std::invalid_argument("new_chart: center is not on the manifold");
  return Chart(id, tangent_basis(sys, center));
}

/// Lifts tangent coordinates to the ambient space and projects the lift
/// orthogonally (w.r.t. the chart) onto the manifold.
inline ProjectionResult chart_point_to_manifold(const ConstraintSystem& sys, const Chart& chart,
                                                const Vector& u) {
  if (u.size() != chart.k() || !all_finite(u)) {
    throw std::invalid_argument("chart_point_to_manifold: bad tangent coordinates");
  }
  return project_orthogonal(sys, chart.tangent(), chart.lift(u));
}

/// A chart stops being valid for a point when the manifold drifts too far
/// from the tangent space (distance), bends away from it (tangential fraction
/// of the displacement below cos_theta_min), or the tangent point leaves the
/// span radius rho.
inline bool need_new_chart(const Chart& chart, const Vector& x_i, const Vector& x_i_prime,
                           double eps_dist, double cos_theta_min, double rho) {
  if ((x_i - x_i_prime).norm() > eps_dist) return true;
  const Vector disp = x_i - chart.center();
  const double len = disp.norm();
  if (len > 0.0 && (chart.basis().transpose() * disp).norm() < cos_theta_min * len) return true;
  return (x_i_prime - chart.center()).norm() > rho;
}

enum class BranchOutcome { Succeeded, Collided };

struct AtlasParams {
  double rho = 1.0;
  double rho_s = 10.0;
  double alpha = 0.1;
  double eps_dist = 0.1;
  double cos_theta_min = 0.86;
  int max_sampling_attempts = 100;

  /// Distance threshold defaults to a tenth of the span radius.
  static AtlasParams with_defaults(double rho, double rho_s, double alpha) {
    AtlasParams p;
    p.rho = rho;
    p.rho_s = rho_s;
    p.alpha = alpha;
    p.eps_dist = 0.1 * rho;
    return p;
  }
};

struct AtlasSample {
  std::size_t chart = 0;
  Vector u;
  Vector point;  // ambient lift of u, not projected
};

class Atlas {
 public:
  Atlas(const ConstraintSystem& sys, AtlasParams params) : sys_(&sys), params_(params) {
    if (!(params_.rho > 0.0) || !(params_.rho_s >= params_.rho)) {
      throw std::invalid_argument("Atlas: requires 0 < rho <= rho_s");
    }
    if (!(params_.alpha >= 0.0 && params_.alpha < 1.0)) {
      throw std::invalid_argument("Atlas: alpha must lie in [0, 1)");
    }
    if (!(params_.eps_dist > 0.0) || params_.max_sampling_attempts <= 0) {
      throw std::invalid_argument("Atlas: invalid chart thresholds");
    }
  }

  const AtlasParams& params() const { return params_; }
  std::size_t size() const { return charts_.size(); }
  bool empty() const { return charts_.empty(); }
  const Chart& chart(std::size_t id) const { return charts_.at(id); }
  Chart& chart(std::size_t id) { return charts_.at(id); }

  double scaling() const { return scaling_; }

  /// max(rho, s * rho_s): the sampling ball never shrinks below the span radius.
  double effective_radius() const {
    const double r = std::max(params_.rho, scaling_ * params_.rho_s);
    check_floor(r);
    return r;
  }

  /// Creates a chart at `center` and coordinates it with every existing chart
  /// whose sampling ball may overlap the new one. Throws RankDeficientError.
  std::size_t add_chart(const Vector& center) {
    const std::size_t id = charts_.size();
    charts_.push_back(new_chart(*sys_, center, id));
    for (std::size_t other = 0; other < id; ++other) coordinate_charts(other, id);
    return id;
  }

  /// Adds mutual bisector crops when the two sampling balls can overlap and the
  /// tangent spaces agree on the direction between the centers. Returns
  /// whether crops were added.
  bool coordinate_charts(std::size_t a, std::size_t b) {
    if (a == b) throw std::invalid_argument("coordinate_charts: a chart cannot be coordinated with itself");
    Chart& ca = charts_.at(a);
    Chart& cb = charts_.at(b);
    const Vector delta = cb.center() - ca.center();
    const double dist = delta.norm();
    if (!(dist < 2.0 * effective_radius())) return false;
    const Vector uab = ca.coordinates(cb.center());
    const Vector uba = cb.coordinates(ca.center());
    const double dab = uab.norm();
    const double dba = uba.norm();
    const double min_tangential = params_.cos_theta_min * dist;
    if (!(dab > 0.0 && dba > 0.0) || dab < min_tangential || dba < min_tangential) return false;
    ca.add_crop(uab / dab, 0.5 * dab);
    cb.add_crop(uba / dba, 0.5 * dba);
    ca.add_neighbor(b);
    cb.add_neighbor(a);
    return true;
  }

  /// Uniform chart, uniform point in its sampling ball; draws falling outside
  /// the cropped region are rejected and redrawn (with a new chart) up to the
  /// attempt bound. Returns nullopt when the bound is exhausted.
  template <class Rng>
  std::optional<AtlasSample> sample(Rng& rng) {
    if (charts_.empty()) throw std::logic_error("Atlas::sample: atlas is empty");
    std::uniform_int_distribution<std::size_t> pick(0, charts_.size() - 1);
    const double radius = effective_radius();
    const int k = sys_->k();
    for (int attempt = 0; attempt < params_.max_sampling_attempts; ++attempt) {
      const std::size_t id = pick(rng);
      Vector u = sample_ball(k, radius, rng);
      ++draws_;
      if (!charts_[id].inside_crops(u)) {
        ++rejections_;
        continue;
      }
      AtlasSample s;
      s.chart = id;
      s.point = charts_[id].lift(u);
      s.u = std::move(u);
      return s;
    }
    ++exhausted_;
    return std::nullopt;
  }

  void update_scaling(BranchOutcome outcome) {
    scaling_ *= outcome == BranchOutcome::Succeeded ? 1.0 + params_.alpha : 1.0 - params_.alpha;
    // Long collision streaks would otherwise underflow s to zero.
    scaling_ = std::max(scaling_, std::numeric_limits<double>::min());
    check_floor(effective_radius());
  }

  std::uint64_t draws() const { return draws_; }
  std::uint64_t rejections() const { return rejections_; }
  std::uint64_t exhausted() const { return exhausted_; }
  /// Times the effective radius was observed below rho; expected to stay 0.
  std::uint64_t floor_violations() const { return floor_violations_; }

 private:
  void check_floor(double r) const {
    if (!(r >= params_.rho)) ++floor_violations_;
  }

  const ConstraintSystem* sys_;
  AtlasParams params_;
  std::vector<Chart> charts_;
  double scaling_ = 1.0;
  std::uint64_t draws_ = 0;
  std::uint64_t rejections_ = 0;
  std::uint64_t exhausted_ = 0;
  mutable std::uint64_t floor_violations_ = 0;
};

}  // namespace kcplan
