#pragma once

#include "kcplan/kcplan.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <random>
#include <string>
#include <vector>

namespace kcplan::fixtures {

inline ConstraintSystem unit_circle() {
  return problems::sphere_system(2, 1.0, Box{problems::vec({-2, -2}), problems::vec({2, 2})});
}

inline ConstraintSystem unit_sphere() {
  return problems::sphere_system(3, 1.0, Box{problems::vec({-2, -2, -2}), problems::vec({2, 2, 2})});
}

inline ConstraintSystem torus() {
  return problems::torus_system(2.0, 0.5, Box{problems::vec({-3, -3, -1}), problems::vec({3, 3, 1})});
}

/// Manifold points drawn by projecting uniform ambient samples; draws whose
/// projection fails are skipped.
template <class Rng>
std::vector<Vector> manifold_points(const ConstraintSystem& sys, std::size_t count, Rng& rng) {
  std::vector<Vector> out;
  while (out.size() < count) {
    const ProjectionResult pr = project_pseudoinverse(sys, sample_ambient_uniform(sys.ambient_box(), rng));
    if (pr.ok() && sys.ambient_box().contains(pr.point)) out.push_back(pr.point);
  }
  return out;
}

/// Null-space projector I - J^T (J J^T)^-1 J, independent of the basis code.
inline Matrix nullspace_projector(const Matrix& j) {
  const Eigen::Index n = j.cols();
  return Matrix::Identity(n, n) - j.transpose() * (j * j.transpose()).inverse() * j;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Leaf views that hold at least one point.
inline std::vector<RrtKdTree::NodeView> leaves(const RrtKdTree& tree) {
  std::vector<RrtKdTree::NodeView> out;
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    const auto v = tree.node(i);
    if (v.leaf && !v.items.empty()) out.push_back(v);
  }
  return out;
}

/// Inserts uniform points until the tree has `target_leaves` non-empty leaves.
template <class Rng>
RrtKdTree random_tree(const Box& box, double r, std::size_t capacity, std::size_t target_leaves, Rng& rng) {
  RrtKdTree tree(box, r, capacity);
  std::size_t id = 0;
  while (leaves(tree).size() < target_leaves) tree.insert(sample_ambient_uniform(box, rng), id++);
  return tree;
}

inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

/// Pearson chi-square p-value of 2-D kd-tree samples against the uniform
/// density over the union of leaf rectangles, binned on a grid x grid lattice
/// over the ambient box. Cell masses come from exact rectangle/cell overlaps.
/// Returns 0 if any sample lands in a cell the union does not touch.
template <class Rng>
double kd_uniformity_p_value(const RrtKdTree& tree, std::size_t draws, int grid, Rng& rng) {
  const Box& box = tree.ambient_box();
  const double wx = (box.upper[0] - box.lower[0]) / grid;
  const double wy = (box.upper[1] - box.lower[1]) / grid;
  const auto rects = leaves(tree);
  std::vector<double> mass(static_cast<std::size_t>(grid * grid), 0.0);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Box cell{problems::vec({box.lower[0] + i * wx, box.lower[1] + j * wy}),
                     problems::vec({box.lower[0] + (i + 1) * wx, box.lower[1] + (j + 1) * wy})};
      for (const auto& leaf : rects) mass[i * grid + j] += leaf.rect->intersect(cell).volume();
    }
  }
  std::vector<double> counts(mass.size(), 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    const Vector x = tree.sample(rng);
    const int i = std::clamp(static_cast<int>((x[0] - box.lower[0]) / wx), 0, grid - 1);
    const int j = std::clamp(static_cast<int>((x[1] - box.lower[1]) / wy), 0, grid - 1);
    counts[i * grid + j] += 1.0;
  }
  // Cells expecting fewer than 5 hits are pooled into one bin.
  const double total = tree.total_volume();
  std::vector<double> observed;
  std::vector<double> expected;
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    const double e = static_cast<double>(draws) * mass[c] / total;
    if (e <= 0.0) {
      if (counts[c] > 0.0) return 0.0;
    } else if (e < 5.0) {
      pooled_obs += counts[c];
      pooled_exp += e;
    } else {
      observed.push_back(counts[c]);
      expected.push_back(e);
    }
  }
  if (pooled_exp > 0.0) {
    observed.push_back(pooled_obs);
    expected.push_back(pooled_exp);
  }
  if (observed.size() < 2) return 1.0;
  return chi_square_p(observed, expected);
}

/// Empty when `path` is a valid solution of `problem`: endpoints exact,
/// residuals within tolerance, steps at most 1.1 delta, no collisions.
inline std::string path_error(const ProblemSpec& problem, const std::vector<Vector>& path, double delta) {
  if (path.empty()) return "empty path";
  if (path.front() != problem.start) return "path does not start at the start configuration";
  if (path.back() != problem.goal) return "path does not end at the goal configuration";
  const ObstacleSet obstacles = problem.make_obstacles();
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (max_norm(problem.system.evaluate(path[i])) > 1e-8) return "off-manifold node " + std::to_string(i);
    if (obstacles.contains(path[i])) return "colliding node " + std::to_string(i);
    if (i > 0 && (path[i] - path[i - 1]).norm() > 1.1 * delta) return "long step at " + std::to_string(i);
  }
  return {};
}

}  // namespace kcplan::fixtures
