#pragma once

// Desk-scale benchmark problems. Each one is an analytic manifold with
// obstacles in ambient coordinates that reproduces a planning difficulty of
// the robot benchmarks these strategies are usually evaluated on:
//
//   circle2d    single gap on a 1-D manifold (smoke test)
//   torus-slot  two slotted walls in sequence on a torus (maze of narrow passages)
//   sphere-wall two walls with offset slots on a sphere (U-shaped local minimum)
//   chain5      planar closed 5-bar linkage, ball obstacles in joint space (loop closure)

#include "kcplan/collision.hpp"
#include "kcplan/manifold.hpp"
#include "kcplan/planner.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace kcplan {

class UnknownProblemError : public std::invalid_argument {
 public:
  explicit UnknownProblemError(const std::string& name) : std::invalid_argument("unknown problem: " + name) {}
};

/// Per-run geometric overrides of a registered problem.
struct ProblemOptions {
  std::optional<double> slot_width;      // full width of wall windows
  std::optional<double> wall_thickness;
};

struct ProblemSpec {
  std::string name;
  std::string description;
  ConstraintSystem system;
  std::vector<Obstacle> obstacles;
  Vector start;
  Vector goal;
  /// Scale below which the manifold bends noticeably; used to size
  /// off-manifold perturbations in tests.
  double feature_size = 1.0;
  /// Strategy parameters tuned for this problem (R, r, rho, rho_s, alpha).
  PlannerConfig tuned;

  ObstacleSet make_obstacles() const { return ObstacleSet(system.n(), obstacles); }
};

namespace problems {

inline ConstraintSystem sphere_system(int n, double radius, const Box& box) {
  return ConstraintSystem(
      n, n - 1,
      [radius](const Vector& x) {
        Vector f(1);
        f[0] = x.squaredNorm() - radius * radius;
        return f;
      },
      [](const Vector& x) { return Matrix(2.0 * x.transpose()); }, box);
}

inline ConstraintSystem torus_system(double major, double minor, const Box& box) {
  return ConstraintSystem(
      3, 2,
      [major, minor](const Vector& x) {
        const double rho = std::hypot(x[0], x[1]);
        Vector f(1);
        f[0] = (rho - major) * (rho - major) + x[2] * x[2] - minor * minor;
        return f;
      },
      [major](const Vector& x) {
        const double rho = std::hypot(x[0], x[1]);
        Matrix j(1, 3);
        const double g = rho > 0.0 ? 2.0 * (rho - major) / rho : 0.0;
        j << g * x[0], g * x[1], 2.0 * x[2];
        return j;
      },
      box);
}

/// Planar closed chain of unit links with relative joint angles; the end of
/// the last link must return to the base.
inline ConstraintSystem closed_chain_system(int links, const Box& box) {
  return ConstraintSystem(
      links, links - 2,
      [](const Vector& q) {
        Vector f = Vector::Zero(2);
        double phi = 0.0;
        for (Eigen::Index i = 0; i < q.size(); ++i) {
          phi += q[i];
          f[0] += std::cos(phi);
          f[1] += std::sin(phi);
        }
        return f;
      },
      [](const Vector& q) {
        const Eigen::Index n = q.size();
        Vector c(n);
        Vector s(n);
        double phi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          phi += q[i];
          c[i] = std::cos(phi);
          s[i] = std::sin(phi);
        }
        // Joint j moves every link from j on.
        Matrix j(2, n);
        double cs = 0.0;
        double ss = 0.0;
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          cs += c[i];
          ss += s[i];
          j(0, i) = -ss;
          j(1, i) = cs;
        }
        return j;
      },
      box);
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vector torus_point(double major, double minor, double phi, double theta) {
  const double rho = major + minor * std::cos(theta);
  return vec({rho * std::cos(phi), rho * std::sin(phi), minor * std::sin(theta)});
}

inline ProblemSpec circle2d(const ProblemOptions& o = {}) {
  const double slot = o.slot_width.value_or(0.2);
  const double thickness = o.wall_thickness.value_or(0.2);
  Box box{vec({-1.5, -1.5}), vec({1.5, 1.5})};
  // Wall along y = 0 crossing the circle twice; the window only opens at x = 1.
  std::vector<Obstacle> obs{SlottedWall{1, 0.0, thickness, vec({1.0}), 0.5 * slot}};
  PlannerConfig tuned;
  tuned.big_r = 0.3;
  tuned.r = 0.25;
  tuned.atlas = AtlasParams::with_defaults(0.2, 1.0, 0.1);
  return {"circle2d", "unit circle, wall along y=0 with a single window at x=1",
          sphere_system(2, 1.0, box), std::move(obs), vec({0.0, -1.0}), vec({0.0, 1.0}), 1.0, tuned};
}

inline ProblemSpec torus_slot(const ProblemOptions& o = {}) {
  constexpr double kMajor = 2.0;
  constexpr double kMinor = 0.5;
  constexpr double pi = std::numbers::pi;
  const double slot = o.slot_width.value_or(0.24);
  const double thickness = o.wall_thickness.value_or(0.1);
  Box box{vec({-2.7, -2.7, -0.7}), vec({2.7, 2.7, 0.7})};
  std::vector<Obstacle> obs{
      // y = 0: window on the outer equator at +x, closed at -x.
      SlottedWall{1, 0.0, thickness, vec({kMajor + kMinor, 0.0}), 0.5 * slot},
      // x = 0: window on the top of the tube at +y, closed at -y.
      SlottedWall{0, 0.0, thickness, vec({kMajor, kMinor}), 0.5 * slot},
  };
  PlannerConfig tuned;
  tuned.big_r = 0.3;
  tuned.r = 0.25;
  tuned.atlas = AtlasParams::with_defaults(0.25, 2.5, 0.1);
  return {"torus-slot",
          "torus (2, 0.5) cut into quadrants by two slotted walls; the path threads both windows",
          torus_system(kMajor, kMinor, box),
          std::move(obs),
          torus_point(kMajor, kMinor, -pi / 4.0, 0.0),
          torus_point(kMajor, kMinor, 3.0 * pi / 4.0, pi),
          kMinor,
          tuned};
}

inline ProblemSpec sphere_wall(const ProblemOptions& o = {}) {
  constexpr double kHeight = 0.35;
  const double ring = std::sqrt(1.0 - kHeight * kHeight);
  const double slot = o.slot_width.value_or(0.2);
  const double thickness = o.wall_thickness.value_or(0.1);
  Box box{vec({-1.2, -1.2, -1.2}), vec({1.2, 1.2, 1.2})};
  // Two horizontal walls whose windows sit on opposite sides: the band in
  // between must be crossed half way around.
  std::vector<Obstacle> obs{
      SlottedWall{2, -kHeight, thickness, vec({ring, 0.0}), 0.5 * slot},
      SlottedWall{2, kHeight, thickness, vec({-ring, 0.0}), 0.5 * slot},
  };
  PlannerConfig tuned;
  tuned.big_r = 0.3;
  tuned.r = 0.25;
  tuned.atlas = AtlasParams::with_defaults(0.25, 2.5, 0.1);
  return {"sphere-wall", "unit sphere, two horizontal walls with windows on opposite sides",
          sphere_system(3, 1.0, box), std::move(obs), vec({0.0, 0.0, -1.0}), vec({0.0, 0.0, 1.0}), 1.0,
          tuned};
}

inline ProblemSpec chain5(const ProblemOptions& = {}) {
  constexpr double pi = std::numbers::pi;
  const Box box{Vector::Constant(5, -pi), Vector::Constant(5, pi)};
  ConstraintSystem sys = closed_chain_system(5, box);
  // Regular pentagon and a "house" (unit square with an equilateral roof).
  const Vector start = vec({0.0, 2 * pi / 5, 2 * pi / 5, 2 * pi / 5, 2 * pi / 5});
  const Vector goal = vec({0.5, pi / 2, pi / 6, 2 * pi / 3, pi / 6});
  std::vector<Obstacle> obs;
  for (double t : {1.0 / 3.0, 2.0 / 3.0}) {
    const ProjectionResult pr = project_pseudoinverse(sys, (1.0 - t) * start + t * goal);
    obs.push_back(Ball{{}, pr.point, 0.2});
  }
  PlannerConfig tuned;
  tuned.big_r = 0.5;
  tuned.r = 0.3;
  tuned.atlas = AtlasParams::with_defaults(0.3, 3.0, 0.1);
  return {"chain5", "closed planar 5-bar linkage of unit links, two ball obstacles in joint space",
          std::move(sys), std::move(obs), start, goal, 0.3, tuned};
}

}  // namespace problems

inline std::vector<std::string> problem_names() { return {"circle2d", "torus-slot", "sphere-wall", "chain5"}; }

/// Builds a registered problem; throws UnknownProblemError.
inline ProblemSpec make_problem(const std::string& name, const ProblemOptions& options = {}) {
  if (name == "circle2d") return problems::circle2d(options);
  if (name == "torus-slot") return problems::torus_slot(options);
  if (name == "sphere-wall") return problems::sphere_wall(options);
  if (name == "chain5") return problems::chain5(options);
  throw UnknownProblemError(name);
}

inline std::vector<ProblemSpec> registry() {
  std::vector<ProblemSpec> out;
  for (const auto& name : problem_names()) out.push_back(make_problem(name));
  return out;
}

}  // namespace kcplan
