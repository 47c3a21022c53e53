#pragma once

// Bidirectional RRT on an implicit manifold. Branches grow by fixed-length
// steps toward a target followed by a projection onto the manifold; the
// sampling strategy decides where targets come from.

#include "kcplan/atlas.hpp"
#include "kcplan/collision.hpp"
#include "kcplan/kdtree.hpp"
#include "kcplan/manifold.hpp"
#include "kcplan/sampling.hpp"

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace kcplan {

enum class Strategy { AmbientUniform, DynamicDomain, KdTree, Atlas, AtlasDD };

inline constexpr Strategy kAllStrategies[] = {Strategy::AmbientUniform, Strategy::DynamicDomain,
                                              Strategy::KdTree, Strategy::Atlas, Strategy::AtlasDD};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::AmbientUniform: return "ambient-uniform";
    case Strategy::DynamicDomain: return "dynamic-domain";
    case Strategy::KdTree: return "kdtree";
    case Strategy::Atlas: return "atlas";
    case Strategy::AtlasDD: return "atlas-dd";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "ambient-uniform" || name == "ambient") return Strategy::AmbientUniform;
  if (name == "dynamic-domain" || name == "dd") return Strategy::DynamicDomain;
  if (name == "kdtree" || name == "kd-tree") return Strategy::KdTree;
  if (name == "atlas") return Strategy::Atlas;
  if (name == "atlas-dd") return Strategy::AtlasDD;
  return std::nullopt;
}

inline bool uses_atlas(Strategy s) { return s == Strategy::Atlas || s == Strategy::AtlasDD; }

struct PlannerConfig {
  Strategy strategy = Strategy::AmbientUniform;
  double delta = 0.05;
  double big_r = std::numeric_limits<double>::infinity();  // dynamic-domain radius
  double r = 0.25;                                          // kd-tree r-bounding margin
  AtlasParams atlas = AtlasParams::with_defaults(1.0, 10.0, 0.1);
  double time_budget = 600.0;  // seconds of wall clock
  std::uint64_t max_iterations = 1'000'000;
  double stall_threshold = -1.0;  // <= 0 selects delta / 10
  double goal_tolerance = -1.0;   // <= 0 selects delta
  int max_dd_attempts = 100;      // dynamic-domain redraws per iteration
  std::uint64_t seed = 0;

  double stall() const { return stall_threshold > 0.0 ? stall_threshold : delta / 10.0; }
  double reach() const { return goal_tolerance > 0.0 ? goal_tolerance : delta; }

  void validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("PlannerConfig: delta must be positive");
    if (!(stall() < delta)) throw std::invalid_argument("PlannerConfig: stall threshold must be < delta");
    if (!(big_r > 0.0)) throw std::invalid_argument("PlannerConfig: R must be positive");
    if (!(r >= 0.0)) throw std::invalid_argument("PlannerConfig: r must be non-negative");
    if (!(time_budget >= 0.0)) throw std::invalid_argument("PlannerConfig: negative time budget");
    if (max_dd_attempts <= 0) throw std::invalid_argument("PlannerConfig: max_dd_attempts must be positive");
  }
};

enum class Termination { Reached, Collision, Stalled, ProjectionFailed };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Reached: return "reached";
    case Termination::Collision: return "collision";
    case Termination::Stalled: return "stalled";
    case Termination::ProjectionFailed: return "projection-failed";
  }
  return "?";
}

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct RrtNode {
  Vector config;
  std::size_t parent = kNoIndex;
  std::size_t chart = kNoIndex;  // atlas strategies only
};

/// One RRT with its nearest-neighbour index and dynamic-domain flags.
class SearchTree {
 public:
  SearchTree(const ConstraintSystem& sys, double kd_r, double big_r)
      : sys_(&sys), index_(sys.ambient_box(), kd_r), domain_(big_r) {}

  std::size_t add(Vector config, std::size_t parent, std::size_t chart = kNoIndex) {
    if (!sys_->on_manifold(config)) throw std::logic_error("SearchTree::add: node is off the manifold");
    if (parent != kNoIndex && parent >= nodes_.size()) throw std::logic_error("SearchTree::add: bad parent");
    const std::size_t id = nodes_.size();
    index_.insert(config, id);
    domain_.ensure(id);
    nodes_.push_back({std::move(config), parent, chart});
    return id;
  }

  std::size_t size() const { return nodes_.size(); }
  const RrtNode& node(std::size_t id) const { return nodes_.at(id); }
  RrtNode& node(std::size_t id) { return nodes_.at(id); }
  Neighbor nearest(const Vector& x) const { return index_.nearest(x); }

  const RrtKdTree& index() const { return index_; }
  DynamicDomainState& domain() { return domain_; }
  const DynamicDomainState& domain() const { return domain_; }

  /// Configurations from the root down to `id`.
  std::vector<Vector> path_to(std::size_t id) const {
    std::vector<Vector> out;
    for (std::size_t at = id; at != kNoIndex; at = nodes_.at(at).parent) out.push_back(nodes_[at].config);
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  const ConstraintSystem* sys_;
  std::vector<RrtNode> nodes_;
  RrtKdTree index_;
  DynamicDomainState domain_;
};

struct ExtendOptions {
  double delta = 0.05;
  double stall = 0.005;
  double reach = 0.05;
  double max_step_factor = 1.1;  // projected steps longer than this * delta end the branch
  std::size_t max_steps = 100000;
};

struct BranchResult {
  std::vector<std::size_t> nodes;  // appended node ids, in growth order
  Termination termination = Termination::Stalled;
};

/// Grows a branch of `tree` from node `from` toward `target`. Without an atlas
/// each interpolated point is projected with the pseudo-inverse correction;
/// with one, it is projected orthogonally to the tip's chart, and a new chart
/// is created at the tip whenever that chart stops being valid.
inline BranchResult extend_branch(const ConstraintSystem& sys, ObstacleSet& obstacles, SearchTree& tree,
                                  std::size_t from, const Vector& target, const ExtendOptions& opt,
                                  Atlas* atlas = nullptr) {
  BranchResult out;
  std::size_t tip = from;
  for (std::size_t steps = 0;; ++steps) {
    const Vector x_tip = tree.node(tip).config;
    const double dist = (target - x_tip).norm();
    if (dist <= opt.reach) {
      out.termination = Termination::Reached;
      return out;
    }
    if (steps >= opt.max_steps) {
      out.termination = Termination::Stalled;
      return out;
    }
    const Vector x_prime = x_tip + (opt.delta / dist) * (target - x_tip);

    Vector x_new;
    std::size_t chart_id = kNoIndex;
    if (atlas == nullptr) {
      ProjectionResult pr = project_pseudoinverse(sys, x_prime);
      if (!pr.ok()) {
        out.termination = Termination::ProjectionFailed;
        return out;
      }
      x_new = std::move(pr.point);
    } else {
      chart_id = tree.node(tip).chart;
      for (;;) {
        const Chart& chart = atlas->chart(chart_id);
        ProjectionResult pr = project_orthogonal(sys, chart.tangent(), x_prime);
        const Vector tangent_point = chart.center() + chart.basis() * chart.coordinates(x_prime);
        const auto& ap = atlas->params();
        const bool fresh = chart.center() == x_tip;
        // Branches stop `reach` short of their target, so the span radius is
        // shrunk by that much: targets drawn at the sampling floor rho can
        // still push the tree out of its frontier chart.
        const double span = std::max(ap.rho - opt.reach, 0.5 * ap.rho);
        if (pr.ok() && (fresh || !need_new_chart(chart, pr.point, tangent_point, ap.eps_dist,
                                                 ap.cos_theta_min, span))) {
          x_new = std::move(pr.point);
          break;
        }
        if (fresh) {
          out.termination = Termination::ProjectionFailed;
          return out;
        }
        try {
          chart_id = atlas->add_chart(x_tip);
        } catch (const RankDeficientError&) {
          out.termination = Termination::ProjectionFailed;
          return out;
        }
        tree.node(tip).chart = chart_id;
      }
    }

    if (!sys.ambient_box().contains(x_new)) {
      out.termination = Termination::ProjectionFailed;
      return out;
    }
    const double step = (x_new - x_tip).norm();
    if (step > opt.max_step_factor * opt.delta) {
      out.termination = Termination::ProjectionFailed;
      return out;
    }
    if (step < opt.stall || (target - x_new).norm() >= dist) {
      out.termination = Termination::Stalled;
      return out;
    }
    if (obstacles.in_collision(x_new)) {
      out.termination = Termination::Collision;
      return out;
    }
    tip = tree.add(std::move(x_new), tip, chart_id);
    out.nodes.push_back(tip);
  }
}

struct RunStats {
  double wall_time = 0.0;  // seconds
  std::uint64_t cd_tests = 0;
  std::uint64_t branches = 0;
  std::uint64_t collision_branches = 0;
  std::uint64_t draws = 0;
  std::uint64_t rejections = 0;
  std::uint64_t iterations = 0;
  std::size_t start_nodes = 0;
  std::size_t goal_nodes = 0;
  std::size_t charts = 0;
  double final_scaling = 1.0;
  std::uint64_t radius_floor_violations = 0;
  std::uint64_t sampling_exhausted = 0;

  double collision_branch_ratio() const {
    return branches == 0 ? 0.0 : static_cast<double>(collision_branches) / static_cast<double>(branches);
  }
  double rejection_ratio() const {
    return draws == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(draws);
  }
};

struct PlanResult {
  bool success = false;
  bool timed_out = false;
  std::vector<Vector> path;  // start to goal; empty on failure
  RunStats stats;
};

/// Counts gathered while a run is in progress.
struct RunCounters {
  std::uint64_t branches = 0;
  std::uint64_t collision_branches = 0;
  std::uint64_t draws = 0;
  std::uint64_t rejections = 0;
  std::uint64_t iterations = 0;
};

/// Assembles the reported metrics from the raw counters and owned state.
inline RunStats collect_stats(const RunCounters& counters, const ObstacleSet& obstacles,
                              const SearchTree* start_tree, const SearchTree* goal_tree,
                              const Atlas* atlas, double wall_time) {
  RunStats s;
  s.wall_time = wall_time;
  s.cd_tests = obstacles.cd_count();
  s.branches = counters.branches;
  s.collision_branches = counters.collision_branches;
  s.draws = counters.draws;
  s.rejections = counters.rejections;
  s.iterations = counters.iterations;
  s.start_nodes = start_tree ? start_tree->size() : 0;
  s.goal_nodes = goal_tree ? goal_tree->size() : 0;
  if (atlas != nullptr) {
    s.draws += atlas->draws();
    s.rejections += atlas->rejections();
    s.charts = atlas->size();
    s.final_scaling = atlas->scaling();
    s.radius_floor_violations = atlas->floor_violations();
    s.sampling_exhausted = atlas->exhausted();
  }
  return s;
}

namespace detail {

class BidirectionalPlanner {
 public:
  BidirectionalPlanner(const ConstraintSystem& sys, ObstacleSet& obstacles, const PlannerConfig& cfg)
      : sys_(sys),
        obstacles_(obstacles),
        cfg_(cfg),
        rng_(cfg.seed),
        trees_{SearchTree(sys, cfg.r, cfg.big_r), SearchTree(sys, cfg.r, cfg.big_r)} {
    opt_.delta = cfg.delta;
    opt_.stall = cfg.stall();
    opt_.reach = cfg.reach();
    if (uses_atlas(cfg.strategy)) atlas_.emplace(sys, cfg.atlas);
  }

  PlanResult run(const Vector& start, const Vector& goal) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    PlanResult result;
    add_root(0, start);
    add_root(1, goal);

    if (start == goal) {
      result.success = true;
      result.path = {start};
    }
    while (!result.success) {
      if (counters_.iterations >= cfg_.max_iterations) break;
      if (elapsed() > cfg_.time_budget) {
        result.timed_out = true;
        break;
      }
      const std::size_t active = counters_.iterations % 2;
      ++counters_.iterations;
      iterate(active, result);
    }
    result.stats = collect_stats(counters_, obstacles_, &trees_[0], &trees_[1],
                                 atlas_ ? &*atlas_ : nullptr, elapsed());
    return result;
  }

 private:
  void add_root(std::size_t t, const Vector& x) {
    std::size_t chart = kNoIndex;
    if (atlas_) chart = atlas_->add_chart(x);
    trees_[t].add(x, kNoIndex, chart);
  }

  // Draws a target for `active`; fills `nearest` when the strategy already
  // needed it.
  std::optional<Vector> draw(std::size_t active, std::optional<Neighbor>& nearest) {
    SearchTree& tree = trees_[active];
    switch (cfg_.strategy) {
      case Strategy::AmbientUniform:
        ++counters_.draws;
        return sample_ambient_uniform(sys_.ambient_box(), rng_);
      case Strategy::DynamicDomain:
        for (int attempt = 0; attempt < cfg_.max_dd_attempts; ++attempt) {
          Vector x = sample_ambient_uniform(sys_.ambient_box(), rng_);
          ++counters_.draws;
          const Neighbor nn = tree.nearest(x);
          if (tree.domain().dd_accept(nn.id, nn.distance)) {
            nearest = nn;
            return x;
          }
          ++counters_.rejections;
        }
        return std::nullopt;
      case Strategy::KdTree:
        ++counters_.draws;
        return tree.index().sample(rng_);
      case Strategy::Atlas:
      case Strategy::AtlasDD: {
        auto s = atlas_->sample(rng_);
        if (!s) return std::nullopt;
        return std::move(s->point);
      }
    }
    return std::nullopt;
  }

  BranchResult grow(std::size_t t, std::size_t from, const Vector& target) {
    BranchResult br = extend_branch(sys_, obstacles_, trees_[t], from, target, opt_,
                                    atlas_ ? &*atlas_ : nullptr);
    ++counters_.branches;
    if (br.termination == Termination::Collision) {
      ++counters_.collision_branches;
      trees_[t].domain().mark_boundary(from);
    }
    if (cfg_.strategy == Strategy::AtlasDD) {
      if (br.termination == Termination::Collision) {
        atlas_->update_scaling(BranchOutcome::Collided);
      } else if (!br.nodes.empty()) {
        atlas_->update_scaling(BranchOutcome::Succeeded);
      }
    }
    return br;
  }

  void iterate(std::size_t active, PlanResult& result) {
    std::optional<Neighbor> nearest;
    const std::optional<Vector> target = draw(active, nearest);
    if (!target) return;
    if (!nearest) nearest = trees_[active].nearest(*target);
    if (!(nearest->distance > 0.0)) return;

    const BranchResult br = grow(active, nearest->id, *target);
    if (br.nodes.empty()) return;

    const std::size_t other = 1 - active;
    const std::size_t tip = br.nodes.back();
    const Vector& tip_config = trees_[active].node(tip).config;
    const Neighbor join = trees_[other].nearest(tip_config);
    std::size_t other_tip = join.id;
    if (join.distance > opt_.reach) {
      const BranchResult connect = grow(other, join.id, tip_config);
      if (connect.termination != Termination::Reached) return;
      if (!connect.nodes.empty()) other_tip = connect.nodes.back();
    }
    result.success = true;
    std::vector<Vector> a = trees_[active].path_to(tip);
    std::vector<Vector> b = trees_[other].path_to(other_tip);
    if (active == 1) std::swap(a, b);  // a: from start, b: from goal
    result.path = std::move(a);
    result.path.insert(result.path.end(), b.rbegin(), b.rend());
  }

  const ConstraintSystem& sys_;
  ObstacleSet& obstacles_;
  const PlannerConfig& cfg_;
  std::mt19937_64 rng_;
  SearchTree trees_[2];
  std::optional<Atlas> atlas_;
  ExtendOptions opt_;
  RunCounters counters_;
};

}  // namespace detail

/// Bidirectional search: each iteration extends the active tree toward a
/// drawn target, then greedily extends the other tree toward the new tip. The
/// trees alternate strictly. Deterministic for a given seed, except for the
/// wall time and the wall-clock budget cut-off.
inline PlanResult plan_bidirectional(const ConstraintSystem& sys, ObstacleSet& obstacles, const Vector& start,
                                     const Vector& goal, const PlannerConfig& cfg) {
  cfg.validate();
  require_dimension(start, sys.n(), "plan_bidirectional(start)");
  require_dimension(goal, sys.n(), "plan_bidirectional(goal)");
  for (const Vector* q : {&start, &goal}) {
    if (!sys.on_manifold(*q)) throw std::invalid_argument("plan_bidirectional: query is off the manifold");
    if (obstacles.contains(*q)) throw std::invalid_argument("plan_bidirectional: query is in collision");
  }
  detail::BidirectionalPlanner planner(sys, obstacles, cfg);
  return planner.run(start, goal);
}

}  // namespace kcplan
