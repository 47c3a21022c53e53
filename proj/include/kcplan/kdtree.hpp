#pragma once

// Incremental kd-tree over ambient points. Besides nearest-neighbour queries,
// each leaf keeps its r-bounding rectangle (the points' bounding box inflated
// by r, clipped to the leaf subdomain and the ambient box) and internal nodes
// cache the summed rectangle volume of their subtree, so the tree can draw
// samples uniformly over the union of rectangles without rejection.

#include "kcplan/types.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kcplan {

class EmptyTreeError : public std::runtime_error {
 public:
  EmptyTreeError() : std::runtime_error("kd-tree is empty") {}
};

class ZeroVolumeError : public std::runtime_error {
 public:
  ZeroVolumeError() : std::runtime_error("kd-tree r-bounding rectangles have zero total volume") {}
};

/// Rectangle with corners min_i(x_i) - r and max_i(x_i) + r per coordinate,
/// intersected with the leaf subdomain and the ambient box. An empty
/// intersection comes back with zero volume.
inline Box r_bounding_rect(const Box& point_bounds, double r, const Box& leaf_subdomain,
                           const Box& ambient_box) {
  Box inflated{point_bounds.lower.array() - r, point_bounds.upper.array() + r};
  return inflated.intersect(leaf_subdomain).intersect(ambient_box);
}

inline Box r_bounding_rect(std::span<const Vector> points, double r, const Box& leaf_subdomain,
                           const Box& ambient_box) {
  if (points.empty()) throw std::invalid_argument("r_bounding_rect: leaf has no points");
  Box bounds{points.front(), points.front()};
  for (const auto& p : points) {
    bounds.lower = bounds.lower.cwiseMin(p);
    bounds.upper = bounds.upper.cwiseMax(p);
  }
  return r_bounding_rect(bounds, r, leaf_subdomain, ambient_box);
}

struct Neighbor {
  std::size_t id = 0;
  double distance = 0.0;
};

class RrtKdTree {
 public:
  static constexpr std::size_t kDefaultLeafCapacity = 8;

  /// Read-only view of one tree node, for inspection and testing.
  struct NodeView {
    bool leaf = true;
    int split_dim = -1;
    double split_value = 0.0;
    int lower = -1;
    int upper = -1;
    int depth = 0;
    const Box* subdomain = nullptr;
    const Box* rect = nullptr;  // leaves only
    double volume = 0.0;        // cached rectangle volume of the subtree
    std::span<const std::size_t> items;  // leaves only, indices into points()
  };

  RrtKdTree(Box ambient_box, double r, std::size_t leaf_capacity = kDefaultLeafCapacity)
      : ambient_(std::move(ambient_box)), r_(r), capacity_(leaf_capacity) {
    if (!ambient_.non_degenerate()) throw std::invalid_argument("RrtKdTree: degenerate ambient box");
    if (!(r >= 0.0)) throw std::invalid_argument("RrtKdTree: r must be non-negative");
    if (capacity_ == 0) throw std::invalid_argument("RrtKdTree: leaf capacity must be positive");
    Node root;
    root.subdomain = ambient_;
    nodes_.push_back(std::move(root));
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double r() const { return r_; }
  const Box& ambient_box() const { return ambient_; }
  double total_volume() const { return nodes_[0].volume; }

  std::span<const Vector> points() const { return points_; }
  std::span<const std::size_t> ids() const { return ids_; }

  void insert(const Vector& x, std::size_t id) {
    require_dimension(x, ambient_.dim(), "RrtKdTree::insert");
    if (!ambient_.contains(x)) throw std::invalid_argument("RrtKdTree::insert: point outside ambient box");
    const std::size_t item = points_.size();
    points_.push_back(x);
    ids_.push_back(id);

    int at = 0;
    while (!nodes_[at].leaf) {
      const Node& nd = nodes_[at];
      at = x[nd.split_dim] <= nd.split_value ? nd.lower : nd.upper;
    }
    Node& leaf = nodes_[at];
    if (leaf.items.empty()) {
      leaf.bounds = Box{x, x};
    } else {
      leaf.bounds.lower = leaf.bounds.lower.cwiseMin(x);
      leaf.bounds.upper = leaf.bounds.upper.cwiseMax(x);
    }
    leaf.items.push_back(item);
    refresh_leaf(at);
    if (leaf.items.size() > capacity_) split(at);
    propagate(nodes_[at].parent);
  }

  /// Exact Euclidean nearest neighbour; ties go to the smaller id.
  Neighbor nearest(const Vector& x) const {
    require_dimension(x, ambient_.dim(), "RrtKdTree::nearest");
    if (empty()) throw EmptyTreeError();
    Best best;
    search(0, x, best);
    return {ids_[best.item], std::sqrt(best.d2)};
  }

  /// Uniform draw over the union of all leaf r-bounding rectangles.
  template <class Rng>
  Vector sample(Rng& rng) const {
    if (empty() || !(total_volume() > 0.0)) throw ZeroVolumeError();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int at = 0;
    while (!nodes_[at].leaf) {
      const Node& nd = nodes_[at];
      const double u = unit(rng) * nd.volume;
      at = u < nodes_[nd.lower].volume ? nd.lower : nd.upper;
    }
    const Box& rect = nodes_[at].rect;
    Vector out(rect.dim());
    for (Eigen::Index i = 0; i < rect.dim(); ++i) {
      out[i] = rect.lower[i] + unit(rng) * (rect.upper[i] - rect.lower[i]);
    }
    return out;
  }

  std::size_t node_count() const { return nodes_.size(); }

  NodeView node(std::size_t i) const {
    const Node& nd = nodes_.at(i);
    NodeView v;
    v.leaf = nd.leaf;
    v.split_dim = nd.split_dim;
    v.split_value = nd.split_value;
    v.lower = nd.lower;
    v.upper = nd.upper;
    v.depth = nd.depth;
    v.subdomain = &nd.subdomain;
    v.volume = nd.volume;
    if (nd.leaf) {
      v.rect = &nd.rect;
      v.items = nd.items;
    }
    return v;
  }

 private:
  struct Node {
    bool leaf = true;
    int split_dim = -1;
    double split_value = 0.0;
    int lower = -1;
    int upper = -1;
    int parent = -1;
    int depth = 0;
    Box subdomain;
    double volume = 0.0;
    // leaf payload
    std::vector<std::size_t> items;
    Box bounds;
    Box rect;
  };

  struct Best {
    std::size_t item = 0;
    double d2 = std::numeric_limits<double>::infinity();
    bool set = false;
  };

  void refresh_leaf(int at) {
    Node& nd = nodes_[at];
    if (nd.items.empty()) {
      nd.rect = Box{nd.subdomain.lower, nd.subdomain.lower};
      nd.volume = 0.0;
      return;
    }
    nd.rect = r_bounding_rect(nd.bounds, r_, nd.subdomain, ambient_);
    nd.volume = nd.rect.volume();
  }

  void propagate(int at) {
    while (at >= 0) {
      Node& nd = nodes_[at];
      nd.volume = nodes_[nd.lower].volume + nodes_[nd.upper].volume;
      at = nd.parent;
    }
  }

  // Median split, round-robin on depth; falls through to the next dimension
  // when every point shares the median coordinate.
  void split(int at) {
    const auto n = static_cast<int>(ambient_.dim());
    const int depth = nodes_[at].depth;
    for (int attempt = 0; attempt < n; ++attempt) {
      const int dim = (depth + attempt) % n;
      std::vector<double> vals;
      vals.reserve(nodes_[at].items.size());
      for (std::size_t it : nodes_[at].items) vals.push_back(points_[it][dim]);
      std::sort(vals.begin(), vals.end());
      const double median = vals[(vals.size() - 1) / 2];
      if (!(median < vals.back())) continue;

      Node lo;
      Node hi;
      lo.parent = hi.parent = at;
      lo.depth = hi.depth = depth + 1;
      lo.subdomain = hi.subdomain = nodes_[at].subdomain;
      lo.subdomain.upper[dim] = median;
      hi.subdomain.lower[dim] = median;
      for (std::size_t it : nodes_[at].items) {
        Node& dst = points_[it][dim] <= median ? lo : hi;
        if (dst.items.empty()) {
          dst.bounds = Box{points_[it], points_[it]};
        } else {
          dst.bounds.lower = dst.bounds.lower.cwiseMin(points_[it]);
          dst.bounds.upper = dst.bounds.upper.cwiseMax(points_[it]);
        }
        dst.items.push_back(it);
      }
      const int lo_index = static_cast<int>(nodes_.size());
      nodes_.push_back(std::move(lo));
      nodes_.push_back(std::move(hi));
      refresh_leaf(lo_index);
      refresh_leaf(lo_index + 1);

      Node& nd = nodes_[at];
      nd.leaf = false;
      nd.split_dim = dim;
      nd.split_value = median;
      nd.lower = lo_index;
      nd.upper = lo_index + 1;
      nd.items.clear();
      nd.items.shrink_to_fit();
      nd.volume = nodes_[lo_index].volume + nodes_[lo_index + 1].volume;
      return;
    }
  }

  void consider(std::size_t item, const Vector& x, Best& best) const {
    const double d2 = (points_[item] - x).squaredNorm();
    if (!best.set || d2 < best.d2 || (d2 == best.d2 && ids_[item] < ids_[best.item])) {
      best = {item, d2, true};
    }
  }

  void search(int at, const Vector& x, Best& best) const {
    const Node& nd = nodes_[at];
    if (nd.leaf) {
      for (std::size_t it : nd.items) consider(it, x, best);
      return;
    }
    const bool go_lower = x[nd.split_dim] <= nd.split_value;
    const int first = go_lower ? nd.lower : nd.upper;
    const int second = go_lower ? nd.upper : nd.lower;
    search(first, x, best);
    // <= keeps equal-distance candidates reachable for the id tie-break.
    if (nodes_[second].subdomain.squared_distance(x) <= best.d2) search(second, x, best);
  }

  Box ambient_;
  double r_;
  std::size_t capacity_;
  std::vector<Node> nodes_;
  std::vector<Vector> points_;
  std::vector<std::size_t> ids_;
};

}  // namespace kcplan
