#include "icpflow/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace icpflow {

namespace {
constexpr std::size_t kLeafSize = 8;
}

NeighborIndex::NeighborIndex(std::span<const Vec3> points)
    : points_(points.begin(), points.end()), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

int NeighborIndex::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi(axis) - lo(axis) <= 0.0) return id;  // all coincident: keep as leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return points_[a](axis) < points_[b](axis); });
  const double split = points_[order_[mid]](axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

Neighbor NeighborIndex::nearest(const Vec3& query) const {
  if (points_.empty()) throw EmptyIndex("nearest: index built over zero points");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  nearest_rec(0, query, best, best_d2);
  return {best, std::sqrt(best_d2)};
}

void NeighborIndex::nearest_rec(int node_id, const Vec3& q, std::size_t& best,
                                double& best_d2) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  const double diff = q(node.axis) - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  nearest_rec(near, q, best, best_d2);
  // <= so that equidistant points on the far side still compete on index
  if (diff * diff <= best_d2) nearest_rec(far, q, best, best_d2);
}

std::vector<std::size_t> NeighborIndex::radius(const Vec3& query, double r) const {
  std::vector<std::size_t> out;
  if (points_.empty() || r < 0.0) return out;
  radius_rec(0, query, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void NeighborIndex::radius_rec(int node_id, const Vec3& q, double r2,
                               std::vector<std::size_t>& out) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      if ((points_[order_[i]] - q).squaredNorm() <= r2) out.push_back(order_[i]);
    }
    return;
  }
  const double diff = q(node.axis) - node.split;
  if (diff <= 0.0 || diff * diff <= r2) radius_rec(node.left, q, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) radius_rec(node.right, q, r2, out);
}

}  // namespace icpflow
