#pragma once

#include "icpflow/geometry.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace icpflow {

class EmptyIndex : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/**
 * @brief Immutable exact k-d tree over a fixed 3D point set.
 *
 * Queries return the true Euclidean nearest neighbor. Equidistant candidates
 * resolve to the lowest point index, so results never depend on tree layout.
 */
class NeighborIndex {
public:
  explicit NeighborIndex(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// @throws EmptyIndex when built over zero points.
  Neighbor nearest(const Vec3& query) const;

  /// Indices of all points with distance <= radius, ascending.
  std::vector<std::size_t> radius(const Vec3& query, double radius) const;

private:
  struct Node {
    std::size_t begin;   // range into order_
    std::size_t end;
    int axis;            // -1 for leaf
    double split;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end);
  void nearest_rec(int node, const Vec3& q, std::size_t& best, double& best_d2) const;
  void radius_rec(int node, const Vec3& q, double r2, std::vector<std::size_t>& out) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace icpflow
