#pragma once

#include "icpflow/geometry.hpp"

#include <cstdint>
#include <vector>

namespace icpflow {

using ClusterId = std::int32_t;
inline constexpr ClusterId kNoise = -1;

/// Maps scan_t into scan_t2's frame given sensor-to-world poses: inv(pose_t2) * pose_t.
RigidTransform relative_ego(const RigidTransform& pose_t, const RigidTransform& pose_t2);

PointCloud compensate_ego(const PointCloud& scan, const RigidTransform& ego);

struct GroundFiltered {
  PointCloud cloud;
  /// kept[i] is the index in the original scan of cloud.points[i].
  std::vector<std::size_t> kept;
};

/// Keeps exactly the points with z > z_threshold.
GroundFiltered remove_ground(const PointCloud& scan, double z_threshold);

struct ClusterParams {
  double eps = 0.75;
  int min_samples = 5;
  int min_cluster_size = 20;
};

/**
 * Two scans clustered jointly. Ids are contiguous 0..cluster_count-1, ordered
 * by descending fused point count (ties: smallest fused member index).
 */
struct ClusteredScanPair {
  PointCloud scan_t;
  PointCloud scan_t2;
  std::vector<ClusterId> labels_t;
  std::vector<ClusterId> labels_t2;
  int cluster_count = 0;

  /// Fused point count per cluster id.
  std::vector<std::size_t> cluster_sizes() const;
  /// Indices into scan_t / scan_t2 of the members of `id`.
  std::vector<std::size_t> members_t(ClusterId id) const;
  std::vector<std::size_t> members_t2(ClusterId id) const;
  std::vector<Vec3> points_t(ClusterId id) const;
  std::vector<Vec3> points_t2(ClusterId id) const;
};

/**
 * @brief Density clustering of a single point set.
 *
 * Core points have at least min_samples neighbors within eps (the point itself
 * included). Clusters are connected components of core points under the eps
 * graph; a border point joins the cluster of its lowest-index core neighbor.
 * Returned ids are raw component ids in order of first core member; no size
 * filter is applied.
 */
std::vector<ClusterId> density_cluster(std::span<const Vec3> points, double eps, int min_samples);

ClusteredScanPair cluster_fused(const PointCloud& scan_t, const PointCloud& scan_t2,
                                const ClusterParams& params);

/// Keep the max_clusters largest clusters; the rest become noise.
ClusteredScanPair select_top_clusters(const ClusteredScanPair& pair, int max_clusters);

}  // namespace icpflow
