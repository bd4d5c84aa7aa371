#pragma once

#include "icpflow/association.hpp"
#include "icpflow/geometry.hpp"
#include "icpflow/preprocess.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace icpflow {

class LengthMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per-point displacement, aligned one-to-one with a full source scan.
struct FlowField {
  std::vector<Vec3> vectors;

  std::size_t size() const { return vectors.size(); }
};

/**
 * Scene flow from per-cluster transforms. A point of a matched cluster k
 * moves by (T_k * ego)(x) - x; ground, noise and unmatched points move by
 * ego(x) - x.
 *
 * `kept` maps label positions to full-scan indices (see remove_ground).
 * @throws LengthMismatch if labels/kept disagree with each other or the scan.
 */
FlowField recover_flow(const PointCloud& full_scan, std::span<const std::size_t> kept,
                       std::span<const ClusterId> labels, const Assignment& assignment,
                       const RigidTransform& ego);

/// Flow of every point under one rigid motion: t(x) - x.
FlowField rigid_flow(const PointCloud& scan, const RigidTransform& t);

/**
 * Cumulative motion over a chain of scan pairs:
 * object_steps[k-1] * ego_steps[k-1] * ... * object_steps[0] * ego_steps[0].
 */
RigidTransform chain_transform(std::span<const RigidTransform> object_steps,
                               std::span<const RigidTransform> ego_steps);

/// Labels spread back onto a full scan; ground positions become noise.
std::vector<ClusterId> scatter_labels(std::size_t full_size, std::span<const std::size_t> kept,
                                      std::span<const ClusterId> labels);

/**
 * Chain links between consecutive pairs. Given labels of the shared scan from
 * pair j (as target, `prev_target`) and from pair j+1 (as source, `next_source`),
 * each next-pair cluster votes for the previous-pair cluster contributing most
 * of its points; every previous cluster then continues into the voter with the
 * largest overlap (ties: lowest id). Entry n is the successor of previous
 * cluster n, or kNoise.
 */
std::vector<ClusterId> link_clusters(std::span<const ClusterId> prev_target, int prev_count,
                                     std::span<const ClusterId> next_source, int next_count);

}  // namespace icpflow
