#pragma once

#include "icpflow/association.hpp"
#include "icpflow/config.hpp"
#include "icpflow/flow.hpp"
#include "icpflow/matching.hpp"
#include "icpflow/preprocess.hpp"

#include <span>
#include <vector>

namespace icpflow {

/// Everything one scan-pair run produces, kept for chaining and inspection.
struct PairEstimate {
  FlowField flow;
  GroundFiltered source;  ///< scan_t after ground removal (sensor frame)
  GroundFiltered target;
  ClusteredScanPair clusters;  ///< scan_t ego-compensated
  std::vector<MatchResult> results;  ///< scores that entered association
  Assignment assignment;
  RigidTransform ego;
};

/**
 * Full two-scan pipeline: ground removal, ego compensation of scan_t,
 * fused clustering, two-phase pairing (same index first, then proximity
 * among what is left), ICP scoring, association and flow recovery.
 * `gap` is the time between the scans and scales the search range.
 */
PairEstimate estimate_pair(const PointCloud& scan_t, const PointCloud& scan_t2, const RigidTransform& ego,
                           const PipelineConfig& config, double gap);

/// Single-pair run at the config's dt.
PairEstimate estimate_pair(const PointCloud& scan_t, const PointCloud& scan_t2, const RigidTransform& ego,
                           const PipelineConfig& config);

/// Non-tracking long-horizon flow: one pipeline run across a gap of `gap` seconds.
/// @throws std::invalid_argument if gap <= 0.
FlowField direct_pair_flow(const PointCloud& scan_a, const PointCloud& scan_b, const RigidTransform& ego,
                           const PipelineConfig& config, double gap);

/**
 * Tracks frame-0 clusters through consecutive pairs and returns frame-0 ->
 * frame-k flows for k = 1..K-1. `egos[k]` maps scan k into scan k+1. A chain
 * that loses its match continues with ego motion only.
 */
std::vector<FlowField> track_sequence(std::span<const PointCloud> scans, std::span<const RigidTransform> egos,
                                      const PipelineConfig& config);

}  // namespace icpflow
