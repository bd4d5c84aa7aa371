#pragma once

#include "icpflow/geometry.hpp"
#include "icpflow/matching.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace icpflow {

class DuplicateCandidate : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per cluster pair scores: distance +inf / ratio 0 where the pair was never scored.
struct AssociationMatrices {
  Eigen::MatrixXd distance;
  Eigen::MatrixXd ratio;
  std::vector<RigidTransform> transforms;  ///< row-major M x N, identity where unscored

  Eigen::Index rows() const { return distance.rows(); }
  Eigen::Index cols() const { return distance.cols(); }
  const RigidTransform& transform(Eigen::Index m, Eigen::Index n) const {
    return transforms[static_cast<std::size_t>(m * cols() + n)];
  }
};

/// @throws DuplicateCandidate if two results share (source, target).
AssociationMatrices build_matrices(std::span<const MatchResult> results, int source_count, int target_count);

struct Thresholds {
  double max_distance = 0.2;  ///< tau_d
  double min_ratio = 0.2;     ///< tau_r
};

/// One entry per source cluster; unmatched sources carry the identity.
struct Assignment {
  std::vector<std::optional<ClusterId>> target;
  std::vector<RigidTransform> transform;

  std::size_t size() const { return target.size(); }
  std::size_t matched_count() const;
};

/**
 * Row-wise: mask entries with ratio < tau_r, take the smallest remaining
 * distance (lowest target id on ties), then reject it if distance > tau_d.
 * Several sources may claim the same target.
 */
Assignment associate_argmin(const AssociationMatrices& mats, const Thresholds& th);

/// Large finite cost standing in for infeasible and padding entries.
inline constexpr double kInfeasibleCost = 1e6;

/**
 * One-to-one assignment minimizing total distance over feasible entries
 * (ratio >= tau_r and distance <= tau_d). The matrix is padded to square
 * with kInfeasibleCost; sources that land on padding or on an infeasible
 * entry are reported unmatched.
 */
Assignment associate_hungarian(const AssociationMatrices& mats, const Thresholds& th);

/// The padded square cost matrix associate_hungarian solves.
Eigen::MatrixXd hungarian_cost_matrix(const AssociationMatrices& mats, const Thresholds& th);

}  // namespace icpflow
