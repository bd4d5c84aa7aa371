#include "icpflow/association.hpp"

#include "icpflow/hungarian.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace icpflow {

std::size_t Assignment::matched_count() const {
  return static_cast<std::size_t>(std::count_if(target.begin(), target.end(), [](const auto& t) { return t.has_value(); }));
}

AssociationMatrices build_matrices(std::span<const MatchResult> results, int source_count, int target_count) {
  AssociationMatrices mats;
  mats.distance = Eigen::MatrixXd::Constant(source_count, target_count, std::numeric_limits<double>::infinity());
  mats.ratio = Eigen::MatrixXd::Zero(source_count, target_count);
  mats.transforms.assign(static_cast<std::size_t>(source_count) * static_cast<std::size_t>(target_count),
                         RigidTransform::identity());
  std::vector<char> seen(mats.transforms.size(), 0);
  for (const auto& r : results) {
    if (r.source < 0 || r.source >= source_count || r.target < 0 || r.target >= target_count)
      throw std::out_of_range("build_matrices: cluster id out of range");
    const auto flat = static_cast<std::size_t>(r.source) * static_cast<std::size_t>(target_count) +
                      static_cast<std::size_t>(r.target);
    if (seen[flat])
      throw DuplicateCandidate("build_matrices: duplicate pair (" + std::to_string(r.source) + ", " +
                               std::to_string(r.target) + ")");
    seen[flat] = 1;
    mats.distance(r.source, r.target) = r.mean_distance;
    mats.ratio(r.source, r.target) = r.inlier_ratio;
    mats.transforms[flat] = r.transform;
  }
  return mats;
}

namespace {

Assignment unmatched(Eigen::Index rows) {
  Assignment a;
  a.target.assign(static_cast<std::size_t>(rows), std::nullopt);
  a.transform.assign(static_cast<std::size_t>(rows), RigidTransform::identity());
  return a;
}

bool feasible(const AssociationMatrices& mats, Eigen::Index m, Eigen::Index n, const Thresholds& th) {
  return mats.ratio(m, n) >= th.min_ratio && mats.distance(m, n) <= th.max_distance;
}

}  // namespace

Assignment associate_argmin(const AssociationMatrices& mats, const Thresholds& th) {
  Assignment out = unmatched(mats.rows());
  for (Eigen::Index m = 0; m < mats.rows(); ++m) {
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < mats.cols(); ++n) {
      if (mats.ratio(m, n) < th.min_ratio) continue;
      if (mats.distance(m, n) < best_d) {
        best_d = mats.distance(m, n);
        best = n;
      }
    }
    if (best < 0 || best_d > th.max_distance) continue;
    out.target[static_cast<std::size_t>(m)] = static_cast<ClusterId>(best);
    out.transform[static_cast<std::size_t>(m)] = mats.transform(m, best);
  }
  return out;
}

Eigen::MatrixXd hungarian_cost_matrix(const AssociationMatrices& mats, const Thresholds& th) {
  const Eigen::Index size = std::max(mats.rows(), mats.cols());
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(size, size, kInfeasibleCost);
  for (Eigen::Index m = 0; m < mats.rows(); ++m)
    for (Eigen::Index n = 0; n < mats.cols(); ++n)
      if (feasible(mats, m, n, th)) cost(m, n) = mats.distance(m, n);
  return cost;
}

Assignment associate_hungarian(const AssociationMatrices& mats, const Thresholds& th) {
  Assignment out = unmatched(mats.rows());
  if (mats.rows() == 0 || mats.cols() == 0) return out;
  const auto row_to_col = solve_assignment(hungarian_cost_matrix(mats, th));
  for (Eigen::Index m = 0; m < mats.rows(); ++m) {
    const int n = row_to_col[static_cast<std::size_t>(m)];
    if (n >= mats.cols() || !feasible(mats, m, n, th)) continue;
    out.target[static_cast<std::size_t>(m)] = static_cast<ClusterId>(n);
    out.transform[static_cast<std::size_t>(m)] = mats.transform(m, n);
  }
  return out;
}

}  // namespace icpflow
