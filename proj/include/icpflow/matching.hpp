#pragma once

#include "icpflow/geometry.hpp"
#include "icpflow/neighbor_index.hpp"
#include "icpflow/preprocess.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace icpflow {

struct ClusterPair {
  ClusterId source = 0;
  ClusterId target = 0;
  auto operator<=>(const ClusterPair&) const = default;
};

/// Candidate pairs for ICP, in the two phases they are evaluated in.
struct CandidateSet {
  std::vector<ClusterPair> same_index;  ///< (m, m) for ids present in both scans
  std::vector<ClusterPair> proximity;   ///< box-overlap pairs among the remaining clusters
};

std::vector<ClusterPair> same_index_pairs(const ClusteredScanPair& pair);

/**
 * Pairs every source cluster with every target cluster whose bounding box,
 * grown by (tau_x, tau_y) in x/y, overlaps the source box. Clusters flagged in
 * `source_done` / `target_done` (indexed by id; empty means none) are skipped.
 */
std::vector<ClusterPair> proximity_pairs(const ClusteredScanPair& pair, double tau_x, double tau_y,
                                         std::span<const char> source_done = {},
                                         std::span<const char> target_done = {});

/// Both phases with nothing excluded from the second.
CandidateSet pair_clusters(const ClusteredScanPair& pair, double tau_x, double tau_y);

/**
 * @brief 3D vote grid over candidate translations.
 *
 * Axis d has L_d = ceil(2 tau_d / bin_size) + 1 bins with centers at
 * -tau_d + k * bin_size. A vote lands in the nearest center; votes outside
 * [-tau_d, +tau_d] on any axis are discarded. Flattening is x-major.
 */
class TranslationHistogram {
public:
  TranslationHistogram(const Vec3& ranges, double bin_size);

  static int bins_for(double range, double bin_size);

  const std::array<int, 3>& shape() const { return shape_; }
  const Vec3& ranges() const { return ranges_; }
  double bin_size() const { return bin_size_; }

  /// Returns false if the vote was discarded as out of range.
  bool vote(const Vec3& translation);

  std::size_t total() const { return total_; }
  std::uint32_t count(std::size_t flat) const { return counts_[flat]; }
  std::size_t flat_size() const { return counts_.size(); }
  std::size_t flat_index(int ix, int iy, int iz) const;

  /// Bin with the most votes; lowest flat index wins ties.
  std::size_t argmax() const;
  Vec3 center(std::size_t flat) const;

private:
  Vec3 ranges_;
  double bin_size_;
  std::array<int, 3> shape_{};
  std::vector<std::uint32_t> counts_;
  std::size_t total_ = 0;
};

inline constexpr std::size_t kDefaultVoteCap = 2'000'000;

/**
 * Votes every pairwise difference src_i - dst_j. When |src| * |dst| exceeds
 * vote_cap both sets are uniformly subsampled (fixed seed) to fit under it.
 */
TranslationHistogram vote_translations(std::span<const Vec3> src, std::span<const Vec3> dst,
                                       const Vec3& ranges, double bin_size,
                                       std::size_t vote_cap = kDefaultVoteCap);

/// Dominant translation taking src toward dst; zero when every vote was out of range.
Vec3 histogram_init(std::span<const Vec3> src, std::span<const Vec3> dst, const Vec3& ranges,
                    double bin_size, std::size_t vote_cap = kDefaultVoteCap);

struct MatchResult {
  ClusterId source = 0;
  ClusterId target = 0;
  RigidTransform transform;
  double mean_distance = 0.0;  ///< d
  double inlier_ratio = 0.0;   ///< r, may exceed 1 when nearest neighbors repeat
  std::size_t inliers = 0;
  int iterations = 0;
};

/// inliers / (source_size + target_size - inliers)
double inlier_ratio(std::size_t inliers, std::size_t source_size, std::size_t target_size);

struct IcpParams {
  int max_iters = 100;
  double convergence_tol = 1e-4;   // meters of RMS improvement
  double inlier_threshold = 0.1;   // meters
};

/**
 * Point-to-point ICP from `init`. Each iteration corresponds transformed src
 * points to their nearest dst point and refits; an iteration that would raise
 * the RMS correspondence distance is rejected and ends the loop. d and r are
 * measured at the final transform.
 *
 * `rms_trace`, when given, receives the RMS after init and after every
 * accepted iteration.
 */
MatchResult icp_align(std::span<const Vec3> src, const NeighborIndex& dst, const RigidTransform& init,
                      const IcpParams& params, std::vector<double>* rms_trace = nullptr);
MatchResult icp_align(std::span<const Vec3> src, std::span<const Vec3> dst, const RigidTransform& init,
                      const IcpParams& params, std::vector<double>* rms_trace = nullptr);

enum class InitMode { histogram, centroid, none };

struct MatchParams {
  Vec3 ranges{3.33, 3.33, 0.1};  // tau_x, tau_y, tau_z
  double bin_size = 0.1;
  InitMode init = InitMode::histogram;
  IcpParams icp;
  std::size_t vote_cap = kDefaultVoteCap;
  unsigned threads = 1;
};

RigidTransform initial_transform(std::span<const Vec3> src, std::span<const Vec3> dst,
                                 const MatchParams& params);

/// Initialization + ICP for every candidate; sorted by (source, target).
std::vector<MatchResult> match_candidates(const ClusteredScanPair& pair,
                                          std::span<const ClusterPair> candidates,
                                          const MatchParams& params);

}  // namespace icpflow
