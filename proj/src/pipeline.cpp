#include "icpflow/pipeline.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace icpflow {

namespace {

bool accepted(const MatchResult& r, const Thresholds& th) {
  return r.inlier_ratio >= th.min_ratio && r.mean_distance <= th.max_distance;
}

}  // namespace

PairEstimate estimate_pair(const PointCloud& scan_t, const PointCloud& scan_t2, const RigidTransform& ego,
                           const PipelineConfig& config, double gap) {
  config.validate();
  if (!(gap > 0.0)) throw std::invalid_argument("estimate_pair: gap must be > 0");

  PairEstimate out;
  out.ego = ego;
  out.source = remove_ground(scan_t, config.z_threshold);
  out.target = remove_ground(scan_t2, config.z_threshold);
  out.clusters = select_top_clusters(
      cluster_fused(compensate_ego(out.source.cloud, ego), out.target.cloud, config.cluster_params()),
      config.max_clusters);

  const ClusteredScanPair& clusters = out.clusters;
  const MatchParams params = config.match_params(gap);
  const Thresholds th = config.thresholds();
  const auto count = static_cast<std::size_t>(clusters.cluster_count);

  // Phase 1: same fused index. Accepted pairs leave the pool.
  const auto same = same_index_pairs(clusters);
  const auto first = match_candidates(clusters, same, params);
  std::vector<char> source_done(count, 0), target_done(count, 0);
  std::map<ClusterPair, const MatchResult*> scored;
  for (const auto& r : first) {
    scored[{r.source, r.target}] = &r;
    if (accepted(r, th)) {
      source_done[static_cast<std::size_t>(r.source)] = 1;
      target_done[static_cast<std::size_t>(r.target)] = 1;
      out.results.push_back(r);
    }
  }

  // Phase 2: proximity among the rest, reusing phase-1 scores where they exist.
  const auto near = proximity_pairs(clusters, params.ranges.x(), params.ranges.y(), source_done, target_done);
  std::vector<ClusterPair> fresh;
  for (const auto& c : near) {
    if (auto it = scored.find(c); it != scored.end()) {
      out.results.push_back(*it->second);
    } else {
      fresh.push_back(c);
    }
  }
  const auto second = match_candidates(clusters, fresh, params);
  out.results.insert(out.results.end(), second.begin(), second.end());
  std::sort(out.results.begin(), out.results.end(), [](const MatchResult& a, const MatchResult& b) {
    return ClusterPair{a.source, a.target} < ClusterPair{b.source, b.target};
  });

  const auto mats = build_matrices(out.results, clusters.cluster_count, clusters.cluster_count);
  out.assignment = config.association == AssociationMode::hungarian ? associate_hungarian(mats, th)
                                                                     : associate_argmin(mats, th);
  out.flow = recover_flow(scan_t, out.source.kept, clusters.labels_t, out.assignment, ego);
  return out;
}

PairEstimate estimate_pair(const PointCloud& scan_t, const PointCloud& scan_t2, const RigidTransform& ego,
                           const PipelineConfig& config) {
  return estimate_pair(scan_t, scan_t2, ego, config, config.dt);
}

FlowField direct_pair_flow(const PointCloud& scan_a, const PointCloud& scan_b, const RigidTransform& ego,
                           const PipelineConfig& config, double gap) {
  if (!(gap > 0.0)) throw std::invalid_argument("direct_pair_flow: gap must be > 0");
  return estimate_pair(scan_a, scan_b, ego, config, gap).flow;
}

std::vector<FlowField> track_sequence(std::span<const PointCloud> scans, std::span<const RigidTransform> egos,
                                      const PipelineConfig& config) {
  if (scans.size() < 2) throw std::invalid_argument("track_sequence: need at least 2 scans");
  if (egos.size() != scans.size() - 1) throw LengthMismatch("track_sequence: need one ego transform per scan pair");

  const std::size_t pairs = scans.size() - 1;
  std::vector<PairEstimate> est;
  est.reserve(pairs);
  for (std::size_t k = 0; k < pairs; ++k) est.push_back(estimate_pair(scans[k], scans[k + 1], egos[k], config));

  // links[k][n]: pair-(k+1) source cluster continuing pair-k target cluster n
  std::vector<std::vector<ClusterId>> links(pairs);
  for (std::size_t k = 0; k + 1 < pairs; ++k) {
    const auto prev = scatter_labels(scans[k + 1].size(), est[k].target.kept, est[k].clusters.labels_t2);
    const auto next = scatter_labels(scans[k + 1].size(), est[k + 1].source.kept, est[k + 1].clusters.labels_t);
    links[k] = link_clusters(prev, est[k].clusters.cluster_count, next, est[k + 1].clusters.cluster_count);
  }

  // One chain per frame-0 cluster plus one shared ego-only chain (index 0).
  const int roots = est[0].clusters.cluster_count;
  std::vector<RigidTransform> cumulative(static_cast<std::size_t>(roots) + 1);
  std::vector<ClusterId> current(static_cast<std::size_t>(roots) + 1, kNoise);
  for (int c = 0; c < roots; ++c) current[static_cast<std::size_t>(c) + 1] = c;

  const auto frame0_labels = scatter_labels(scans[0].size(), est[0].source.kept, est[0].clusters.labels_t);
  const PointCloud& base = scans[0];
  std::vector<FlowField> flows;
  flows.reserve(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    const Assignment& a = est[k].assignment;
    for (std::size_t chain = 0; chain < cumulative.size(); ++chain) {
      const ClusterId c = current[chain];
      std::optional<ClusterId> target;
      if (c >= 0 && static_cast<std::size_t>(c) < a.size()) target = a.target[static_cast<std::size_t>(c)];
      if (target) {
        cumulative[chain] = compose(a.transform[static_cast<std::size_t>(c)], compose(egos[k], cumulative[chain]));
        current[chain] = k + 1 < pairs ? links[k][static_cast<std::size_t>(*target)] : kNoise;
      } else {
        cumulative[chain] = compose(egos[k], cumulative[chain]);
        current[chain] = kNoise;  // broken chains stay ego-only
      }
    }
    FlowField flow;
    flow.vectors.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      const std::size_t chain = frame0_labels[i] >= 0 ? static_cast<std::size_t>(frame0_labels[i]) + 1 : 0;
      flow.vectors[i] = cumulative[chain](base.points[i]) - base.points[i];
    }
    flows.push_back(std::move(flow));
  }
  return flows;
}

}  // namespace icpflow
