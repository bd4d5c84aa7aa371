#include "icpflow/preprocess.hpp"

#include "icpflow/neighbor_index.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace icpflow {

RigidTransform relative_ego(const RigidTransform& pose_t, const RigidTransform& pose_t2) {
  return compose(invert(pose_t2), pose_t);
}

PointCloud compensate_ego(const PointCloud& scan, const RigidTransform& ego) {
  return apply(ego, scan);
}

GroundFiltered remove_ground(const PointCloud& scan, double z_threshold) {
  GroundFiltered out;
  out.cloud.timestamp = scan.timestamp;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (scan.points[i].z() > z_threshold) {
      out.cloud.points.push_back(scan.points[i]);
      out.kept.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t> ClusteredScanPair::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(cluster_count), 0);
  for (ClusterId l : labels_t)
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  for (ClusterId l : labels_t2)
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

namespace {

std::vector<std::size_t> members(const std::vector<ClusterId>& labels, ClusterId id) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == id) out.push_back(i);
  return out;
}

std::vector<Vec3> gather(const PointCloud& pc, const std::vector<ClusterId>& labels, ClusterId id) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == id) out.push_back(pc.points[i]);
  return out;
}

}  // namespace

std::vector<std::size_t> ClusteredScanPair::members_t(ClusterId id) const { return members(labels_t, id); }
std::vector<std::size_t> ClusteredScanPair::members_t2(ClusterId id) const { return members(labels_t2, id); }
std::vector<Vec3> ClusteredScanPair::points_t(ClusterId id) const { return gather(scan_t, labels_t, id); }
std::vector<Vec3> ClusteredScanPair::points_t2(ClusterId id) const { return gather(scan_t2, labels_t2, id); }

std::vector<ClusterId> density_cluster(std::span<const Vec3> points, double eps, int min_samples) {
  const std::size_t n = points.size();
  std::vector<ClusterId> labels(n, kNoise);
  if (n == 0) return labels;

  const NeighborIndex index(points);
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = index.radius(points[i], eps);
    core[i] = static_cast<int>(neighbors[i].size()) >= min_samples;
  }

  // Components of the core graph, flooded in index order.
  ClusterId next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || labels[seed] != kNoise) continue;
    labels[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q : neighbors[p]) {
        if (core[q] && labels[q] == kNoise) {
          labels[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }

  // Border points: cluster of the lowest-index core neighbor (neighbors are sorted).
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::size_t q : neighbors[i]) {
      if (core[q]) {
        labels[i] = labels[q];
        break;
      }
    }
  }
  return labels;
}

namespace {

/// Relabel by descending size then smallest member index, dropping those below min_size.
std::vector<ClusterId> canonical_relabel(std::vector<ClusterId> labels, std::size_t min_size,
                                         std::size_t max_keep, int& count) {
  ClusterId raw_count = 0;
  for (ClusterId l : labels) raw_count = std::max(raw_count, static_cast<ClusterId>(l + 1));
  std::vector<std::size_t> size(static_cast<std::size_t>(raw_count), 0);
  std::vector<std::size_t> first(static_cast<std::size_t>(raw_count), labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    const auto l = static_cast<std::size_t>(labels[i]);
    ++size[l];
    first[l] = std::min(first[l], i);
  }
  std::vector<ClusterId> order;
  for (ClusterId c = 0; c < raw_count; ++c)
    if (size[static_cast<std::size_t>(c)] >= min_size && size[static_cast<std::size_t>(c)] > 0)
      order.push_back(c);
  std::sort(order.begin(), order.end(), [&](ClusterId a, ClusterId b) {
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    if (size[ua] != size[ub]) return size[ua] > size[ub];
    return first[ua] < first[ub];
  });
  if (order.size() > max_keep) order.resize(max_keep);

  std::vector<ClusterId> remap(static_cast<std::size_t>(raw_count), kNoise);
  for (std::size_t k = 0; k < order.size(); ++k)
    remap[static_cast<std::size_t>(order[k])] = static_cast<ClusterId>(k);
  for (auto& l : labels)
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  count = static_cast<int>(order.size());
  return labels;
}

}  // namespace

ClusteredScanPair cluster_fused(const PointCloud& scan_t, const PointCloud& scan_t2,
                                const ClusterParams& params) {
  if (!(params.eps > 0.0)) throw std::invalid_argument("cluster_fused: eps must be > 0");
  if (params.min_cluster_size < 1) throw std::invalid_argument("cluster_fused: min_cluster_size must be >= 1");

  std::vector<Vec3> fused;
  fused.reserve(scan_t.size() + scan_t2.size());
  fused.insert(fused.end(), scan_t.points.begin(), scan_t.points.end());
  fused.insert(fused.end(), scan_t2.points.begin(), scan_t2.points.end());

  int count = 0;
  const auto labels = canonical_relabel(density_cluster(fused, params.eps, params.min_samples),
                                        static_cast<std::size_t>(params.min_cluster_size),
                                        fused.size(), count);

  ClusteredScanPair out;
  out.scan_t = scan_t;
  out.scan_t2 = scan_t2;
  const auto split = labels.begin() + static_cast<std::ptrdiff_t>(scan_t.size());
  out.labels_t.assign(labels.begin(), split);
  out.labels_t2.assign(split, labels.end());
  out.cluster_count = count;
  return out;
}

ClusteredScanPair select_top_clusters(const ClusteredScanPair& pair, int max_clusters) {
  if (max_clusters < 0) throw std::invalid_argument("select_top_clusters: max_clusters must be >= 0");
  if (pair.cluster_count <= max_clusters) return pair;

  const auto sizes = pair.cluster_sizes();
  std::vector<ClusterId> order(sizes.size());
  std::iota(order.begin(), order.end(), ClusterId{0});
  std::stable_sort(order.begin(), order.end(), [&](ClusterId a, ClusterId b) {
    return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(max_clusters));
  std::sort(order.begin(), order.end());  // survivors keep their relative id order

  std::vector<ClusterId> remap(sizes.size(), kNoise);
  for (std::size_t k = 0; k < order.size(); ++k)
    remap[static_cast<std::size_t>(order[k])] = static_cast<ClusterId>(k);

  ClusteredScanPair out = pair;
  for (auto& l : out.labels_t)
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  for (auto& l : out.labels_t2)
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  out.cluster_count = max_clusters;
  return out;
}

}  // namespace icpflow
