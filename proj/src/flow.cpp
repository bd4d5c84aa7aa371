#include "icpflow/flow.hpp"

#include <string>

namespace icpflow {

FlowField recover_flow(const PointCloud& full_scan, std::span<const std::size_t> kept,
                       std::span<const ClusterId> labels, const Assignment& assignment,
                       const RigidTransform& ego) {
  if (kept.size() != labels.size())
    throw LengthMismatch("recover_flow: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(kept.size()) + " kept points");
  if (kept.size() > full_scan.size())
    throw LengthMismatch("recover_flow: more kept points than scan points");

  FlowField flow = rigid_flow(full_scan, ego);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] >= full_scan.size()) throw LengthMismatch("recover_flow: kept index out of range");
    const ClusterId l = labels[i];
    if (l < 0) continue;
    if (static_cast<std::size_t>(l) >= assignment.size())
      throw LengthMismatch("recover_flow: label " + std::to_string(l) + " outside assignment");
    if (!assignment.target[static_cast<std::size_t>(l)]) continue;
    const RigidTransform motion = compose(assignment.transform[static_cast<std::size_t>(l)], ego);
    const Vec3& x = full_scan.points[kept[i]];
    flow.vectors[kept[i]] = motion(x) - x;
  }
  return flow;
}

FlowField rigid_flow(const PointCloud& scan, const RigidTransform& t) {
  FlowField flow;
  flow.vectors.reserve(scan.size());
  for (const auto& x : scan.points) flow.vectors.push_back(t(x) - x);
  return flow;
}

RigidTransform chain_transform(std::span<const RigidTransform> object_steps,
                               std::span<const RigidTransform> ego_steps) {
  if (object_steps.size() != ego_steps.size())
    throw LengthMismatch("chain_transform: step count mismatch");
  RigidTransform out;
  for (std::size_t k = 0; k < object_steps.size(); ++k)
    out = compose(object_steps[k], compose(ego_steps[k], out));
  return out;
}

std::vector<ClusterId> scatter_labels(std::size_t full_size, std::span<const std::size_t> kept,
                                      std::span<const ClusterId> labels) {
  if (kept.size() != labels.size()) throw LengthMismatch("scatter_labels: kept/labels size mismatch");
  std::vector<ClusterId> out(full_size, kNoise);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] >= full_size) throw LengthMismatch("scatter_labels: kept index out of range");
    out[kept[i]] = labels[i];
  }
  return out;
}

std::vector<ClusterId> link_clusters(std::span<const ClusterId> prev_target, int prev_count,
                                     std::span<const ClusterId> next_source, int next_count) {
  if (prev_target.size() != next_source.size()) throw LengthMismatch("link_clusters: label length mismatch");
  const auto np = static_cast<std::size_t>(prev_count);
  const auto nn = static_cast<std::size_t>(next_count);
  std::vector<std::size_t> overlap(np * nn, 0);  // [prev][next]
  for (std::size_t i = 0; i < prev_target.size(); ++i) {
    const ClusterId a = prev_target[i];
    const ClusterId b = next_source[i];
    if (a < 0 || b < 0) continue;
    ++overlap[static_cast<std::size_t>(a) * nn + static_cast<std::size_t>(b)];
  }

  std::vector<ClusterId> successor(np, kNoise);
  std::vector<std::size_t> best(np, 0);
  for (std::size_t b = 0; b < nn; ++b) {
    // b's predecessor: the previous cluster giving it the most points
    std::size_t pred = np;
    std::size_t votes = 0;
    for (std::size_t a = 0; a < np; ++a) {
      if (overlap[a * nn + b] > votes) {
        votes = overlap[a * nn + b];
        pred = a;
      }
    }
    if (pred == np) continue;
    if (votes > best[pred]) {  // b ascending, so ties keep the lowest id
      best[pred] = votes;
      successor[pred] = static_cast<ClusterId>(b);
    }
  }
  return successor;
}

}  // namespace icpflow
