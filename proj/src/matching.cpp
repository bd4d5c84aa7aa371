#include "icpflow/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

namespace icpflow {

// ---------------------------------------------------------------- pairing

std::vector<ClusterPair> same_index_pairs(const ClusteredScanPair& pair) {
  const auto n = static_cast<std::size_t>(pair.cluster_count);
  std::vector<char> in_t(n, 0), in_t2(n, 0);
  for (ClusterId l : pair.labels_t)
    if (l >= 0) in_t[static_cast<std::size_t>(l)] = 1;
  for (ClusterId l : pair.labels_t2)
    if (l >= 0) in_t2[static_cast<std::size_t>(l)] = 1;
  std::vector<ClusterPair> out;
  for (std::size_t m = 0; m < n; ++m)
    if (in_t[m] && in_t2[m]) out.push_back({static_cast<ClusterId>(m), static_cast<ClusterId>(m)});
  return out;
}

namespace {

struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  bool empty() const { return lo.x() > hi.x(); }
};

std::vector<Box> cluster_boxes(const PointCloud& pc, const std::vector<ClusterId>& labels, int count) {
  std::vector<Box> boxes(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    Box& b = boxes[static_cast<std::size_t>(labels[i])];
    b.lo = b.lo.cwiseMin(pc.points[i]);
    b.hi = b.hi.cwiseMax(pc.points[i]);
  }
  return boxes;
}

bool flagged(std::span<const char> flags, std::size_t id) { return id < flags.size() && flags[id]; }

}  // namespace

std::vector<ClusterPair> proximity_pairs(const ClusteredScanPair& pair, double tau_x, double tau_y,
                                         std::span<const char> source_done,
                                         std::span<const char> target_done) {
  const auto src = cluster_boxes(pair.scan_t, pair.labels_t, pair.cluster_count);
  const auto dst = cluster_boxes(pair.scan_t2, pair.labels_t2, pair.cluster_count);
  const Vec3 grow(tau_x, tau_y, 0.0);
  std::vector<ClusterPair> out;
  for (std::size_t m = 0; m < src.size(); ++m) {
    if (src[m].empty() || flagged(source_done, m)) continue;
    const Vec3 lo = src[m].lo - grow;
    const Vec3 hi = src[m].hi + grow;
    for (std::size_t n = 0; n < dst.size(); ++n) {
      if (dst[n].empty() || flagged(target_done, n)) continue;
      const bool overlap = (dst[n].lo.array() <= hi.array()).all() && (dst[n].hi.array() >= lo.array()).all();
      if (overlap) out.push_back({static_cast<ClusterId>(m), static_cast<ClusterId>(n)});
    }
  }
  return out;
}

CandidateSet pair_clusters(const ClusteredScanPair& pair, double tau_x, double tau_y) {
  return {same_index_pairs(pair), proximity_pairs(pair, tau_x, tau_y)};
}

// -------------------------------------------------------------- histogram

int TranslationHistogram::bins_for(double range, double bin_size) {
  const double x = 2.0 * range / bin_size;
  // absorb representation error, e.g. 2 * 0.1 / 0.1 must give 2 not 3
  return static_cast<int>(std::ceil(x - 1e-9 * std::max(1.0, x))) + 1;
}

TranslationHistogram::TranslationHistogram(const Vec3& ranges, double bin_size)
    : ranges_(ranges), bin_size_(bin_size) {
  if (!(bin_size > 0.0)) throw std::invalid_argument("TranslationHistogram: bin_size must be > 0");
  if (!((ranges.array() >= 0.0).all())) throw std::invalid_argument("TranslationHistogram: ranges must be >= 0");
  for (int d = 0; d < 3; ++d) shape_[static_cast<std::size_t>(d)] = bins_for(ranges(d), bin_size);
  counts_.assign(static_cast<std::size_t>(shape_[0]) * static_cast<std::size_t>(shape_[1]) *
                     static_cast<std::size_t>(shape_[2]),
                 0);
}

std::size_t TranslationHistogram::flat_index(int ix, int iy, int iz) const {
  return (static_cast<std::size_t>(ix) * static_cast<std::size_t>(shape_[1]) + static_cast<std::size_t>(iy)) *
             static_cast<std::size_t>(shape_[2]) +
         static_cast<std::size_t>(iz);
}

bool TranslationHistogram::vote(const Vec3& t) {
  std::array<int, 3> k{};
  for (int d = 0; d < 3; ++d) {
    if (std::abs(t(d)) > ranges_(d)) return false;
    const int bin = static_cast<int>(std::floor((t(d) + ranges_(d)) / bin_size_ + 0.5));
    k[static_cast<std::size_t>(d)] = std::clamp(bin, 0, shape_[static_cast<std::size_t>(d)] - 1);
  }
  ++counts_[flat_index(k[0], k[1], k[2])];
  ++total_;
  return true;
}

std::size_t TranslationHistogram::argmax() const {
  return static_cast<std::size_t>(std::max_element(counts_.begin(), counts_.end()) - counts_.begin());
}

Vec3 TranslationHistogram::center(std::size_t flat) const {
  const auto ny = static_cast<std::size_t>(shape_[1]);
  const auto nz = static_cast<std::size_t>(shape_[2]);
  const std::size_t iz = flat % nz;
  const std::size_t iy = (flat / nz) % ny;
  const std::size_t ix = flat / (nz * ny);
  return Vec3(-ranges_.x() + static_cast<double>(ix) * bin_size_,
              -ranges_.y() + static_cast<double>(iy) * bin_size_,
              -ranges_.z() + static_cast<double>(iz) * bin_size_);
}

namespace {

std::vector<Vec3> subsample(std::span<const Vec3> pts, std::size_t keep, std::uint64_t seed) {
  if (keep >= pts.size()) return {pts.begin(), pts.end()};
  std::vector<Vec3> out;
  out.reserve(keep);
  std::mt19937_64 rng(seed);
  std::sample(pts.begin(), pts.end(), std::back_inserter(out), keep, rng);
  return out;
}

}  // namespace

TranslationHistogram vote_translations(std::span<const Vec3> src, std::span<const Vec3> dst,
                                       const Vec3& ranges, double bin_size, std::size_t vote_cap) {
  TranslationHistogram hist(ranges, bin_size);
  std::vector<Vec3> src_kept, dst_kept;
  if (vote_cap > 0 && src.size() * dst.size() > vote_cap) {
    const double scale = std::sqrt(static_cast<double>(vote_cap) /
                                   (static_cast<double>(src.size()) * static_cast<double>(dst.size())));
    std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(src.size()) * scale));
    std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(dst.size()) * scale));
    while (m * n > vote_cap && m > 1) --m;
    src_kept = subsample(src, m, 0x9e3779b97f4a7c15ULL ^ src.size());
    dst_kept = subsample(dst, n, 0xc2b2ae3d27d4eb4fULL ^ dst.size());
    src = src_kept;
    dst = dst_kept;
  }
  for (const auto& a : src)
    for (const auto& b : dst) hist.vote(a - b);
  return hist;
}

Vec3 histogram_init(std::span<const Vec3> src, std::span<const Vec3> dst, const Vec3& ranges,
                    double bin_size, std::size_t vote_cap) {
  const auto hist = vote_translations(src, dst, ranges, bin_size, vote_cap);
  if (hist.total() == 0) return Vec3::Zero();
  // votes are src - dst; the initializing translation points the other way
  return -hist.center(hist.argmax());
}

// -------------------------------------------------------------------- ICP

double inlier_ratio(std::size_t inliers, std::size_t source_size, std::size_t target_size) {
  const double denom = static_cast<double>(source_size + target_size) - static_cast<double>(inliers);
  return denom > 0.0 ? static_cast<double>(inliers) / denom : 0.0;
}

namespace {

struct Correspondence {
  std::vector<Vec3> moved;
  std::vector<Vec3> matched;
  std::vector<double> dist;
  double rms = 0.0;
};

void correspond(std::span<const Vec3> src, const NeighborIndex& dst, const RigidTransform& t,
                Correspondence& c) {
  c.moved.resize(src.size());
  c.matched.resize(src.size());
  c.dist.resize(src.size());
  double sum2 = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    c.moved[i] = t(src[i]);
    const Neighbor nn = dst.nearest(c.moved[i]);
    c.matched[i] = dst.points()[nn.index];
    c.dist[i] = nn.distance;
    sum2 += nn.distance * nn.distance;
  }
  c.rms = std::sqrt(sum2 / static_cast<double>(src.size()));
}

RigidTransform refit(std::span<const Vec3> src, const Correspondence& c, const RigidTransform& current) {
  try {
    return best_rigid_fit(src, c.matched);
  } catch (const DegenerateInput&) {
    const Vec3 shift = centroid(c.matched) - centroid(c.moved);
    return compose(RigidTransform::from_translation(shift), current);
  }
}

}  // namespace

MatchResult icp_align(std::span<const Vec3> src, const NeighborIndex& dst, const RigidTransform& init,
                      const IcpParams& params, std::vector<double>* rms_trace) {
  if (src.empty()) throw std::invalid_argument("icp_align: empty source");
  if (dst.size() == 0) throw EmptyIndex("icp_align: empty target");

  RigidTransform current = init;
  Correspondence cur, next;
  correspond(src, dst, current, cur);
  if (rms_trace) rms_trace->assign(1, cur.rms);

  int iterations = 0;
  for (int it = 0; it < params.max_iters; ++it) {
    const RigidTransform candidate = refit(src, cur, current);
    correspond(src, dst, candidate, next);
    if (next.rms > cur.rms) break;
    const double gain = cur.rms - next.rms;
    current = candidate;
    std::swap(cur, next);
    ++iterations;
    if (rms_trace) rms_trace->push_back(cur.rms);
    if (gain < params.convergence_tol) break;
  }

  MatchResult out;
  out.transform = current;
  out.iterations = iterations;
  double sum = 0.0;
  for (double d : cur.dist) {
    sum += d;
    if (d <= params.inlier_threshold) ++out.inliers;
  }
  out.mean_distance = sum / static_cast<double>(src.size());
  out.inlier_ratio = inlier_ratio(out.inliers, src.size(), dst.size());
  return out;
}

MatchResult icp_align(std::span<const Vec3> src, std::span<const Vec3> dst, const RigidTransform& init,
                      const IcpParams& params, std::vector<double>* rms_trace) {
  const NeighborIndex index(dst);
  return icp_align(src, index, init, params, rms_trace);
}

// ------------------------------------------------------------- candidates

RigidTransform initial_transform(std::span<const Vec3> src, std::span<const Vec3> dst,
                                 const MatchParams& params) {
  switch (params.init) {
    case InitMode::histogram:
      return RigidTransform::from_translation(
          histogram_init(src, dst, params.ranges, params.bin_size, params.vote_cap));
    case InitMode::centroid:
      return RigidTransform::from_translation(centroid(dst) - centroid(src));
    case InitMode::none:
      break;
  }
  return RigidTransform::identity();
}

std::vector<MatchResult> match_candidates(const ClusteredScanPair& pair,
                                          std::span<const ClusterPair> candidates,
                                          const MatchParams& params) {
  std::vector<ClusterPair> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end())
    throw std::invalid_argument("match_candidates: duplicate candidate pair");

  std::map<ClusterId, std::vector<Vec3>> sources;
  std::map<ClusterId, NeighborIndex> targets;
  for (const auto& c : order) {
    if (!sources.contains(c.source)) sources.emplace(c.source, pair.points_t(c.source));
    if (!targets.contains(c.target)) targets.emplace(c.target, NeighborIndex(pair.points_t2(c.target)));
  }

  std::vector<MatchResult> results(order.size());
  auto run = [&](std::size_t k) {
    const auto& src = sources.at(order[k].source);
    const auto& dst = targets.at(order[k].target);
    MatchResult r = icp_align(src, dst, initial_transform(src, dst.points(), params), params.icp);
    r.source = order[k].source;
    r.target = order[k].target;
    results[k] = std::move(r);
  };

  const unsigned workers = std::min<std::size_t>(std::max(1u, params.threads), order.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < order.size(); ++k) run(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < order.size(); k += workers) run(k);
      });
    }
  }
  return results;
}

}  // namespace icpflow
