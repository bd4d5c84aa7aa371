#include "icpflow/preprocess.hpp"
#include "icpflow/synth.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <queue>
#include <set>

using namespace icpflow;

namespace {

std::vector<Vec3> blob(const Vec3& center, std::size_t n, double spread, std::mt19937_64& rng) {
  auto pts = oracle::random_points(n, spread, rng);
  for (auto& p : pts) p += center;
  return pts;
}

PointCloud cloud(std::vector<Vec3> pts) { return PointCloud{std::move(pts), 0.0}; }

// Brute-force partition of core points into eps-connected components.
std::vector<int> core_components(const std::vector<Vec3>& pts, double eps, int min_samples) {
  const std::size_t n = pts.size();
  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int c = 0;
    for (std::size_t j = 0; j < n; ++j) c += (pts[i] - pts[j]).norm() <= eps;
    core[i] = c >= min_samples;
  }
  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!core[s] || comp[s] >= 0) continue;
    std::queue<std::size_t> q;
    q.push(s);
    comp[s] = next;
    while (!q.empty()) {
      const auto i = q.front();
      q.pop();
      for (std::size_t j = 0; j < n; ++j) {
        if (core[j] && comp[j] < 0 && (pts[i] - pts[j]).norm() <= eps) {
          comp[j] = next;
          q.push(j);
        }
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace

TEST(Ego, RelativeEgoMapsIntoTargetFrame) {
  const auto p0 = RigidTransform::from_translation(Vec3(1, 0, 0));
  const auto p1 = RigidTransform::from_translation(Vec3(3, 0, 0));
  const auto ego = relative_ego(p0, p1);
  // world point (5,0,0) is (4,0,0) in frame 0 and (2,0,0) in frame 1
  EXPECT_LT((ego(Vec3(4, 0, 0)) - Vec3(2, 0, 0)).norm(), 1e-12);
}

TEST(Ego, CompensateIdentityAndTranslation) {
  const PointCloud pc = cloud({{0, 0, 0}, {1, 2, 3}});
  EXPECT_EQ(compensate_ego(pc, RigidTransform::identity()).points, pc.points);
  const auto moved = compensate_ego(cloud({{0, 0, 0}}), RigidTransform::from_translation(Vec3(2, 0, 0)));
  EXPECT_EQ(moved.points[0], Vec3(2, 0, 0));
}

TEST(Ego, CompensatedStaticBackgroundCoincides) {
  SceneSpec spec;
  spec.seed = 4;
  spec.n_objects = 0;
  spec.mirror = true;
  spec.noise_sigma = 0.0;
  spec.ego_yaw_rate = 15.0;
  const auto s = generate(spec);
  const auto moved = compensate_ego(s.scans[0], s.ego_motion(1));
  ASSERT_EQ(moved.size(), s.scans[1].size());
  for (std::size_t i = 0; i < moved.size(); ++i) EXPECT_LT((moved.points[i] - s.scans[1].points[i]).norm(), 1e-9);
}

TEST(Ground, KeepsStrictlyAboveThreshold) {
  const auto g = remove_ground(cloud({{0, 0, 0.1}, {0, 0, 0.5}, {0, 0, 0.3}}), 0.3);
  ASSERT_EQ(g.cloud.size(), 1u);
  EXPECT_EQ(g.cloud.points[0], Vec3(0, 0, 0.5));
  EXPECT_EQ(g.kept, std::vector<std::size_t>{1});
}

TEST(Ground, MinusInfinityKeepsEverything) {
  const auto g = remove_ground(cloud({{0, 0, -5}, {0, 0, 1}, {1, 1, 1}}), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(g.kept, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Ground, SyntheticSceneKeepsExactlyObjects) {
  SceneSpec spec;
  spec.seed = 12;
  const auto s = generate(spec);
  const auto g = remove_ground(s.scans[0], 0.3);
  std::size_t fg = 0;
  for (char c : s.fg_masks[0]) fg += c != 0;
  EXPECT_EQ(g.kept.size(), fg);
  for (auto i : g.kept) EXPECT_TRUE(s.fg_masks[0][i]);
}

TEST(DensityCluster, MatchesConnectedComponentsOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> pts;
    for (int b = 0; b < 4; ++b) {
      const auto more = blob(oracle::random_points(1, 6.0, rng)[0], 40, 0.8, rng);
      pts.insert(pts.end(), more.begin(), more.end());
    }
    const auto noise = oracle::random_points(30, 8.0, rng);
    pts.insert(pts.end(), noise.begin(), noise.end());

    const auto got = density_cluster(pts, 0.5, 4);
    const auto want = core_components(pts, 0.5, 4);
    // core points: same partition up to renaming
    std::map<int, int> fwd, bwd;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (want[i] < 0) continue;
      ASSERT_GE(got[i], 0);
      auto [f, fnew] = fwd.emplace(want[i], got[i]);
      auto [b, bnew] = bwd.emplace(got[i], want[i]);
      EXPECT_EQ(f->second, got[i]);
      EXPECT_EQ(b->second, want[i]);
    }
    // non-core points join a core neighbor's cluster or stay noise
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (want[i] >= 0) continue;
      int expect = kNoise;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (want[j] >= 0 && (pts[i] - pts[j]).norm() <= 0.5) {
          expect = got[j];
          break;
        }
      }
      EXPECT_EQ(got[i], expect);
    }
  }
}

TEST(ClusterFused, TwoSeparatedBlobs) {
  std::mt19937_64 rng(1);
  auto a = blob(Vec3(0, 0, 1), 30, 0.3, rng);
  auto b = blob(Vec3(20, 0, 1), 60, 0.3, rng);
  std::vector<Vec3> t(a.begin(), a.begin() + 15);
  t.insert(t.end(), b.begin(), b.begin() + 30);
  std::vector<Vec3> t2(a.begin() + 15, a.end());
  t2.insert(t2.end(), b.begin() + 30, b.end());
  const auto pair = cluster_fused(cloud(t), cloud(t2), {});
  EXPECT_EQ(pair.cluster_count, 2);
  // larger blob gets id 0
  EXPECT_EQ(pair.labels_t[20], 0);
  EXPECT_EQ(pair.labels_t[0], 1);
  EXPECT_EQ(pair.cluster_sizes(), (std::vector<std::size_t>{60, 30}));
  EXPECT_EQ(pair.members_t(1).size(), 15u);
  EXPECT_EQ(pair.members_t2(1).size(), 15u);
}

TEST(ClusterFused, IsolatedPointsAreNoise) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(5.0 * i, 0, 1);
  const auto pair = cluster_fused(cloud(pts), cloud({}), {});
  EXPECT_EQ(pair.cluster_count, 0);
  for (auto l : pair.labels_t) EXPECT_EQ(l, kNoise);
}

TEST(ClusterFused, BlobOnlyInFirstScan) {
  std::mt19937_64 rng(2);
  auto shared = blob(Vec3(0, 0, 1), 60, 0.3, rng);
  auto lone = blob(Vec3(10, 10, 1), 40, 0.3, rng);
  std::vector<Vec3> t(shared.begin(), shared.begin() + 30);
  t.insert(t.end(), lone.begin(), lone.end());
  std::vector<Vec3> t2(shared.begin() + 30, shared.end());
  const auto pair = cluster_fused(cloud(t), cloud(t2), {});
  ASSERT_EQ(pair.cluster_count, 2);
  const ClusterId lone_id = pair.labels_t.back();
  EXPECT_GE(lone_id, 0);
  for (auto l : pair.labels_t2) EXPECT_NE(l, lone_id);
}

TEST(ClusterFused, NoSurvivorBelowMinSize) {
  std::mt19937_64 rng(8);
  std::vector<Vec3> pts;
  for (int b = 0; b < 6; ++b) {
    const auto more = blob(Vec3(10.0 * b, 0, 1), 10 + 5 * static_cast<std::size_t>(b), 0.3, rng);
    pts.insert(pts.end(), more.begin(), more.end());
  }
  const auto pair = cluster_fused(cloud(pts), cloud({}), {0.75, 5, 20});
  for (auto s : pair.cluster_sizes()) EXPECT_GE(s, 20u);
  EXPECT_EQ(pair.cluster_count, 4);
}

TEST(SelectTop, DemotesSmallest) {
  std::mt19937_64 rng(3);
  std::vector<Vec3> pts;
  for (std::size_t n : {30u, 50u, 40u}) {
    const auto more = blob(Vec3(static_cast<double>(pts.size()), 0, 1), n, 0.3, rng);
    pts.insert(pts.end(), more.begin(), more.end());
  }
  const auto pair = cluster_fused(cloud(pts), cloud({}), {});
  ASSERT_EQ(pair.cluster_sizes(), (std::vector<std::size_t>{50, 40, 30}));
  EXPECT_EQ(select_top_clusters(pair, 5).labels_t, pair.labels_t);
  const auto top = select_top_clusters(pair, 2);
  EXPECT_EQ(top.cluster_count, 2);
  EXPECT_EQ(top.cluster_sizes(), (std::vector<std::size_t>{50, 40}));
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(top.labels_t[i], kNoise);
  const auto none = select_top_clusters(pair, 0);
  EXPECT_EQ(none.cluster_count, 0);
  for (auto l : none.labels_t) EXPECT_EQ(l, kNoise);
}

TEST(ClusterFused, SyntheticClustersArePure) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    const auto s = generate(spec);
    const auto a = remove_ground(compensate_ego(s.scans[0], s.ego_motion(1)), 0.3);
    const auto b = remove_ground(s.scans[1], 0.3);
    const auto pair = cluster_fused(a.cloud, b.cloud, {});
    // every cluster holds one object; every object lands in some cluster
    std::map<ClusterId, std::set<int>> owners;
    std::set<int> seen;
    for (std::size_t i = 0; i < a.kept.size(); ++i) {
      const int id = s.object_ids[0][a.kept[i]];
      if (pair.labels_t[i] >= 0) owners[pair.labels_t[i]].insert(id), seen.insert(id);
    }
    for (std::size_t i = 0; i < b.kept.size(); ++i) {
      const int id = s.object_ids[1][b.kept[i]];
      if (pair.labels_t2[i] >= 0) owners[pair.labels_t2[i]].insert(id), seen.insert(id);
    }
    for (const auto& [c, ids] : owners) EXPECT_EQ(ids.size(), 1u) << "seed " << seed << " cluster " << c;
    EXPECT_EQ(seen.size(), static_cast<std::size_t>(spec.n_objects)) << "seed " << seed;
    EXPECT_GE(pair.cluster_count, spec.n_objects);
  }
}
