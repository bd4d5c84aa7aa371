#include "icpflow/geometry.hpp"
#include "icpflow/neighbor_index.hpp"
#include "oracles.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace icpflow;

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

TEST(RigidTransform, ComposeRotationsAboutZ) {
  const auto c = compose(RigidTransform::rot_z(deg(30)), RigidTransform::rot_z(deg(60)));
  EXPECT_LT(max_abs_difference(c, RigidTransform::rot_z(deg(90))), 1e-12);
}

TEST(RigidTransform, ComposeAppliesRightOperandFirst) {
  const auto a = RigidTransform::from_translation(Vec3(1, 0, 0));
  const auto b = RigidTransform::rot_z(deg(90));
  const Vec3 p(1, 0, 0);
  EXPECT_LT((compose(a, b)(p) - a(b(p))).norm(), 1e-12);
  EXPECT_LT((compose(a, b)(p) - Vec3(1, 1, 0)).norm(), 1e-12);
}

TEST(RigidTransform, InverseComposesToIdentity) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto t = oracle::random_transform(rng);
    EXPECT_LT(max_abs_difference(compose(t, invert(t)), RigidTransform::identity()), 1e-12);
    EXPECT_LT(max_abs_difference(compose(invert(t), t), RigidTransform::identity()), 1e-12);
  }
}

TEST(RigidTransform, ApplyPreservesDistances) {
  std::mt19937_64 rng(11);
  const auto pts = oracle::random_points(50, 10.0, rng);
  const auto t = oracle::random_transform(rng);
  const auto moved = icpflow::apply(t, pts);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    EXPECT_NEAR((moved[i] - moved[i + 1]).norm(), (pts[i] - pts[i + 1]).norm(), 1e-12);
  const auto back = icpflow::apply(invert(t), moved);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT((back[i] - pts[i]).norm(), 1e-12);
}

TEST(RigidTransform, MatrixRoundTrip) {
  std::mt19937_64 rng(3);
  const auto t = oracle::random_transform(rng);
  EXPECT_EQ(RigidTransform::from_matrix(t.matrix()), t);
  EXPECT_TRUE(t.is_valid());
}

TEST(RigidTransform, LongChainsStayOrthonormal) {
  std::mt19937_64 rng(5);
  RigidTransform acc;
  for (int i = 0; i < 10000; ++i) acc = compose(oracle::random_transform(rng, 0.1), acc);
  EXPECT_TRUE(acc.is_valid(1e-9));
}

TEST(RigidTransform, ValidityRejectsReflection) {
  RigidTransform t;
  t.rotation(2, 2) = -1.0;
  EXPECT_FALSE(t.is_valid());
  EXPECT_TRUE(t.orthonormalized().is_valid());
}

TEST(BestRigidFit, RecoversExactTransform) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto src = oracle::random_points(20, 3.0, rng);
    const auto truth = oracle::random_transform(rng);
    const auto fit = best_rigid_fit(src, icpflow::apply(truth, src));
    EXPECT_LT(max_abs_difference(fit, truth), 1e-9);
    EXPECT_LT(sum_squared_residual(fit, src, icpflow::apply(truth, src)), 1e-18);
  }
}

TEST(BestRigidFit, ThreeNonCollinearPointsGiveProperRotation) {
  const std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto truth = compose(RigidTransform::from_translation(Vec3(0.5, -2, 1)), RigidTransform::rot_z(deg(40)));
  const auto fit = best_rigid_fit(src, icpflow::apply(truth, src));
  EXPECT_LT(max_abs_difference(fit, truth), 1e-12);
  EXPECT_NEAR(fit.rotation.determinant(), 1.0, 1e-12);
}

TEST(BestRigidFit, MirroredTargetStillYieldsRotation) {
  const std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<Vec3> dst = src;
  for (auto& p : dst) p.z() = -p.z();
  const auto fit = best_rigid_fit(src, dst);
  EXPECT_NEAR(fit.rotation.determinant(), 1.0, 1e-12);
  EXPECT_TRUE(fit.is_valid());
  EXPECT_GT(sum_squared_residual(fit, src, dst), 1e-6);
}

TEST(BestRigidFit, DegenerateInputs) {
  const std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW(best_rigid_fit(two, two), DegenerateInput);
  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  EXPECT_THROW(best_rigid_fit(line, line), DegenerateInput);
  const std::vector<Vec3> same(5, Vec3(1, 2, 3));
  EXPECT_THROW(best_rigid_fit(same, same), DegenerateInput);
}

TEST(BestRigidFit, PlanarPointsAreEnough) {
  std::mt19937_64 rng(2);
  auto src = oracle::random_points(30, 2.0, rng);
  for (auto& p : src) p.z() = 0.0;
  const auto truth = oracle::random_transform(rng);
  EXPECT_LT(max_abs_difference(best_rigid_fit(src, icpflow::apply(truth, src)), truth), 1e-9);
}

TEST(Centroid, MeanOfPoints) {
  const std::vector<Vec3> pts{{0, 0, 0}, {2, 0, 0}, {0, 4, 0}, {2, 4, 8}};
  EXPECT_LT((centroid(pts) - Vec3(1, 2, 2)).norm(), 1e-15);
}

TEST(NeighborIndex, SinglePoint) {
  const std::vector<Vec3> pts{{0, 0, 0}};
  NeighborIndex idx(pts);
  const auto n = idx.nearest(Vec3(1, 0, 0));
  EXPECT_EQ(n.index, 0u);
  EXPECT_DOUBLE_EQ(n.distance, 1.0);
}

TEST(NeighborIndex, EmptyIndexThrows) {
  NeighborIndex idx(std::span<const Vec3>{});
  EXPECT_THROW(idx.nearest(Vec3::Zero()), EmptyIndex);
}

TEST(NeighborIndex, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  const auto pts = oracle::random_points(1000, 10.0, rng);
  NeighborIndex idx(pts);
  const auto queries = oracle::random_points(100, 12.0, rng);
  for (const auto& q : queries) {
    const auto got = idx.nearest(q);
    const auto want = oracle::nearest(pts, q);
    EXPECT_EQ(got.index, want.index);
    EXPECT_DOUBLE_EQ(got.distance, want.distance);
  }
}

TEST(NeighborIndex, TiesResolveToLowestIndex) {
  // Lattice with many equidistant candidates and exact duplicates.
  std::vector<Vec3> pts;
  for (int rep = 0; rep < 2; ++rep)
    for (int x = 0; x < 6; ++x)
      for (int y = 0; y < 6; ++y)
        for (int z = 0; z < 3; ++z) pts.emplace_back(x, y, z);
  NeighborIndex idx(pts);
  for (int x = 0; x < 5; ++x) {
    for (int y = 0; y < 5; ++y) {
      const Vec3 q(x + 0.5, y + 0.5, 1.0);
      EXPECT_EQ(idx.nearest(q).index, oracle::nearest(pts, q).index);
      const Vec3 on(x, y, 2.0);
      EXPECT_EQ(idx.nearest(on).index, oracle::nearest(pts, on).index);
    }
  }
}

TEST(NeighborIndex, RadiusQueryMatchesBruteForce) {
  std::mt19937_64 rng(9);
  const auto pts = oracle::random_points(500, 5.0, rng);
  NeighborIndex idx(pts);
  for (const auto& q : oracle::random_points(20, 5.0, rng)) {
    std::vector<std::size_t> want;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if ((pts[i] - q).norm() <= 1.5) want.push_back(i);
    EXPECT_EQ(idx.radius(q, 1.5), want);
  }
}
