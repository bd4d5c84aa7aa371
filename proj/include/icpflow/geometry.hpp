#pragma once

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <vector>

namespace icpflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown by best_rigid_fit when the correspondences cannot pin down a rotation.
class DegenerateInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Element of SE(3): x' = rotation * x + translation.
 *
 * The rotation is kept as a full 3x3 matrix. Long composition chains can
 * drift from orthonormality; call orthonormalized() when that matters.
 */
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t);
  /// Rotation about +z by `radians`, no translation.
  static RigidTransform rot_z(double radians);
  /// Build from a row-major 4x4 homogeneous matrix (bottom row ignored).
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  Eigen::Matrix4d matrix() const;

  Vec3 operator()(const Vec3& p) const { return rotation * p + translation; }

  /// Max |R^T R - I| entry.
  double orthonormality_error() const;
  /// True when rotation is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
  /// Project the rotation back onto SO(3).
  RigidTransform orthonormalized() const;

  bool operator==(const RigidTransform&) const = default;
};

/// Apply `b` first, then `a`.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

/// Largest absolute entry difference between the two 4x4 matrices.
double max_abs_difference(const RigidTransform& a, const RigidTransform& b);

struct PointCloud {
  std::vector<Vec3> points;
  double timestamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointCloud apply(const RigidTransform& t, const PointCloud& pc);
std::vector<Vec3> apply(const RigidTransform& t, std::span<const Vec3> points);

Vec3 centroid(std::span<const Vec3> points);

/**
 * @brief Least-squares proper rigid transform mapping src onto dst.
 *
 * Closed form from the SVD of the centered cross-covariance, with the
 * determinant correction that forbids reflections.
 *
 * @throws DegenerateInput when fewer than 3 pairs are given or the centered
 *         cross-covariance has rank < 2. Callers typically fall back to the
 *         translation centroid(dst) - centroid(src).
 */
RigidTransform best_rigid_fit(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Sum of squared residuals |t(src_i) - dst_i|^2.
double sum_squared_residual(const RigidTransform& t, std::span<const Vec3> src,
                            std::span<const Vec3> dst);

}  // namespace icpflow
