#include "icpflow/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace icpflow {

RigidTransform RigidTransform::from_translation(const Vec3& t) {
  RigidTransform out;
  out.translation = t;
  return out;
}

RigidTransform RigidTransform::rot_z(double radians) {
  RigidTransform out;
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  out.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return out;
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  RigidTransform out;
  out.rotation = m.topLeftCorner<3, 3>();
  out.translation = m.topRightCorner<3, 1>();
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

double RigidTransform::orthonormality_error() const {
  return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool RigidTransform::is_valid(double tol) const {
  return rotation.allFinite() && translation.allFinite() && orthonormality_error() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform RigidTransform::orthonormalized() const {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  RigidTransform out = *this;
  out.rotation = u * v.transpose();
  return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (out.orthonormality_error() > 1e-7) return out.orthonormalized();
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

double max_abs_difference(const RigidTransform& a, const RigidTransform& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

PointCloud apply(const RigidTransform& t, const PointCloud& pc) {
  PointCloud out;
  out.timestamp = pc.timestamp;
  out.points = apply(t, std::span<const Vec3>(pc.points));
  return out;
}

std::vector<Vec3> apply(const RigidTransform& t, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t(p));
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

RigidTransform best_rigid_fit(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("best_rigid_fit: size mismatch");
  if (src.size() < 3) throw DegenerateInput("best_rigid_fit: fewer than 3 correspondences");

  const Vec3 src_c = centroid(src);
  const Vec3 dst_c = centroid(dst);
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cov += (src[i] - src_c) * (dst[i] - dst_c).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // rank < 2: rotation about the dominant axis is unconstrained
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw DegenerateInput("best_rigid_fit: rank of cross-covariance < 2");
  }

  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform out;
  out.rotation = v * d * u.transpose();
  out.translation = dst_c - out.rotation * src_c;
  return out;
}

double sum_squared_residual(const RigidTransform& t, std::span<const Vec3> src,
                            std::span<const Vec3> dst) {
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) sum += (t(src[i]) - dst[i]).squaredNorm();
  return sum;
}

}  // namespace icpflow
