#pragma once

#include "icpflow/flow.hpp"
#include "icpflow/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <vector>

namespace icpflow {

class InvalidSpec : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ShapeKind { cuboid, ellipsoid, mixed };

/**
 * Parameters of a synthetic multi-body scene: flat ground at z = 0 in every
 * sensor frame, rigid objects floating at `object_base_height`, and an ego
 * sensor driving along its +x axis.
 */
struct SceneSpec {
  std::uint64_t seed = 0;
  int n_objects = 8;
  Vec3 size_min{0.8, 0.6, 1.0};  // length, width, height (m)
  Vec3 size_max{5.0, 2.2, 2.0};
  double speed_min = 0.0;  // m/s
  double speed_max = 15.0;
  double yaw_rate_min = -20.0;  // deg/s
  double yaw_rate_max = 20.0;
  double static_fraction = 0.25;  ///< share of objects that are parked
  double ground_half_extent = 35.0;
  double ground_density = 2.0;   // points / m^2
  double object_density = 100.0;  // points / m^2 (head-on when self_occlusion is set)
  double noise_sigma = 0.02;
  double dt = 0.1;
  int n_frames = 2;
  double ego_speed = 5.0;
  double ego_yaw_rate = 0.0;  // deg/s
  double object_base_height = 0.4;
  double placement_half_extent = 25.0;
  double min_gap = 1.6;  ///< clearance between object footprints over all frames
  double sensor_height = 2.0;  ///< viewpoint height for self-occlusion
  double max_range = 0.0;  ///< drop points farther than this (xy) from the sensor; 0 keeps everything
  bool self_occlusion = false;  ///< drop back-facing samples, thin out grazing ones
  bool mirror = false;         ///< reuse one surface sample across frames
  bool hard_mode = false;      ///< add a near-duplicate object and an object leaving range
  ShapeKind shape = ShapeKind::cuboid;

  /// @throws InvalidSpec
  void validate() const;
};

struct SceneObject {
  Vec3 size;  // length, width, height
  ShapeKind shape = ShapeKind::cuboid;
  std::vector<RigidTransform> poses;  ///< object-to-world per frame
};

struct SceneSample {
  SceneSpec spec;
  std::vector<PointCloud> scans;          ///< sensor frame, one per frame
  std::vector<RigidTransform> ego_poses;  ///< sensor-to-world per frame
  std::vector<FlowField> gt_flows;        ///< scan 0 -> frame k, k = 1..K-1
  std::vector<std::vector<char>> fg_masks;
  std::vector<std::vector<int>> object_ids;  ///< -1 for ground
  std::vector<SceneObject> objects;

  std::size_t frames() const { return scans.size(); }
  /// Maps scan 0 into frame k: inv(P_k) * P_0.
  RigidTransform ego_motion(std::size_t k) const;
  /// Maps scan k into scan k+1.
  RigidTransform ego_step(std::size_t k) const;
  /// Object motion 0 -> k expressed in frame k, so scan-0 points move by object_motion * ego_motion.
  RigidTransform object_motion(std::size_t object, std::size_t k) const;
  /// Object motion k -> k+1 expressed in frame k+1.
  RigidTransform object_step(std::size_t object, std::size_t k) const;
};

SceneSample generate(const SceneSpec& spec);

/**
 * Ground-truth consistency: every scan-0 flow equals the rigid motion of its
 * object (or the ego motion for ground) within `tol`, masks equal object
 * membership, and every labelled point lies on its object.
 */
bool verify_sample(const SceneSample& sample, double tol = 5e-5);

/// Object membership recovered from geometry alone (inflated object boxes).
std::vector<int> assign_object_ids(const SceneSample& sample, std::size_t frame);

/**
 * Draws round(area * density) points on a cuboid or ellipsoid surface in the object
 * frame (centered, axes = length/width/height). With `viewpoint`, back-facing
 * samples are dropped and the rest kept with probability cos(incidence), so
 * `density` is the density seen head-on.
 */
std::vector<Vec3> sample_surface(ShapeKind shape, const Vec3& size, double density, std::mt19937_64& rng,
                                 const Vec3* viewpoint = nullptr);

/// Writes scan_XXX.icpf, pose_XXX.txt, labels_XXX.iclb, flow_XXX.icff and scene.json.
void write_sample(const SceneSample& sample, const std::filesystem::path& dir);
SceneSample read_sample(const std::filesystem::path& dir);

}  // namespace icpflow
