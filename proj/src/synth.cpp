#include "icpflow/synth.hpp"

#include "icpflow/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace icpflow {

namespace {

constexpr double kMaxSpeed = 33.3;     // m/s, the pipeline's default search cap
constexpr double kNoiseClamp = 4.0;    // noise is truncated at this many sigmas
constexpr double kGeometrySlack = 1e-3;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void require(bool ok, const char* what) {
  if (!ok) throw InvalidSpec(what);
}

}  // namespace

void SceneSpec::validate() const {
  require(n_objects >= 0, "n_objects must be >= 0");
  require((size_min.array() > 0.0).all() && (size_min.array() <= size_max.array()).all(),
          "object size range must satisfy 0 < min <= max");
  require(speed_min >= 0.0 && speed_min <= speed_max, "speed range must satisfy 0 <= min <= max");
  require(speed_max <= kMaxSpeed, "speed_max must be <= 33.3 m/s");
  require(yaw_rate_min <= yaw_rate_max, "yaw rate range must satisfy min <= max");
  require(static_fraction >= 0.0 && static_fraction <= 1.0, "static_fraction must be in [0, 1]");
  require(ground_half_extent > 0.0 && ground_density > 0.0, "ground extent and density must be > 0");
  require(object_density > 0.0, "object density must be > 0");
  require(noise_sigma >= 0.0 && noise_sigma <= 0.05, "noise_sigma must be in [0, 0.05]");
  require(dt > 0.0, "dt must be > 0");
  require(n_frames >= 2, "n_frames must be >= 2");
  require(ego_speed >= 0.0 && ego_speed <= kMaxSpeed, "ego_speed must be in [0, 33.3]");
  require(object_base_height >= 0.35, "object_base_height must be >= 0.35");
  require(placement_half_extent > 0.0, "placement_half_extent must be > 0");
  require(min_gap >= 0.0, "min_gap must be >= 0");
  require(max_range >= 0.0, "max_range must be >= 0");
}

// ------------------------------------------------------------------ sample

namespace {

RigidTransform relative(const RigidTransform& from, const RigidTransform& to) { return compose(invert(to), from); }

}  // namespace

RigidTransform SceneSample::ego_motion(std::size_t k) const { return relative(ego_poses[0], ego_poses[k]); }

RigidTransform SceneSample::ego_step(std::size_t k) const { return relative(ego_poses[k], ego_poses[k + 1]); }

RigidTransform SceneSample::object_motion(std::size_t object, std::size_t k) const {
  const auto& poses = objects[object].poses;
  const RigidTransform world_motion = compose(poses[k], invert(poses[0]));
  return compose(invert(ego_poses[k]), compose(world_motion, ego_poses[k]));
}

RigidTransform SceneSample::object_step(std::size_t object, std::size_t k) const {
  const auto& poses = objects[object].poses;
  const RigidTransform world_motion = compose(poses[k + 1], invert(poses[k]));
  return compose(invert(ego_poses[k + 1]), compose(world_motion, ego_poses[k + 1]));
}


// ------------------------------------------------------------- sampling

namespace {

double ellipsoid_area(const Vec3& semi) {
  constexpr double p = 1.6075;  // Knud Thomsen approximation
  const double a = std::pow(semi.x(), p), b = std::pow(semi.y(), p), c = std::pow(semi.z(), p);
  return 4.0 * std::numbers::pi * std::pow((a * b + a * c + b * c) / 3.0, 1.0 / p);
}

// Scanning density falls off with the cosine of the incidence angle; back faces get nothing.
bool keep_facing(const Vec3& p, const Vec3& normal, const Vec3& viewpoint, std::mt19937_64& rng) {
  const Vec3 to_eye = viewpoint - p;
  const double c = normal.dot(to_eye) / (normal.norm() * to_eye.norm());
  return c > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < c;
}

}  // namespace

std::vector<Vec3> sample_surface(ShapeKind shape, const Vec3& size, double density, std::mt19937_64& rng,
                                 const Vec3* viewpoint) {
  const Vec3 half = size / 2.0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec3> out;

  if (shape == ShapeKind::ellipsoid) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<long>(std::lround(ellipsoid_area(half) * density));
    for (long k = 0; k < n; ++k) {
      Vec3 u(gauss(rng), gauss(rng), gauss(rng));
      if (u.norm() < 1e-12) u = Vec3::UnitX();
      const Vec3 p = half.cwiseProduct(u.normalized());
      if (viewpoint && !keep_facing(p, p.cwiseQuotient(half.cwiseProduct(half)), *viewpoint, rng)) continue;
      out.push_back(p);
    }
    return out;
  }

  for (int axis = 0; axis < 3; ++axis) {
    const int a = (axis + 1) % 3;
    const int b = (axis + 2) % 3;
    for (double sign : {-1.0, 1.0}) {
      Vec3 center = Vec3::Zero();
      center(axis) = sign * half(axis);
      const Vec3 normal = sign * Vec3::Unit(axis);
      if (viewpoint && normal.dot(*viewpoint - center) <= 0.0) continue;
      const auto n = static_cast<long>(std::lround(size(a) * size(b) * density));
      for (long k = 0; k < n; ++k) {
        Vec3 p = center;
        p(a) = unit(rng) * half(a);
        p(b) = unit(rng) * half(b);
        if (viewpoint && !keep_facing(p, normal, *viewpoint, rng)) continue;
        out.push_back(p);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------- generation

namespace {

struct Motion {
  Vec3 size;
  ShapeKind shape;
  Eigen::Vector2d center;
  double heading;
  Eigen::Vector2d velocity;
  double yaw_rate;  // rad/s
};

Eigen::Vector2d center_at(const Motion& m, int k, double dt) { return m.center + m.velocity * (k * dt); }

double footprint_radius(const Vec3& size) { return 0.5 * std::hypot(size.x(), size.y()); }

class Generator {
public:
  explicit Generator(const SceneSpec& spec) : spec_(spec), rng_(spec.seed) {}

  SceneSample run() {
    SceneSample s;
    s.spec = spec_;
    for (int k = 0; k < spec_.n_frames; ++k) s.ego_poses.push_back(ego_pose(k));
    place_objects(s.ego_poses);
    for (const auto& m : motions_) {
      SceneObject obj{m.size, m.shape, {}};
      for (int k = 0; k < spec_.n_frames; ++k) {
        const Eigen::Vector2d c = center_at(m, k, spec_.dt);
        obj.poses.push_back(compose(
            RigidTransform::from_translation(Vec3(c.x(), c.y(), spec_.object_base_height + m.size.z() / 2.0)),
            RigidTransform::rot_z(m.heading + m.yaw_rate * k * spec_.dt)));
      }
      s.objects.push_back(std::move(obj));
    }
    sample_frames(s);
    for (std::size_t k = 1; k < s.frames(); ++k) s.gt_flows.push_back(ground_truth_flow(s, k));
    return s;
  }

private:
  RigidTransform ego_pose(int k) const {
    const double t = k * spec_.dt;
    const double w = deg2rad(spec_.ego_yaw_rate);
    const double v = spec_.ego_speed;
    Vec3 pos = Vec3::Zero();
    if (std::abs(w) < 1e-12) {
      pos.x() = v * t;
    } else {
      pos.x() = v / w * std::sin(w * t);
      pos.y() = v / w * (1.0 - std::cos(w * t));
    }
    return compose(RigidTransform::from_translation(pos), RigidTransform::rot_z(w * t));
  }

  double uniform(double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  bool bernoulli(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  Motion random_motion() {
    Motion m;
    m.size = Vec3(uniform(spec_.size_min.x(), spec_.size_max.x()), uniform(spec_.size_min.y(), spec_.size_max.y()),
                  uniform(spec_.size_min.z(), spec_.size_max.z()));
    m.shape = spec_.shape == ShapeKind::mixed ? (bernoulli(0.5) ? ShapeKind::ellipsoid : ShapeKind::cuboid)
                                              : spec_.shape;
    const double r = spec_.placement_half_extent;
    m.center = Eigen::Vector2d(uniform(-r, r), uniform(-r, r));
    m.heading = uniform(-std::numbers::pi, std::numbers::pi);
    double speed = 0.0;
    m.yaw_rate = 0.0;
    if (!bernoulli(spec_.static_fraction)) {
      speed = uniform(spec_.speed_min, spec_.speed_max);
      m.yaw_rate = deg2rad(uniform(spec_.yaw_rate_min, spec_.yaw_rate_max));
    }
    m.velocity = speed * Eigen::Vector2d(std::cos(m.heading), std::sin(m.heading));
    return m;
  }

  /// Footprints stay min_gap apart across every pair of frames, and clear of the sensor.
  bool fits(const Motion& cand, const std::vector<RigidTransform>& ego) const {
    const double rc = footprint_radius(cand.size);
    for (int j = 0; j < spec_.n_frames; ++j) {
      const Eigen::Vector2d cj = center_at(cand, j, spec_.dt);
      for (int k = 0; k < spec_.n_frames; ++k) {
        if ((cj - ego[static_cast<std::size_t>(k)].translation.head<2>()).norm() < rc + 1.0) return false;
        for (const auto& other : motions_) {
          const double need = rc + footprint_radius(other.size) + spec_.min_gap;
          if ((cj - center_at(other, k, spec_.dt)).norm() <= need) return false;
        }
      }
    }
    return true;
  }

  void place_objects(const std::vector<RigidTransform>& ego) {
    constexpr int kAttempts = 2000;
    for (int i = 0; i < spec_.n_objects; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
        Motion m = random_motion();
        if (fits(m, ego)) {
          motions_.push_back(m);
          placed = true;
        }
      }
      if (!placed) throw InvalidSpec("could not place object " + std::to_string(i) + " with the requested gap");
    }
    if (spec_.hard_mode && !motions_.empty()) add_hard_cases(ego);
  }

  // A twin of object 0 running alongside it, and a fast object heading out of range.
  void add_hard_cases(const std::vector<RigidTransform>& ego) {
    Motion twin = motions_.front();
    const Eigen::Vector2d lateral(-std::sin(twin.heading), std::cos(twin.heading));
    const double base = 2.0 * footprint_radius(twin.size) + spec_.min_gap;
    for (double extra = 0.01; extra < 5.0; extra += 0.25) {
      Motion m = twin;
      m.center = twin.center + lateral * (base + extra);
      if (fits(m, ego)) {
        motions_.push_back(m);
        break;
      }
    }
    for (int attempt = 0; attempt < 200; ++attempt) {
      Motion m = random_motion();
      const double angle = uniform(-std::numbers::pi, std::numbers::pi);
      const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
      m.center = dir * (spec_.placement_half_extent + 5.0);
      m.heading = angle;
      m.velocity = spec_.speed_max * dir;
      if (fits(m, ego)) {
        motions_.push_back(m);
        break;
      }
    }
  }

  Vec3 noise() {
    if (spec_.noise_sigma <= 0.0) return Vec3::Zero();
    std::normal_distribution<double> g(0.0, spec_.noise_sigma);
    const double lim = kNoiseClamp * spec_.noise_sigma;
    return Vec3(std::clamp(g(rng_), -lim, lim), std::clamp(g(rng_), -lim, lim), std::clamp(g(rng_), -lim, lim));
  }

  std::vector<Vec3> ground_world(const Vec3& around) {
    const double g = spec_.ground_half_extent;
    const auto n = static_cast<long>(std::lround(4.0 * g * g * spec_.ground_density));
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) pts.emplace_back(around.x() + uniform(-g, g), around.y() + uniform(-g, g), 0.0);
    return pts;
  }

  Vec3 viewpoint_local(const SceneSample& s, std::size_t obj, std::size_t k) const {
    const Vec3 eye = s.ego_poses[k].translation + Vec3(0.0, 0.0, spec_.sensor_height);
    return invert(s.objects[obj].poses[k])(eye);
  }

  std::vector<Vec3> object_local(const SceneSample& s, std::size_t obj, std::size_t k) {
    const auto& o = s.objects[obj];
    if (!spec_.self_occlusion) return sample_surface(o.shape, o.size, spec_.object_density, rng_);
    const Vec3 eye = viewpoint_local(s, obj, k);
    return sample_surface(o.shape, o.size, spec_.object_density, rng_, &eye);
  }

  void sample_frames(SceneSample& s) {
    // mirror mode: one draw, reused rigidly in every frame
    std::vector<Vec3> mirror_ground;
    std::vector<std::vector<Vec3>> mirror_objects;
    if (spec_.mirror) {
      const Vec3 mid = 0.5 * (s.ego_poses.front().translation + s.ego_poses.back().translation);
      mirror_ground = ground_world(mid);
      for (auto& p : mirror_ground) p += noise();
      for (std::size_t i = 0; i < s.objects.size(); ++i) {
        auto local = object_local(s, i, 0);
        for (auto& p : local) p += noise();
        mirror_objects.push_back(std::move(local));
      }
    }

    for (std::size_t k = 0; k < static_cast<std::size_t>(spec_.n_frames); ++k) {
      const RigidTransform to_sensor = invert(s.ego_poses[k]);
      PointCloud scan;
      scan.timestamp = static_cast<double>(k) * spec_.dt;
      std::vector<int> ids;

      const auto ground = spec_.mirror ? mirror_ground : ground_world(s.ego_poses[k].translation);
      for (const auto& w : ground) {
        Vec3 p = to_sensor(w);
        if (!spec_.mirror) p += noise();
        scan.points.push_back(p);
        ids.push_back(-1);
      }
      for (std::size_t i = 0; i < s.objects.size(); ++i) {
        const auto local = spec_.mirror ? mirror_objects[i] : object_local(s, i, k);
        const RigidTransform to_scan = compose(to_sensor, s.objects[i].poses[k]);
        for (const auto& l : local) {
          Vec3 p = to_scan(l);
          if (!spec_.mirror) p += noise();
          scan.points.push_back(p);
          ids.push_back(static_cast<int>(i));
        }
      }

      if (spec_.max_range > 0.0) crop_to_range(scan.points, ids);

      std::vector<char> mask(ids.size());
      std::transform(ids.begin(), ids.end(), mask.begin(), [](int id) { return static_cast<char>(id >= 0); });
      s.scans.push_back(std::move(scan));
      s.object_ids.push_back(std::move(ids));
      s.fg_masks.push_back(std::move(mask));
    }
  }

  void crop_to_range(std::vector<Vec3>& points, std::vector<int>& ids) const {
    std::size_t w = 0;
    for (std::size_t r = 0; r < points.size(); ++r) {
      if (points[r].head<2>().norm() > spec_.max_range) continue;
      points[w] = points[r];
      ids[w++] = ids[r];
    }
    points.resize(w);
    ids.resize(w);
  }

  static FlowField ground_truth_flow(const SceneSample& s, std::size_t k) {
    const RigidTransform ego = s.ego_motion(k);
    std::vector<RigidTransform> motion;
    for (std::size_t i = 0; i < s.objects.size(); ++i) motion.push_back(compose(s.object_motion(i, k), ego));
    FlowField flow;
    const auto& scan = s.scans[0];
    flow.vectors.reserve(scan.size());
    for (std::size_t p = 0; p < scan.size(); ++p) {
      const int id = s.object_ids[0][p];
      const RigidTransform& t = id >= 0 ? motion[static_cast<std::size_t>(id)] : ego;
      flow.vectors.push_back(t(scan.points[p]) - scan.points[p]);
    }
    return flow;
  }

  SceneSpec spec_;
  std::mt19937_64 rng_;
  std::vector<Motion> motions_;
};

}  // namespace

SceneSample generate(const SceneSpec& spec) {
  spec.validate();
  return Generator(spec).run();
}

// ----------------------------------------------------------- verification

std::vector<int> assign_object_ids(const SceneSample& sample, std::size_t frame) {
  // per-axis truncation bounds the noise vector by sqrt(3) of the clamp, in any rotated frame
  const double margin = std::sqrt(3.0) * kNoiseClamp * sample.spec.noise_sigma + kGeometrySlack;
  const auto& scan = sample.scans[frame];
  std::vector<RigidTransform> to_local;
  for (const auto& o : sample.objects)
    to_local.push_back(compose(invert(o.poses[frame]), sample.ego_poses[frame]));
  std::vector<int> ids(scan.size(), -1);
  for (std::size_t p = 0; p < scan.size(); ++p) {
    for (std::size_t i = 0; i < sample.objects.size(); ++i) {
      const Vec3 l = to_local[i](scan.points[p]);
      const Vec3 limit = sample.objects[i].size / 2.0 + Vec3::Constant(margin);
      if ((l.cwiseAbs().array() <= limit.array()).all()) {
        ids[p] = static_cast<int>(i);
        break;
      }
    }
  }
  return ids;
}

bool verify_sample(const SceneSample& s, double tol) {
  const std::size_t frames = s.scans.size();
  if (frames < 2 || s.ego_poses.size() != frames || s.fg_masks.size() != frames || s.object_ids.size() != frames ||
      s.gt_flows.size() != frames - 1)
    return false;
  for (const auto& o : s.objects)
    if (o.poses.size() != frames) return false;

  const double ground_band = kNoiseClamp * s.spec.noise_sigma + kGeometrySlack;
  for (std::size_t k = 0; k < frames; ++k) {
    const auto& scan = s.scans[k];
    if (s.fg_masks[k].size() != scan.size() || s.object_ids[k].size() != scan.size()) return false;
    if (assign_object_ids(s, k) != s.object_ids[k]) return false;
    for (std::size_t p = 0; p < scan.size(); ++p) {
      const bool fg = s.object_ids[k][p] >= 0;
      if (static_cast<bool>(s.fg_masks[k][p]) != fg) return false;
      if (!fg && std::abs(scan.points[p].z()) > ground_band) return false;
    }
  }

  const auto& base = s.scans[0];
  for (std::size_t k = 1; k < frames; ++k) {
    const auto& flow = s.gt_flows[k - 1];
    if (flow.size() != base.size()) return false;
    const RigidTransform ego = s.ego_motion(k);
    for (std::size_t p = 0; p < base.size(); ++p) {
      const int id = s.object_ids[0][p];
      const RigidTransform t = id >= 0 ? compose(s.object_motion(static_cast<std::size_t>(id), k), ego) : ego;
      const Vec3 expected = t(base.points[p]) - base.points[p];
      if (!((flow.vectors[p] - expected).cwiseAbs().maxCoeff() <= tol)) return false;
    }
  }
  return true;
}

// -------------------------------------------------------------- file I/O

namespace {

std::string frame_name(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.%s", stem, k, ext);
  return buf;
}

const char* shape_name(ShapeKind s) {
  switch (s) {
    case ShapeKind::cuboid: return "cuboid";
    case ShapeKind::ellipsoid: return "ellipsoid";
    case ShapeKind::mixed: return "mixed";
  }
  return "cuboid";
}

ShapeKind parse_shape(const std::string& s) {
  if (s == "cuboid") return ShapeKind::cuboid;
  if (s == "ellipsoid") return ShapeKind::ellipsoid;
  if (s == "mixed") return ShapeKind::mixed;
  throw FormatError("scene.json: unknown shape " + s);
}

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 json_vec(const nlohmann::json& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

nlohmann::ordered_json spec_json(const SceneSpec& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["n_objects"] = s.n_objects;
  j["size_min"] = vec_json(s.size_min);
  j["size_max"] = vec_json(s.size_max);
  j["speed_min"] = s.speed_min;
  j["speed_max"] = s.speed_max;
  j["yaw_rate_min"] = s.yaw_rate_min;
  j["yaw_rate_max"] = s.yaw_rate_max;
  j["static_fraction"] = s.static_fraction;
  j["ground_half_extent"] = s.ground_half_extent;
  j["ground_density"] = s.ground_density;
  j["object_density"] = s.object_density;
  j["noise_sigma"] = s.noise_sigma;
  j["dt"] = s.dt;
  j["n_frames"] = s.n_frames;
  j["ego_speed"] = s.ego_speed;
  j["ego_yaw_rate"] = s.ego_yaw_rate;
  j["object_base_height"] = s.object_base_height;
  j["placement_half_extent"] = s.placement_half_extent;
  j["min_gap"] = s.min_gap;
  j["sensor_height"] = s.sensor_height;
  j["max_range"] = s.max_range;
  j["self_occlusion"] = s.self_occlusion;
  j["mirror"] = s.mirror;
  j["hard_mode"] = s.hard_mode;
  j["shape"] = shape_name(s.shape);
  return j;
}

SceneSpec json_spec(const nlohmann::json& j) {
  SceneSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.n_objects = j.at("n_objects").get<int>();
  s.size_min = json_vec(j.at("size_min"));
  s.size_max = json_vec(j.at("size_max"));
  s.speed_min = j.at("speed_min").get<double>();
  s.speed_max = j.at("speed_max").get<double>();
  s.yaw_rate_min = j.at("yaw_rate_min").get<double>();
  s.yaw_rate_max = j.at("yaw_rate_max").get<double>();
  s.static_fraction = j.at("static_fraction").get<double>();
  s.ground_half_extent = j.at("ground_half_extent").get<double>();
  s.ground_density = j.at("ground_density").get<double>();
  s.object_density = j.at("object_density").get<double>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  s.dt = j.at("dt").get<double>();
  s.n_frames = j.at("n_frames").get<int>();
  s.ego_speed = j.at("ego_speed").get<double>();
  s.ego_yaw_rate = j.at("ego_yaw_rate").get<double>();
  s.object_base_height = j.at("object_base_height").get<double>();
  s.placement_half_extent = j.at("placement_half_extent").get<double>();
  s.min_gap = j.at("min_gap").get<double>();
  s.sensor_height = j.at("sensor_height").get<double>();
  s.max_range = j.at("max_range").get<double>();
  s.self_occlusion = j.at("self_occlusion").get<bool>();
  s.mirror = j.at("mirror").get<bool>();
  s.hard_mode = j.at("hard_mode").get<bool>();
  s.shape = parse_shape(j.at("shape").get<std::string>());
  return s;
}

nlohmann::ordered_json pose_json(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  return a;
}

RigidTransform json_pose(const nlohmann::json& j) {
  Eigen::Matrix4d m;
  for (int k = 0; k < 16; ++k) m(k / 4, k % 4) = j.at(static_cast<std::size_t>(k)).get<double>();
  return RigidTransform::from_matrix(m);
}

}  // namespace

void write_sample(const SceneSample& sample, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < sample.frames(); ++k) {
    write_scan(dir / frame_name("scan", k, "icpf"), sample.scans[k]);
    write_pose(dir / frame_name("pose", k, "txt"), sample.ego_poses[k]);
    write_labels(dir / frame_name("labels", k, "iclb"), sample.fg_masks[k]);
    if (k > 0) write_flow(dir / frame_name("flow", k, "icff"), sample.gt_flows[k - 1], sample.scans[0].timestamp);
  }
  nlohmann::ordered_json doc;
  doc["format"] = "icpflow-scene";
  doc["version"] = 1;
  doc["frames"] = sample.frames();
  doc["spec"] = spec_json(sample.spec);
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : sample.objects) {
    nlohmann::ordered_json jo;
    jo["size"] = vec_json(o.size);
    jo["shape"] = shape_name(o.shape);
    auto poses = nlohmann::ordered_json::array();
    for (const auto& p : o.poses) poses.push_back(pose_json(p));
    jo["poses"] = poses;
    objects.push_back(jo);
  }
  doc["objects"] = objects;
  write_file(dir / "scene.json", doc.dump(2) + "\n");
}

SceneSample read_sample(const std::filesystem::path& dir) {
  SceneSample s;
  try {
    const auto doc = nlohmann::json::parse(read_file(dir / "scene.json"));
    s.spec = json_spec(doc.at("spec"));
    const auto frames = doc.at("frames").get<std::size_t>();
    for (const auto& jo : doc.at("objects")) {
      SceneObject o;
      o.size = json_vec(jo.at("size"));
      o.shape = parse_shape(jo.at("shape").get<std::string>());
      for (const auto& jp : jo.at("poses")) o.poses.push_back(json_pose(jp));
      s.objects.push_back(std::move(o));
    }
    for (std::size_t k = 0; k < frames; ++k) {
      s.scans.push_back(read_scan(dir / frame_name("scan", k, "icpf")));
      s.ego_poses.push_back(read_pose(dir / frame_name("pose", k, "txt")));
      s.fg_masks.push_back(read_labels(dir / frame_name("labels", k, "iclb")));
      if (k > 0) s.gt_flows.push_back(read_flow(dir / frame_name("flow", k, "icff")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scene.json: ") + e.what());
  }
  for (std::size_t k = 0; k < s.scans.size(); ++k) s.object_ids.push_back(assign_object_ids(s, k));
  return s;
}

}  // namespace icpflow
