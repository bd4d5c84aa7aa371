#include "icpflow/cli.hpp"

#include "icpflow/config.hpp"
#include "icpflow/eval.hpp"
#include "icpflow/io.hpp"
#include "icpflow/pipeline.hpp"
#include "icpflow/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>

namespace icpflow {

namespace {

struct ConfigFlags {
  PipelineConfig config;
  std::string association = "argmin";
  std::string init = "histogram";
  bool dump = false;

  void attach(CLI::App& app) {
    auto& c = config;
    app.add_option("--z-threshold", c.z_threshold, "ground removal height (m)")->capture_default_str();
    app.add_option("--eps", c.eps, "clustering neighborhood radius (m)")->capture_default_str();
    app.add_option("--min-samples", c.min_samples, "neighbors for a core point")->capture_default_str();
    app.add_option("--min-cluster-size", c.min_cluster_size)->capture_default_str();
    app.add_option("--max-clusters", c.max_clusters)->capture_default_str();
    app.add_option("--bin-size", c.bin_size, "translation histogram bin (m)")->capture_default_str();
    app.add_option("--dt", c.dt, "time between consecutive scans (s)")->capture_default_str();
    app.add_option("--speed-cap", c.speed_cap, "max object speed (m/s)")->capture_default_str();
    app.add_option("--tau-z", c.tau_z, "vertical search range (m)")->capture_default_str();
    app.add_option("--tau-inlier", c.tau_inlier, "ICP inlier distance (m)")->capture_default_str();
    app.add_option("--tau-d", c.tau_d, "max mean ICP distance for a match (m)")->capture_default_str();
    app.add_option("--tau-r", c.tau_r, "min inlier ratio for a match")->capture_default_str();
    app.add_option("--max-iters", c.max_iters)->capture_default_str();
    app.add_option("--convergence-tol", c.convergence_tol)->capture_default_str();
    app.add_option("--association", association, "argmin | hungarian")->capture_default_str();
    app.add_option("--init", init, "histogram | centroid | none")->capture_default_str();
    app.add_option("--threads", c.threads, "workers for pair matching")->capture_default_str();
    app.add_flag("--dump-config", dump, "print the resolved configuration");
  }

  const PipelineConfig& resolve() {
    config.association = parse_association_mode(association);
    config.init = parse_init_mode(init);
    config.validate();
    return config;
  }
};

std::string frame_file(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.%s", stem, k, ext);
  return buf;
}

void require_inputs(bool ok, const char* what) {
  if (!ok) throw CLI::RequiredError(what);
}

// ---------------------------------------------------------------- estimate

struct EstimateCmd {
  ConfigFlags flags;
  std::string src, dst, src_pose, dst_pose, out;

  void attach(CLI::App& app) {
    app.add_option("--src", src, "source scan (.icpf)");
    app.add_option("--dst", dst, "target scan (.icpf)");
    app.add_option("--src-pose", src_pose, "source pose file");
    app.add_option("--dst-pose", dst_pose, "target pose file");
    app.add_option("--out", out, "output flow file (.icff)");
    flags.attach(app);
  }

  int run(std::ostream& os) {
    const PipelineConfig& cfg = flags.resolve();
    if (flags.dump) os << cfg.dump();
    if (flags.dump && src.empty() && dst.empty()) return kExitOk;
    require_inputs(!src.empty() && !dst.empty() && !src_pose.empty() && !dst_pose.empty() && !out.empty(),
                   "--src, --dst, --src-pose, --dst-pose and --out are required");
    const PointCloud a = read_scan(src);
    const PointCloud b = read_scan(dst);
    const RigidTransform ego = relative_ego(read_pose(src_pose), read_pose(dst_pose));
    const FlowField flow = estimate_pair(a, b, ego, cfg).flow;
    write_flow(out, flow, a.timestamp);
    return kExitOk;
  }
};

// ------------------------------------------------------------------ track

struct TrackCmd {
  ConfigFlags flags;
  std::vector<std::string> scans, poses;
  std::string out_dir;
  bool no_intermediate = false;

  void attach(CLI::App& app) {
    app.add_option("--scans", scans, "scan files in time order");
    app.add_option("--poses", poses, "pose files, one per scan");
    app.add_option("--out-dir", out_dir, "writes flow_001.icff .. flow_{K-1}.icff");
    app.add_flag("--no-intermediate", no_intermediate, "pair frame 0 directly with every later frame");
    flags.attach(app);
  }

  int run(std::ostream& os) {
    const PipelineConfig& cfg = flags.resolve();
    if (flags.dump) os << cfg.dump();
    if (flags.dump && scans.empty()) return kExitOk;
    require_inputs(!scans.empty() && !out_dir.empty(), "--scans, --poses and --out-dir are required");
    if (scans.size() < 2) throw CLI::ValidationError("--scans", "need at least 2 scans");
    if (poses.size() != scans.size()) throw LengthMismatch("need exactly one pose file per scan");

    std::vector<PointCloud> clouds;
    std::vector<RigidTransform> world;
    for (std::size_t k = 0; k < scans.size(); ++k) {
      clouds.push_back(read_scan(scans[k]));
      world.push_back(read_pose(poses[k]));
    }

    std::vector<FlowField> flows;
    if (no_intermediate) {
      for (std::size_t k = 1; k < clouds.size(); ++k) {
        const double gap = static_cast<double>(k) * cfg.dt;
        flows.push_back(direct_pair_flow(clouds[0], clouds[k], relative_ego(world[0], world[k]), cfg, gap));
      }
    } else {
      std::vector<RigidTransform> egos;
      for (std::size_t k = 0; k + 1 < world.size(); ++k) egos.push_back(relative_ego(world[k], world[k + 1]));
      flows = track_sequence(clouds, egos, cfg);
    }

    std::filesystem::create_directories(out_dir);
    for (std::size_t k = 0; k < flows.size(); ++k)
      write_flow(std::filesystem::path(out_dir) / frame_file("flow", k + 1, "icff"), flows[k], clouds[0].timestamp);
    return kExitOk;
  }
};

// --------------------------------------------------------------- evaluate

struct EvaluateCmd {
  std::string pred, gt, labels, scan, src_pose, dst_pose, out, json;
  double dt = 0.1;
  double half_extent = 32.0;

  void attach(CLI::App& app) {
    app.add_option("--pred", pred, "predicted flow (.icff)")->required();
    app.add_option("--gt", gt, "ground-truth flow (.icff)")->required();
    app.add_option("--labels", labels, "foreground labels (.iclb)")->required();
    app.add_option("--scan", scan, "source scan (.icpf)")->required();
    app.add_option("--dt", dt, "time between the two scans (s)")->capture_default_str();
    app.add_option("--half-extent", half_extent, "evaluation crop (m)")->capture_default_str();
    auto* sp = app.add_option("--src-pose", src_pose, "score in the ego-compensated convention");
    auto* dp = app.add_option("--dst-pose", dst_pose);
    sp->needs(dp);
    dp->needs(sp);
    app.add_option("--out", out, "text report file");
    app.add_option("--json", json, "structured report file");
  }

  int run(std::ostream& os) {
    if (!(dt > 0.0)) throw ConfigError("--dt must be > 0");
    if (!(half_extent > 0.0)) throw ConfigError("--half-extent must be > 0");
    const PointCloud cloud = read_scan(scan);
    GroundTruth truth{read_flow(gt), read_labels(labels), dt};
    const FlowField prediction = read_flow(pred);
    std::optional<RigidTransform> ego;
    if (!src_pose.empty()) ego = relative_ego(read_pose(src_pose), read_pose(dst_pose));
    const EvalReport report = evaluate(prediction, truth, cloud, half_extent, ego);
    const std::string text = format_report_text(report);
    os << text;
    if (!out.empty()) write_file(out, text);
    if (!json.empty()) write_file(json, format_report_json(report));
    return kExitOk;
  }
};

// ------------------------------------------------------------------ synth

struct SynthCmd {
  SceneSpec spec;
  std::string shape = "cuboid";
  std::string out_dir;
  void attach(CLI::App& app) {
    auto& s = spec;
    app.add_option("--out-dir", out_dir, "output directory")->required();
    app.add_option("--seed", s.seed)->capture_default_str();
    app.add_option("--objects", s.n_objects)->capture_default_str();
    app.add_option("--frames", s.n_frames)->capture_default_str();
    app.add_option("--dt", s.dt)->capture_default_str();
    app.add_option("--speed-min", s.speed_min)->capture_default_str();
    app.add_option("--speed-max", s.speed_max)->capture_default_str();
    app.add_option("--yaw-rate-min", s.yaw_rate_min, "deg/s")->capture_default_str();
    app.add_option("--yaw-rate-max", s.yaw_rate_max, "deg/s")->capture_default_str();
    app.add_option("--static-fraction", s.static_fraction)->capture_default_str();
    app.add_option("--noise", s.noise_sigma, "gaussian sigma (m)")->capture_default_str();
    app.add_option("--ego-speed", s.ego_speed)->capture_default_str();
    app.add_option("--ego-yaw-rate", s.ego_yaw_rate, "deg/s")->capture_default_str();
    app.add_option("--ground-density", s.ground_density, "points / m^2")->capture_default_str();
    app.add_option("--object-density", s.object_density, "points / m^2")->capture_default_str();
    app.add_option("--ground-half-extent", s.ground_half_extent)->capture_default_str();
    app.add_option("--placement-half-extent", s.placement_half_extent)->capture_default_str();
    app.add_option("--min-gap", s.min_gap)->capture_default_str();
    app.add_option("--shape", shape, "cuboid | ellipsoid | mixed")->capture_default_str();
    app.add_flag("--mirror", s.mirror, "reuse one surface sample in every frame");
    app.add_flag("--hard", s.hard_mode, "add a near-duplicate object and one leaving range");
    app.add_option("--max-range", s.max_range, "drop points beyond this xy range (m), 0 keeps all")->capture_default_str();
    app.add_flag("--occlusion", s.self_occlusion, "drop back-facing samples, thin out grazing ones");
  }

  int run(std::ostream&) {
    if (shape == "cuboid") spec.shape = ShapeKind::cuboid;
    else if (shape == "ellipsoid") spec.shape = ShapeKind::ellipsoid;
    else if (shape == "mixed") spec.shape = ShapeKind::mixed;
    else throw InvalidSpec("unknown --shape " + shape);
    write_sample(generate(spec), out_dir);
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"icpflow: scene flow from per-cluster ICP"};
  app.require_subcommand(1);
  EstimateCmd estimate;
  TrackCmd track;
  EvaluateCmd evaluate_cmd;
  SynthCmd synth;
  auto* est_app = app.add_subcommand("estimate", "flow between two scans");
  auto* trk_app = app.add_subcommand("track", "frame-0 to frame-k flows over a sequence");
  auto* eval_app = app.add_subcommand("evaluate", "score a flow against ground truth");
  auto* syn_app = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
  estimate.attach(*est_app);
  track.attach(*trk_app);
  evaluate_cmd.attach(*eval_app);
  synth.attach(*syn_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitBadConfig;
  }

  try {
    if (est_app->parsed()) return estimate.run(out);
    if (trk_app->parsed()) return track.run(out);
    if (eval_app->parsed()) return evaluate_cmd.run(out);
    return synth.run(out);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const LengthMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const InvalidSpec& e) {
    err << "invalid scene spec: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace icpflow
