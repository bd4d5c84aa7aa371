#include "icpflow/config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace icpflow {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  require(std::isfinite(z_threshold), "z_threshold must be finite");
  require(positive(eps), "eps must be > 0");
  require(min_samples >= 1, "min_samples must be >= 1");
  require(min_cluster_size >= 1, "min_cluster_size must be >= 1");
  require(max_clusters >= 0, "max_clusters must be >= 0");
  require(positive(bin_size), "bin_size must be > 0");
  require(positive(dt), "dt must be > 0");
  require(positive(speed_cap), "speed_cap must be > 0");
  require(positive(tau_z), "tau_z must be > 0");
  require(positive(tau_inlier), "tau_inlier must be > 0");
  require(positive(tau_d), "tau_d must be > 0");
  require(positive(tau_r), "tau_r must be > 0");
  require(max_iters >= 1, "max_iters must be >= 1");
  require(positive(convergence_tol), "convergence_tol must be > 0");
  require(threads >= 1, "threads must be >= 1");
}

MatchParams PipelineConfig::match_params(double gap) const {
  MatchParams p;
  const double range = search_range(gap);
  p.ranges = Vec3(range, range, tau_z);
  p.bin_size = bin_size;
  p.init = init;
  p.icp = {max_iters, convergence_tol, tau_inlier};
  p.threads = threads;
  return p;
}

std::string PipelineConfig::dump() const {
  std::ostringstream os;
  os << "z_threshold = " << fmt_double(z_threshold) << '\n'
     << "eps = " << fmt_double(eps) << '\n'
     << "min_samples = " << min_samples << '\n'
     << "min_cluster_size = " << min_cluster_size << '\n'
     << "max_clusters = " << max_clusters << '\n'
     << "bin_size = " << fmt_double(bin_size) << '\n'
     << "dt = " << fmt_double(dt) << '\n'
     << "speed_cap = " << fmt_double(speed_cap) << '\n'
     << "tau_xy = " << fmt_double(search_range(dt)) << '\n'
     << "tau_z = " << fmt_double(tau_z) << '\n'
     << "tau_inlier = " << fmt_double(tau_inlier) << '\n'
     << "tau_d = " << fmt_double(tau_d) << '\n'
     << "tau_r = " << fmt_double(tau_r) << '\n'
     << "max_iters = " << max_iters << '\n'
     << "convergence_tol = " << fmt_double(convergence_tol) << '\n'
     << "association = " << to_string(association) << '\n'
     << "init = " << to_string(init) << '\n'
     << "threads = " << threads << '\n';
  return os.str();
}

std::string_view to_string(AssociationMode mode) {
  return mode == AssociationMode::hungarian ? "hungarian" : "argmin";
}

std::string_view to_string(InitMode mode) {
  switch (mode) {
    case InitMode::histogram: return "histogram";
    case InitMode::centroid: return "centroid";
    case InitMode::none: return "none";
  }
  return "histogram";
}

AssociationMode parse_association_mode(std::string_view s) {
  if (s == "argmin") return AssociationMode::argmin;
  if (s == "hungarian") return AssociationMode::hungarian;
  throw ConfigError("unknown association mode: " + std::string(s));
}

InitMode parse_init_mode(std::string_view s) {
  if (s == "histogram") return InitMode::histogram;
  if (s == "centroid") return InitMode::centroid;
  if (s == "none") return InitMode::none;
  throw ConfigError("unknown init mode: " + std::string(s));
}

}  // namespace icpflow
