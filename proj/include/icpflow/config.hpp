#pragma once

#include "icpflow/association.hpp"
#include "icpflow/matching.hpp"
#include "icpflow/preprocess.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace icpflow {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class AssociationMode { argmin, hungarian };

/// Pipeline hyperparameters. Defaults are the published settings.
struct PipelineConfig {
  double z_threshold = 0.3;
  double eps = 0.75;
  int min_samples = 5;
  int min_cluster_size = 20;
  int max_clusters = 200;
  double bin_size = 0.1;
  double dt = 0.1;
  double speed_cap = 33.3;  // m/s; tau_x = tau_y = speed_cap * dt
  double tau_z = 0.1;
  double tau_inlier = 0.1;
  double tau_d = 0.2;
  double tau_r = 0.2;
  int max_iters = 100;
  double convergence_tol = 1e-4;
  AssociationMode association = AssociationMode::argmin;
  InitMode init = InitMode::histogram;
  unsigned threads = 1;

  /// @throws ConfigError on the first invalid field.
  void validate() const;

  /// Horizontal search range for a scan gap of `gap` seconds.
  double search_range(double gap) const { return speed_cap * gap; }

  ClusterParams cluster_params() const { return {eps, min_samples, min_cluster_size}; }
  MatchParams match_params(double gap) const;
  Thresholds thresholds() const { return {tau_d, tau_r}; }

  /// One `key = value` line per field, stable order.
  std::string dump() const;
};

std::string_view to_string(AssociationMode mode);
std::string_view to_string(InitMode mode);
AssociationMode parse_association_mode(std::string_view s);
InitMode parse_init_mode(std::string_view s);

}  // namespace icpflow
