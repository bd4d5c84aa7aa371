#pragma once

#include "icpflow/flow.hpp"
#include "icpflow/geometry.hpp"

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icpflow {

class EmptyMask : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ReportParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GroundTruth {
  FlowField flow;
  std::vector<char> fg_mask;  ///< annotated foreground
  double dt = 0.1;
};

enum class Category : int { dynamic_fg = 0, static_fg = 1, static_bg = 2 };
inline constexpr std::array<Category, 3> kCategories{Category::dynamic_fg, Category::static_fg,
                                                     Category::static_bg};
std::string_view to_string(Category c);

inline constexpr double kDynamicSpeed = 0.5;  // m/s
inline constexpr double kStrictThreshold = 0.05;
inline constexpr double kRelaxedThreshold = 0.1;

/// Mean |pred_i - gt_i| over masked points. @throws EmptyMask
double epe(const FlowField& pred, const FlowField& gt, std::span<const char> mask);

/**
 * Percentage of masked points whose error is <= abs_thresh, or whose error
 * relative to |gt_i| is <= rel_thresh. The relative branch is skipped for
 * zero-norm ground truth. @throws EmptyMask
 */
double accuracy(const FlowField& pred, const FlowField& gt, std::span<const char> mask, double abs_thresh,
                double rel_thresh);

/// dynamic_fg: foreground moving faster than 0.5 m/s; static_fg: other foreground; static_bg: rest.
std::vector<Category> categorize(const GroundTruth& gt);

/// |x| <= half_extent && |y| <= half_extent.
std::vector<char> crop_range(const PointCloud& scan, double half_extent);

struct CategoryMetrics {
  double epe = 0.0;
  double acc_strict = 0.0;   // percent
  double acc_relaxed = 0.0;  // percent
  bool operator==(const CategoryMetrics&) const = default;
};

struct CategoryReport {
  std::size_t count = 0;
  std::optional<CategoryMetrics> metrics;  ///< empty when count == 0
  bool operator==(const CategoryReport&) const = default;
};

struct EvalReport {
  std::array<CategoryReport, 3> categories;

  const CategoryReport& at(Category c) const { return categories[static_cast<std::size_t>(c)]; }
  CategoryReport& at(Category c) { return categories[static_cast<std::size_t>(c)]; }
  bool operator==(const EvalReport&) const = default;
};

/**
 * Crop, categorize and score. When `ego` is given, the ego flow ego(x) - x is
 * removed from both prediction and ground truth first, so scoring happens in
 * the ego-compensated convention.
 */
EvalReport evaluate(const FlowField& pred, const GroundTruth& gt, const PointCloud& scan, double half_extent,
                    const std::optional<RigidTransform>& ego = std::nullopt);

/// `category.metric value` lines with 6 decimals; empty categories only list their count.
std::string format_report_text(const EvalReport& report);
/// Flat key-value JSON document (keys like "dynamic_fg.epe"), full double precision.
std::string format_report_json(const EvalReport& report);
/// @throws ReportParseError
EvalReport parse_report_json(std::string_view text);

}  // namespace icpflow
