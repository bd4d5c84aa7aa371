#include "icpflow/eval.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace icpflow {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::dynamic_fg: return "dynamic_fg";
    case Category::static_fg: return "static_fg";
    case Category::static_bg: return "static_bg";
  }
  return "static_bg";
}

namespace {

void check_lengths(const FlowField& pred, const FlowField& gt, std::span<const char> mask) {
  if (pred.size() != gt.size() || mask.size() != gt.size())
    throw LengthMismatch("metric inputs differ in length");
}

}  // namespace

double epe(const FlowField& pred, const FlowField& gt, std::span<const char> mask) {
  check_lengths(pred, gt, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum += (pred.vectors[i] - gt.vectors[i]).norm();
    ++n;
  }
  if (n == 0) throw EmptyMask("epe: mask selects no points");
  return sum / static_cast<double>(n);
}

double accuracy(const FlowField& pred, const FlowField& gt, std::span<const char> mask, double abs_thresh,
                double rel_thresh) {
  check_lengths(pred, gt, mask);
  std::size_t hits = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++n;
    const double err = (pred.vectors[i] - gt.vectors[i]).norm();
    const double ref = gt.vectors[i].norm();
    if (err <= abs_thresh || (ref > 0.0 && err / ref <= rel_thresh)) ++hits;
  }
  if (n == 0) throw EmptyMask("accuracy: mask selects no points");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

std::vector<Category> categorize(const GroundTruth& gt) {
  if (!(gt.dt > 0.0)) throw std::invalid_argument("categorize: dt must be > 0");
  if (gt.fg_mask.size() != gt.flow.size()) throw LengthMismatch("categorize: mask/flow length mismatch");
  std::vector<Category> out(gt.flow.size(), Category::static_bg);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!gt.fg_mask[i]) continue;
    const double speed = gt.flow.vectors[i].norm() / gt.dt;
    out[i] = speed > kDynamicSpeed ? Category::dynamic_fg : Category::static_fg;
  }
  return out;
}

std::vector<char> crop_range(const PointCloud& scan, double half_extent) {
  if (!(half_extent > 0.0)) throw std::invalid_argument("crop_range: half_extent must be > 0");
  std::vector<char> mask(scan.size(), 0);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Vec3& p = scan.points[i];
    mask[i] = std::abs(p.x()) <= half_extent && std::abs(p.y()) <= half_extent;
  }
  return mask;
}

EvalReport evaluate(const FlowField& pred, const GroundTruth& gt, const PointCloud& scan, double half_extent,
                    const std::optional<RigidTransform>& ego) {
  if (pred.size() != scan.size() || gt.flow.size() != scan.size() || gt.fg_mask.size() != scan.size())
    throw LengthMismatch("evaluate: prediction, ground truth and scan differ in length");

  FlowField p = pred;
  GroundTruth g = gt;
  if (ego) {
    for (std::size_t i = 0; i < scan.size(); ++i) {
      const Vec3 ego_flow = (*ego)(scan.points[i]) - scan.points[i];
      p.vectors[i] -= ego_flow;
      g.flow.vectors[i] -= ego_flow;
    }
  }

  const auto in_range = crop_range(scan, half_extent);
  const auto cats = categorize(g);
  EvalReport report;
  for (Category c : kCategories) {
    std::vector<char> mask(scan.size(), 0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < scan.size(); ++i) {
      mask[i] = in_range[i] && cats[i] == c;
      n += static_cast<std::size_t>(mask[i]);
    }
    CategoryReport& out = report.at(c);
    out.count = n;
    if (n == 0) continue;
    out.metrics = CategoryMetrics{epe(p, g.flow, mask),
                                  accuracy(p, g.flow, mask, kStrictThreshold, kStrictThreshold),
                                  accuracy(p, g.flow, mask, kRelaxedThreshold, kRelaxedThreshold)};
  }
  return report;
}

std::string format_report_text(const EvalReport& report) {
  std::string out;
  char line[512];
  for (Category c : kCategories) {
    const auto& r = report.at(c);
    const auto name = std::string(to_string(c));
    std::snprintf(line, sizeof(line), "%s.count %zu\n", name.c_str(), r.count);
    out += line;
    if (!r.metrics) continue;
    std::snprintf(line, sizeof(line), "%s.epe %.6f\n%s.acc_s %.6f\n%s.acc_r %.6f\n", name.c_str(), r.metrics->epe,
                  name.c_str(), r.metrics->acc_strict, name.c_str(), r.metrics->acc_relaxed);
    out += line;
  }
  return out;
}

std::string format_report_json(const EvalReport& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (Category c : kCategories) {
    const auto& r = report.at(c);
    const auto name = std::string(to_string(c));
    doc[name + ".count"] = r.count;
    if (!r.metrics) continue;
    doc[name + ".epe"] = r.metrics->epe;
    doc[name + ".acc_s"] = r.metrics->acc_strict;
    doc[name + ".acc_r"] = r.metrics->acc_relaxed;
  }
  return doc.dump(2) + "\n";
}

EvalReport parse_report_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ReportParseError(e.what());
  }
  EvalReport report;
  try {
    for (Category c : kCategories) {
      const auto name = std::string(to_string(c));
      auto& r = report.at(c);
      r.count = doc.at(name + ".count").get<std::size_t>();
      if (!doc.contains(name + ".epe")) continue;
      r.metrics = CategoryMetrics{doc.at(name + ".epe").get<double>(), doc.at(name + ".acc_s").get<double>(),
                                  doc.at(name + ".acc_r").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ReportParseError(e.what());
  }
  return report;
}

}  // namespace icpflow
