/* Copyright 2026 The ambiprune Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ambiprune/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ambiprune/error.h"
#include "ambiprune/parallel.h"

namespace ambiprune {

using nlohmann::json;

namespace {

// Table rows. Heights compare against the box height in pixels.
const std::vector<SubsetSpec>& subset_table() {
  static const std::vector<SubsetSpec> kSubsets = {
      {"reasonable", 40.0, false, std::nullopt, TagLevel::kNone,
       TagLevel::kGt40, TagLevel::kGt40},
      {"small", 30.0, true, 60.0, TagLevel::kNone, TagLevel::kGt40,
       TagLevel::kGt40},
      {"occluded", 40.0, false, std::nullopt, TagLevel::kGt40,
       TagLevel::kGt80, TagLevel::kGt80},
      {"all", 20.0, false, std::nullopt, TagLevel::kNone, TagLevel::kGt80,
       TagLevel::kGt80},
  };
  return kSubsets;
}

}  // namespace

bool SubsetSpec::keeps(const Instance& instance) const {
  double h = instance.bbox.height();
  if (min_height_inclusive ? h < min_height : h <= min_height) return false;
  if (max_height && h > *max_height) return false;
  if (instance.occlusion < min_occlusion) return false;
  if (instance.occlusion >= max_occlusion) return false;
  if (instance.truncation >= max_truncation) return false;
  return true;
}

std::span<const SubsetSpec> builtin_subsets() { return subset_table(); }

const SubsetSpec& builtin_subset(std::string_view name) {
  for (const auto& spec : subset_table()) {
    if (spec.name == name) return spec;
  }
  throw ValidationError("unknown subset \"" + std::string(name) +
                        "\" (expected reasonable, small, occluded or all)");
}

Dataset apply_subset(const Dataset& dataset, const SubsetSpec& spec) {
  Dataset out = dataset;
  for (auto& image : out.images) {
    for (auto& inst : image.instances) {
      if (!spec.keeps(inst)) inst.ignore = true;
    }
  }
  return out;
}

Dataset restrict_to_identity(const Dataset& dataset, std::string_view identity) {
  Dataset out = dataset;
  for (auto& image : out.images) {
    for (auto& inst : image.instances) {
      if (inst.identity != identity) inst.ignore = true;
    }
  }
  return out;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  double inter = iw * ih;
  double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::min(1.0, inter / uni) : 0.0;
}

std::string_view to_string(MatchStatus status) {
  switch (status) {
    case MatchStatus::kTruePositive:
      return "tp";
    case MatchStatus::kFalsePositive:
      return "fp";
    case MatchStatus::kIgnored:
      return "ignored";
  }
  return "fp";
}

MatchCounts MatchResult::counts(double min_confidence) const {
  MatchCounts c;
  for (const auto& image : images) {
    for (const auto& outcome : image.outcomes) {
      if (outcome.confidence < min_confidence) continue;
      switch (outcome.status) {
        case MatchStatus::kTruePositive:
          ++c.tp;
          break;
        case MatchStatus::kFalsePositive:
          ++c.fp;
          break;
        case MatchStatus::kIgnored:
          ++c.ignored;
          break;
      }
    }
  }
  c.fn = gt_count - c.tp;
  return c;
}

namespace {

ImageMatch match_image(const ImageRecord& image,
                       std::span<const Detection> detections,
                       std::vector<std::size_t> order, double iou_threshold) {
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  ImageMatch result;
  result.image_id = image.image_id;
  const auto& gt = image.instances;
  std::vector<bool> taken(gt.size(), false);
  for (std::size_t d : order) {
    const Detection& det = detections[d];
    DetectionOutcome outcome{d, det.confidence, std::nullopt,
                             MatchStatus::kFalsePositive};
    double best = iou_threshold;
    std::optional<std::size_t> best_gt;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt[g].ignore || taken[g]) continue;
      double overlap = iou(det.bbox, gt[g].bbox);
      if (overlap >= best && (!best_gt || overlap > best)) {
        best = overlap;
        best_gt = g;
      }
    }
    if (best_gt) {
      taken[*best_gt] = true;
      outcome.status = MatchStatus::kTruePositive;
      outcome.instance_id = gt[*best_gt].id;
    } else {
      for (const auto& inst : gt) {
        if (inst.ignore && iou(det.bbox, inst.bbox) >= iou_threshold) {
          outcome.status = MatchStatus::kIgnored;
          break;
        }
      }
    }
    result.outcomes.push_back(std::move(outcome));
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt[g].ignore && !taken[g]) result.missed.push_back(gt[g].id);
  }
  return result;
}

}  // namespace

MatchResult match(const Dataset& dataset, std::span<const Detection> detections,
                  double iou_threshold, unsigned jobs) {
  std::map<std::string_view, std::size_t> image_index;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    image_index.emplace(dataset.images[i].image_id, i);
  }
  std::vector<std::vector<std::size_t>> per_image(dataset.images.size());
  for (std::size_t d = 0; d < detections.size(); ++d) {
    auto it = image_index.find(detections[d].image_id);
    if (it == image_index.end()) {
      throw ValidationError("detection " + std::to_string(d) +
                            " refers to unknown image_id " +
                            detections[d].image_id);
    }
    per_image[it->second].push_back(d);
  }

  MatchResult result;
  result.images.resize(dataset.images.size());
  parallel_for(dataset.images.size(), jobs, [&](std::size_t i) {
    result.images[i] = match_image(dataset.images[i], detections,
                                   std::move(per_image[i]), iou_threshold);
  });
  for (const auto& image : dataset.images) {
    for (const auto& inst : image.instances) {
      if (!inst.ignore) ++result.gt_count;
    }
  }
  return result;
}

MrFppiCurve curve_from_match(const MatchResult& result,
                             std::size_t image_count) {
  if (result.gt_count == 0) {
    throw DomainError("miss rate is undefined without non-ignore ground truth");
  }
  if (image_count == 0) throw DomainError("FPPI is undefined without images");

  struct Event {
    double confidence;
    bool tp;
    bool fp;
  };
  std::vector<Event> events;
  for (const auto& image : result.images) {
    for (const auto& outcome : image.outcomes) {
      events.push_back({outcome.confidence,
                        outcome.status == MatchStatus::kTruePositive,
                        outcome.status == MatchStatus::kFalsePositive});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.confidence > b.confidence;
  });

  const double images = static_cast<double>(image_count);
  const double gt = static_cast<double>(result.gt_count);
  MrFppiCurve curve;
  curve.points.push_back({0.0, 1.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < events.size();) {
    double cutoff = events[i].confidence;
    for (; i < events.size() && events[i].confidence == cutoff; ++i) {
      tp += events[i].tp;
      fp += events[i].fp;
    }
    CurvePoint point{static_cast<double>(fp) / images,
                     static_cast<double>(result.gt_count - tp) / gt};
    CurvePoint& last = curve.points.back();
    if (point.fppi == last.fppi) {
      last.miss_rate = std::min(last.miss_rate, point.miss_rate);
    } else {
      curve.points.push_back(point);
    }
  }
  return curve;
}

MrFppiCurve mr_fppi_curve(const Dataset& dataset,
                          std::span<const Detection> detections,
                          double iou_threshold, unsigned jobs) {
  return curve_from_match(match(dataset, detections, iou_threshold, jobs),
                          dataset.images.size());
}

Lamr lamr(const MrFppiCurve& curve, const LamrOptions& options) {
  if (curve.points.empty()) throw DomainError("LAMR of an empty curve");
  if (options.samples < 1 || !(options.min_fppi > 0.0) ||
      options.max_fppi < options.min_fppi || !(options.floor > 0.0)) {
    throw DomainError("invalid LAMR sampling options");
  }
  const double lo = std::log10(options.min_fppi);
  const double hi = std::log10(options.max_fppi);
  const int n = options.samples;

  double log_sum = 0.0;
  bool all_floor = true;
  for (int i = 0; i < n; ++i) {
    double exponent = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    double reference = std::pow(10.0, exponent);
    auto it = std::upper_bound(
        curve.points.begin(), curve.points.end(), reference,
        [](double f, const CurvePoint& p) { return f < p.fppi; });
    double sample = it == curve.points.begin() ? 1.0 : std::prev(it)->miss_rate;
    if (sample <= 0.0) {
      sample = options.floor;
    } else {
      all_floor = false;
    }
    log_sum += std::log(sample);
  }
  if (all_floor) return Lamr{options.floor, true};
  double value = std::exp(log_sum / n);
  return Lamr{std::clamp(value, options.floor, 1.0), false};
}

PrecisionRecall prf_from_counts(const MatchCounts& counts) {
  PrecisionRecall out;
  out.counts = counts;
  std::size_t kept = counts.tp + counts.fp;
  if (kept == 0) {
    out.precision = 1.0;
    out.precision_degenerate = true;
  } else {
    out.precision = static_cast<double>(counts.tp) / static_cast<double>(kept);
  }
  std::size_t positives = counts.tp + counts.fn;
  if (positives == 0) {
    throw DomainError("recall is undefined without non-ignore ground truth");
  }
  out.recall = static_cast<double>(counts.tp) / static_cast<double>(positives);
  double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

PrecisionRecall prf(const Dataset& dataset,
                    std::span<const Detection> detections, double iou_threshold,
                    double confidence_threshold, unsigned jobs) {
  std::vector<Detection> kept;
  for (const auto& det : detections) {
    if (det.confidence >= confidence_threshold) kept.push_back(det);
  }
  return prf_from_counts(match(dataset, kept, iou_threshold, jobs).counts());
}

std::optional<double> last_pruning_threshold(
    std::span<const json> provenance) {
  for (auto it = provenance.rbegin(); it != provenance.rend(); ++it) {
    if (it->is_object() && it->value("op", "") == "prune") {
      auto t = it->find("threshold");
      if (t != it->end() && t->is_number()) return t->get<double>();
    }
  }
  return std::nullopt;
}

EvalResult evaluate(const Dataset& dataset,
                    std::span<const Detection> detections,
                    const SubsetSpec& subset, const EvalOptions& options) {
  if (!(options.iou_threshold > 0.0) || options.iou_threshold > 1.0) {
    throw DomainError("IoU threshold must lie in (0, 1]");
  }
  if (!(options.confidence_threshold >= 0.0) ||
      options.confidence_threshold > 1.0) {
    throw DomainError("confidence threshold must lie in [0, 1]");
  }
  std::vector<Detection> evaluated;
  for (const auto& det : detections) {
    if (det.identity == options.identity) evaluated.push_back(det);
  }
  Dataset filtered =
      apply_subset(restrict_to_identity(dataset, options.identity), subset);
  MatchResult matched =
      match(filtered, evaluated, options.iou_threshold, options.jobs);

  EvalResult result;
  result.subset = subset.name;
  result.identity = options.identity;
  result.iou_threshold = options.iou_threshold;
  result.confidence_threshold = options.confidence_threshold;
  result.curve = curve_from_match(matched, filtered.images.size());
  result.lamr = lamr(result.curve, options.lamr);
  result.prf = prf_from_counts(matched.counts(options.confidence_threshold));
  result.dataset_name = dataset.name;
  result.pruning_threshold = last_pruning_threshold(dataset.provenance);
  result.provenance = dataset.provenance;
  return result;
}

json eval_result_to_json(const EvalResult& result) {
  json curve = json::array();
  for (const auto& p : result.curve.points) {
    curve.push_back(json::array({p.fppi, p.miss_rate}));
  }
  const MatchCounts& c = result.prf.counts;
  return json{
      {"subset", result.subset},
      {"identity", result.identity},
      {"iou_threshold", result.iou_threshold},
      {"confidence_threshold", result.confidence_threshold},
      {"lamr", result.lamr.at_floor ? 0.0 : result.lamr.value},
      {"lamr_floor", result.lamr.at_floor},
      {"curve", std::move(curve)},
      {"precision", result.prf.precision},
      {"precision_degenerate", result.prf.precision_degenerate},
      {"recall", result.prf.recall},
      {"f1", result.prf.f1},
      {"tp", c.tp},
      {"fp", c.fp},
      {"fn", c.fn},
      {"ignored", c.ignored},
      {"dataset_provenance",
       json{{"dataset", result.dataset_name},
            {"pruning_threshold", result.pruning_threshold
                                      ? json(*result.pruning_threshold)
                                      : json(nullptr)},
            {"entries", result.provenance}}}};
}

std::string serialize_eval_result(const EvalResult& result) {
  return eval_result_to_json(result).dump(2) + "\n";
}

}  // namespace ambiprune
