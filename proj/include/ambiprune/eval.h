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

#ifndef AMBIPRUNE_EVAL_H_
#define AMBIPRUNE_EVAL_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ambiprune/annotation.h"
#include "json.hpp"

namespace ambiprune {

// Height/occlusion/truncation filter over ground truth. Instances outside the
// filter become ignore regions rather than disappearing.
struct SubsetSpec {
  std::string name;
  double min_height = 0.0;
  bool min_height_inclusive = false;
  std::optional<double> max_height;  // inclusive
  TagLevel min_occlusion = TagLevel::kNone;  // inclusive
  TagLevel max_occlusion = TagLevel::kGt80;  // exclusive
  TagLevel max_truncation = TagLevel::kGt80;  // exclusive

  bool keeps(const Instance& instance) const;
};

// reasonable: height > 40, occlusion < 40%, truncation < 40%
// small:      30 <= height <= 60, occlusion < 40%, truncation < 40%
// occluded:   height > 40, 40% <= occlusion < 80%, truncation < 80%
// all:        height > 20, occlusion < 80%, truncation < 80%
std::span<const SubsetSpec> builtin_subsets();
// Throws ValidationError for unknown names.
const SubsetSpec& builtin_subset(std::string_view name);

Dataset apply_subset(const Dataset& dataset, const SubsetSpec& spec);

// Marks every instance whose identity differs from `identity` as ignore.
Dataset restrict_to_identity(const Dataset& dataset, std::string_view identity);

double iou(const BoundingBox& a, const BoundingBox& b);

enum class MatchStatus { kTruePositive, kFalsePositive, kIgnored };

std::string_view to_string(MatchStatus status);

struct DetectionOutcome {
  std::size_t detection = 0;  // index into the evaluated detection list
  double confidence = 0.0;
  std::optional<std::string> instance_id;  // set for true positives
  MatchStatus status = MatchStatus::kFalsePositive;
};

struct ImageMatch {
  std::string image_id;
  // In processing order: descending confidence, ties by input order.
  std::vector<DetectionOutcome> outcomes;
  std::vector<std::string> missed;  // unmatched non-ignore instance ids
};

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t ignored = 0;

  bool operator==(const MatchCounts&) const = default;
};

struct MatchResult {
  std::vector<ImageMatch> images;  // dataset image order

  // Counts over detections with confidence >= min_confidence; FN counts the
  // non-ignore instances those detections leave unmatched.
  MatchCounts counts(double min_confidence = 0.0) const;

  std::size_t gt_count = 0;  // non-ignore instances
};

// Greedy matching per image: each detection, in descending confidence, takes
// the unmatched non-ignore instance with the highest IoU >= threshold (TP);
// failing that it is ignored if it overlaps an ignore instance at IoU >=
// threshold, and a false positive otherwise. Detections naming an unknown
// image are a ValidationError.
MatchResult match(const Dataset& dataset, std::span<const Detection> detections,
                  double iou_threshold, unsigned jobs = 1);

struct CurvePoint {
  double fppi = 0.0;
  double miss_rate = 1.0;

  bool operator==(const CurvePoint&) const = default;
};

// Miss rate against false positives per image, one point per distinct
// confidence cutoff. FPPI strictly increases along the curve and the miss rate
// does not increase; the first point always has FPPI 0.
struct MrFppiCurve {
  std::vector<CurvePoint> points;
};

// Throws DomainError when there is no non-ignore ground truth.
MrFppiCurve mr_fppi_curve(const Dataset& dataset,
                          std::span<const Detection> detections,
                          double iou_threshold, unsigned jobs = 1);
MrFppiCurve curve_from_match(const MatchResult& result, std::size_t image_count);

struct LamrOptions {
  double floor = 1e-10;
  double min_fppi = 1e-2;
  double max_fppi = 1.0;
  int samples = 9;
};

struct Lamr {
  double value = 1.0;
  // Every sample was a zero miss rate, so value is the floor itself.
  bool at_floor = false;
};

// Log-average miss rate: geometric mean of the miss rate sampled at
// log-uniformly spaced FPPI references. Each sample takes the point with the
// largest FPPI not above the reference (1 if none); zeros become the floor.
Lamr lamr(const MrFppiCurve& curve, const LamrOptions& options = {});

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 0.0;
  double f1 = 0.0;
  // No detection survived the cutoff; precision is then reported as 1.
  bool precision_degenerate = false;
  MatchCounts counts;
};

PrecisionRecall prf_from_counts(const MatchCounts& counts);

// Throws DomainError when there is no non-ignore ground truth.
PrecisionRecall prf(const Dataset& dataset,
                    std::span<const Detection> detections, double iou_threshold,
                    double confidence_threshold, unsigned jobs = 1);

struct EvalOptions {
  double iou_threshold = 0.5;
  double confidence_threshold = 0.5;
  std::string identity = std::string("pedestrian");
  unsigned jobs = 1;
  LamrOptions lamr;
};

struct EvalResult {
  std::string subset;
  std::string identity;
  double iou_threshold = 0.5;
  double confidence_threshold = 0.5;
  Lamr lamr;
  MrFppiCurve curve;
  PrecisionRecall prf;
  std::string dataset_name;
  std::optional<double> pruning_threshold;
  std::vector<nlohmann::json> provenance;
};

// Identity restriction, subset filter, matching, curve, LAMR and P/R/F1 at the
// confidence threshold. Only detections of options.identity are evaluated.
EvalResult evaluate(const Dataset& dataset,
                    std::span<const Detection> detections,
                    const SubsetSpec& subset, const EvalOptions& options = {});

nlohmann::json eval_result_to_json(const EvalResult& result);
// The exact bytes written by the CLI and served by the API.
std::string serialize_eval_result(const EvalResult& result);

// Threshold of the most recent prune entry in the provenance, if any.
std::optional<double> last_pruning_threshold(
    std::span<const nlohmann::json> provenance);

}  // namespace ambiprune

#endif  // AMBIPRUNE_EVAL_H_
