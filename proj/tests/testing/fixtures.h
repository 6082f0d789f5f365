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

#ifndef AMBIPRUNE_TESTS_TESTING_FIXTURES_H_
#define AMBIPRUNE_TESTS_TESTING_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ambiprune/annotation.h"
#include "ambiprune/eval.h"

namespace ambiprune::testing {

Instance make_instance(std::string id, BoundingBox box,
                       std::optional<double> ambiguity = std::nullopt,
                       TagLevel occlusion = TagLevel::kNone,
                       TagLevel truncation = TagLevel::kNone,
                       std::string identity = "pedestrian");
ImageRecord make_image(std::string image_id, std::vector<Instance> instances,
                       int width = 1000, int height = 1000);
Dataset make_dataset(std::string name, std::vector<ImageRecord> images);
Detection make_detection(std::string image_id, BoundingBox box,
                         double confidence);

// A single image holding one 20x60 instance per ambiguity value.
Dataset dataset_with_ambiguities(const std::vector<double>& values);

struct EvalFixture {
  Dataset dataset;
  std::vector<Detection> detections;
};

// Ten images with one pedestrian each. Images 0-4 carry an exact detection at
// confidence 0.9, image 5 a false positive at 0.8.
EvalFixture ten_image_fixture();

// Twelve instances crossing box heights 20/30/35/40/41/50/60/61 with
// occlusion and truncation levels, each paired with the subsets that keep it.
struct BoundaryCase {
  std::string id;
  double height;
  TagLevel occlusion;
  TagLevel truncation;
  bool reasonable;
  bool small;
  bool occluded;
  bool all;
};
const std::vector<BoundaryCase>& subset_boundary_cases();
Dataset subset_boundary_dataset();
bool expected_membership(const BoundaryCase& c, const std::string& subset);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  TagLevel tag();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct RandomDatasetOptions {
  std::size_t images = 10;
  std::size_t max_instances = 6;
  int image_size = 640;
  double ignore_probability = 0.1;
  // Instances carry answers (scored from them) instead of a bare score.
  bool with_answers = true;
  // Fraction of instances whose score lands exactly on a multiple of 0.05.
  double grid_score_probability = 0.3;
};

// Scored dataset with random boxes, tags, answers and ignore flags.
Dataset random_dataset(Rng& rng, const RandomDatasetOptions& options);

// Jittered copies of some instances plus random false positives; confidences
// drawn from a coarse grid so ties occur.
std::vector<Detection> random_detections(Rng& rng, const Dataset& dataset,
                                         double hit_probability = 0.7,
                                         double false_positives = 1.5);

// One image with at most max_boxes ground truth boxes and detections, where
// every nonzero detection/ground-truth IoU is distinct.
struct SmallImage {
  std::string image_id;
  std::vector<BoundingBox> ground_truth;
  std::vector<bool> ignore;
  std::vector<Detection> detections;
};
SmallImage random_small_image(Rng& rng, const std::string& image_id,
                              std::size_t max_boxes = 4,
                              double ignore_probability = 0.0);
Dataset dataset_from_small_images(const std::vector<SmallImage>& images);

// Every ground truth box is a candidate (IoU >= threshold) of at most one
// detection, or every detection has at most one candidate ground truth box.
// Greedy matching is optimal on such images.
bool non_conflicting(const SmallImage& image, double iou_threshold);

// Exact rational form: (n - |2*yes - decided|) / n with decided = n - unsure.
double ambiguity_oracle(std::int64_t yes, std::int64_t no, std::int64_t unsure);

// Largest number of (detection, ground truth) pairs with IoU >= threshold such
// that nobody is used twice, by exhaustive search over assignments.
std::size_t oracle_max_tp(const std::vector<BoundingBox>& ground_truth,
                          const std::vector<BoundingBox>& detections,
                          double iou_threshold);

// Straight loop transcription of the greedy rule, used as a second opinion.
MatchCounts reference_greedy(const std::vector<BoundingBox>& ground_truth,
                             const std::vector<bool>& ignore,
                             const std::vector<Detection>& detections,
                             double iou_threshold);

// Curve obtained by re-running match() from scratch for every distinct
// confidence cutoff.
MrFppiCurve rematch_curve(const Dataset& dataset,
                          const std::vector<Detection>& detections,
                          double iou_threshold);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ambiprune::testing

#endif  // AMBIPRUNE_TESTS_TESTING_FIXTURES_H_
