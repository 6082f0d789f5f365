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

#include "testing/fixtures.h"

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ambiprune/ambiguity.h"

namespace ambiprune::testing {

Instance make_instance(std::string id, BoundingBox box,
                       std::optional<double> ambiguity, TagLevel occlusion,
                       TagLevel truncation, std::string identity) {
  Instance inst;
  inst.id = std::move(id);
  inst.bbox = box;
  inst.identity = std::move(identity);
  inst.occlusion = occlusion;
  inst.truncation = truncation;
  if (ambiguity) inst.ambiguity = AmbiguityScore(*ambiguity);
  return inst;
}

ImageRecord make_image(std::string image_id, std::vector<Instance> instances,
                       int width, int height) {
  ImageRecord image;
  image.image_id = std::move(image_id);
  image.width = width;
  image.height = height;
  image.instances = std::move(instances);
  return image;
}

Dataset make_dataset(std::string name, std::vector<ImageRecord> images) {
  Dataset dataset;
  dataset.name = std::move(name);
  dataset.images = std::move(images);
  return dataset;
}

Detection make_detection(std::string image_id, BoundingBox box,
                         double confidence) {
  return Detection{std::move(image_id), box, confidence, "pedestrian"};
}

Dataset dataset_with_ambiguities(const std::vector<double>& values) {
  std::vector<Instance> instances;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double x = 30.0 * static_cast<double>(i);
    instances.push_back(make_instance("inst" + std::to_string(i),
                                      {x, 100, x + 20, 160}, values[i]));
  }
  return make_dataset("amb", {make_image("img", std::move(instances),
                                         static_cast<int>(values.size()) * 30 + 100,
                                         400)});
}

EvalFixture ten_image_fixture() {
  EvalFixture fixture;
  fixture.dataset.name = "ten";
  for (int i = 0; i < 10; ++i) {
    std::string id = "img" + std::to_string(i);
    BoundingBox box{100, 100, 140, 200};
    fixture.dataset.images.push_back(
        make_image(id, {make_instance(id + "/p", box, 0.1)}, 640, 480));
    if (i < 5) fixture.detections.push_back(make_detection(id, box, 0.9));
  }
  fixture.detections.push_back(
      make_detection("img5", BoundingBox{400, 100, 440, 200}, 0.8));
  return fixture;
}

namespace {

double plain_iou(const BoundingBox& a, const BoundingBox& b) {
  double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0 || ih <= 0) return 0.0;
  double inter = iw * ih;
  double uni = (a.x1 - a.x0) * (a.y1 - a.y0) + (b.x1 - b.x0) * (b.y1 - b.y0) - inter;
  return inter / uni;
}

}  // namespace

const std::vector<BoundaryCase>& subset_boundary_cases() {
  using L = TagLevel;
  static const std::vector<BoundaryCase> kCases = {
      // id     h     occlusion truncation  reas.  small  occl.  all
      {"h20", 20, L::kNone, L::kNone, false, false, false, false},
      {"h30", 30, L::kNone, L::kNone, false, true, false, true},
      {"h35", 35, L::kNone, L::kNone, false, true, false, true},
      {"h40", 40, L::kNone, L::kNone, false, true, false, true},
      {"h41", 41, L::kNone, L::kNone, true, true, false, true},
      {"h50-occ10", 50, L::kGt10, L::kNone, true, true, false, true},
      {"h60-trunc10", 60, L::kNone, L::kGt10, true, true, false, true},
      {"h61", 61, L::kNone, L::kNone, true, false, false, true},
      {"h50-occ40", 50, L::kGt40, L::kNone, false, false, true, true},
      {"h41-occ80", 41, L::kGt80, L::kNone, false, false, false, false},
      {"h61-occ40-trunc40", 61, L::kGt40, L::kGt40, false, false, true, true},
      {"h60-trunc80", 60, L::kNone, L::kGt80, false, false, false, false},
  };
  return kCases;
}

Dataset subset_boundary_dataset() {
  std::vector<Instance> instances;
  double x = 10.0;
  for (const auto& c : subset_boundary_cases()) {
    instances.push_back(make_instance(c.id, {x, 100.0, x + 20.0, 100.0 + c.height},
                                      0.5, c.occlusion, c.truncation));
    x += 40.0;
  }
  return make_dataset("boundary", {make_image("img", std::move(instances), 640, 480)});
}

bool expected_membership(const BoundaryCase& c, const std::string& subset) {
  if (subset == "reasonable") return c.reasonable;
  if (subset == "small") return c.small;
  if (subset == "occluded") return c.occluded;
  if (subset == "all") return c.all;
  throw std::invalid_argument("unknown subset " + subset);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

bool Rng::bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

TagLevel Rng::tag() { return kAllTagLevels[uniform_int(0, 3)]; }

Dataset random_dataset(Rng& rng, const RandomDatasetOptions& options) {
  Dataset dataset;
  dataset.name = "random";
  const double size = options.image_size;
  for (std::size_t i = 0; i < options.images; ++i) {
    ImageRecord image;
    image.image_id = "img" + std::to_string(i);
    image.width = options.image_size;
    image.height = options.image_size;
    std::int64_t count = rng.uniform_int(i == 0 ? 1 : 0,
                                         static_cast<std::int64_t>(options.max_instances));
    for (std::int64_t k = 0; k < count; ++k) {
      Instance inst;
      inst.id = image.image_id + "/" + std::to_string(k);
      double w = rng.uniform(8.0, 120.0);
      double h = rng.uniform(15.0, 200.0);
      double x0 = rng.uniform(0.0, size - w);
      double y0 = rng.uniform(0.0, size - h);
      inst.bbox = {x0, y0, x0 + w, y0 + h};
      inst.identity = rng.bernoulli(0.9) ? "pedestrian" : "rider";
      inst.occlusion = rng.tag();
      inst.truncation = rng.tag();
      inst.ignore = rng.bernoulli(options.ignore_probability);
      if (options.with_answers && !rng.bernoulli(options.grid_score_probability)) {
        AnnotatorAnswers answers{rng.uniform_int(0, 10), rng.uniform_int(0, 10),
                                 rng.uniform_int(0, 4)};
        if (answers.total() == 0) answers.yes = 1;
        inst.answers = answers;
        inst.ambiguity = ambiguity(answers);
      } else {
        inst.ambiguity = AmbiguityScore(0.05 * static_cast<double>(rng.uniform_int(0, 20)));
      }
      image.instances.push_back(std::move(inst));
    }
    dataset.images.push_back(std::move(image));
  }
  return dataset;
}

std::vector<Detection> random_detections(Rng& rng, const Dataset& dataset,
                                         double hit_probability,
                                         double false_positives) {
  std::vector<Detection> out;
  auto confidence = [&] { return 0.05 * static_cast<double>(rng.uniform_int(1, 20)); };
  for (const auto& image : dataset.images) {
    for (const auto& inst : image.instances) {
      if (!rng.bernoulli(hit_probability)) continue;
      const BoundingBox& b = inst.bbox;
      double jx = rng.uniform(-0.15, 0.15) * b.width();
      double jy = rng.uniform(-0.15, 0.15) * b.height();
      BoundingBox box{std::max(0.0, b.x0 + jx), std::max(0.0, b.y0 + jy),
                      b.x1 + jx, b.y1 + jy};
      if (!box.is_valid()) box = b;
      out.push_back(Detection{image.image_id, box, confidence(),
                              rng.bernoulli(0.95) ? inst.identity : "rider"});
    }
    std::int64_t fps = rng.uniform_int(0, static_cast<std::int64_t>(2 * false_positives));
    for (std::int64_t k = 0; k < fps; ++k) {
      double w = rng.uniform(10.0, 100.0);
      double h = rng.uniform(20.0, 180.0);
      double x0 = rng.uniform(0.0, image.width - w);
      double y0 = rng.uniform(0.0, image.height - h);
      out.push_back(Detection{image.image_id, {x0, y0, x0 + w, y0 + h},
                              confidence(), "pedestrian"});
    }
  }
  std::shuffle(out.begin(), out.end(), rng.engine());
  return out;
}

SmallImage random_small_image(Rng& rng, const std::string& image_id,
                              std::size_t max_boxes, double ignore_probability) {
  auto random_box = [&] {
    double w = static_cast<double>(rng.uniform_int(20, 60));
    double h = static_cast<double>(rng.uniform_int(20, 60));
    double x = static_cast<double>(rng.uniform_int(0, 100));
    double y = static_cast<double>(rng.uniform_int(0, 100));
    return BoundingBox{x, y, x + w, y + h};
  };
  for (;;) {
    SmallImage image;
    image.image_id = image_id;
    auto gts = rng.uniform_int(0, static_cast<std::int64_t>(max_boxes));
    auto dets = rng.uniform_int(0, static_cast<std::int64_t>(max_boxes));
    for (std::int64_t g = 0; g < gts; ++g) {
      image.ground_truth.push_back(random_box());
      image.ignore.push_back(rng.bernoulli(ignore_probability));
    }
    for (std::int64_t d = 0; d < dets; ++d) {
      BoundingBox box = random_box();
      if (gts > 0 && rng.bernoulli(0.7)) {
        const BoundingBox& g = image.ground_truth[rng.uniform_int(0, gts - 1)];
        double dx = static_cast<double>(rng.uniform_int(-8, 8));
        double dy = static_cast<double>(rng.uniform_int(-8, 8));
        double dw = static_cast<double>(rng.uniform_int(-6, 6));
        box = {g.x0 + dx, g.y0 + dy, g.x1 + dx + dw, g.y1 + dy};
      }
      image.detections.push_back(Detection{
          image_id, box, 0.1 * static_cast<double>(rng.uniform_int(1, 10)),
          "pedestrian"});
    }
    std::vector<double> ious;
    for (const auto& d : image.detections) {
      for (const auto& g : image.ground_truth) {
        double v = plain_iou(d.bbox, g);
        if (v > 0.0) ious.push_back(v);
      }
    }
    std::sort(ious.begin(), ious.end());
    bool distinct = true;
    for (std::size_t i = 1; i < ious.size(); ++i) {
      if (ious[i] - ious[i - 1] < 1e-9) distinct = false;
    }
    if (distinct) return image;
  }
}

Dataset dataset_from_small_images(const std::vector<SmallImage>& images) {
  Dataset dataset;
  dataset.name = "small-images";
  for (std::size_t i = 0; i < images.size(); ++i) {
    ImageRecord record;
    record.image_id = images[i].image_id;
    record.width = 200;
    record.height = 200;
    for (std::size_t g = 0; g < images[i].ground_truth.size(); ++g) {
      Instance inst = make_instance(record.image_id + "/" + std::to_string(g),
                                    images[i].ground_truth[g], 0.0);
      inst.ignore = images[i].ignore[g];
      record.instances.push_back(std::move(inst));
    }
    dataset.images.push_back(std::move(record));
  }
  return dataset;
}

bool non_conflicting(const SmallImage& image, double iou_threshold) {
  std::size_t g_count = image.ground_truth.size();
  std::vector<std::size_t> per_gt(g_count, 0);
  bool dets_single = true;
  for (const auto& d : image.detections) {
    std::size_t candidates = 0;
    for (std::size_t g = 0; g < g_count; ++g) {
      if (image.ignore[g]) continue;
      if (plain_iou(d.bbox, image.ground_truth[g]) >= iou_threshold) {
        ++candidates;
        ++per_gt[g];
      }
    }
    if (candidates > 1) dets_single = false;
  }
  bool gts_single = std::all_of(per_gt.begin(), per_gt.end(),
                                [](std::size_t c) { return c <= 1; });
  return dets_single || gts_single;
}

double ambiguity_oracle(std::int64_t yes, std::int64_t no, std::int64_t unsure) {
  std::int64_t n = yes + no + unsure;
  if (n <= 0) throw std::invalid_argument("empty answer set");
  std::int64_t decided = n - unsure;
  std::int64_t distance = std::llabs(2 * yes - decided);
  return static_cast<double>(n - distance) / static_cast<double>(n);
}


std::size_t oracle_max_tp(const std::vector<BoundingBox>& ground_truth,
                          const std::vector<BoundingBox>& detections,
                          double iou_threshold) {
  std::vector<bool> used(ground_truth.size(), false);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t d) -> std::size_t {
    if (d == detections.size()) return 0;
    std::size_t result = best(d + 1);
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (used[g] || plain_iou(detections[d], ground_truth[g]) < iou_threshold) continue;
      used[g] = true;
      result = std::max(result, 1 + best(d + 1));
      used[g] = false;
    }
    return result;
  };
  return best(0);
}

MatchCounts reference_greedy(const std::vector<BoundingBox>& ground_truth,
                             const std::vector<bool>& ignore,
                             const std::vector<Detection>& detections,
                             double iou_threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });
  std::vector<bool> taken(ground_truth.size(), false);
  MatchCounts counts;
  for (std::size_t d : order) {
    int chosen = -1;
    double chosen_iou = -1.0;
    bool on_ignore = false;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      double v = plain_iou(detections[d].bbox, ground_truth[g]);
      if (v < iou_threshold) continue;
      if (ignore[g]) {
        on_ignore = true;
      } else if (!taken[g] && v > chosen_iou) {
        chosen = static_cast<int>(g);
        chosen_iou = v;
      }
    }
    if (chosen >= 0) {
      taken[static_cast<std::size_t>(chosen)] = true;
      ++counts.tp;
    } else if (on_ignore) {
      ++counts.ignored;
    } else {
      ++counts.fp;
    }
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (!ignore[g] && !taken[g]) ++counts.fn;
  }
  return counts;
}

MrFppiCurve rematch_curve(const Dataset& dataset,
                          const std::vector<Detection>& detections,
                          double iou_threshold) {
  std::set<double, std::greater<>> cutoffs;
  for (const auto& d : detections) cutoffs.insert(d.confidence);
  double images = static_cast<double>(dataset.images.size());
  MrFppiCurve curve;
  curve.points.push_back({0.0, 1.0});
  for (double c : cutoffs) {
    std::vector<Detection> kept;
    for (const auto& d : detections) {
      if (d.confidence >= c) kept.push_back(d);
    }
    MatchResult result = match(dataset, kept, iou_threshold);
    MatchCounts counts = result.counts();
    CurvePoint point{static_cast<double>(counts.fp) / images,
                     static_cast<double>(counts.fn) /
                         static_cast<double>(result.gt_count)};
    if (point.fppi == curve.points.back().fppi) {
      curve.points.back().miss_rate =
          std::min(curve.points.back().miss_rate, point.miss_rate);
    } else {
      curve.points.push_back(point);
    }
  }
  return curve;
}

TempDir::TempDir() {
  std::string pattern =
      (std::filesystem::temp_directory_path() / "ambiprune-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed");
  }
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace ambiprune::testing
