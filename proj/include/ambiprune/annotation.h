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

#ifndef AMBIPRUNE_ANNOTATION_H_
#define AMBIPRUNE_ANNOTATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ambiprune {

// Axis-aligned box in pixel coordinates, origin at the top-left corner.
struct BoundingBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  // Strictly positive extent and finite coordinates.
  bool is_valid() const;

  bool operator==(const BoundingBox&) const = default;
};

// Answers to "is this a human being?" collected from several annotators.
struct AnnotatorAnswers {
  std::int64_t yes = 0;
  std::int64_t no = 0;
  std::int64_t unsure = 0;

  std::int64_t total() const { return yes + no + unsure; }

  bool operator==(const AnnotatorAnswers&) const = default;
};

// Ordered categorical "hidden/cut off by more than X%" level. Occlusion and
// truncation share the same scale; TagFamily says which one is meant.
enum class TagLevel : std::uint8_t { kNone = 0, kGt10 = 1, kGt40 = 2, kGt80 = 3 };
enum class TagFamily : std::uint8_t { kOcclusion = 0, kTruncation = 1 };

inline constexpr std::size_t kTagLevelCount = 4;
inline constexpr std::array<TagLevel, kTagLevelCount> kAllTagLevels = {
    TagLevel::kNone, TagLevel::kGt10, TagLevel::kGt40, TagLevel::kGt80};
inline constexpr std::array<TagFamily, 2> kAllTagFamilies = {
    TagFamily::kOcclusion, TagFamily::kTruncation};

inline std::size_t tag_index(TagLevel level) {
  return static_cast<std::size_t>(level);
}

// "none", "gt10", "gt40", "gt80".
std::string_view to_string(TagLevel level);
std::optional<TagLevel> tag_level_from_string(std::string_view text);
std::string_view to_string(TagFamily family);

// Ambiguity of an instance, always inside [0, 1].
class AmbiguityScore {
 public:
  // Throws DomainError when value is not a finite number in [0, 1].
  explicit AmbiguityScore(double value);

  double value() const { return value_; }

  bool operator==(const AmbiguityScore&) const = default;
  auto operator<=>(const AmbiguityScore&) const = default;

 private:
  double value_;
};

struct Instance {
  std::string id;
  BoundingBox bbox;
  std::string identity;
  TagLevel occlusion = TagLevel::kNone;
  TagLevel truncation = TagLevel::kNone;
  std::optional<AnnotatorAnswers> answers;
  std::optional<AmbiguityScore> ambiguity;
  bool ignore = false;
  // Importer tags that have no TagLevel mapping, kept verbatim.
  std::vector<std::string> raw_tags;

  TagLevel tag(TagFamily family) const {
    return family == TagFamily::kOcclusion ? occlusion : truncation;
  }

  bool operator==(const Instance&) const = default;
};

struct ImageRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<Instance> instances;
  std::optional<std::string> image_path;

  bool operator==(const ImageRecord&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<ImageRecord> images;
  // Free-form entries, one per operation applied (import, scoring, pruning).
  std::vector<nlohmann::json> provenance;

  std::size_t instance_count() const;

  bool operator==(const Dataset&) const = default;
};

struct Detection {
  std::string image_id;
  BoundingBox bbox;
  double confidence = 0.0;
  std::string identity;

  bool operator==(const Detection&) const = default;
};

// Position of an instance inside a Dataset.
struct InstanceRef {
  std::size_t image = 0;
  std::size_t instance = 0;

  bool operator==(const InstanceRef&) const = default;
};

inline const Instance& resolve(const Dataset& dataset, InstanceRef ref) {
  return dataset.images[ref.image].instances[ref.instance];
}

}  // namespace ambiprune

#endif  // AMBIPRUNE_ANNOTATION_H_
