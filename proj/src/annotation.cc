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

#include "ambiprune/annotation.h"

#include <cmath>

#include "ambiprune/error.h"

namespace ambiprune {

bool BoundingBox::is_valid() const {
  return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
         std::isfinite(y1) && x1 > x0 && y1 > y0;
}

std::string_view to_string(TagLevel level) {
  switch (level) {
    case TagLevel::kNone:
      return "none";
    case TagLevel::kGt10:
      return "gt10";
    case TagLevel::kGt40:
      return "gt40";
    case TagLevel::kGt80:
      return "gt80";
  }
  return "none";
}

std::optional<TagLevel> tag_level_from_string(std::string_view text) {
  for (TagLevel level : kAllTagLevels) {
    if (to_string(level) == text) return level;
  }
  return std::nullopt;
}

std::string_view to_string(TagFamily family) {
  return family == TagFamily::kOcclusion ? "occlusion" : "truncation";
}

AmbiguityScore::AmbiguityScore(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw DomainError("ambiguity score must lie in [0, 1], got " +
                      std::to_string(value));
  }
}

std::size_t Dataset::instance_count() const {
  std::size_t count = 0;
  for (const auto& image : images) count += image.instances.size();
  return count;
}

}  // namespace ambiprune
