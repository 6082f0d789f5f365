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

#ifndef AMBIPRUNE_DATASET_IO_H_
#define AMBIPRUNE_DATASET_IO_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ambiprune/annotation.h"
#include "json.hpp"

namespace ambiprune {

enum class DatasetFormat { kNative, kEcp };

std::optional<DatasetFormat> dataset_format_from_string(std::string_view text);

// Non-fatal findings while loading. Each is also logged as a warning.
struct LoadWarnings {
  std::size_t clamped_boxes = 0;
  std::size_t unknown_fields = 0;
  // Instances whose stored ambiguity disagrees with their answers.
  std::size_t stale_scores = 0;
  std::size_t unmapped_tags = 0;
};

// Native: one JSON file. ECP: a directory of per-image JSON files (searched
// recursively, sorted by path) or a single per-image file.
//
// Boxes overflowing the image are clamped to its bounds. Boxes with
// non-positive extent, duplicate image or instance ids, and scores outside
// [0, 1] are ValidationErrors; JSON syntax errors are ParseErrors carrying
// file and line.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     LoadWarnings* warnings = nullptr);

// The native document model, shared by the loader and the HTTP layer.
Dataset dataset_from_json(const nlohmann::json& document,
                          std::string_view source,
                          LoadWarnings* warnings = nullptr);
nlohmann::json dataset_to_json(const Dataset& dataset);

// Deterministic text: sorted keys, instance order preserved, trailing newline.
std::string serialize_dataset(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Checks every invariant that load_dataset enforces, without clamping.
void validate_dataset(const Dataset& dataset);

// ECP tag string -> (family, level); nullopt for tags outside the table.
std::optional<std::pair<TagFamily, TagLevel>> ecp_tag_level(
    std::string_view tag);

// JSON-lines, one detection per line; blank lines are skipped. A missing
// "identity" defaults to kDefaultIdentity.
std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       LoadWarnings* warnings = nullptr);
std::string serialize_detections(std::span<const Detection> detections);

inline constexpr std::string_view kDefaultIdentity = "pedestrian";

}  // namespace ambiprune

#endif  // AMBIPRUNE_DATASET_IO_H_
