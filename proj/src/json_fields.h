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

#ifndef AMBIPRUNE_SRC_JSON_FIELDS_H_
#define AMBIPRUNE_SRC_JSON_FIELDS_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "ambiprune/annotation.h"
#include "json.hpp"

// Typed access to JSON members. Every failure is a ValidationError naming the
// offending field, so malformed-but-parseable files never escape as
// nlohmann::json exceptions.
namespace ambiprune::internal {

using nlohmann::json;

const json& require_member(const json& object, std::string_view key,
                           std::string_view context);
std::string require_string(const json& object, std::string_view key,
                           std::string_view context);
double require_number(const json& object, std::string_view key,
                      std::string_view context);
std::int64_t require_integer(
    const json& object, std::string_view key, std::string_view context,
    std::int64_t min = std::numeric_limits<std::int64_t>::min(),
    std::int64_t max = std::numeric_limits<std::int64_t>::max());
bool optional_bool(const json& object, std::string_view key, bool fallback,
                   std::string_view context);
std::optional<std::string> optional_string(const json& object,
                                           std::string_view key,
                                           std::string_view context);

// [x0, y0, x1, y1]; extent is not checked here.
BoundingBox parse_bbox(const json& value, std::string_view context);
json bbox_to_json(const BoundingBox& box);

// {"yes", "no", "unsure"}, counts >= 0 and total >= 1.
AnnotatorAnswers parse_answers(const json& value, std::string_view context);
json answers_to_json(const AnnotatorAnswers& answers);

// Parses JSON text; syntax errors become ParseError with 1-based line
// numbers offset by first_line - 1.
json parse_json_text(std::string_view text, const std::string& file,
                     std::size_t first_line = 1);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path,
                     std::string_view contents);

}  // namespace ambiprune::internal

#endif  // AMBIPRUNE_SRC_JSON_FIELDS_H_
