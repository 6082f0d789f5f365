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

#include "json_fields.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ambiprune/error.h"

namespace ambiprune::internal {

namespace {

std::string where(std::string_view context, std::string_view key) {
  std::string out(context);
  out += ": field \"";
  out += key;
  out += "\"";
  return out;
}

}  // namespace

const json& require_member(const json& object, std::string_view key,
                           std::string_view context) {
  if (!object.is_object()) {
    throw ValidationError(std::string(context) + ": expected a JSON object");
  }
  auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(where(context, key) + " is missing");
  }
  return *it;
}

std::string require_string(const json& object, std::string_view key,
                           std::string_view context) {
  const json& value = require_member(object, key, context);
  if (!value.is_string()) {
    throw ValidationError(where(context, key) + " must be a string");
  }
  return value.get<std::string>();
}

double require_number(const json& object, std::string_view key,
                      std::string_view context) {
  const json& value = require_member(object, key, context);
  if (!value.is_number()) {
    throw ValidationError(where(context, key) + " must be a number");
  }
  double number = value.get<double>();
  if (!std::isfinite(number)) {
    throw ValidationError(where(context, key) + " must be finite");
  }
  return number;
}

std::int64_t require_integer(const json& object, std::string_view key,
                             std::string_view context, std::int64_t min,
                             std::int64_t max) {
  const json& value = require_member(object, key, context);
  std::int64_t number = 0;
  if (value.is_number_unsigned()) {
    auto raw = value.get<std::uint64_t>();
    if (raw > static_cast<std::uint64_t>(max)) {
      throw ValidationError(where(context, key) + " is out of range");
    }
    number = static_cast<std::int64_t>(raw);
  } else if (value.is_number_integer()) {
    number = value.get<std::int64_t>();
  } else {
    throw ValidationError(where(context, key) + " must be an integer");
  }
  if (number < min || number > max) {
    throw ValidationError(where(context, key) + " is out of range");
  }
  return number;
}

bool optional_bool(const json& object, std::string_view key, bool fallback,
                   std::string_view context) {
  auto it = object.find(key);
  if (it == object.end()) return fallback;
  if (!it->is_boolean()) {
    throw ValidationError(where(context, key) + " must be a boolean");
  }
  return it->get<bool>();
}

std::optional<std::string> optional_string(const json& object,
                                           std::string_view key,
                                           std::string_view context) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(where(context, key) + " must be a string");
  }
  return it->get<std::string>();
}

BoundingBox parse_bbox(const json& value, std::string_view context) {
  if (!value.is_array() || value.size() != 4) {
    throw ValidationError(std::string(context) +
                          ": bbox must be an array [x0, y0, x1, y1]");
  }
  double coords[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!value[i].is_number()) {
      throw ValidationError(std::string(context) +
                            ": bbox coordinates must be numbers");
    }
    coords[i] = value[i].get<double>();
    if (!std::isfinite(coords[i])) {
      throw ValidationError(std::string(context) +
                            ": bbox coordinates must be finite");
    }
  }
  return BoundingBox{coords[0], coords[1], coords[2], coords[3]};
}

json bbox_to_json(const BoundingBox& box) {
  return json::array({box.x0, box.y0, box.x1, box.y1});
}

AnnotatorAnswers parse_answers(const json& value, std::string_view context) {
  std::string ctx = std::string(context) + ".answers";
  constexpr std::int64_t kMaxCount = std::int64_t{1} << 40;
  AnnotatorAnswers answers{require_integer(value, "yes", ctx, 0, kMaxCount),
                           require_integer(value, "no", ctx, 0, kMaxCount),
                           require_integer(value, "unsure", ctx, 0, kMaxCount)};
  if (answers.total() < 1) {
    throw ValidationError(ctx + ": answer set is empty");
  }
  return answers;
}

json answers_to_json(const AnnotatorAnswers& answers) {
  return json{{"yes", answers.yes},
              {"no", answers.no},
              {"unsure", answers.unsure}};
}

json parse_json_text(std::string_view text, const std::string& file,
                     std::size_t first_line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the last character read.
    std::size_t end =
        std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    auto newlines = std::count(text.begin(), text.begin() + end, '\n');
    throw ParseError(file, first_line + static_cast<std::size_t>(newlines),
                     e.what());
  } catch (const json::exception& e) {
    // number overflow and friends carry no position
    throw ParseError(file, first_line, e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace ambiprune::internal
