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

#include "ambiprune/dataset_io.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <spdlog/spdlog.h>

#include "ambiprune/ambiguity.h"
#include "ambiprune/error.h"
#include "json_fields.h"

namespace ambiprune {

namespace {

using internal::json;

constexpr double kScoreTolerance = 1e-12;

const std::set<std::string, std::less<>> kInstanceKeys = {
    "id",        "bbox",    "identity",  "occlusion", "truncation",
    "answers",   "ambiguity", "ignore",  "raw_tags"};
const std::set<std::string, std::less<>> kImageKeys = {
    "image_id", "width", "height", "image_path", "instances"};
const std::set<std::string, std::less<>> kDetectionKeys = {
    "image_id", "bbox", "confidence", "identity"};

std::size_t count_unknown(const json& object,
                          const std::set<std::string, std::less<>>& known) {
  std::size_t unknown = 0;
  for (const auto& item : object.items()) {
    if (!known.contains(item.key())) ++unknown;
  }
  return unknown;
}

TagLevel parse_tag(const json& object, std::string_view key,
                   std::string_view context) {
  auto it = object.find(key);
  if (it == object.end()) return TagLevel::kNone;
  if (!it->is_string()) {
    throw ValidationError(std::string(context) + ": " + std::string(key) +
                          " must be a string");
  }
  auto level = tag_level_from_string(it->get<std::string>());
  if (!level) {
    throw ValidationError(std::string(context) + ": unknown " +
                          std::string(key) + " level \"" +
                          it->get<std::string>() + "\"");
  }
  return *level;
}

std::optional<AmbiguityScore> parse_score(const json& object,
                                          std::string_view context) {
  auto it = object.find("ambiguity");
  if (it == object.end() || it->is_null()) return std::nullopt;
  double value = internal::require_number(object, "ambiguity", context);
  if (value < 0.0 || value > 1.0) {
    throw ValidationError(std::string(context) +
                          ": ambiguity must lie in [0, 1]");
  }
  return AmbiguityScore(value);
}

Instance parse_instance(const json& value, std::string_view image_context,
                        LoadWarnings& warnings) {
  if (!value.is_object()) {
    throw ValidationError(std::string(image_context) +
                          ": instances must be objects");
  }
  Instance inst;
  inst.id = internal::require_string(value, "id", image_context);
  std::string ctx = "instance " + inst.id;
  inst.bbox = internal::parse_bbox(
      internal::require_member(value, "bbox", ctx), ctx);
  inst.identity = internal::require_string(value, "identity", ctx);
  inst.occlusion = parse_tag(value, "occlusion", ctx);
  inst.truncation = parse_tag(value, "truncation", ctx);
  if (auto it = value.find("answers"); it != value.end() && !it->is_null()) {
    inst.answers = internal::parse_answers(*it, ctx);
  }
  inst.ambiguity = parse_score(value, ctx);
  inst.ignore = internal::optional_bool(value, "ignore", false, ctx);
  if (auto it = value.find("raw_tags"); it != value.end()) {
    if (!it->is_array()) {
      throw ValidationError(ctx + ": raw_tags must be an array of strings");
    }
    for (const auto& tag : *it) {
      if (!tag.is_string()) {
        throw ValidationError(ctx + ": raw_tags must be an array of strings");
      }
      inst.raw_tags.push_back(tag.get<std::string>());
    }
  }
  warnings.unknown_fields += count_unknown(value, kInstanceKeys);
  return inst;
}

// Rejects degenerate boxes, clamps to the image and checks score/answer
// consistency.
void normalize_instances(ImageRecord& image, LoadWarnings& warnings) {
  for (Instance& inst : image.instances) {
    if (!inst.bbox.is_valid()) {
      throw ValidationError("instance " + inst.id +
                            ": bbox must have positive width and height");
    }
    BoundingBox clamped{
        std::clamp(inst.bbox.x0, 0.0, static_cast<double>(image.width)),
        std::clamp(inst.bbox.y0, 0.0, static_cast<double>(image.height)),
        std::clamp(inst.bbox.x1, 0.0, static_cast<double>(image.width)),
        std::clamp(inst.bbox.y1, 0.0, static_cast<double>(image.height))};
    if (clamped != inst.bbox) {
      ++warnings.clamped_boxes;
      if (!clamped.is_valid()) {
        throw ValidationError("instance " + inst.id + ": bbox lies outside image " +
                              image.image_id);
      }
      inst.bbox = clamped;
    }
    if (inst.answers && inst.ambiguity &&
        std::abs(ambiguity(*inst.answers).value() - inst.ambiguity->value()) >
            kScoreTolerance) {
      ++warnings.stale_scores;
    }
  }
}

void check_unique_ids(const Dataset& dataset) {
  std::set<std::string_view> image_ids;
  std::set<std::string_view> instance_ids;
  for (const auto& image : dataset.images) {
    if (!image_ids.insert(image.image_id).second) {
      throw ValidationError("duplicate image_id " + image.image_id);
    }
    for (const auto& inst : image.instances) {
      if (!instance_ids.insert(inst.id).second) {
        throw ValidationError("duplicate instance id " + inst.id);
      }
    }
  }
}

void report(const LoadWarnings& w, std::string_view source) {
  if (w.clamped_boxes > 0) {
    spdlog::warn("{}: clamped {} bounding box(es) to image bounds", source,
                 w.clamped_boxes);
  }
  if (w.unknown_fields > 0) {
    spdlog::warn("{}: ignored {} unknown field(s)", source, w.unknown_fields);
  }
  if (w.stale_scores > 0) {
    spdlog::warn("{}: {} instance(s) carry a score that disagrees with their "
                 "answers; rescore with overwrite to fix",
                 source, w.stale_scores);
  }
  if (w.unmapped_tags > 0) {
    spdlog::warn("{}: kept {} unmapped tag(s) in raw_tags", source,
                 w.unmapped_tags);
  }
}

void accumulate(LoadWarnings& total, const LoadWarnings& part) {
  total.clamped_boxes += part.clamped_boxes;
  total.unknown_fields += part.unknown_fields;
  total.stale_scores += part.stale_scores;
  total.unmapped_tags += part.unmapped_tags;
}

// --- ECP importer -----------------------------------------------------------

struct EcpTagEntry {
  std::string_view tag;
  TagFamily family;
  TagLevel level;
};

constexpr EcpTagEntry kEcpTags[] = {
    {"occluded>10", TagFamily::kOcclusion, TagLevel::kGt10},
    {"occluded>40", TagFamily::kOcclusion, TagLevel::kGt40},
    {"occluded>80", TagFamily::kOcclusion, TagLevel::kGt80},
    {"truncated>10", TagFamily::kTruncation, TagLevel::kGt10},
    {"truncated>40", TagFamily::kTruncation, TagLevel::kGt40},
    {"truncated>80", TagFamily::kTruncation, TagLevel::kGt80},
};

void collect_ecp_children(const json& node, const std::string& image_id,
                          ImageRecord& image, LoadWarnings& warnings) {
  auto it = node.find("children");
  if (it == node.end()) return;
  if (!it->is_array()) {
    throw ValidationError("image " + image_id + ": children must be an array");
  }
  for (const json& child : *it) {
    if (!child.is_object()) {
      throw ValidationError("image " + image_id +
                            ": children must be objects");
    }
    Instance inst;
    inst.id = image_id + "/" + std::to_string(image.instances.size());
    std::string ctx = "instance " + inst.id;
    inst.identity = internal::require_string(child, "identity", ctx);
    inst.bbox = BoundingBox{internal::require_number(child, "x0", ctx),
                            internal::require_number(child, "y0", ctx),
                            internal::require_number(child, "x1", ctx),
                            internal::require_number(child, "y1", ctx)};
    if (auto tags = child.find("tags"); tags != child.end()) {
      if (!tags->is_array()) {
        throw ValidationError(ctx + ": tags must be an array");
      }
      for (const json& tag : *tags) {
        if (!tag.is_string()) {
          throw ValidationError(ctx + ": tags must be strings");
        }
        const auto& text = tag.get_ref<const std::string&>();
        if (auto mapped = ecp_tag_level(text)) {
          TagLevel& slot = mapped->first == TagFamily::kOcclusion
                               ? inst.occlusion
                               : inst.truncation;
          slot = std::max(slot, mapped->second);
        } else {
          inst.raw_tags.push_back(text);
          ++warnings.unmapped_tags;
        }
      }
    }
    image.instances.push_back(std::move(inst));
    collect_ecp_children(child, image_id, image, warnings);
  }
}

ImageRecord load_ecp_image(const std::filesystem::path& file,
                           LoadWarnings& warnings) {
  json doc = internal::parse_json_text(internal::read_text_file(file),
                                       file.string());
  ImageRecord image;
  image.image_id = file.stem().string();
  std::string ctx = "image " + image.image_id;
  image.width = static_cast<int>(
      internal::require_integer(doc, "imagewidth", ctx, 1, 1 << 20));
  image.height = static_cast<int>(
      internal::require_integer(doc, "imageheight", ctx, 1, 1 << 20));
  collect_ecp_children(doc, image.image_id, image, warnings);
  normalize_instances(image, warnings);
  return image;
}

Dataset load_ecp(const std::filesystem::path& path, LoadWarnings& warnings) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(path, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    if (ec) throw IoError("cannot list " + path.string());
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::is_regular_file(path, ec)) {
    files.push_back(path);
  } else {
    throw IoError("no such file or directory: " + path.string());
  }

  Dataset dataset;
  // A trailing separator leaves an empty filename.
  std::filesystem::path named = path.has_filename() ? path : path.parent_path();
  dataset.name = named.stem().string();
  for (const auto& file : files) {
    dataset.images.push_back(load_ecp_image(file, warnings));
  }
  check_unique_ids(dataset);
  dataset.provenance.push_back(
      json{{"op", "import"}, {"format", "ecp"}, {"source", path.string()}});
  return dataset;
}

}  // namespace

std::optional<DatasetFormat> dataset_format_from_string(std::string_view text) {
  if (text == "native") return DatasetFormat::kNative;
  if (text == "ecp") return DatasetFormat::kEcp;
  return std::nullopt;
}

std::optional<std::pair<TagFamily, TagLevel>> ecp_tag_level(
    std::string_view tag) {
  for (const auto& entry : kEcpTags) {
    if (entry.tag == tag) return std::make_pair(entry.family, entry.level);
  }
  return std::nullopt;
}

Dataset dataset_from_json(const json& document, std::string_view source,
                          LoadWarnings* warnings) {
  LoadWarnings local;
  std::string ctx(source);
  try {
    Dataset dataset;
    dataset.name = internal::require_string(document, "name", ctx);
    const json& images = internal::require_member(document, "images", ctx);
    if (!images.is_array()) throw ValidationError(ctx + ": images must be an array");
    for (const json& item : images) {
      ImageRecord image;
      image.image_id = internal::require_string(item, "image_id", ctx);
      std::string image_ctx = "image " + image.image_id;
      image.width = static_cast<int>(
          internal::require_integer(item, "width", image_ctx, 1, 1 << 20));
      image.height = static_cast<int>(
          internal::require_integer(item, "height", image_ctx, 1, 1 << 20));
      image.image_path = internal::optional_string(item, "image_path", image_ctx);
      const json& instances =
          internal::require_member(item, "instances", image_ctx);
      if (!instances.is_array()) {
        throw ValidationError(image_ctx + ": instances must be an array");
      }
      for (const json& inst : instances) {
        image.instances.push_back(parse_instance(inst, image_ctx, local));
      }
      local.unknown_fields += count_unknown(item, kImageKeys);
      normalize_instances(image, local);
      dataset.images.push_back(std::move(image));
    }
    if (auto it = document.find("provenance"); it != document.end()) {
      if (!it->is_array()) {
        throw ValidationError(ctx + ": provenance must be an array");
      }
      dataset.provenance.assign(it->begin(), it->end());
    }
    check_unique_ids(dataset);
    report(local, source);
    if (warnings) accumulate(*warnings, local);
    return dataset;
  } catch (const DomainError& e) {
    throw ValidationError(ctx + ": " + e.what());
  } catch (const json::exception& e) {
    throw ValidationError(ctx + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     LoadWarnings* warnings) {
  if (format == DatasetFormat::kEcp) {
    LoadWarnings local;
    Dataset dataset;
    try {
      dataset = load_ecp(path, local);
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    report(local, path.string());
    if (warnings) accumulate(*warnings, local);
    return dataset;
  }
  json doc = internal::parse_json_text(internal::read_text_file(path),
                                       path.string());
  return dataset_from_json(doc, path.string(), warnings);
}

json dataset_to_json(const Dataset& dataset) {
  json images = json::array();
  for (const auto& image : dataset.images) {
    json instances = json::array();
    for (const auto& inst : image.instances) {
      json out{{"id", inst.id},
               {"bbox", internal::bbox_to_json(inst.bbox)},
               {"identity", inst.identity},
               {"occlusion", to_string(inst.occlusion)},
               {"truncation", to_string(inst.truncation)},
               {"ignore", inst.ignore}};
      if (inst.answers) out["answers"] = internal::answers_to_json(*inst.answers);
      if (inst.ambiguity) out["ambiguity"] = inst.ambiguity->value();
      if (!inst.raw_tags.empty()) out["raw_tags"] = inst.raw_tags;
      instances.push_back(std::move(out));
    }
    json out{{"image_id", image.image_id},
             {"width", image.width},
             {"height", image.height},
             {"instances", std::move(instances)}};
    if (image.image_path) out["image_path"] = *image.image_path;
    images.push_back(std::move(out));
  }
  return json{{"name", dataset.name},
              {"images", std::move(images)},
              {"provenance", dataset.provenance}};
}

std::string serialize_dataset(const Dataset& dataset) {
  return dataset_to_json(dataset).dump(2) + "\n";
}

void validate_dataset(const Dataset& dataset) {
  for (const auto& image : dataset.images) {
    if (image.width < 1 || image.height < 1) {
      throw ValidationError("image " + image.image_id +
                            ": width and height must be positive");
    }
    for (const auto& inst : image.instances) {
      const BoundingBox& b = inst.bbox;
      if (!b.is_valid()) {
        throw ValidationError("instance " + inst.id +
                              ": bbox must have positive width and height");
      }
      if (b.x0 < 0 || b.y0 < 0 || b.x1 > image.width || b.y1 > image.height) {
        throw ValidationError("instance " + inst.id +
                              ": bbox exceeds image bounds");
      }
      if (inst.answers && (inst.answers->yes < 0 || inst.answers->no < 0 ||
                           inst.answers->unsure < 0 ||
                           inst.answers->total() < 1)) {
        throw ValidationError("instance " + inst.id + ": invalid answers");
      }
    }
  }
  check_unique_ids(dataset);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  validate_dataset(dataset);
  internal::write_text_file(path, serialize_dataset(dataset));
}

std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       LoadWarnings* warnings) {
  std::string text = internal::read_text_file(path);
  std::vector<Detection> detections;
  std::size_t unknown = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json value = internal::parse_json_text(line, path.string(), line_no);
    std::string ctx = path.string() + ":" + std::to_string(line_no);
    try {
      Detection det;
      det.image_id = internal::require_string(value, "image_id", ctx);
      det.bbox = internal::parse_bbox(
          internal::require_member(value, "bbox", ctx), ctx);
      if (!det.bbox.is_valid()) {
        throw ValidationError(ctx + ": bbox must have positive width and height");
      }
      det.confidence = internal::require_number(value, "confidence", ctx);
      if (det.confidence < 0.0 || det.confidence > 1.0) {
        throw ValidationError(ctx + ": confidence must lie in [0, 1]");
      }
      det.identity = internal::optional_string(value, "identity", ctx)
                         .value_or(std::string(kDefaultIdentity));
      unknown += count_unknown(value, kDetectionKeys);
      detections.push_back(std::move(det));
    } catch (const json::exception& e) {
      throw ValidationError(ctx + ": " + e.what());
    }
  }
  if (unknown > 0) {
    spdlog::warn("{}: ignored {} unknown field(s)", path.string(), unknown);
  }
  if (warnings) warnings->unknown_fields += unknown;
  return detections;
}

std::string serialize_detections(std::span<const Detection> detections) {
  std::string out;
  for (const auto& det : detections) {
    json line{{"image_id", det.image_id},
              {"bbox", internal::bbox_to_json(det.bbox)},
              {"confidence", det.confidence},
              {"identity", det.identity}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ambiprune
