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

#include <functional>
#include <string>

#include <gtest/gtest.h>

#include "ambiprune/ambiguity.h"
#include "ambiprune/dataset_io.h"
#include "ambiprune/error.h"
#include "testing/fixtures.h"

namespace ambiprune {
namespace {

using testing::Rng;
using testing::TempDir;
using testing::read_file;
using testing::write_file;

constexpr char kMinimal[] = R"({
  "name": "minimal",
  "images": [
    {"image_id": "img0", "width": 640, "height": 480, "instances": [
      {"id": "p0", "bbox": [10, 20, 50, 120], "identity": "pedestrian",
       "occlusion": "none", "truncation": "none",
       "answers": {"yes": 5, "no": 0, "unsure": 0}, "ignore": false}
    ]}
  ],
  "provenance": []
}
)";

TEST(LoadDataset, MinimalNativeFile) {
  TempDir dir;
  write_file(dir / "d.json", kMinimal);
  Dataset d = load_dataset(dir / "d.json", DatasetFormat::kNative);
  EXPECT_EQ(d.name, "minimal");
  ASSERT_EQ(d.instance_count(), 1u);
  const Instance& inst = d.images[0].instances[0];
  ASSERT_TRUE(inst.answers.has_value());
  EXPECT_EQ(*inst.answers, (AnnotatorAnswers{5, 0, 0}));
  EXPECT_FALSE(inst.ambiguity.has_value());
  EXPECT_EQ(inst.bbox, (BoundingBox{10, 20, 50, 120}));
  EXPECT_DOUBLE_EQ(inst.bbox.height(), 100.0);
  EXPECT_DOUBLE_EQ(inst.bbox.width(), 40.0);
}

TEST(LoadDataset, UnknownIdentityKeptVerbatim) {
  TempDir dir;
  std::string text = kMinimal;
  text.replace(text.find("\"pedestrian\""), 12, "\"wheelchair user\"");
  write_file(dir / "d.json", text);
  Dataset d = load_dataset(dir / "d.json", DatasetFormat::kNative);
  EXPECT_EQ(d.images[0].instances[0].identity, "wheelchair user");
}

TEST(LoadDataset, DegenerateBoxNamesInstance) {
  TempDir dir;
  std::string text = kMinimal;
  text.replace(text.find("[10, 20, 50, 120]"), 17, "[50, 20, 50, 120]");
  write_file(dir / "d.json", text);
  try {
    load_dataset(dir / "d.json", DatasetFormat::kNative);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("p0"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, MalformedJsonCarriesFileAndLine) {
  TempDir dir;
  std::string text = kMinimal;
  // The comma after "pedestrian" goes missing, so the parser stops at the
  // next key on line 6.
  text.replace(text.find("\"identity\": \"pedestrian\","), 25,
               "\"identity\": \"pedestrian\"");
  write_file(dir / "d.json", text);
  try {
    load_dataset(dir / "d.json", DatasetFormat::kNative);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), (dir / "d.json").string());
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(LoadDataset, DuplicateImageIdRejected) {
  Dataset d = testing::make_dataset(
      "dup", {testing::make_image("a", {}), testing::make_image("a", {})});
  EXPECT_THROW(dataset_from_json(dataset_to_json(d), "mem"), ValidationError);
}

TEST(LoadDataset, DuplicateInstanceIdRejected) {
  Dataset d = testing::make_dataset(
      "dup", {testing::make_image("a", {testing::make_instance("x", {0, 0, 5, 5})}),
              testing::make_image("b", {testing::make_instance("x", {0, 0, 5, 5})})});
  EXPECT_THROW(dataset_from_json(dataset_to_json(d), "mem"), ValidationError);
}

TEST(LoadDataset, OverflowingBoxClampedWithWarning) {
  TempDir dir;
  std::string text = kMinimal;
  text.replace(text.find("[10, 20, 50, 120]"), 17, "[-0.5, 20, 640.7, 480.2]");
  write_file(dir / "d.json", text);
  LoadWarnings warnings;
  Dataset d = load_dataset(dir / "d.json", DatasetFormat::kNative, &warnings);
  EXPECT_EQ(warnings.clamped_boxes, 1u);
  EXPECT_EQ(d.images[0].instances[0].bbox, (BoundingBox{0, 20, 640, 480}));
}

TEST(LoadDataset, AmbiguityOutsideUnitIntervalRejected) {
  TempDir dir;
  std::string text = kMinimal;
  text.replace(text.find("\"ignore\""), 8, "\"ambiguity\": 1.5, \"ignore\"");
  write_file(dir / "d.json", text);
  EXPECT_THROW(load_dataset(dir / "d.json", DatasetFormat::kNative),
               ValidationError);
}

TEST(LoadDataset, StaleScoreWarns) {
  TempDir dir;
  std::string text = kMinimal;
  text.replace(text.find("\"ignore\""), 8, "\"ambiguity\": 0.3, \"ignore\"");
  write_file(dir / "d.json", text);
  LoadWarnings warnings;
  Dataset d = load_dataset(dir / "d.json", DatasetFormat::kNative, &warnings);
  EXPECT_EQ(warnings.stale_scores, 1u);
  EXPECT_DOUBLE_EQ(d.images[0].instances[0].ambiguity->value(), 0.3);
}

TEST(LoadDataset, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(load_dataset(dir / "absent.json", DatasetFormat::kNative), IoError);
}

TEST(SaveDataset, RoundTripPreservesStructure) {
  TempDir dir;
  Rng rng(7);
  Dataset d = testing::random_dataset(rng, {.images = 12});
  d.images[0].image_path = "images/img0.png";
  d.images[0].instances[0].raw_tags = {"sitting", "depiction"};
  d.provenance.push_back({{"op", "import"}, {"source", "unit"}});
  d.provenance.push_back({{"op", "prune"}, {"threshold", 0.5}, {"mode", "ignore"}});
  save_dataset(d, dir / "d.json");
  Dataset back = load_dataset(dir / "d.json", DatasetFormat::kNative);
  EXPECT_EQ(back, d);
  EXPECT_EQ(back.provenance, d.provenance);
}

TEST(SaveDataset, ConsecutiveSavesByteIdentical) {
  TempDir dir;
  Rng rng(11);
  Dataset d = testing::random_dataset(rng, {.images = 30});
  save_dataset(d, dir / "a.json");
  save_dataset(load_dataset(dir / "a.json", DatasetFormat::kNative), dir / "b.json");
  std::string a = read_file(dir / "a.json");
  std::string b = read_file(dir / "b.json");
  EXPECT_EQ(std::hash<std::string>{}(a), std::hash<std::string>{}(b));
  EXPECT_EQ(a, b);
}

TEST(SaveDataset, UnwritablePathIsIoError) {
  TempDir dir;
  Dataset d = testing::dataset_with_ambiguities({0.5});
  EXPECT_THROW(save_dataset(d, dir / "no" / "such" / "dir.json"), IoError);
}

TEST(SaveDataset, InvalidDatasetRefused) {
  TempDir dir;
  Dataset d = testing::dataset_with_ambiguities({0.5});
  d.images[0].instances[0].bbox = {5, 5, 5, 9};
  EXPECT_THROW(save_dataset(d, dir / "d.json"), ValidationError);
}

TEST(EcpImport, TagTableIsTotal) {
  const std::pair<const char*, std::pair<TagFamily, TagLevel>> table[] = {
      {"occluded>10", {TagFamily::kOcclusion, TagLevel::kGt10}},
      {"occluded>40", {TagFamily::kOcclusion, TagLevel::kGt40}},
      {"occluded>80", {TagFamily::kOcclusion, TagLevel::kGt80}},
      {"truncated>10", {TagFamily::kTruncation, TagLevel::kGt10}},
      {"truncated>40", {TagFamily::kTruncation, TagLevel::kGt40}},
      {"truncated>80", {TagFamily::kTruncation, TagLevel::kGt80}},
  };
  for (const auto& [text, expected] : table) {
    auto mapped = ecp_tag_level(text);
    ASSERT_TRUE(mapped.has_value()) << text;
    EXPECT_EQ(*mapped, expected) << text;
  }
  EXPECT_FALSE(ecp_tag_level("occluded>50").has_value());
  EXPECT_FALSE(ecp_tag_level("sitting-lying").has_value());
}

constexpr char kEcpImage[] = R"({
  "imagewidth": 1920, "imageheight": 1024,
  "children": [
    {"identity": "pedestrian", "x0": 100, "y0": 200, "x1": 150, "y1": 330,
     "tags": ["occluded>40"]},
    {"identity": "rider", "x0": 400, "y0": 210, "x1": 460, "y1": 350,
     "tags": ["truncated>10", "truncated>80", "sitting-lying"],
     "children": [
       {"identity": "bicycle", "x0": 390, "y0": 280, "x1": 470, "y1": 360}
     ]}
  ]
}
)";

TEST(EcpImport, MapsTagsAndKeepsUnmapped) {
  TempDir dir;
  std::filesystem::create_directories(dir / "city");
  write_file(dir / "city" / "berlin_00001.json", kEcpImage);
  LoadWarnings warnings;
  Dataset d = load_dataset(dir / "city", DatasetFormat::kEcp, &warnings);
  ASSERT_EQ(d.images.size(), 1u);
  const ImageRecord& image = d.images[0];
  EXPECT_EQ(image.image_id, "berlin_00001");
  EXPECT_EQ(image.width, 1920);
  ASSERT_EQ(image.instances.size(), 3u);
  EXPECT_EQ(image.instances[0].occlusion, TagLevel::kGt40);
  EXPECT_EQ(image.instances[0].truncation, TagLevel::kNone);
  EXPECT_EQ(image.instances[1].truncation, TagLevel::kGt80);
  EXPECT_EQ(image.instances[1].raw_tags, std::vector<std::string>{"sitting-lying"});
  EXPECT_EQ(image.instances[2].identity, "bicycle");
  EXPECT_EQ(image.instances[2].occlusion, TagLevel::kNone);
  EXPECT_EQ(warnings.unmapped_tags, 1u);
  ASSERT_FALSE(d.provenance.empty());
  EXPECT_EQ(d.provenance.back()["op"], "import");
}

TEST(EcpImport, RoundTripsThroughNativeFormat) {
  TempDir dir;
  write_file(dir / "img.json", kEcpImage);
  Dataset d = load_dataset(dir / "img.json", DatasetFormat::kEcp);
  save_dataset(d, dir / "native.json");
  Dataset back = load_dataset(dir / "native.json", DatasetFormat::kNative);
  EXPECT_EQ(back, d);
  EXPECT_EQ(back.images[0].instances[0].occlusion, TagLevel::kGt40);
}

TEST(LoadDetections, WellFormedLines) {
  TempDir dir;
  write_file(dir / "d.jsonl",
             R"({"image_id": "a", "bbox": [0, 0, 10, 20], "confidence": 0.9, "identity": "pedestrian"}
{"image_id": "a", "bbox": [5, 5, 15, 25], "confidence": 0.4, "identity": "pedestrian"}

{"image_id": "b", "bbox": [1, 1, 2, 2], "confidence": 1.0, "identity": "rider"}
)");
  auto dets = load_detections(dir / "d.jsonl");
  ASSERT_EQ(dets.size(), 3u);
  EXPECT_EQ(dets[0].image_id, "a");
  EXPECT_DOUBLE_EQ(dets[1].confidence, 0.4);
  EXPECT_EQ(dets[2].identity, "rider");
}

TEST(LoadDetections, ConfidenceAboveOneRejected) {
  TempDir dir;
  write_file(dir / "d.jsonl",
             R"({"image_id": "a", "bbox": [0, 0, 10, 20], "confidence": 1.5, "identity": "pedestrian"})");
  EXPECT_THROW(load_detections(dir / "d.jsonl"), ValidationError);
}

TEST(LoadDetections, EmptyFileIsEmptyList) {
  TempDir dir;
  write_file(dir / "d.jsonl", "");
  EXPECT_TRUE(load_detections(dir / "d.jsonl").empty());
}

TEST(LoadDetections, UnknownFieldsCounted) {
  TempDir dir;
  write_file(dir / "d.jsonl",
             R"({"image_id": "a", "bbox": [0, 0, 10, 20], "confidence": 0.5, "model": "x", "epoch": 3})");
  LoadWarnings warnings;
  auto dets = load_detections(dir / "d.jsonl", &warnings);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(warnings.unknown_fields, 2u);
  EXPECT_EQ(dets[0].identity, "pedestrian");
}

TEST(LoadDetections, BadLineReportsLineNumber) {
  TempDir dir;
  write_file(dir / "d.jsonl",
             "{\"image_id\": \"a\", \"bbox\": [0, 0, 10, 20], \"confidence\": 0.5}\n"
             "{\"image_id\": \"a\", \"bbox\": [0, 0, 10, 20], \n");
  try {
    load_detections(dir / "d.jsonl");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadDetections, SerializeRoundTrip) {
  TempDir dir;
  Rng rng(5);
  Dataset d = testing::random_dataset(rng, {.images = 8});
  auto dets = testing::random_detections(rng, d);
  write_file(dir / "d.jsonl", serialize_detections(dets));
  EXPECT_EQ(load_detections(dir / "d.jsonl"), dets);
}

// Random byte-level and token-level damage to a valid file must end in either
// a valid dataset or a typed library error.
TEST(LoaderFuzz, MutationsLoadOrFailTyped) {
  Rng rng(2024);
  Dataset base = testing::random_dataset(rng, {.images = 3, .max_instances = 3});
  std::string text = serialize_dataset(base);
  const std::string replacements[] = {"-1", "0", "1e308", "null", "\"x\"", "[]",
                                      "{}", "true", "2.5", "-0.0", "1e-320"};
  TempDir dir;
  std::size_t loaded = 0;
  std::size_t rejected = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string mutated = text;
    int edits = static_cast<int>(rng.uniform_int(1, 3));
    for (int e = 0; e < edits; ++e) {
      std::size_t pos = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(mutated.size()) - 1));
      switch (rng.uniform_int(0, 3)) {
        case 0:
          mutated[pos] = static_cast<char>(rng.uniform_int(0, 255));
          break;
        case 1:
          mutated.erase(pos, static_cast<std::size_t>(rng.uniform_int(1, 8)));
          break;
        case 2: {
          // Overwrite a number token.
          std::size_t start = mutated.find_first_of("0123456789", pos);
          if (start == std::string::npos) break;
          std::size_t end = mutated.find_first_not_of("0123456789.e-", start);
          mutated.replace(start, end - start,
                          replacements[rng.uniform_int(0, 10)]);
          break;
        }
        default:
          mutated.insert(pos, replacements[rng.uniform_int(0, 10)]);
      }
      if (mutated.empty()) mutated = "{";
    }
    write_file(dir / "f.json", mutated);
    try {
      Dataset d = load_dataset(dir / "f.json", DatasetFormat::kNative);
      validate_dataset(d);
      for (const auto& image : d.images) {
        for (const auto& inst : image.instances) {
          ASSERT_TRUE(inst.bbox.is_valid());
          ASSERT_GE(inst.bbox.x0, 0.0);
          ASSERT_LE(inst.bbox.x1, image.width);
          ASSERT_GE(inst.bbox.y0, 0.0);
          ASSERT_LE(inst.bbox.y1, image.height);
          if (inst.ambiguity) {
            ASSERT_GE(inst.ambiguity->value(), 0.0);
            ASSERT_LE(inst.ambiguity->value(), 1.0);
          }
        }
      }
      ++loaded;
    } catch (const Error&) {
      ++rejected;
    }
  }
  EXPECT_GT(loaded, 0u);
  EXPECT_GT(rejected, 0u);
}

}  // namespace
}  // namespace ambiprune
