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

#ifndef AMBIPRUNE_CLI_H_
#define AMBIPRUNE_CLI_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ambiprune/dataset_io.h"
#include "ambiprune/prune.h"

namespace ambiprune::cli {

struct RunConfig {
  std::filesystem::path input;
  DatasetFormat format = DatasetFormat::kNative;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> scores;
  std::optional<std::filesystem::path> detections;
  std::optional<std::filesystem::path> report;
  std::optional<double> threshold;
  PruneMode mode = PruneMode::kIgnore;
  std::string subset = "reasonable";
  std::string identity = "pedestrian";
  double iou = 0.5;
  double conf = 0.5;
  std::size_t bins = 20;
  std::size_t top = 10;
  unsigned jobs = 0;
  bool overwrite = false;
  double over_prune_factor = 2.0;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> cors_origin;
  std::optional<std::filesystem::path> static_dir;
};

// Exit codes: 0 success, 1 validation or domain error, 2 I/O error.
// Messages for failures go to `err`.

// Loads, optionally imports a score file, scores and writes the dataset.
int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err);
// Writes histogram.json, tag_proportions.csv and tag_proportions.svg into the
// output directory and lists the most ambiguous instances.
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);
// Writes the pruned dataset and its representativeness report.
int cmd_prune(const RunConfig& config, std::ostream& out, std::ostream& err);
// Writes the evaluation result JSON and prints a one-line summary.
int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
// Serves the HTTP API until SIGINT or SIGTERM.
int cmd_serve(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses `ambiprune <command> [flags]` (args excludes the program name) and
// dispatches. Reads AMBIPRUNE_LOG for the log level.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace ambiprune::cli

#endif  // AMBIPRUNE_CLI_H_
