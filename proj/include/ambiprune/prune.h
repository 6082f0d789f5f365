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

#ifndef AMBIPRUNE_PRUNE_H_
#define AMBIPRUNE_PRUNE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ambiprune/annotation.h"
#include "json.hpp"

namespace ambiprune {

enum class PruneMode { kDelete, kIgnore };

std::string_view to_string(PruneMode mode);
std::optional<PruneMode> prune_mode_from_string(std::string_view text);

struct TagRemoval {
  TagFamily family = TagFamily::kOcclusion;
  TagLevel level = TagLevel::kNone;
  std::size_t total = 0;
  std::size_t removed = 0;
  double rate = 0.0;
  // rate exceeds over_prune_factor times the overall removal rate.
  bool over_pruned = false;
};

// Non-ignore instances each built-in subset keeps, before and after.
struct SubsetRetention {
  std::string subset;
  std::size_t before = 0;
  std::size_t after = 0;
};

struct PruneReport {
  std::optional<double> threshold;
  std::optional<PruneMode> mode;
  std::size_t removed = 0;
  std::size_t kept = 0;
  double removal_rate = 0.0;
  double over_prune_factor = 2.0;
  // One entry per (family, level), occlusion first, levels ascending.
  std::vector<TagRemoval> tag_removal;
  std::vector<SubsetRetention> subsets;

  const TagRemoval& removal(TagFamily family, TagLevel level) const;
  std::vector<const TagRemoval*> over_pruned() const;
};

struct PruneOptions {
  double over_prune_factor = 2.0;
  unsigned jobs = 1;
};

struct PruneOutcome {
  Dataset dataset;
  PruneReport report;
  std::vector<std::string> removed_ids;  // dataset order
};

// Deletes or ignore-flags every instance with ambiguity >= threshold. Images
// are kept even when left empty. In ignore mode an instance that was already
// ignored does not count as removed. Appends {"op": "prune", ...} with the
// "Amb <threshold>" label to the provenance.
//
// Unscored instances are a ValidationError; a threshold outside [0, 1] is a
// DomainError.
PruneOutcome prune(const Dataset& dataset, double threshold, PruneMode mode,
                   const PruneOptions& options = {});

// An instance counts as removed when it is gone from `after`, or ignored there
// but not in `before`. `after` must share the name of `before` and extend its
// provenance, otherwise ValidationError.
PruneReport representativeness_report(const Dataset& before,
                                      const Dataset& after,
                                      double over_prune_factor = 2.0);

// "Amb 0.65"
std::string pruning_label(double threshold);

nlohmann::json prune_report_to_json(const PruneReport& report);

}  // namespace ambiprune

#endif  // AMBIPRUNE_PRUNE_H_
