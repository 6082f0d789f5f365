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

#ifndef AMBIPRUNE_AMBIGUITY_H_
#define AMBIPRUNE_AMBIGUITY_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ambiprune/annotation.h"
#include "json.hpp"

namespace ambiprune {

// Disagreement-based ambiguity of one instance.
//
// With n = yes + no + unsure and decided = n - unsure:
//   decided > 0:  1 - (1 - unsure / n) * 2 * |yes / decided - 1/2|
//   otherwise:    1
// so a unanimous vote scores 0, and an even split or an all-"?" vote scores 1.
// Throws DomainError for an empty answer set.
AmbiguityScore ambiguity(const AnnotatorAnswers& answers);

struct ScoringOptions {
  // Recompute instances that already carry a score when they have answers.
  bool overwrite = false;
  unsigned jobs = 1;
};

// Fills in ambiguity from answers. Instances without answers keep their
// imported score; an instance with neither is a ValidationError naming it.
// Appends a {"op": "scored"} provenance entry.
Dataset score_dataset(const Dataset& dataset,
                      const ScoringOptions& options = {});

// One line of a score import file: either answers, a precomputed score, or
// both.
struct ScoreRecord {
  std::string instance_id;
  std::optional<AnnotatorAnswers> answers;
  std::optional<AmbiguityScore> ambiguity;

  bool operator==(const ScoreRecord&) const = default;
};

std::vector<ScoreRecord> load_score_file(const std::filesystem::path& path);

// Attaches records to instances by id. Unknown or repeated ids are
// ValidationErrors.
Dataset apply_score_records(const Dataset& dataset,
                            std::span<const ScoreRecord> records);

std::vector<std::string> unscored_instance_ids(const Dataset& dataset);
// Throws ValidationError listing (up to 20) unscored instance ids.
void require_scored(const Dataset& dataset, std::string_view operation);

inline constexpr std::size_t kDefaultHistogramBins = 20;

using TagProportions = std::array<double, kTagLevelCount>;

// Equal-width bins over [0, 1]; bin i is [edge_i, edge_i+1) except the last,
// which is closed at 1.
struct AmbiguityHistogram {
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
  // proportions[family][bin][level]: fraction of the bin's instances carrying
  // that level. All zero for an empty bin.
  std::array<std::vector<TagProportions>, 2> proportions;
  // Bin where each level's proportion peaks (lowest bin on ties); nullopt if
  // no instance carries the level.
  std::array<std::array<std::optional<std::size_t>, kTagLevelCount>, 2>
      peak_bin;

  std::size_t bins() const { return counts.size(); }
  std::size_t bin_of(double value) const;
  const std::vector<TagProportions>& family(TagFamily f) const {
    return proportions[static_cast<std::size_t>(f)];
  }
  std::optional<std::size_t> peak(TagFamily f, TagLevel level) const {
    return peak_bin[static_cast<std::size_t>(f)][tag_index(level)];
  }
};

AmbiguityHistogram histogram(const Dataset& dataset,
                             std::size_t bins = kDefaultHistogramBins);
nlohmann::json histogram_to_json(const AmbiguityHistogram& hist);

struct AmbiguitySummary {
  std::size_t images = 0;
  std::size_t instances = 0;
  std::size_t scored = 0;
  double mean = 0.0;
  // Minimum, lower quartile, median, upper quartile, maximum (linear
  // interpolation between order statistics). Zero when nothing is scored.
  std::array<double, 5> quantiles{};
};

AmbiguitySummary summarize_ambiguity(const Dataset& dataset);
nlohmann::json summary_to_json(const AmbiguitySummary& summary);

struct RankedInstance {
  InstanceRef ref;
  double ambiguity = 0.0;
};

// Scored instances by descending ambiguity; ties keep dataset order.
std::vector<RankedInstance> rank_by_ambiguity(const Dataset& dataset);

}  // namespace ambiprune

#endif  // AMBIPRUNE_AMBIGUITY_H_
