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

#include "ambiprune/ambiguity.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "ambiprune/error.h"
#include "ambiprune/parallel.h"
#include "json_fields.h"

namespace ambiprune {

using nlohmann::json;

AmbiguityScore ambiguity(const AnnotatorAnswers& answers) {
  if (answers.yes < 0 || answers.no < 0 || answers.unsure < 0) {
    throw DomainError("answer counts must be non-negative");
  }
  const std::int64_t n = answers.total();
  if (n < 1) throw DomainError("ambiguity of an empty answer set");
  const std::int64_t decided = n - answers.unsure;
  if (decided <= 0) return AmbiguityScore(1.0);

  const double gamma =
      1.0 - static_cast<double>(answers.unsure) / static_cast<double>(n);
  // 2 * |yes/d - 1/2| == |yes - no| / d, exact in yes/no swaps
  const double spread = static_cast<double>(std::abs(answers.yes - answers.no)) /
                        static_cast<double>(decided);
  return AmbiguityScore(1.0 - gamma * spread);
}

std::vector<std::string> unscored_instance_ids(const Dataset& dataset) {
  std::vector<std::string> ids;
  for (const auto& image : dataset.images) {
    for (const auto& inst : image.instances) {
      if (!inst.ambiguity) ids.push_back(inst.id);
    }
  }
  return ids;
}

namespace {

std::string list_ids(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 20;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kShown) {
    out += " (+" + std::to_string(ids.size() - kShown) + " more)";
  }
  return out;
}

}  // namespace

void require_scored(const Dataset& dataset, std::string_view operation) {
  auto missing = unscored_instance_ids(dataset);
  if (!missing.empty()) {
    throw ValidationError(std::string(operation) + " needs scored instances; " +
                          std::to_string(missing.size()) +
                          " unscored: " + list_ids(missing));
  }
}

Dataset score_dataset(const Dataset& dataset, const ScoringOptions& options) {
  std::vector<std::string> unscorable;
  for (const auto& image : dataset.images) {
    for (const auto& inst : image.instances) {
      if (!inst.answers && !inst.ambiguity) unscorable.push_back(inst.id);
    }
  }
  if (!unscorable.empty()) {
    throw ValidationError(
        std::to_string(unscorable.size()) +
        " instance(s) have neither answers nor an ambiguity score: " +
        list_ids(unscorable));
  }

  Dataset out = dataset;
  std::vector<std::size_t> computed(out.images.size(), 0);
  parallel_for(out.images.size(), options.jobs, [&](std::size_t i) {
    for (Instance& inst : out.images[i].instances) {
      if (!inst.answers) continue;
      if (inst.ambiguity && !options.overwrite) continue;
      inst.ambiguity = ambiguity(*inst.answers);
      ++computed[i];
    }
  });
  std::size_t total = std::accumulate(computed.begin(), computed.end(),
                                      std::size_t{0});
  out.provenance.push_back(json{{"op", "scored"},
                                {"overwrite", options.overwrite},
                                {"computed", total},
                                {"instances", out.instance_count()}});
  return out;
}

std::vector<ScoreRecord> load_score_file(const std::filesystem::path& path) {
  std::string text = internal::read_text_file(path);
  std::vector<ScoreRecord> records;
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
    ScoreRecord record;
    record.instance_id = internal::require_string(value, "instance_id", ctx);
    if (auto it = value.find("answers"); it != value.end() && !it->is_null()) {
      record.answers = internal::parse_answers(*it, ctx);
    }
    if (auto it = value.find("ambiguity"); it != value.end() && !it->is_null()) {
      double score = internal::require_number(value, "ambiguity", ctx);
      if (score < 0.0 || score > 1.0) {
        throw ValidationError(ctx + ": ambiguity must lie in [0, 1]");
      }
      record.ambiguity = AmbiguityScore(score);
    }
    if (!record.answers && !record.ambiguity) {
      throw ValidationError(ctx + ": record needs \"answers\" or \"ambiguity\"");
    }
    records.push_back(std::move(record));
  }
  return records;
}

Dataset apply_score_records(const Dataset& dataset,
                            std::span<const ScoreRecord> records) {
  Dataset out = dataset;
  std::map<std::string_view, Instance*> by_id;
  for (auto& image : out.images) {
    for (auto& inst : image.instances) by_id.emplace(inst.id, &inst);
  }
  std::set<std::string_view> seen;
  std::vector<std::string> unknown;
  for (const auto& record : records) {
    if (!seen.insert(record.instance_id).second) {
      throw ValidationError("score file lists instance " + record.instance_id +
                            " more than once");
    }
    auto it = by_id.find(record.instance_id);
    if (it == by_id.end()) {
      unknown.push_back(record.instance_id);
      continue;
    }
    if (record.answers) it->second->answers = record.answers;
    if (record.ambiguity) {
      it->second->ambiguity = record.ambiguity;
    } else if (record.answers) {
      // Fresh answers invalidate any previous score.
      it->second->ambiguity.reset();
    }
  }
  if (!unknown.empty()) {
    throw ValidationError("score file references unknown instance(s): " +
                          list_ids(unknown));
  }
  return out;
}

std::size_t AmbiguityHistogram::bin_of(double value) const {
  const std::size_t n = bins();
  auto idx = static_cast<std::size_t>(
      std::clamp(std::floor(value * static_cast<double>(n)), 0.0,
                 static_cast<double>(n - 1)));
  // Agree exactly with the published edges despite rounding in value * n.
  while (idx > 0 && value < bin_edges[idx]) --idx;
  while (idx + 1 < n && value >= bin_edges[idx + 1]) ++idx;
  return idx;
}

AmbiguityHistogram histogram(const Dataset& dataset, std::size_t bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  require_scored(dataset, "histogram");

  AmbiguityHistogram hist;
  hist.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    hist.bin_edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  }
  hist.counts.assign(bins, 0);

  std::array<std::vector<std::array<std::size_t, kTagLevelCount>>, 2> level_counts;
  for (auto& family : level_counts) family.assign(bins, {});

  for (const auto& image : dataset.images) {
    for (const auto& inst : image.instances) {
      std::size_t bin = hist.bin_of(inst.ambiguity->value());
      ++hist.counts[bin];
      for (TagFamily f : kAllTagFamilies) {
        ++level_counts[static_cast<std::size_t>(f)][bin][tag_index(inst.tag(f))];
      }
    }
  }

  for (std::size_t f = 0; f < 2; ++f) {
    hist.proportions[f].assign(bins, TagProportions{});
    std::array<double, kTagLevelCount> best{};
    for (std::size_t b = 0; b < bins; ++b) {
      if (hist.counts[b] == 0) continue;
      for (std::size_t l = 0; l < kTagLevelCount; ++l) {
        double p = static_cast<double>(level_counts[f][b][l]) /
                   static_cast<double>(hist.counts[b]);
        hist.proportions[f][b][l] = p;
        if (level_counts[f][b][l] > 0 && p > best[l]) {
          best[l] = p;
          hist.peak_bin[f][l] = b;
        }
      }
    }
  }
  return hist;
}

json histogram_to_json(const AmbiguityHistogram& hist) {
  json families = json::object();
  json peaks = json::object();
  for (TagFamily f : kAllTagFamilies) {
    json levels = json::object();
    json family_peaks = json::object();
    for (TagLevel level : kAllTagLevels) {
      json series = json::array();
      for (const auto& bin : hist.family(f)) series.push_back(bin[tag_index(level)]);
      levels[std::string(to_string(level))] = std::move(series);
      auto peak = hist.peak(f, level);
      family_peaks[std::string(to_string(level))] =
          peak ? json(*peak) : json(nullptr);
    }
    families[std::string(to_string(f))] = std::move(levels);
    peaks[std::string(to_string(f))] = std::move(family_peaks);
  }
  std::size_t total = std::accumulate(hist.counts.begin(), hist.counts.end(),
                                      std::size_t{0});
  return json{{"bins", hist.bins()},
              {"bin_edges", hist.bin_edges},
              {"counts", hist.counts},
              {"scored", total},
              {"proportions", std::move(families)},
              {"peak_bin", std::move(peaks)}};
}

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

AmbiguitySummary summarize_ambiguity(const Dataset& dataset) {
  AmbiguitySummary summary;
  summary.images = dataset.images.size();
  std::vector<double> values;
  for (const auto& image : dataset.images) {
    for (const auto& inst : image.instances) {
      ++summary.instances;
      if (inst.ambiguity) values.push_back(inst.ambiguity->value());
    }
  }
  summary.scored = values.size();
  if (values.empty()) return summary;
  std::sort(values.begin(), values.end());
  summary.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
  constexpr std::array<double, 5> kLevels = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t i = 0; i < kLevels.size(); ++i) {
    summary.quantiles[i] = interpolated_quantile(values, kLevels[i]);
  }
  return summary;
}

json summary_to_json(const AmbiguitySummary& summary) {
  return json{{"images", summary.images},
              {"instances", summary.instances},
              {"scored", summary.scored},
              {"mean", summary.mean},
              {"quantiles",
               json{{"min", summary.quantiles[0]},
                    {"q25", summary.quantiles[1]},
                    {"median", summary.quantiles[2]},
                    {"q75", summary.quantiles[3]},
                    {"max", summary.quantiles[4]}}}};
}

std::vector<RankedInstance> rank_by_ambiguity(const Dataset& dataset) {
  std::vector<RankedInstance> ranked;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto& instances = dataset.images[i].instances;
    for (std::size_t j = 0; j < instances.size(); ++j) {
      if (instances[j].ambiguity) {
        ranked.push_back({InstanceRef{i, j}, instances[j].ambiguity->value()});
      }
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedInstance& a, const RankedInstance& b) {
                     return a.ambiguity > b.ambiguity;
                   });
  return ranked;
}

}  // namespace ambiprune
