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

#include "ambiprune/prune.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "ambiprune/ambiguity.h"
#include "ambiprune/error.h"
#include "ambiprune/eval.h"
#include "ambiprune/parallel.h"

namespace ambiprune {

using nlohmann::json;

std::string_view to_string(PruneMode mode) {
  return mode == PruneMode::kDelete ? "delete" : "ignore";
}

std::optional<PruneMode> prune_mode_from_string(std::string_view text) {
  if (text == "delete") return PruneMode::kDelete;
  if (text == "ignore") return PruneMode::kIgnore;
  return std::nullopt;
}

const TagRemoval& PruneReport::removal(TagFamily family, TagLevel level) const {
  for (const auto& entry : tag_removal) {
    if (entry.family == family && entry.level == level) return entry;
  }
  throw DomainError("report has no entry for tag level");
}

std::vector<const TagRemoval*> PruneReport::over_pruned() const {
  std::vector<const TagRemoval*> flagged;
  for (const auto& entry : tag_removal) {
    if (entry.over_pruned) flagged.push_back(&entry);
  }
  return flagged;
}

std::string pruning_label(double threshold) {
  return fmt::format("Amb {}", threshold);
}

PruneOutcome prune(const Dataset& dataset, double threshold, PruneMode mode,
                   const PruneOptions& options) {
  if (!std::isfinite(threshold) || threshold < 0.0 || threshold > 1.0) {
    throw DomainError("pruning threshold must lie in [0, 1]");
  }
  require_scored(dataset, "prune");

  PruneOutcome outcome;
  outcome.dataset = dataset;
  std::vector<std::vector<std::string>> removed(dataset.images.size());
  parallel_for(dataset.images.size(), options.jobs, [&](std::size_t i) {
    auto& instances = outcome.dataset.images[i].instances;
    std::vector<Instance> survivors;
    for (Instance& inst : instances) {
      bool hit = inst.ambiguity->value() >= threshold;
      if (mode == PruneMode::kDelete) {
        if (hit) {
          removed[i].push_back(inst.id);
        } else {
          survivors.push_back(std::move(inst));
        }
      } else if (hit && !inst.ignore) {
        inst.ignore = true;
        removed[i].push_back(inst.id);
      }
    }
    if (mode == PruneMode::kDelete) instances = std::move(survivors);
  });
  for (auto& ids : removed) {
    for (auto& id : ids) outcome.removed_ids.push_back(std::move(id));
  }
  outcome.dataset.provenance.push_back(json{{"op", "prune"},
                                            {"threshold", threshold},
                                            {"mode", to_string(mode)},
                                            {"label", pruning_label(threshold)},
                                            {"parent", dataset.name}});
  outcome.report = representativeness_report(dataset, outcome.dataset,
                                             options.over_prune_factor);
  return outcome;
}

PruneReport representativeness_report(const Dataset& before,
                                      const Dataset& after,
                                      double over_prune_factor) {
  if (!(over_prune_factor > 0.0)) {
    throw DomainError("over-pruning factor must be positive");
  }
  bool derived = before.name == after.name &&
                 after.provenance.size() >= before.provenance.size() &&
                 std::equal(before.provenance.begin(), before.provenance.end(),
                            after.provenance.begin());
  if (!derived) {
    throw ValidationError("dataset \"" + after.name +
                          "\" is not derived from \"" + before.name +
                          "\" (provenance mismatch)");
  }

  std::map<std::string_view, bool> after_ignore;
  for (const auto& image : after.images) {
    for (const auto& inst : image.instances) {
      after_ignore.emplace(inst.id, inst.ignore);
    }
  }

  PruneReport report;
  report.over_prune_factor = over_prune_factor;
  for (auto it = after.provenance.begin() +
                 static_cast<std::ptrdiff_t>(before.provenance.size());
       it != after.provenance.end(); ++it) {
    if (it->is_object() && it->value("op", "") == "prune") {
      if (auto t = it->find("threshold"); t != it->end() && t->is_number()) {
        report.threshold = t->get<double>();
      }
      report.mode = prune_mode_from_string(it->value("mode", ""));
    }
  }

  std::array<std::array<TagRemoval, kTagLevelCount>, 2> levels{};
  for (TagFamily f : kAllTagFamilies) {
    for (TagLevel l : kAllTagLevels) {
      auto& entry = levels[static_cast<std::size_t>(f)][tag_index(l)];
      entry.family = f;
      entry.level = l;
    }
  }

  std::size_t total = 0;
  std::size_t seen_in_after = 0;
  for (const auto& image : before.images) {
    for (const auto& inst : image.instances) {
      ++total;
      auto it = after_ignore.find(inst.id);
      bool removed = false;
      if (it == after_ignore.end()) {
        removed = true;
      } else {
        ++seen_in_after;
        removed = it->second && !inst.ignore;
      }
      if (removed) ++report.removed;
      for (TagFamily f : kAllTagFamilies) {
        auto& entry = levels[static_cast<std::size_t>(f)][tag_index(inst.tag(f))];
        ++entry.total;
        if (removed) ++entry.removed;
      }
    }
  }
  if (seen_in_after != after_ignore.size()) {
    throw ValidationError("dataset \"" + after.name +
                          "\" contains instances that are not in its parent");
  }
  report.kept = total - report.removed;
  report.removal_rate =
      total > 0 ? static_cast<double>(report.removed) / static_cast<double>(total)
                : 0.0;
  for (auto& family : levels) {
    for (auto& entry : family) {
      if (entry.total > 0) {
        entry.rate = static_cast<double>(entry.removed) /
                     static_cast<double>(entry.total);
      }
      entry.over_pruned =
          entry.removed > 0 && entry.rate > over_prune_factor * report.removal_rate;
      report.tag_removal.push_back(entry);
    }
  }

  auto retained = [](const Dataset& d, const SubsetSpec& spec) {
    std::size_t count = 0;
    for (const auto& image : d.images) {
      for (const auto& inst : image.instances) {
        if (!inst.ignore && spec.keeps(inst)) ++count;
      }
    }
    return count;
  };
  for (const auto& spec : builtin_subsets()) {
    report.subsets.push_back(
        {spec.name, retained(before, spec), retained(after, spec)});
  }
  return report;
}

json prune_report_to_json(const PruneReport& report) {
  json families = json::object();
  for (TagFamily f : kAllTagFamilies) {
    json per_level = json::object();
    for (TagLevel l : kAllTagLevels) {
      const auto& entry = report.removal(f, l);
      per_level[std::string(to_string(l))] =
          json{{"total", entry.total},
               {"removed", entry.removed},
               {"rate", entry.rate},
               {"over_pruned", entry.over_pruned}};
    }
    families[std::string(to_string(f))] = std::move(per_level);
  }
  json subsets = json::object();
  for (const auto& s : report.subsets) {
    subsets[s.subset] = json{{"before", s.before}, {"after", s.after}};
  }
  json flagged = json::array();
  for (const auto* entry : report.over_pruned()) {
    flagged.push_back(std::string(to_string(entry->family)) + ":" +
                      std::string(to_string(entry->level)));
  }
  return json{
      {"threshold", report.threshold ? json(*report.threshold) : json(nullptr)},
      {"mode", report.mode ? json(to_string(*report.mode)) : json(nullptr)},
      {"removed", report.removed},
      {"kept", report.kept},
      {"removal_rate", report.removal_rate},
      {"over_prune_factor", report.over_prune_factor},
      {"tag_removal", std::move(families)},
      {"subset_retention", std::move(subsets)},
      {"over_pruned", std::move(flagged)}};
}

}  // namespace ambiprune
