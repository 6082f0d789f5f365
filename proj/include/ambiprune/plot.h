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

#ifndef AMBIPRUNE_PLOT_H_
#define AMBIPRUNE_PLOT_H_

#include <string>

#include "ambiprune/ambiguity.h"

namespace ambiprune {

// One row per bin: edges, count, then the proportion of every occlusion and
// truncation level.
std::string histogram_csv(const AmbiguityHistogram& hist);

// Stacked bars of tag-level proportions per ambiguity bin, one panel per tag
// family. Static SVG with no scripts.
std::string histogram_svg(const AmbiguityHistogram& hist);

}  // namespace ambiprune

#endif  // AMBIPRUNE_PLOT_H_
