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

#ifndef AMBIPRUNE_IMAGE_CROP_H_
#define AMBIPRUNE_IMAGE_CROP_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ambiprune/annotation.h"

namespace ambiprune {

struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }

  bool operator==(const PixelRect&) const = default;
};

// The box grown by pad_fraction of its width (height) on the left and right
// (top and bottom), rounded outwards to whole pixels and clamped to the image.
PixelRect padded_crop_rect(const BoundingBox& box, int image_width,
                           int image_height, double pad_fraction = 0.2);

// 8-bit RGBA, row-major.
struct RgbaImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// PNG only. Throws IoError when the file cannot be read or decoded.
RgbaImage read_png(const std::filesystem::path& path);
RgbaImage decode_png(const std::string& bytes);
std::string encode_png(const RgbaImage& image);
RgbaImage crop(const RgbaImage& image, const PixelRect& rect);

}  // namespace ambiprune

#endif  // AMBIPRUNE_IMAGE_CROP_H_
