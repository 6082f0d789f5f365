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

#include <gtest/gtest.h>

#include "ambiprune/error.h"
#include "ambiprune/image_crop.h"
#include "testing/fixtures.h"

namespace ambiprune {
namespace {

RgbaImage gradient(int width, int height) {
  RgbaImage image{width, height, {}};
  image.pixels.resize(static_cast<std::size_t>(width) * height * 4);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::size_t i = (static_cast<std::size_t>(y) * width + x) * 4;
      image.pixels[i] = static_cast<std::uint8_t>(x);
      image.pixels[i + 1] = static_cast<std::uint8_t>(y);
      image.pixels[i + 2] = static_cast<std::uint8_t>(x ^ y);
      image.pixels[i + 3] = 255;
    }
  }
  return image;
}

TEST(CropRect, PaddedByFifthOfSize) {
  PixelRect r = padded_crop_rect({50, 50, 100, 100}, 1000, 1000);
  EXPECT_EQ(r, (PixelRect{40, 40, 110, 110}));
  EXPECT_EQ(r.width(), 70);
  EXPECT_EQ(r.height(), 70);
}

TEST(CropRect, ClampedToImage) {
  PixelRect r = padded_crop_rect({10, 20, 60, 120}, 200, 200);
  EXPECT_EQ(r.width(), 70);
  EXPECT_EQ(r.height(), 140);
  r = padded_crop_rect({150, 150, 200, 200}, 200, 200);
  EXPECT_EQ(r, (PixelRect{140, 140, 200, 200}));
}

TEST(CropRect, FractionalBoxRoundsOutwards) {
  PixelRect r = padded_crop_rect({10.5, 10.5, 20.5, 30.5}, 100, 100);
  EXPECT_EQ(r, (PixelRect{8, 6, 23, 35}));
}

TEST(Png, EncodeDecodeRoundTrip) {
  RgbaImage image = gradient(37, 23);
  RgbaImage back = decode_png(encode_png(image));
  EXPECT_EQ(back.width, 37);
  EXPECT_EQ(back.height, 23);
  EXPECT_EQ(back.pixels, image.pixels);
}

TEST(Png, CropCopiesPixels) {
  RgbaImage image = gradient(100, 80);
  RgbaImage part = crop(image, {10, 20, 30, 25});
  ASSERT_EQ(part.width, 20);
  ASSERT_EQ(part.height, 5);
  EXPECT_EQ(part.pixels[0], 10);
  EXPECT_EQ(part.pixels[1], 20);
  std::size_t last = part.pixels.size() - 4;
  EXPECT_EQ(part.pixels[last], 29);
  EXPECT_EQ(part.pixels[last + 1], 24);
}

TEST(Png, ReadFromFile) {
  testing::TempDir dir;
  testing::write_file(dir / "g.png", encode_png(gradient(12, 9)));
  RgbaImage image = read_png(dir / "g.png");
  EXPECT_EQ(image.width, 12);
  EXPECT_EQ(image.height, 9);
}

TEST(Png, GarbageIsIoError) {
  EXPECT_THROW(decode_png("definitely not a png"), IoError);
  testing::TempDir dir;
  EXPECT_THROW(read_png(dir / "missing.png"), IoError);
}

}  // namespace
}  // namespace ambiprune
