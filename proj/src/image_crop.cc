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

#include "ambiprune/image_crop.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ambiprune/error.h"
#include "json_fields.h"

namespace ambiprune {

namespace {

class PngImage {
 public:
  PngImage() {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image_); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;

  png_image* get() { return &image_; }

 private:
  png_image image_;
};

}  // namespace

PixelRect padded_crop_rect(const BoundingBox& box, int image_width,
                           int image_height, double pad_fraction) {
  double pad_x = box.width() * pad_fraction;
  double pad_y = box.height() * pad_fraction;
  auto clamp_to = [](double v, int hi) {
    return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi)));
  };
  return PixelRect{clamp_to(std::floor(box.x0 - pad_x), image_width),
                   clamp_to(std::floor(box.y0 - pad_y), image_height),
                   clamp_to(std::ceil(box.x1 + pad_x), image_width),
                   clamp_to(std::ceil(box.y1 + pad_y), image_height)};
}

RgbaImage decode_png(const std::string& bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(png.get(), bytes.data(), bytes.size())) {
    throw IoError(std::string("cannot decode PNG: ") + png.get()->message);
  }
  png.get()->format = PNG_FORMAT_RGBA;
  RgbaImage out;
  out.width = static_cast<int>(png.get()->width);
  out.height = static_cast<int>(png.get()->height);
  out.pixels.resize(PNG_IMAGE_SIZE(*png.get()));
  if (!png_image_finish_read(png.get(), nullptr, out.pixels.data(), 0,
                             nullptr)) {
    throw IoError(std::string("cannot decode PNG: ") + png.get()->message);
  }
  return out;
}

RgbaImage read_png(const std::filesystem::path& path) {
  return decode_png(internal::read_text_file(path));
}

std::string encode_png(const RgbaImage& image) {
  PngImage png;
  png.get()->width = static_cast<png_uint_32>(image.width);
  png.get()->height = static_cast<png_uint_32>(image.height);
  png.get()->format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(*png.get(), size, 0,
                                       image.pixels.data(), 0, nullptr)) {
    throw IoError(std::string("cannot encode PNG: ") + png.get()->message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(png.get(), out.data(), &size, 0,
                                 image.pixels.data(), 0, nullptr)) {
    throw IoError(std::string("cannot encode PNG: ") + png.get()->message);
  }
  out.resize(size);
  return out;
}

RgbaImage crop(const RgbaImage& image, const PixelRect& rect) {
  PixelRect r{std::clamp(rect.x0, 0, image.width),
              std::clamp(rect.y0, 0, image.height),
              std::clamp(rect.x1, 0, image.width),
              std::clamp(rect.y1, 0, image.height)};
  if (r.width() <= 0 || r.height() <= 0) {
    throw DomainError("crop rectangle does not intersect the image");
  }
  RgbaImage out;
  out.width = r.width();
  out.height = r.height();
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 4);
  const std::size_t row_bytes = static_cast<std::size_t>(out.width) * 4;
  for (int y = 0; y < out.height; ++y) {
    const std::uint8_t* src =
        image.pixels.data() +
        (static_cast<std::size_t>(r.y0 + y) * image.width + r.x0) * 4;
    std::copy_n(src, row_bytes, out.pixels.data() + y * row_bytes);
  }
  return out;
}

}  // namespace ambiprune
