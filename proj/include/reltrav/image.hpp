/* Copyright 2026 The reltrav Authors. All Rights Reserved.

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
#ifndef RELTRAV_IMAGE_HPP_
#define RELTRAV_IMAGE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reltrav/core.hpp"

namespace reltrav {

// Interleaved 8-bit RGB, row-major.
struct RgbImage8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  RgbImage8() = default;
  RgbImage8(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, 0) {}
  std::uint8_t* px(int y, int x) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* px(int y, int x) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }
  bool operator==(const RgbImage8&) const = default;
};

// Planar CHW activations. Network inputs are 3-channel tensors in [0, 1].
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double& at(int c, int y, int x) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  double at(int c, int y, int x) const {
    return data[c * plane() + static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const Tensor&) const = default;
};

// Binary netpbm. P6 holds 8-bit RGB; P5 holds 8- or 16-bit grayscale.
RgbImage8 ReadPpm(const std::filesystem::path& path);
void WritePpm(const RgbImage8& image, const std::filesystem::path& path);
std::string EncodePpm(const RgbImage8& image);
Grid<int> ReadPgm(const std::filesystem::path& path);
void WritePgm16(const Grid<int>& image, const std::filesystem::path& path);

Tensor ToTensor(const RgbImage8& image);
RgbImage8 ToRgb8(const Tensor& tensor);

// Pixel-center aligned bilinear resampling of the whole image.
Tensor ResizeBilinear(const Tensor& src, int height, int width);
Grid<int> ResizeNearest(const Grid<int>& src, int height, int width);

// Bilinear read of a map at fractional pixel coordinates (pixel centers at
// integers); coordinates are clamped to the map. The four taps and their
// weights are returned so callers can scatter gradients.
struct BilinearTaps {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};
BilinearTaps BilinearAt(int height, int width, double x, double y);
double SampleBilinear(const Grid<double>& map, double x, double y);

}  // namespace reltrav

#endif  // RELTRAV_IMAGE_HPP_
