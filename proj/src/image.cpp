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
#include "reltrav/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace reltrav {

namespace {

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

// Reads the next whitespace-delimited token, skipping '#' comments.
std::string NextToken(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

PnmHeader ReadHeader(std::istream& in, const std::filesystem::path& path) {
  PnmHeader h;
  try {
    h.magic = NextToken(in);
    h.width = std::stoi(NextToken(in));
    h.height = std::stoi(NextToken(in));
    h.maxval = std::stoi(NextToken(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad netpbm header in '" + path.string() + "'");
  }
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    throw Error(ErrorCode::kParse, "bad netpbm header in '" + path.string() + "'");
  }
  return h;
}

std::ifstream OpenBinary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open image '" + path.string() + "'");
  return in;
}

}  // namespace

RgbImage8 ReadPpm(const std::filesystem::path& path) {
  std::ifstream in = OpenBinary(path);
  PnmHeader h = ReadHeader(in, path);
  if (h.magic != "P6" || h.maxval != 255) {
    throw Error(ErrorCode::kParse, "'" + path.string() + "' is not an 8-bit binary PPM");
  }
  RgbImage8 img(h.height, h.width);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw Error(ErrorCode::kParse, "truncated PPM '" + path.string() + "'");
  }
  return img;
}

std::string EncodePpm(const RgbImage8& image) {
  std::ostringstream out(std::ios::binary);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  return out.str();
}

void WritePpm(const RgbImage8& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << EncodePpm(image);
}

Grid<int> ReadPgm(const std::filesystem::path& path) {
  std::ifstream in = OpenBinary(path);
  PnmHeader h = ReadHeader(in, path);
  if (h.magic != "P5") throw Error(ErrorCode::kParse, "'" + path.string() + "' is not a binary PGM");
  Grid<int> img(h.height, h.width);
  const bool wide = h.maxval > 255;
  std::vector<unsigned char> buf(img.size() * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw Error(ErrorCode::kParse, "truncated PGM '" + path.string() + "'");
  }
  for (std::size_t i = 0; i < img.size(); ++i) {
    img.values[i] = wide ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];  // big-endian
  }
  return img;
}

void WritePgm16(const Grid<int>& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  std::vector<unsigned char> buf(image.size() * 2);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const int v = std::clamp(image.values[i], 0, 65535);
    buf[2 * i] = static_cast<unsigned char>(v >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Tensor ToTensor(const RgbImage8& image) {
  Tensor t(3, image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t* p = image.px(y, x);
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = p[c] / 255.0;
    }
  }
  return t;
}

RgbImage8 ToRgb8(const Tensor& tensor) {
  RgbImage8 img(tensor.height, tensor.width);
  for (int y = 0; y < tensor.height; ++y) {
    for (int x = 0; x < tensor.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(tensor.at(c, y, x), 0.0, 1.0);
        img.px(y, x)[c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

BilinearTaps BilinearAt(int height, int width, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = std::min(static_cast<int>(std::floor(x)), width - 1);
  const int y0 = std::min(static_cast<int>(std::floor(y)), height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  BilinearTaps taps;
  taps.index = {static_cast<std::size_t>(y0) * width + x0, static_cast<std::size_t>(y0) * width + x1,
                static_cast<std::size_t>(y1) * width + x0, static_cast<std::size_t>(y1) * width + x1};
  taps.weight = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  return taps;
}

double SampleBilinear(const Grid<double>& map, double x, double y) {
  const BilinearTaps taps = BilinearAt(map.height, map.width, x, y);
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += taps.weight[k] * map.values[taps.index[k]];
  return v;
}

Tensor ResizeBilinear(const Tensor& src, int height, int width) {
  if (src.height == height && src.width == width) return src;
  Tensor dst(src.channels, height, width);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const BilinearTaps taps = BilinearAt(src.height, src.width, (x + 0.5) * sx - 0.5, fy);
      for (int c = 0; c < src.channels; ++c) {
        const double* plane = src.data.data() + c * src.plane();
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += taps.weight[k] * plane[taps.index[k]];
        dst.at(c, y, x) = v;
      }
    }
  }
  return dst;
}

Grid<int> ResizeNearest(const Grid<int>& src, int height, int width) {
  if (src.height == height && src.width == width) return src;
  Grid<int> dst(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * src.height / height), src.height - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * src.width / width), src.width - 1);
      dst.at(y, x) = src.at(sy, sx);
    }
  }
  return dst;
}

}  // namespace reltrav
