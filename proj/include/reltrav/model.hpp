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
#ifndef RELTRAV_MODEL_HPP_
#define RELTRAV_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/image.hpp"

namespace reltrav {

// Encoder-decoder per-pixel regressor f: [0,1]^{3 x H x W} -> (0,1)^{H x W}.
//
// Encoder: one 3x3 convolution stage per entry of encoder_widths; the first
// keeps full resolution, every later stage has stride 2. Each decoder stage is
// a 3x3 convolution followed by 2x nearest-neighbor upsampling, and the result
// is concatenated with the encoder features of the same resolution. A final
// 3x3 convolution and a 1x1 convolution with sigmoid produce the map. All
// hidden convolutions use ReLU.
struct ModelConfig {
  std::vector<int> encoder_widths{8, 16, 24, 32};
  int input_height = kDefaultTargetHeight;
  int input_width = kDefaultTargetWidth;

  // Inputs must be divisible by 2^(stages - 1) so decoder shapes line up.
  void Validate() const;
  std::string ToJson() const;
  static ModelConfig FromJson(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

struct NamedArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
  bool operator==(const NamedArray&) const = default;
};

// Ordered collection of named parameter arrays (student or teacher).
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<NamedArray> arrays) : arrays_(std::move(arrays)) {}

  std::vector<NamedArray>& arrays() { return arrays_; }
  const std::vector<NamedArray>& arrays() const { return arrays_; }
  const NamedArray* Find(const std::string& name) const;
  NamedArray* Find(const std::string& name);
  const NamedArray& Get(const std::string& name) const;

  std::size_t NumValues() const;
  ParamSet ZerosLike() const;
  // Same names, same order, same shapes.
  bool CompatibleWith(const ParamSet& other) const;
  bool operator==(const ParamSet&) const = default;

 private:
  std::vector<NamedArray> arrays_;
};

// Activations kept by Forward for Backward.
struct ForwardCache {
  std::vector<Tensor> enc_in;
  std::vector<Tensor> enc_out;
  std::vector<Tensor> dec_in;
  std::vector<Tensor> dec_out;
  Tensor final_in;
  Tensor final_out;
  TraversabilityMap output;
};

class Network {
 public:
  explicit Network(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  int stages() const { return static_cast<int>(config_.encoder_widths.size()); }

  // He-normal convolutions, zero biases, small head weights (outputs start
  // near 0.5).
  ParamSet InitParams(std::uint64_t seed) const;
  // Zero head weight and bias: the map is identically sigmoid(0) = 0.5.
  static void ZeroHead(ParamSet* params);

  // Image must be 3 x input_height x input_width (kShapeMismatch otherwise).
  TraversabilityMap Forward(const ParamSet& params, const Tensor& image,
                            ForwardCache* cache = nullptr) const;

  // Accumulates d loss / d params into *grads given d loss / d output.
  void Backward(const ParamSet& params, const ForwardCache& cache, const Grid<double>& d_output,
                ParamSet* grads) const;

 private:
  struct ConvSpec {
    std::string name;
    int in_channels;
    int out_channels;
    int kernel;
    int stride;
  };
  const ConvSpec& Spec(const std::string& name) const;

  ModelConfig config_;
  std::vector<ConvSpec> convs_;
};

// Per-parameter teacher <- alpha * teacher + (1 - alpha) * student.
ParamSet EmaUpdate(const ParamSet& teacher, const ParamSet& student, double alpha);
void EmaUpdateInPlace(ParamSet* teacher, const ParamSet& student, double alpha);

// Copies every array whose name and shape match, except the head. Returns the
// number of arrays imported.
std::size_t ImportPretrained(ParamSet* target, const ParamSet& source);

struct Checkpoint {
  ModelConfig config;
  ParamSet student;
  ParamSet teacher;
  std::int64_t step = 0;
  double alpha = 0.99;
  std::string loss_name = "rizz";
  double margin = 0.5;
  bool operator==(const Checkpoint&) const = default;
};

// Binary container: magic, JSON metadata, then raw little-endian float64
// arrays named "student/..." and "teacher/...". Round-trips bit-exactly.
void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace reltrav

#endif  // RELTRAV_MODEL_HPP_
