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
#ifndef RELTRAV_SYNTHWORLD_HPP_
#define RELTRAV_SYNTHWORLD_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/image.hpp"
#include "reltrav/pairgen.hpp"

namespace reltrav {

// Procedural scenes with known per-pixel traversability. A scene belongs to
// one of two families whose material palettes (colors) are disjoint. Every
// material has a fixed score, spread evenly over its family's range, so the
// score is a learnable function of appearance.

enum class SceneFamily { kA, kB };

struct SynthConfig {
  int height = 48;
  int width = 80;
  int min_regions = 3;
  int max_regions = 8;
  int materials_per_family = 3;
  // Disjoint ranges (A in [0.5, 1], B in [0, 0.5]) when set; both families
  // span [0, 1] otherwise.
  bool stress_calibration = false;
  double texture_amplitude = 0.08;
  double pixel_noise = 0.03;
  double epsilon = 0.1;  // oracle equality tolerance
  std::string image_prefix = "img";

  std::array<double, 2> Range(SceneFamily family) const;
  void Validate() const;
};

struct Material {
  int id = 0;  // global: family A uses 0..K-1, family B uses K..2K-1
  SceneFamily family = SceneFamily::kA;
  std::array<double, 3> rgb{};
  double score = 0.0;
};

std::vector<Material> MaterialPalette(const SynthConfig& config);

struct SyntheticScene {
  RgbImage8 image;
  Grid<double> gt_field;  // quantized to 16 bits, as stored on disk
  Grid<int> regions;
  Grid<int> classes;      // material id per pixel
  SceneFamily family = SceneFamily::kA;
  std::vector<int> region_material;
};

// 3..8 Voronoi (convex polygon) regions, each textured from (seed, region id).
SyntheticScene GenerateScene(std::uint64_t seed, const SynthConfig& config);

// 0 if |g_b - g_a| <= epsilon, else sign(g_b - g_a).
int OracleLabel(double g_a, double g_b, double epsilon);
int OracleLabel(const Grid<double>& gt_a, const PointRef& a, const Grid<double>& gt_b,
                const PointRef& b, double epsilon);

struct SynthDataset {
  DatasetManifest manifest;
  std::vector<PairAnnotation> annotations;
  std::vector<SyntheticScene> scenes;  // manifest order
};

// Pairs generated per image. Round r draws up to one intra and one cross pair
// per image; rounds after the first append "#r" to the pair id.
struct SynthPairPlan {
  int intra_per_image = 1;
  int cross_per_image = 1;
};

// n scenes plus the planned pairs, labeled by the oracle (source = synthetic).
// kInvalidArgument for n < 2 or a negative plan.
SynthDataset BuildSynthDataset(std::uint64_t seed, int n_images, const SynthConfig& config,
                               const SynthPairPlan& plan = {});

// Tier per material: floor(4 * score), clamped to 3.
TierTable SynthTierTable(const SynthConfig& config);

// Writes images/*.ppm, gt/*.pgm (16-bit traversability), manifest.jsonl and
// annotations.jsonl. With class maps it also writes classes/*.pgm,
// manifest_classes.jsonl (gt_path pointing at the class maps) and tiers.json.
void WriteSynthDataset(const SynthDataset& dataset, const SynthConfig& config,
                       const std::filesystem::path& dir, bool with_class_maps = false);

// Reads a traversability field written by WriteSynthDataset.
Grid<double> ReadGtField(const std::filesystem::path& path);

}  // namespace reltrav

#endif  // RELTRAV_SYNTHWORLD_HPP_
