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
#include "reltrav/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "reltrav/rng.hpp"

namespace reltrav {

std::array<double, 2> SynthConfig::Range(SceneFamily family) const {
  if (!stress_calibration) return {0.0, 1.0};
  return family == SceneFamily::kA ? std::array<double, 2>{0.5, 1.0}
                                   : std::array<double, 2>{0.0, 0.5};
}

void SynthConfig::Validate() const {
  if (height < kMinImageSide || width < kMinImageSide) {
    throw Error(ErrorCode::kInvalidDimensions, "synthetic scenes must be at least 16x16");
  }
  if (min_regions < 1 || max_regions < min_regions) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= min_regions <= max_regions");
  }
  if (materials_per_family < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one material per family");
  }
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
}

namespace {

std::array<double, 3> HsvToRgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h / 60.0, 6.0);
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  std::array<double, 3> rgb{};
  switch (static_cast<int>(hp)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  for (double& ch : rgb) ch += m;
  return rgb;
}

double Quantize16(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 65535.0) / 65535.0; }

}  // namespace

std::vector<Material> MaterialPalette(const SynthConfig& config) {
  const int k = config.materials_per_family;
  std::vector<Material> palette;
  for (SceneFamily family : {SceneFamily::kA, SceneFamily::kB}) {
    const auto [lo, hi] = config.Range(family);
    const double hue0 = family == SceneFamily::kA ? 0.0 : 180.0;
    for (int i = 0; i < k; ++i) {
      Material m;
      m.id = static_cast<int>(palette.size());
      m.family = family;
      m.rgb = HsvToRgb(hue0 + (i + 0.5) * 180.0 / k, 0.7, i % 2 == 0 ? 0.8 : 0.6);
      m.score = Quantize16(lo + (i + 0.5) / k * (hi - lo));
      palette.push_back(m);
    }
  }
  return palette;
}

SyntheticScene GenerateScene(std::uint64_t seed, const SynthConfig& config) {
  config.Validate();
  const std::vector<Material> palette = MaterialPalette(config);
  const int k = config.materials_per_family;
  Rng rng(seed);
  SyntheticScene scene;
  scene.family = rng.Bernoulli(0.5) ? SceneFamily::kA : SceneFamily::kB;
  const int family_offset = scene.family == SceneFamily::kA ? 0 : k;
  const int n_regions = rng.UniformInt(config.min_regions, config.max_regions);

  struct Site {
    double x, y;
  };
  std::vector<Site> sites(n_regions);
  for (Site& s : sites) s = {rng.Uniform(0.0, config.width), rng.Uniform(0.0, config.height)};
  scene.region_material.resize(n_regions);
  for (int& m : scene.region_material) m = family_offset + rng.UniformInt(0, k - 1);

  // Per-region stripe texture: orientation, frequency and phase.
  struct Texture {
    double fx, fy, phase;
    std::uint64_t noise_seed;
  };
  std::vector<Texture> textures(n_regions);
  for (int r = 0; r < n_regions; ++r) {
    Rng tr(DeriveSeed(seed, static_cast<std::uint64_t>(r)));
    const double angle = tr.Uniform(0.0, std::numbers::pi);
    const double freq = tr.Uniform(0.3, 1.2);
    textures[r] = {freq * std::cos(angle), freq * std::sin(angle),
                   tr.Uniform(0.0, 2.0 * std::numbers::pi), tr.NextU64()};
  }

  const int h = config.height;
  const int w = config.width;
  scene.image = RgbImage8(h, w);
  scene.gt_field = Grid<double>(h, w);
  scene.regions = Grid<int>(h, w);
  scene.classes = Grid<int>(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = 0;
      double best_d = 1e300;
      for (int r = 0; r < n_regions; ++r) {
        const double dx = x + 0.5 - sites[r].x;
        const double dy = y + 0.5 - sites[r].y;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
          best_d = d;
          best = r;
        }
      }
      const Material& mat = palette[scene.region_material[best]];
      const Texture& tex = textures[best];
      scene.regions.at(y, x) = best;
      scene.classes.at(y, x) = mat.id;
      scene.gt_field.at(y, x) = mat.score;
      const double stripe = config.texture_amplitude * std::sin(tex.fx * x + tex.fy * y + tex.phase);
      std::uint64_t hsh = SplitMix64(tex.noise_seed ^ (static_cast<std::uint64_t>(y) << 32 | x));
      for (int c = 0; c < 3; ++c) {
        hsh = SplitMix64(hsh);
        const double noise = config.pixel_noise * ((hsh >> 11) * 0x1.0p-53 * 2.0 - 1.0);
        const double v = std::clamp(mat.rgb[c] + stripe + noise, 0.0, 1.0);
        scene.image.px(y, x)[c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return scene;
}

int OracleLabel(double g_a, double g_b, double epsilon) {
  const double d = g_b - g_a;
  if (std::abs(d) <= epsilon) return 0;
  return d > 0 ? 1 : -1;
}

int OracleLabel(const Grid<double>& gt_a, const PointRef& a, const Grid<double>& gt_b,
                const PointRef& b, double epsilon) {
  auto inside = [](const Grid<double>& g, const PointRef& p) {
    return p.x >= 0 && p.x < g.width && p.y >= 0 && p.y < g.height;
  };
  if (!inside(gt_a, a) || !inside(gt_b, b)) {
    throw Error(ErrorCode::kOutOfBounds, "oracle point outside its ground-truth field");
  }
  return OracleLabel(gt_a.at(a.y, a.x), gt_b.at(b.y, b.x), epsilon);
}

namespace {

std::string ImageId(const SynthConfig& config, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d", i);
  return config.image_prefix + buf;
}

}  // namespace

SynthDataset BuildSynthDataset(std::uint64_t seed, int n_images, const SynthConfig& config,
                               const SynthPairPlan& plan) {
  if (n_images < 2) throw Error(ErrorCode::kInvalidArgument, "synthetic datasets need n >= 2");
  if (plan.intra_per_image < 0 || plan.cross_per_image < 0) {
    throw Error(ErrorCode::kInvalidArgument, "pair counts must be >= 0");
  }
  config.Validate();
  SynthDataset ds;
  std::vector<ImageEntry> entries;
  for (int i = 0; i < n_images; ++i) {
    const std::string id = ImageId(config, i);
    ds.scenes.push_back(GenerateScene(DeriveSeed(seed, id), config));
    entries.push_back(ImageEntry{id, "images/" + id + ".ppm", config.width, config.height,
                                 "gt/" + id + ".pgm"});
  }
  ds.manifest = DatasetManifest(std::move(entries), config.height, config.width);
  const std::uint64_t pair_seed = DeriveSeed(seed, "pairs");
  const int rounds = std::max(plan.intra_per_image, plan.cross_per_image);
  for (int r = 0; r < rounds; ++r) {
    PairGenOptions options;
    options.intra = r < plan.intra_per_image;
    options.cross = r < plan.cross_per_image;
    const std::uint64_t round_seed =
        r == 0 ? pair_seed : DeriveSeed(pair_seed, static_cast<std::uint64_t>(r));
    for (const PairTask& task : GeneratePairTasks(ds.manifest, round_seed, options)) {
      const auto& ga = ds.scenes[ds.manifest.IndexOf(task.a.image_id)].gt_field;
      const auto& gb = ds.scenes[ds.manifest.IndexOf(task.b.image_id)].gt_field;
      PairAnnotation ann;
      ann.pair_id = r == 0 ? task.task_id : task.task_id + "#" + std::to_string(r);
      ann.a = task.a;
      ann.b = task.b;
      ann.kind = task.kind;
      ann.source = LabelSource::kSynthetic;
      ann.t = OracleLabel(ga, task.a, gb, task.b, config.epsilon);
      ds.annotations.push_back(std::move(ann));
    }
  }
  return ds;
}

TierTable SynthTierTable(const SynthConfig& config) {
  std::vector<TierClass> classes;
  for (const Material& m : MaterialPalette(config)) {
    const int tier = std::min(3, static_cast<int>(std::floor(m.score * 4.0)));
    classes.push_back(TierClass{m.id, std::string(m.family == SceneFamily::kA ? "A" : "B") +
                                          std::to_string(m.id),
                                tier});
  }
  return TierTable(std::move(classes));
}

void WriteSynthDataset(const SynthDataset& dataset, const SynthConfig& config,
                       const std::filesystem::path& dir, bool with_class_maps) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "gt");
  if (with_class_maps) fs::create_directories(dir / "classes");
  std::vector<ImageEntry> class_entries;
  for (std::size_t i = 0; i < dataset.scenes.size(); ++i) {
    const SyntheticScene& scene = dataset.scenes[i];
    const ImageEntry& e = dataset.manifest.images()[i];
    WritePpm(scene.image, dir / e.path);
    Grid<int> q(scene.gt_field.height, scene.gt_field.width);
    for (std::size_t p = 0; p < q.values.size(); ++p) {
      q.values[p] = static_cast<int>(std::lround(scene.gt_field.values[p] * 65535.0));
    }
    WritePgm16(q, dir / *e.gt_path);
    if (with_class_maps) {
      ImageEntry ce = e;
      ce.gt_path = "classes/" + e.image_id + ".pgm";
      WritePgm16(scene.classes, dir / *ce.gt_path);
      class_entries.push_back(std::move(ce));
    }
  }
  SaveManifest(dataset.manifest, dir / "manifest.jsonl");
  SaveAnnotations(dataset.annotations, dir / "annotations.jsonl");
  if (with_class_maps) {
    SaveManifest(DatasetManifest(std::move(class_entries), dataset.manifest.target_height(),
                                 dataset.manifest.target_width()),
                 dir / "manifest_classes.jsonl");
    SynthTierTable(config).Save(dir / "tiers.json");
  }
}

Grid<double> ReadGtField(const std::filesystem::path& path) {
  Grid<int> q = ReadPgm(path);
  Grid<double> g(q.height, q.width);
  for (std::size_t i = 0; i < q.values.size(); ++i) g.values[i] = q.values[i] / 65535.0;
  return g;
}

}  // namespace reltrav
