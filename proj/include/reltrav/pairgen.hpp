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
#ifndef RELTRAV_PAIRGEN_HPP_
#define RELTRAV_PAIRGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/rng.hpp"

namespace reltrav {

enum class TaskStatus { kPending, kLabeled, kSkipped };
std::string_view TaskStatusName(TaskStatus status);

struct PairTask {
  std::string task_id;
  PointRef a;
  PointRef b;
  PairKind kind = PairKind::kIntra;
  TaskStatus status = TaskStatus::kPending;
  bool operator==(const PairTask&) const = default;
};

// Uniform in-bounds pair at least MinPairDistance(width, height) apart, by
// rejection.
std::pair<PointRef, PointRef> SampleIntraPair(const std::string& image_id, int width,
                                              int height, Rng& rng);

// Point a uniform in `image_id`, partner image uniform over the others.
std::pair<PointRef, PointRef> SampleCrossPair(const DatasetManifest& manifest,
                                              const std::string& image_id, Rng& rng);

// With probability bottom_fraction the row is drawn from y >= height / 2,
// otherwise from the whole image.
PointRef SampleBiasedPoint(const std::string& image_id, int width, int height, Rng& rng,
                           double bottom_fraction = 0.9);

struct PairGenOptions {
  bool intra = true;
  bool cross = true;
  // When set, every point is drawn with SampleBiasedPoint.
  std::optional<double> bottom_fraction;
};

// One intra task and one cross task per image, in manifest order. Each image
// draws from its own stream DeriveSeed(seed, image_id), so the result does not
// depend on how the work is scheduled.
std::vector<PairTask> GeneratePairTasks(const DatasetManifest& manifest, std::uint64_t seed,
                                        const PairGenOptions& options = {});

struct LabelAccounting {
  std::size_t images = 0;
  std::size_t intra = 0;
  std::size_t cross = 0;
  std::size_t tasks = 0;
  // Each cross label joins two images, so it counts as half a label per
  // image: intra + cross / 2 (3 labels per 2 images when complete).
  std::size_t accounted_labels = 0;
};

LabelAccounting AccountTasks(std::size_t num_images, const std::vector<PairTask>& tasks);
LabelAccounting AccountLabels(std::size_t num_images, std::size_t intra, std::size_t cross);

std::string TaskToJsonLine(const PairTask& task);
PairTask TaskFromJsonLine(std::string_view line);
std::vector<PairTask> LoadTasks(const std::filesystem::path& path);
void SaveTasks(const std::vector<PairTask>& tasks, const std::filesystem::path& path);

// --- tiers ------------------------------------------------------------------

struct TierClass {
  int id = 0;
  std::string name;
  int tier = 0;
};

class TierTable {
 public:
  TierTable() = default;
  explicit TierTable(std::vector<TierClass> classes);

  // 25 RUGD classes (void included). 3: concrete, asphalt; 2: dirt, sand,
  // grass, gravel, mulch, rock-bed; 1: water, bush; 0: everything else.
  static TierTable RugdDefault();

  int TierOf(int class_id) const;  // kUnknownClassId
  bool Contains(int class_id) const { return tiers_.count(class_id) > 0; }
  const std::vector<TierClass>& classes() const { return classes_; }

  std::string ToJson() const;
  static TierTable FromJson(const std::string& text);
  static TierTable Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

 private:
  std::vector<TierClass> classes_;
  std::map<int, int> tiers_;
};

// sign(tier(b) - tier(a)); same tier gives 0.
int AutolabelFromTiers(int class_a, int class_b, const TierTable& tiers);

// Labels every task from ground-truth class maps (manifest gt_path) and
// returns annotations with source = auto. Skipped tasks are dropped.
std::vector<PairAnnotation> AutolabelTasks(const DatasetManifest& manifest,
                                           const std::vector<PairTask>& tasks,
                                           const TierTable& tiers);

}  // namespace reltrav

#endif  // RELTRAV_PAIRGEN_HPP_
