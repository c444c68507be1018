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
#include "reltrav/pairgen.hpp"

#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "reltrav/image.hpp"

namespace reltrav {

using json = nlohmann::ordered_json;

std::string_view TaskStatusName(TaskStatus status) {
  switch (status) {
    case TaskStatus::kPending: return "pending";
    case TaskStatus::kLabeled: return "labeled";
    case TaskStatus::kSkipped: return "skipped";
  }
  return "pending";
}

namespace {

TaskStatus ParseTaskStatus(std::string_view s) {
  if (s == "pending") return TaskStatus::kPending;
  if (s == "labeled") return TaskStatus::kLabeled;
  if (s == "skipped") return TaskStatus::kSkipped;
  throw Error(ErrorCode::kParse, "unknown task status '" + std::string(s) + "'");
}

PointRef UniformPoint(const std::string& image_id, int width, int height, Rng& rng) {
  return PointRef{image_id, rng.UniformInt(0, width - 1), rng.UniformInt(0, height - 1)};
}

void CheckSide(int width, int height) {
  if (width < kMinImageSide || height < kMinImageSide) {
    throw Error(ErrorCode::kInvalidDimensions, "image sides must be at least 16 px");
  }
}

}  // namespace

std::pair<PointRef, PointRef> SampleIntraPair(const std::string& image_id, int width,
                                              int height, Rng& rng) {
  CheckSide(width, height);
  const double threshold = MinPairDistance(width, height);
  while (true) {
    PointRef a = UniformPoint(image_id, width, height, rng);
    PointRef b = UniformPoint(image_id, width, height, rng);
    if (PixelDistance(a, b) >= threshold) return {std::move(a), std::move(b)};
  }
}

std::pair<PointRef, PointRef> SampleCrossPair(const DatasetManifest& manifest,
                                              const std::string& image_id, Rng& rng) {
  if (manifest.size() < 2) {
    throw Error(ErrorCode::kSingleImageDataset, "cross pairs need at least two images");
  }
  const std::size_t self = manifest.IndexOf(image_id);
  std::size_t partner = rng.Index(manifest.size() - 1);
  if (partner >= self) ++partner;
  const ImageEntry& ea = manifest.images()[self];
  const ImageEntry& eb = manifest.images()[partner];
  PointRef a = UniformPoint(ea.image_id, ea.width, ea.height, rng);
  PointRef b = UniformPoint(eb.image_id, eb.width, eb.height, rng);
  return {std::move(a), std::move(b)};
}

PointRef SampleBiasedPoint(const std::string& image_id, int width, int height, Rng& rng,
                           double bottom_fraction) {
  if (!(bottom_fraction >= 0.0 && bottom_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bottom_fraction must lie in [0, 1]");
  }
  const bool bottom = rng.Bernoulli(bottom_fraction);
  const int x = rng.UniformInt(0, width - 1);
  // Rows y >= height / 2 (real-valued half, so odd heights exclude the middle row).
  const int first_bottom_row = (height + 1) / 2;
  const int y = bottom ? rng.UniformInt(first_bottom_row, height - 1) : rng.UniformInt(0, height - 1);
  return PointRef{image_id, x, y};
}

std::vector<PairTask> GeneratePairTasks(const DatasetManifest& manifest, std::uint64_t seed,
                                        const PairGenOptions& options) {
  if (manifest.empty()) throw Error(ErrorCode::kEmptySet, "manifest has no images");
  if (options.cross && manifest.size() < 2) {
    throw Error(ErrorCode::kSingleImageDataset, "cross pairs need at least two images");
  }
  std::vector<PairTask> tasks;
  tasks.reserve(manifest.size() * 2);
  for (const ImageEntry& e : manifest.images()) {
    Rng rng(DeriveSeed(seed, e.image_id));
    if (options.intra) {
      PairTask task;
      task.task_id = e.image_id + "/intra";
      task.kind = PairKind::kIntra;
      if (options.bottom_fraction) {
        const double threshold = MinPairDistance(e.width, e.height);
        do {
          task.a = SampleBiasedPoint(e.image_id, e.width, e.height, rng, *options.bottom_fraction);
          task.b = SampleBiasedPoint(e.image_id, e.width, e.height, rng, *options.bottom_fraction);
        } while (PixelDistance(task.a, task.b) < threshold);
      } else {
        std::tie(task.a, task.b) = SampleIntraPair(e.image_id, e.width, e.height, rng);
      }
      tasks.push_back(std::move(task));
    }
    if (options.cross) {
      PairTask task;
      task.task_id = e.image_id + "/cross";
      task.kind = PairKind::kCross;
      std::tie(task.a, task.b) = SampleCrossPair(manifest, e.image_id, rng);
      if (options.bottom_fraction) {
        const ImageEntry& eb = manifest.Get(task.b.image_id);
        task.a = SampleBiasedPoint(e.image_id, e.width, e.height, rng, *options.bottom_fraction);
        task.b = SampleBiasedPoint(eb.image_id, eb.width, eb.height, rng, *options.bottom_fraction);
      }
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

LabelAccounting AccountLabels(std::size_t num_images, std::size_t intra, std::size_t cross) {
  LabelAccounting acc;
  acc.images = num_images;
  acc.intra = intra;
  acc.cross = cross;
  acc.tasks = intra + cross;
  acc.accounted_labels = intra + cross / 2;
  return acc;
}

LabelAccounting AccountTasks(std::size_t num_images, const std::vector<PairTask>& tasks) {
  std::size_t intra = 0;
  std::size_t cross = 0;
  for (const PairTask& t : tasks) (t.kind == PairKind::kIntra ? intra : cross)++;
  return AccountLabels(num_images, intra, cross);
}

// --- task files ---------------------------------------------------------------

std::string TaskToJsonLine(const PairTask& task) {
  auto point = [](const PointRef& p) {
    return json{{"image_id", p.image_id}, {"x", p.x}, {"y", p.y}};
  };
  json j{{"pair_id", task.task_id},
         {"kind", PairKindName(task.kind)},
         {"a", point(task.a)},
         {"b", point(task.b)},
         {"status", TaskStatusName(task.status)}};
  return j.dump();
}

PairTask TaskFromJsonLine(std::string_view line) {
  try {
    json j = json::parse(line);
    PairTask task;
    task.task_id = j.contains("pair_id") ? j.at("pair_id").get<std::string>()
                                         : j.at("task_id").get<std::string>();
    task.kind = ParsePairKind(j.at("kind").get<std::string>());
    auto point = [](const json& p) {
      return PointRef{p.at("image_id").get<std::string>(), p.at("x").get<int>(),
                      p.at("y").get<int>()};
    };
    task.a = point(j.at("a"));
    task.b = point(j.at("b"));
    task.status = j.contains("status") ? ParseTaskStatus(j.at("status").get<std::string>())
                                       : TaskStatus::kPending;
    return task;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed task record: ") + e.what());
  }
}

std::vector<PairTask> LoadTasks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open task file '" + path.string() + "'");
  std::vector<PairTask> tasks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    tasks.push_back(TaskFromJsonLine(line));
  }
  return tasks;
}

void SaveTasks(const std::vector<PairTask>& tasks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  for (const PairTask& t : tasks) out << TaskToJsonLine(t) << '\n';
}

// --- tiers ------------------------------------------------------------------------

TierTable::TierTable(std::vector<TierClass> classes) : classes_(std::move(classes)) {
  for (const TierClass& c : classes_) {
    if (c.tier < 0 || c.tier > 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class " + std::to_string(c.id) + " has tier outside {0,1,2,3}");
    }
    if (!tiers_.emplace(c.id, c.tier).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class " + std::to_string(c.id) + " listed more than once");
    }
  }
}

TierTable TierTable::RugdDefault() {
  static const char* kNames[] = {
      "void",  "dirt",   "sand",    "grass",    "tree",     "pole",   "water",
      "sky",   "vehicle", "container/generic-object", "asphalt", "gravel", "building",
      "mulch", "rock-bed", "log",   "bicycle",  "person",   "fence",  "bush",
      "sign",  "rock",   "bridge",  "concrete", "picnic-table"};
  static const std::unordered_map<std::string, int> kTiers = {
      {"concrete", 3}, {"asphalt", 3}, {"dirt", 2},  {"sand", 2},  {"grass", 2},
      {"gravel", 2},   {"mulch", 2},   {"rock-bed", 2}, {"water", 1}, {"bush", 1}};
  std::vector<TierClass> classes;
  for (int id = 0; id < 25; ++id) {
    auto it = kTiers.find(kNames[id]);
    classes.push_back(TierClass{id, kNames[id], it == kTiers.end() ? 0 : it->second});
  }
  return TierTable(std::move(classes));
}

int TierTable::TierOf(int class_id) const {
  auto it = tiers_.find(class_id);
  if (it == tiers_.end()) {
    throw Error(ErrorCode::kUnknownClassId, "class id " + std::to_string(class_id) +
                                                " is not in the tier table");
  }
  return it->second;
}

std::string TierTable::ToJson() const {
  json arr = json::array();
  for (const TierClass& c : classes_) {
    arr.push_back(json{{"id", c.id}, {"name", c.name}, {"tier", c.tier}});
  }
  return json{{"classes", arr}}.dump(2);
}

TierTable TierTable::FromJson(const std::string& text) {
  try {
    json j = json::parse(text);
    std::vector<TierClass> classes;
    for (const json& c : j.at("classes")) {
      classes.push_back(TierClass{c.at("id").get<int>(), c.value("name", std::string()),
                                  c.at("tier").get<int>()});
    }
    return TierTable(std::move(classes));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed tier table: ") + e.what());
  }
}

TierTable TierTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open tier table '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return FromJson(text);
}

void TierTable::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << ToJson() << '\n';
}

int AutolabelFromTiers(int class_a, int class_b, const TierTable& tiers) {
  const int diff = tiers.TierOf(class_b) - tiers.TierOf(class_a);
  return (diff > 0) - (diff < 0);
}

std::vector<PairAnnotation> AutolabelTasks(const DatasetManifest& manifest,
                                           const std::vector<PairTask>& tasks,
                                           const TierTable& tiers) {
  std::unordered_map<std::string, Grid<int>> class_maps;
  auto class_at = [&](const PointRef& p) {
    auto it = class_maps.find(p.image_id);
    if (it == class_maps.end()) {
      const ImageEntry& e = manifest.Get(p.image_id);
      if (!e.gt_path) {
        throw Error(ErrorCode::kInvalidArgument, "image '" + e.image_id + "' has no gt_path");
      }
      Grid<int> gt = ReadPgm(manifest.Resolve(*e.gt_path));
      if (gt.width != e.width || gt.height != e.height) {
        throw Error(ErrorCode::kShapeMismatch, "ground truth for '" + e.image_id +
                                                   "' does not match the manifest size");
      }
      it = class_maps.emplace(p.image_id, std::move(gt)).first;
    }
    return it->second.at(p.y, p.x);
  };
  std::vector<PairAnnotation> out;
  out.reserve(tasks.size());
  for (const PairTask& task : tasks) {
    if (task.status == TaskStatus::kSkipped) continue;
    PairAnnotation ann;
    ann.pair_id = task.task_id;
    ann.a = task.a;
    ann.b = task.b;
    ann.kind = task.kind;
    ann.source = LabelSource::kAuto;
    ann.t = AutolabelFromTiers(class_at(task.a), class_at(task.b), tiers);
    ValidateAnnotation(ann, manifest);
    out.push_back(std::move(ann));
  }
  return out;
}

}  // namespace reltrav
