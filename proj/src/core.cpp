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
#include "reltrav/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace reltrav {

using json = nlohmann::ordered_json;

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDuplicateImageId: return "DuplicateImageId";
    case ErrorCode::kInvalidDimensions: return "InvalidDimensions";
    case ErrorCode::kUnknownImageId: return "UnknownImageId";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kMinDistanceViolation: return "MinDistanceViolation";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kDuplicatePairId: return "DuplicatePairId";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kSingleImageDataset: return "SingleImageDataset";
    case ErrorCode::kUnknownClassId: return "UnknownClassId";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyAnnotationSet: return "EmptyAnnotationSet";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyTier: return "EmptyTier";
    case ErrorCode::kNonMonotoneCutoffs: return "NonMonotoneCutoffs";
    case ErrorCode::kNoPendingTasks: return "NoPendingTasks";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kLeaseExpired: return "LeaseExpired";
    case ErrorCode::kAlreadyLabeled: return "AlreadyLabeled";
    case ErrorCode::kNothingToUndo: return "NothingToUndo";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
  }
  return "Unknown";
}

void ValidateTraversabilityMap(const TraversabilityMap& map) {
  if (map.values.size() != static_cast<std::size_t>(map.height) * map.width) {
    throw Error(ErrorCode::kShapeMismatch, "traversability map size does not match shape");
  }
  for (double v : map.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kOutOfBounds, "traversability score outside [0, 1]");
    }
  }
}

std::string_view PairKindName(PairKind kind) {
  return kind == PairKind::kIntra ? "intra" : "cross";
}

std::string_view LabelSourceName(LabelSource source) {
  switch (source) {
    case LabelSource::kHuman: return "human";
    case LabelSource::kAuto: return "auto";
    case LabelSource::kSynthetic: return "synthetic";
  }
  return "human";
}

PairKind ParsePairKind(std::string_view s) {
  if (s == "intra") return PairKind::kIntra;
  if (s == "cross") return PairKind::kCross;
  throw Error(ErrorCode::kParse, "unknown pair kind '" + std::string(s) + "'");
}

LabelSource ParseLabelSource(std::string_view s) {
  if (s == "human") return LabelSource::kHuman;
  if (s == "auto") return LabelSource::kAuto;
  if (s == "synthetic") return LabelSource::kSynthetic;
  throw Error(ErrorCode::kParse, "unknown label source '" + std::string(s) + "'");
}

// --- manifest ---------------------------------------------------------------

DatasetManifest::DatasetManifest(std::vector<ImageEntry> images, int target_h,
                                 int target_w, std::filesystem::path base_dir)
    : images_(std::move(images)),
      target_h_(target_h),
      target_w_(target_w),
      base_dir_(std::move(base_dir)) {
  if (target_h_ < kMinImageSide || target_w_ < kMinImageSide) {
    throw Error(ErrorCode::kInvalidDimensions, "target resolution must be at least 16x16");
  }
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const ImageEntry& e = images_[i];
    if (e.width < kMinImageSide || e.height < kMinImageSide) {
      throw Error(ErrorCode::kInvalidDimensions,
                  "image '" + e.image_id + "' has dimensions " + std::to_string(e.width) +
                      "x" + std::to_string(e.height) + " (minimum 16x16)");
    }
    if (!index_.emplace(e.image_id, i).second) {
      throw Error(ErrorCode::kDuplicateImageId, "duplicate image_id '" + e.image_id + "'");
    }
  }
}

const ImageEntry* DatasetManifest::Find(std::string_view image_id) const {
  auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &images_[it->second];
}

const ImageEntry& DatasetManifest::Get(std::string_view image_id) const {
  return images_[IndexOf(image_id)];
}

std::size_t DatasetManifest::IndexOf(std::string_view image_id) const {
  auto it = index_.find(std::string(image_id));
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownImageId, "unknown image_id '" + std::string(image_id) + "'");
  }
  return it->second;
}

std::filesystem::path DatasetManifest::Resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

namespace {

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

json ParseLine(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed record: ") + e.what());
  }
}

template <typename T>
T Field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kParse, std::string("bad value for key '") + key + "'");
  }
}

int IntField(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw Error(ErrorCode::kParse, std::string("key '") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

json PointToJson(const PointRef& p) {
  return json{{"image_id", p.image_id}, {"x", p.x}, {"y", p.y}};
}

PointRef PointFromJson(const json& j) {
  return PointRef{Field<std::string>(j, "image_id"), IntField(j, "x"), IntField(j, "y")};
}

}  // namespace

DatasetManifest LoadManifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "manifest '" + path.string() + "' does not exist");
  }
  int target_h = kDefaultTargetHeight;
  int target_w = kDefaultTargetWidth;
  std::vector<ImageEntry> images;
  bool first = true;
  for (const std::string& line : ReadLines(path)) {
    json j = ParseLine(line);
    if (first && !j.contains("image_id")) {
      target_h = IntField(j, "target_h");
      target_w = IntField(j, "target_w");
      first = false;
      continue;
    }
    first = false;
    ImageEntry e;
    e.image_id = Field<std::string>(j, "image_id");
    e.path = Field<std::string>(j, "path");
    e.width = IntField(j, "width");
    e.height = IntField(j, "height");
    if (j.contains("gt_path") && !j.at("gt_path").is_null()) {
      e.gt_path = Field<std::string>(j, "gt_path");
    }
    images.push_back(std::move(e));
  }
  return DatasetManifest(std::move(images), target_h, target_w, path.parent_path());
}

void SaveManifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << json{{"target_h", manifest.target_height()}, {"target_w", manifest.target_width()}}
             .dump()
      << '\n';
  for (const ImageEntry& e : manifest.images()) {
    json j{{"image_id", e.image_id}, {"path", e.path}, {"width", e.width},
           {"height", e.height}};
    if (e.gt_path) j["gt_path"] = *e.gt_path;
    out << j.dump() << '\n';
  }
}

// --- validation -------------------------------------------------------------

double MinPairDistance(int width, int height) {
  return kMinDistanceFraction * static_cast<double>(std::min(width, height));
}

double PixelDistance(const PointRef& a, const PointRef& b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

void ValidatePoint(const PointRef& p, const DatasetManifest& manifest) {
  const ImageEntry& e = manifest.Get(p.image_id);
  if (p.x < 0 || p.x >= e.width || p.y < 0 || p.y >= e.height) {
    throw Error(ErrorCode::kOutOfBounds,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") outside image '" + p.image_id + "' of size " +
                    std::to_string(e.width) + "x" + std::to_string(e.height));
  }
}

void ValidateAnnotation(const PairAnnotation& ann, const DatasetManifest& manifest) {
  if (ann.pair_id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty pair_id");
  if (ann.t < -1 || ann.t > 1) {
    throw Error(ErrorCode::kInvalidLabel, "label t must be -1, 0 or 1");
  }
  ValidatePoint(ann.a, manifest);
  ValidatePoint(ann.b, manifest);
  const bool same_image = ann.a.image_id == ann.b.image_id;
  if ((ann.kind == PairKind::kIntra) != same_image) {
    throw Error(ErrorCode::kKindMismatch,
                "pair '" + ann.pair_id + "' is tagged " + std::string(PairKindName(ann.kind)) +
                    " but its points are in " + (same_image ? "one image" : "two images"));
  }
  if (ann.kind == PairKind::kIntra) {
    const ImageEntry& e = manifest.Get(ann.a.image_id);
    const double threshold = MinPairDistance(e.width, e.height);
    const double d = PixelDistance(ann.a, ann.b);
    if (d < threshold) {
      std::ostringstream msg;
      msg << "intra pair '" << ann.pair_id << "' points are " << d
          << " px apart; minimum is " << threshold << " px";
      throw Error(ErrorCode::kMinDistanceViolation, msg.str());
    }
  }
}

PointRef FromDisplay(std::string image_id, double display_x, double display_y,
                     double display_w, double display_h, int native_w, int native_h) {
  const double sx = display_x * native_w / display_w;
  const double sy = display_y * native_h / display_h;
  int x = static_cast<int>(std::lround(sx));
  int y = static_cast<int>(std::lround(sy));
  x = std::clamp(x, 0, native_w - 1);
  y = std::clamp(y, 0, native_h - 1);
  return PointRef{std::move(image_id), x, y};
}

// --- records ----------------------------------------------------------------

std::string AnnotationToJsonLine(const PairAnnotation& ann) {
  json j{{"pair_id", ann.pair_id},
         {"kind", PairKindName(ann.kind)},
         {"a", PointToJson(ann.a)},
         {"b", PointToJson(ann.b)},
         {"t", ann.t},
         {"source", LabelSourceName(ann.source)}};
  return j.dump();
}

namespace {

PairAnnotation AnnotationFromJson(const json& j) {
  PairAnnotation ann;
  ann.pair_id = Field<std::string>(j, "pair_id");
  ann.kind = ParsePairKind(Field<std::string>(j, "kind"));
  if (!j.contains("a") || !j.contains("b")) throw Error(ErrorCode::kParse, "missing point");
  ann.a = PointFromJson(j.at("a"));
  ann.b = PointFromJson(j.at("b"));
  ann.t = IntField(j, "t");
  if (ann.t < -1 || ann.t > 1) throw Error(ErrorCode::kInvalidLabel, "label t must be -1, 0 or 1");
  ann.source = ParseLabelSource(Field<std::string>(j, "source"));
  return ann;
}

StoreRecord RecordFromJson(const json& j) {
  StoreRecord r;
  if (j.contains("op")) {
    const std::string op = Field<std::string>(j, "op");
    if (op == "retract") {
      r.type = StoreRecord::Type::kRetract;
    } else if (op == "skip") {
      r.type = StoreRecord::Type::kSkip;
    } else {
      throw Error(ErrorCode::kParse, "unknown store op '" + op + "'");
    }
    r.pair_id = Field<std::string>(j, "pair_id");
    return r;
  }
  r.type = StoreRecord::Type::kAnnotation;
  r.annotation = AnnotationFromJson(j);
  r.pair_id = r.annotation.pair_id;
  return r;
}

}  // namespace

PairAnnotation AnnotationFromJsonLine(std::string_view line) {
  return AnnotationFromJson(ParseLine(line));
}

std::vector<StoreRecord> ReadStoreRecords(const std::filesystem::path& path) {
  std::vector<StoreRecord> records;
  if (!std::filesystem::exists(path)) return records;
  for (const std::string& line : ReadLines(path)) records.push_back(RecordFromJson(ParseLine(line)));
  return records;
}

std::vector<PairAnnotation> ResolveRecords(const std::vector<StoreRecord>& records) {
  // A retract removes the most recent live annotation with that pair id.
  std::vector<std::optional<PairAnnotation>> slots;
  std::unordered_map<std::string, std::vector<std::size_t>> live;
  for (const StoreRecord& r : records) {
    switch (r.type) {
      case StoreRecord::Type::kAnnotation:
        live[r.pair_id].push_back(slots.size());
        slots.emplace_back(r.annotation);
        break;
      case StoreRecord::Type::kRetract: {
        auto it = live.find(r.pair_id);
        if (it != live.end() && !it->second.empty()) {
          slots[it->second.back()].reset();
          it->second.pop_back();
        }
        break;
      }
      case StoreRecord::Type::kSkip:
        break;
    }
  }
  std::vector<PairAnnotation> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::vector<PairAnnotation> LoadAnnotations(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "annotation file '" + path.string() + "' does not exist");
  }
  return ResolveRecords(ReadStoreRecords(path));
}

void SaveAnnotations(const std::vector<PairAnnotation>& anns,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  for (const PairAnnotation& a : anns) out << AnnotationToJsonLine(a) << '\n';
}

// --- store ------------------------------------------------------------------

AnnotationStore::AnnotationStore(std::filesystem::path path) : path_(std::move(path)) {
  for (const PairAnnotation& a : ResolveRecords(ReadStoreRecords(path_))) {
    ++live_count_[a.pair_id];
  }
}

void AnnotationStore::WriteLine(const std::string& line) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to '" + path_.string() + "'");
  out << line << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path_.string() + "' failed");
}

void AnnotationStore::Append(const PairAnnotation& ann, const DatasetManifest& manifest) {
  ValidateAnnotation(ann, manifest);
  std::unique_lock lock(mutex_);
  auto it = live_count_.find(ann.pair_id);
  if (it != live_count_.end() && it->second > 0) {
    throw Error(ErrorCode::kDuplicatePairId, "pair_id '" + ann.pair_id + "' already stored");
  }
  WriteLine(AnnotationToJsonLine(ann));
  ++live_count_[ann.pair_id];
}

void AnnotationStore::Retract(const std::string& pair_id) {
  std::unique_lock lock(mutex_);
  auto it = live_count_.find(pair_id);
  if (it == live_count_.end() || it->second == 0) {
    throw Error(ErrorCode::kUnknownTask, "no live annotation '" + pair_id + "' to retract");
  }
  WriteLine(json{{"op", "retract"}, {"pair_id", pair_id}}.dump());
  --it->second;
}

void AnnotationStore::MarkSkipped(const std::string& pair_id) {
  std::unique_lock lock(mutex_);
  WriteLine(json{{"op", "skip"}, {"pair_id", pair_id}}.dump());
}

std::vector<StoreRecord> AnnotationStore::Records() const {
  std::shared_lock lock(mutex_);
  return ReadStoreRecords(path_);
}

std::vector<PairAnnotation> AnnotationStore::Effective() const {
  return ResolveRecords(Records());
}

}  // namespace reltrav
