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
#ifndef RELTRAV_CORE_HPP_
#define RELTRAV_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace reltrav {

enum class ErrorCode {
  kIo,
  kParse,
  kInvalidArgument,
  kDuplicateImageId,
  kInvalidDimensions,
  kUnknownImageId,
  kOutOfBounds,
  kMinDistanceViolation,
  kKindMismatch,
  kDuplicatePairId,
  kInvalidLabel,
  kSingleImageDataset,
  kUnknownClassId,
  kShapeMismatch,
  kEmptyAnnotationSet,
  kEmptySet,
  kLengthMismatch,
  kEmptyTier,
  kNonMonotoneCutoffs,
  kNoPendingTasks,
  kUnknownTask,
  kLeaseExpired,
  kAlreadyLabeled,
  kNothingToUndo,
  kNonFiniteLoss,
};

// Stable CamelCase name, e.g. "MinDistanceViolation". Used in HTTP error
// bodies and CLI messages.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Dense row-major 2-D field.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(int h, int w, T fill = T{})
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  T& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return values.size(); }
  bool SameShape(const Grid& other) const {
    return height == other.height && width == other.width;
  }
  bool operator==(const Grid&) const = default;
};

// Per-pixel traversability scores; every element lies in [0, 1].
using TraversabilityMap = Grid<double>;
// Per-pixel tier ids in {0, 1, 2, 3}.
using TierMap = Grid<int>;

// Throws kOutOfBounds if any value is outside [0, 1] or non-finite.
void ValidateTraversabilityMap(const TraversabilityMap& map);

struct PointRef {
  std::string image_id;
  int x = 0;
  int y = 0;
  bool operator==(const PointRef&) const = default;
};

enum class PairKind { kIntra, kCross };
enum class LabelSource { kHuman, kAuto, kSynthetic };

std::string_view PairKindName(PairKind kind);
std::string_view LabelSourceName(LabelSource source);
PairKind ParsePairKind(std::string_view s);
LabelSource ParseLabelSource(std::string_view s);

// One ordinal judgment. t = 1: b more traversable; t = -1: a more
// traversable; t = 0: equal.
struct PairAnnotation {
  std::string pair_id;
  PointRef a;
  PointRef b;
  int t = 0;
  PairKind kind = PairKind::kIntra;
  LabelSource source = LabelSource::kHuman;
  bool operator==(const PairAnnotation&) const = default;
};

struct ImageEntry {
  std::string image_id;
  std::string path;
  int width = 0;
  int height = 0;
  std::optional<std::string> gt_path;
  bool operator==(const ImageEntry&) const = default;
};

inline constexpr int kDefaultTargetHeight = 240;
inline constexpr int kDefaultTargetWidth = 424;
inline constexpr int kMinImageSide = 16;
inline constexpr double kMinDistanceFraction = 0.05;

class DatasetManifest {
 public:
  DatasetManifest() = default;
  DatasetManifest(std::vector<ImageEntry> images, int target_h = kDefaultTargetHeight,
                  int target_w = kDefaultTargetWidth,
                  std::filesystem::path base_dir = {});

  const std::vector<ImageEntry>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }
  int target_height() const { return target_h_; }
  int target_width() const { return target_w_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

  // nullptr when absent.
  const ImageEntry* Find(std::string_view image_id) const;
  const ImageEntry& Get(std::string_view image_id) const;  // kUnknownImageId
  std::size_t IndexOf(std::string_view image_id) const;    // kUnknownImageId

  // Relative paths resolve against the manifest's directory.
  std::filesystem::path Resolve(const std::string& path) const;

 private:
  std::vector<ImageEntry> images_;
  int target_h_ = kDefaultTargetHeight;
  int target_w_ = kDefaultTargetWidth;
  std::filesystem::path base_dir_;
  std::unordered_map<std::string, std::size_t> index_;
};

DatasetManifest LoadManifest(const std::filesystem::path& path);
void SaveManifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// 0.05 * min(W, H), compared with >= and no rounding.
double MinPairDistance(int width, int height);
double PixelDistance(const PointRef& a, const PointRef& b);

// Throws the matching ErrorCode for the first violated invariant.
void ValidatePoint(const PointRef& p, const DatasetManifest& manifest);
void ValidateAnnotation(const PairAnnotation& ann, const DatasetManifest& manifest);

// Maps a coordinate picked at display resolution back to native pixels by
// nearest integer, clamped into the image.
PointRef FromDisplay(std::string image_id, double display_x, double display_y,
                     double display_w, double display_h, int native_w,
                     int native_h);

// --- line-delimited persistence -------------------------------------------

std::string AnnotationToJsonLine(const PairAnnotation& ann);
PairAnnotation AnnotationFromJsonLine(std::string_view line);

// One line of the append-only annotation log: either an annotation or a
// control record that retracts / skips a pair id.
struct StoreRecord {
  enum class Type { kAnnotation, kRetract, kSkip };
  Type type = Type::kAnnotation;
  PairAnnotation annotation;  // populated for kAnnotation
  std::string pair_id;        // always populated
  bool operator==(const StoreRecord&) const = default;
};

std::vector<StoreRecord> ReadStoreRecords(const std::filesystem::path& path);
// Tombstone-resolved annotations in log order.
std::vector<PairAnnotation> ResolveRecords(const std::vector<StoreRecord>& records);
// Reads a store (or a plain annotation file) and returns its effective state.
std::vector<PairAnnotation> LoadAnnotations(const std::filesystem::path& path);
void SaveAnnotations(const std::vector<PairAnnotation>& anns,
                     const std::filesystem::path& path);

// Append-only annotation log. Concurrent readers, one writer at a time.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path path);

  // Validates against the manifest and rejects pair ids that are already
  // live (not retracted) in the store.
  void Append(const PairAnnotation& ann, const DatasetManifest& manifest);
  void Retract(const std::string& pair_id);
  void MarkSkipped(const std::string& pair_id);

  std::vector<StoreRecord> Records() const;
  std::vector<PairAnnotation> Effective() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  void WriteLine(const std::string& line);

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, int> live_count_;
};

}  // namespace reltrav

#endif  // RELTRAV_CORE_HPP_
