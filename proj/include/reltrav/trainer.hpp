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
#ifndef RELTRAV_TRAINER_HPP_
#define RELTRAV_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/image.hpp"
#include "reltrav/inference.hpp"
#include "reltrav/losses.hpp"
#include "reltrav/model.hpp"
#include "reltrav/rng.hpp"

namespace reltrav {

// --- oversampling -------------------------------------------------------------

// Endless draw over annotation indices. Each draw picks an inequality label
// (t != 0) with probability `target` and an equality label otherwise, uniform
// within the group. If either group is empty the draw is uniform over all.
class OversampleStream {
 public:
  // kEmptyAnnotationSet when `labels` is empty; kInvalidArgument unless
  // 0 < target < 1.
  OversampleStream(std::span<const int> labels, double target, std::uint64_t seed);

  std::size_t Next();

 private:
  std::vector<std::size_t> equal_;
  std::vector<std::size_t> unequal_;
  double target_;
  Rng rng_;
};

// --- augmentation -----------------------------------------------------------------

struct AugmentConfig {
  bool enabled = true;
  double crop_scale_min = 0.8;  // crop side as a fraction of the image side
  double flip_probability = 0.5;
  double brightness = 0.2;  // multiplicative factor drawn from [1 - b, 1 + b]
  double contrast = 0.2;
  double saturation = 0.2;
};

// Crop (in source pixels) resized to out_w x out_h, then optional horizontal
// flip. Shared by the student and teacher views.
struct GeometricTransform {
  int crop_x = 0;
  int crop_y = 0;
  int crop_w = 0;
  int crop_h = 0;
  bool flip = false;
  int out_w = 0;
  int out_h = 0;

  static GeometricTransform Identity(int width, int height);
  // Maps a source pixel to output coordinates, or nullopt if the crop drops it.
  std::optional<std::pair<double, double>> MapPoint(int x, int y) const;
};

struct ColorJitter {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
};

GeometricTransform SampleGeometric(int src_h, int src_w, int out_h, int out_w,
                                   const AugmentConfig& config, Rng& rng);
ColorJitter SampleJitter(const AugmentConfig& config, Rng& rng);
Tensor ApplyGeometric(const Tensor& image, const GeometricTransform& transform);
Tensor ApplyJitter(const Tensor& image, const ColorJitter& jitter);

struct AugmentedPair {
  Tensor student_view;
  Tensor teacher_view;
  GeometricTransform geometry;
  // Transformed coordinates per input point; nullopt when cropped out.
  std::vector<std::optional<std::pair<double, double>>> points;
};

// One geometric transform for both views, independent color jitter per view.
// With augmentation disabled both views are the image resampled to
// out_h x out_w.
AugmentedPair AugmentPair(const Tensor& image, std::span<const PointRef> points, int out_h,
                          int out_w, const AugmentConfig& config, Rng& rng);

// --- training ---------------------------------------------------------------------

struct TrainConfig {
  LossKind loss = LossKind::kRizz;
  LossConfig loss_config;
  double alpha = 0.99;  // teacher EMA decay
  int epochs = 10;
  // Annotations are drawn until the step touches at least this many images
  // (a cross pair can add one extra).
  int batch_size = 4;
  std::uint64_t seed = 0;
  AugmentConfig augment;
  double oversample_target = 0.5;
  double learning_rate = 1e-3;
  bool intra_only = false;
  // Keep at most this many annotations (seeded subsample); 0 keeps all.
  std::size_t label_budget = 0;
  // Total optimizer steps; 0 derives epochs * ceil(T / batch_size), where T
  // counts one image per intra pair and two per cross pair, so an epoch draws
  // about as many annotations as the training set holds.
  std::int64_t steps = 0;
  ModelConfig model;
  std::optional<std::string> pretrained_checkpoint;

  void Validate() const;
};

struct StepLog {
  std::int64_t step = 0;
  double acc_loss = 0.0;
  double cons_loss = 0.0;
  double total = 0.0;
  double lr = 0.0;
  std::size_t pairs = 0;  // pairs that survived the crop
  std::string ToJson() const;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepLog> log;
};

class Trainer {
 public:
  // Cross pairs are removed first when config.intra_only is set, then the
  // label budget is applied. kEmptyAnnotationSet if nothing remains.
  Trainer(TrainConfig config, const DatasetManifest& manifest,
          std::vector<PairAnnotation> annotations, ImageProvider images);

  // Draws a batch from the oversampled stream and trains on it.
  StepLog Step();
  // One optimizer step on the given annotations.
  StepLog StepOn(std::span<const PairAnnotation> batch);
  TrainResult Run(const std::function<void(const StepLog&)>& on_step = {});

  // Mean pairwise loss of the student on un-augmented full images.
  double AccuracyLoss(std::span<const PairAnnotation> batch) const;

  std::int64_t TotalSteps() const;
  const std::vector<PairAnnotation>& annotations() const { return annotations_; }
  const ParamSet& student() const { return student_; }
  const ParamSet& teacher() const { return teacher_; }
  const Network& network() const { return network_; }
  Checkpoint MakeCheckpoint() const;

 private:
  const Tensor& Image(const std::string& image_id) const;
  void AdamStep(const ParamSet& grads);

  TrainConfig config_;
  const DatasetManifest& manifest_;
  std::vector<PairAnnotation> annotations_;
  ImageProvider images_;
  Network network_;
  ParamSet student_;
  ParamSet teacher_;
  ParamSet adam_m_;
  ParamSet adam_v_;
  std::int64_t step_ = 0;
  std::size_t num_images_ = 0;
  std::size_t image_touches_ = 0;
  std::optional<OversampleStream> stream_;
  Rng rng_;
  mutable std::unordered_map<std::string, Tensor> cache_;
};

TrainResult Train(const TrainConfig& config, const DatasetManifest& manifest,
                  std::vector<PairAnnotation> annotations, ImageProvider images,
                  const std::function<void(const StepLog&)>& on_step = {});

}  // namespace reltrav

#endif  // RELTRAV_TRAINER_HPP_
