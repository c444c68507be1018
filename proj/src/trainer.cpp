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
#include "reltrav/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace reltrav {

// --- oversampling -------------------------------------------------------------

OversampleStream::OversampleStream(std::span<const int> labels, double target, std::uint64_t seed)
    : target_(target), rng_(seed) {
  if (labels.empty()) throw Error(ErrorCode::kEmptyAnnotationSet, "no annotations to sample");
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "oversample target must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 0 ? equal_ : unequal_).push_back(i);
  }
}

std::size_t OversampleStream::Next() {
  if (equal_.empty()) return unequal_[rng_.Index(unequal_.size())];
  if (unequal_.empty()) return equal_[rng_.Index(equal_.size())];
  const std::vector<std::size_t>& pool = rng_.Bernoulli(target_) ? unequal_ : equal_;
  return pool[rng_.Index(pool.size())];
}

// --- augmentation -----------------------------------------------------------------

GeometricTransform GeometricTransform::Identity(int width, int height) {
  GeometricTransform g;
  g.crop_w = width;
  g.crop_h = height;
  g.out_w = width;
  g.out_h = height;
  return g;
}

std::optional<std::pair<double, double>> GeometricTransform::MapPoint(int x, int y) const {
  if (x < crop_x || x >= crop_x + crop_w || y < crop_y || y >= crop_y + crop_h) return std::nullopt;
  double u = (x - crop_x + 0.5) * out_w / crop_w - 0.5;
  const double v = (y - crop_y + 0.5) * out_h / crop_h - 0.5;
  if (flip) u = out_w - 1 - u;
  return std::make_pair(u, v);
}

GeometricTransform SampleGeometric(int src_h, int src_w, int out_h, int out_w,
                                   const AugmentConfig& config, Rng& rng) {
  GeometricTransform g;
  g.out_h = out_h;
  g.out_w = out_w;
  const double scale = rng.Uniform(config.crop_scale_min, 1.0);
  g.crop_w = std::clamp(static_cast<int>(std::lround(scale * src_w)), 1, src_w);
  g.crop_h = std::clamp(static_cast<int>(std::lround(scale * src_h)), 1, src_h);
  g.crop_x = rng.UniformInt(0, src_w - g.crop_w);
  g.crop_y = rng.UniformInt(0, src_h - g.crop_h);
  g.flip = rng.Bernoulli(config.flip_probability);
  return g;
}

ColorJitter SampleJitter(const AugmentConfig& config, Rng& rng) {
  ColorJitter j;
  j.brightness = rng.Uniform(1.0 - config.brightness, 1.0 + config.brightness);
  j.contrast = rng.Uniform(1.0 - config.contrast, 1.0 + config.contrast);
  j.saturation = rng.Uniform(1.0 - config.saturation, 1.0 + config.saturation);
  return j;
}

Tensor ApplyGeometric(const Tensor& image, const GeometricTransform& g) {
  Tensor out(image.channels, g.out_h, g.out_w);
  const double sx = static_cast<double>(g.crop_w) / g.out_w;
  const double sy = static_cast<double>(g.crop_h) / g.out_h;
  for (int v = 0; v < g.out_h; ++v) {
    const double fy = g.crop_y + (v + 0.5) * sy - 0.5;
    for (int u = 0; u < g.out_w; ++u) {
      const int uu = g.flip ? g.out_w - 1 - u : u;
      const double fx = g.crop_x + (uu + 0.5) * sx - 0.5;
      const BilinearTaps taps = BilinearAt(image.height, image.width, fx, fy);
      for (int c = 0; c < image.channels; ++c) {
        const double* plane = image.data.data() + c * image.plane();
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += taps.weight[k] * plane[taps.index[k]];
        out.at(c, v, u) = acc;
      }
    }
  }
  return out;
}

Tensor ApplyJitter(const Tensor& image, const ColorJitter& j) {
  if (j.brightness == 1.0 && j.contrast == 1.0 && j.saturation == 1.0) return image;
  Tensor out = image;
  const std::size_t n = out.plane();
  for (double& v : out.data) v *= j.brightness;
  if (out.channels == 3) {
    std::vector<double> gray(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gray[i] = 0.299 * out.data[i] + 0.587 * out.data[n + i] + 0.114 * out.data[2 * n + i];
      mean += gray[i];
    }
    mean /= static_cast<double>(n);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        double& v = out.data[c * n + i];
        v = (v - mean) * j.contrast + mean;
        const double g = (gray[i] - mean) * j.contrast + mean;
        v = g + (v - g) * j.saturation;
      }
    }
  }
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

AugmentedPair AugmentPair(const Tensor& image, std::span<const PointRef> points, int out_h,
                          int out_w, const AugmentConfig& config, Rng& rng) {
  AugmentedPair out;
  if (!config.enabled) {
    out.geometry = GeometricTransform::Identity(image.width, image.height);
    out.geometry.out_w = out_w;
    out.geometry.out_h = out_h;
    out.student_view = ApplyGeometric(image, out.geometry);
    out.teacher_view = out.student_view;
  } else {
    out.geometry = SampleGeometric(image.height, image.width, out_h, out_w, config, rng);
    const Tensor base = ApplyGeometric(image, out.geometry);
    out.student_view = ApplyJitter(base, SampleJitter(config, rng));
    out.teacher_view = ApplyJitter(base, SampleJitter(config, rng));
  }
  for (const PointRef& p : points) out.points.push_back(out.geometry.MapPoint(p.x, p.y));
  return out;
}

// --- training ---------------------------------------------------------------------

void TrainConfig::Validate() const {
  loss_config.Validate();
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (!(alpha >= 0.0 && alpha <= 1.0)) bad("alpha must lie in [0, 1]");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (steps < 0) bad("steps must be >= 0");
  if (steps == 0 && epochs < 1) bad("epochs must be >= 1");
  if (!(learning_rate > 0.0)) bad("learning rate must be > 0");
  if (!(oversample_target > 0.0 && oversample_target < 1.0)) bad("oversample target must lie in (0, 1)");
  if (!(augment.crop_scale_min > 0.0 && augment.crop_scale_min <= 1.0)) {
    bad("crop_scale_min must lie in (0, 1]");
  }
  if (!(augment.flip_probability >= 0.0 && augment.flip_probability <= 1.0)) {
    bad("flip probability must lie in [0, 1]");
  }
  model.Validate();
}

std::string StepLog::ToJson() const {
  return nlohmann::ordered_json{{"step", step},     {"acc_loss", acc_loss}, {"cons_loss", cons_loss},
                                {"total", total},   {"lr", lr},             {"pairs", pairs}}
      .dump();
}

namespace {

ModelConfig WithManifestResolution(ModelConfig model, const DatasetManifest& manifest) {
  model.input_height = manifest.target_height();
  model.input_width = manifest.target_width();
  return model;
}

std::vector<PairAnnotation> SelectAnnotations(const TrainConfig& config,
                                              std::vector<PairAnnotation> annotations) {
  if (config.intra_only) {
    std::erase_if(annotations, [](const PairAnnotation& a) { return a.kind == PairKind::kCross; });
  }
  if (config.label_budget > 0 && config.label_budget < annotations.size()) {
    std::vector<std::size_t> order(annotations.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), Rng(DeriveSeed(config.seed, "budget")).engine());
    order.resize(config.label_budget);
    std::sort(order.begin(), order.end());
    std::vector<PairAnnotation> kept;
    kept.reserve(order.size());
    for (std::size_t i : order) kept.push_back(std::move(annotations[i]));
    annotations = std::move(kept);
  }
  if (annotations.empty()) throw Error(ErrorCode::kEmptyAnnotationSet, "no annotations to train on");
  return annotations;
}

}  // namespace

Trainer::Trainer(TrainConfig config, const DatasetManifest& manifest,
                 std::vector<PairAnnotation> annotations, ImageProvider images)
    : config_(std::move(config)),
      manifest_(manifest),
      images_(std::move(images)),
      network_(WithManifestResolution(config_.model, manifest)),
      rng_(DeriveSeed(config_.seed, "augment")) {
  config_.model = network_.config();
  config_.Validate();
  annotations_ = SelectAnnotations(config_, std::move(annotations));
  std::set<std::string> ids;
  std::vector<int> labels;
  for (const PairAnnotation& a : annotations_) {
    ValidateAnnotation(a, manifest_);
    ids.insert(a.a.image_id);
    ids.insert(a.b.image_id);
    labels.push_back(a.t);
    image_touches_ += a.a.image_id == a.b.image_id ? 1 : 2;
  }
  num_images_ = ids.size();
  stream_.emplace(labels, config_.oversample_target, DeriveSeed(config_.seed, "stream"));

  student_ = network_.InitParams(DeriveSeed(config_.seed, "init"));
  if (config_.pretrained_checkpoint) {
    const Checkpoint pre = LoadCheckpoint(*config_.pretrained_checkpoint);
    ImportPretrained(&student_, pre.teacher);
  }
  teacher_ = student_;
  adam_m_ = student_.ZerosLike();
  adam_v_ = student_.ZerosLike();
}

const Tensor& Trainer::Image(const std::string& image_id) const {
  auto it = cache_.find(image_id);
  if (it == cache_.end()) it = cache_.emplace(image_id, images_(manifest_.Get(image_id))).first;
  return it->second;
}

std::int64_t Trainer::TotalSteps() const {
  if (config_.steps > 0) return config_.steps;
  const auto per_epoch = static_cast<std::int64_t>(
      (image_touches_ + static_cast<std::size_t>(config_.batch_size) - 1) / config_.batch_size);
  return per_epoch * config_.epochs;
}

StepLog Trainer::Step() {
  const std::size_t want = std::min<std::size_t>(config_.batch_size, num_images_);
  const std::size_t max_draws = 64 * static_cast<std::size_t>(config_.batch_size);
  std::vector<PairAnnotation> batch;
  std::set<std::string> ids;
  while (ids.size() < want && batch.size() < max_draws) {
    const PairAnnotation& a = annotations_[stream_->Next()];
    batch.push_back(a);
    ids.insert(a.a.image_id);
    ids.insert(a.b.image_id);
  }
  return StepOn(batch);
}

StepLog Trainer::StepOn(std::span<const PairAnnotation> batch) {
  const int h = network_.config().input_height;
  const int w = network_.config().input_width;

  // Images in first-seen order, with the points each batch entry puts on them.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<PointRef>> points;
  // Per annotation: (slot, point index) for its a and b ends.
  std::vector<std::array<std::pair<std::size_t, std::size_t>, 2>> where(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const PointRef* ends[2] = {&batch[i].a, &batch[i].b};
    for (int e = 0; e < 2; ++e) {
      auto [it, inserted] = slot.emplace(ends[e]->image_id, order.size());
      if (inserted) {
        order.push_back(ends[e]->image_id);
        points.emplace_back();
      }
      where[i][e] = {it->second, points[it->second].size()};
      points[it->second].push_back(*ends[e]);
    }
  }

  const std::size_t n_img = order.size();
  std::vector<ForwardCache> caches(n_img);
  std::vector<TraversabilityMap> student_out(n_img);
  std::vector<TraversabilityMap> teacher_out(n_img);
  std::vector<std::vector<std::optional<std::pair<double, double>>>> mapped(n_img);
  for (std::size_t s = 0; s < n_img; ++s) {
    const Tensor& src = Image(order[s]);
    Tensor student_view;
    Tensor teacher_view;
    if (config_.augment.enabled) {
      AugmentedPair aug = AugmentPair(src, points[s], h, w, config_.augment, rng_);
      student_view = std::move(aug.student_view);
      teacher_view = std::move(aug.teacher_view);
      mapped[s] = std::move(aug.points);
    } else {
      student_view = ResizeBilinear(src, h, w);
      teacher_view = student_view;
      for (const PointRef& p : points[s]) {
        mapped[s].emplace_back(std::make_pair(MapCoordinate(p.x, src.width, w),
                                              MapCoordinate(p.y, src.height, h)));
      }
    }
    student_out[s] = network_.Forward(student_, student_view, &caches[s]);
    teacher_out[s] = network_.Forward(teacher_, teacher_view);
  }

  std::vector<Grid<double>> d_out;
  d_out.reserve(n_img);
  for (std::size_t s = 0; s < n_img; ++s) d_out.emplace_back(h, w);

  struct Term {
    BilinearTaps ta, tb;
    std::size_t sa, sb;
    LossValue loss;
  };
  std::vector<Term> terms;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto [sa, ia] = where[i][0];
    const auto [sb, ib] = where[i][1];
    const auto& pa = mapped[sa][ia];
    const auto& pb = mapped[sb][ib];
    if (!pa || !pb) continue;
    Term term;
    term.sa = sa;
    term.sb = sb;
    term.ta = BilinearAt(h, w, pa->first, pa->second);
    term.tb = BilinearAt(h, w, pb->first, pb->second);
    double va = 0.0;
    double vb = 0.0;
    for (int k = 0; k < 4; ++k) {
      va += term.ta.weight[k] * student_out[sa].values[term.ta.index[k]];
      vb += term.tb.weight[k] * student_out[sb].values[term.tb.index[k]];
    }
    term.loss = losses::Pair(config_.loss, va, vb, batch[i].t, config_.loss_config);
    terms.push_back(term);
  }

  StepLog log;
  log.pairs = terms.size();
  log.lr = config_.learning_rate;
  if (!terms.empty()) {
    const double scale = 1.0 / static_cast<double>(terms.size());
    for (const Term& term : terms) {
      log.acc_loss += term.loss.value * scale;
      for (int k = 0; k < 4; ++k) {
        d_out[term.sa].values[term.ta.index[k]] += scale * term.loss.d_pa * term.ta.weight[k];
        d_out[term.sb].values[term.tb.index[k]] += scale * term.loss.d_pb * term.tb.weight[k];
      }
    }
  }
  const double lambda = config_.loss_config.consistency_weight;
  for (std::size_t s = 0; s < n_img; ++s) {
    log.cons_loss += losses::Consistency(student_out[s], teacher_out[s]) / static_cast<double>(n_img);
    if (lambda != 0.0) {
      const Grid<double> g = losses::ConsistencyGrad(student_out[s], teacher_out[s]);
      const double scale = lambda / static_cast<double>(n_img);
      for (std::size_t p = 0; p < g.values.size(); ++p) d_out[s].values[p] += scale * g.values[p];
    }
  }
  log.total = losses::Total(log.acc_loss, log.cons_loss, lambda);
  log.step = step_ + 1;
  if (!std::isfinite(log.total)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << log.step << ": acc=" << log.acc_loss
        << " cons=" << log.cons_loss << " pairs=" << log.pairs;
    throw Error(ErrorCode::kNonFiniteLoss, msg.str());
  }

  ParamSet grads = student_.ZerosLike();
  for (std::size_t s = 0; s < n_img; ++s) network_.Backward(student_, caches[s], d_out[s], &grads);
  AdamStep(grads);
  EmaUpdateInPlace(&teacher_, student_, config_.alpha);
  ++step_;
  return log;
}

void Trainer::AdamStep(const ParamSet& grads) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const double t = static_cast<double>(step_ + 1);
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  auto& params = student_.arrays();
  for (std::size_t a = 0; a < params.size(); ++a) {
    std::vector<double>& p = params[a].values;
    const std::vector<double>& g = grads.arrays()[a].values;
    std::vector<double>& m = adam_m_.arrays()[a].values;
    std::vector<double>& v = adam_v_.arrays()[a].values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      p[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }
}

double Trainer::AccuracyLoss(std::span<const PairAnnotation> batch) const {
  if (batch.empty()) return 0.0;
  std::unordered_map<std::string, TraversabilityMap> maps;
  auto read = [&](const PointRef& p) {
    auto it = maps.find(p.image_id);
    const Tensor& src = Image(p.image_id);
    if (it == maps.end()) it = maps.emplace(p.image_id, PredictMap(network_, student_, src)).first;
    const TraversabilityMap& m = it->second;
    return SampleBilinear(m, MapCoordinate(p.x, src.width, m.width),
                          MapCoordinate(p.y, src.height, m.height));
  };
  double sum = 0.0;
  for (const PairAnnotation& a : batch) {
    sum += losses::Pair(config_.loss, read(a.a), read(a.b), a.t, config_.loss_config).value;
  }
  return sum / static_cast<double>(batch.size());
}

Checkpoint Trainer::MakeCheckpoint() const {
  Checkpoint c;
  c.config = network_.config();
  c.student = student_;
  c.teacher = teacher_;
  c.step = step_;
  c.alpha = config_.alpha;
  c.loss_name = std::string(LossKindName(config_.loss));
  c.margin = config_.loss_config.margin;
  return c;
}

TrainResult Trainer::Run(const std::function<void(const StepLog&)>& on_step) {
  TrainResult result;
  const std::int64_t total = TotalSteps();
  while (step_ < total) {
    StepLog log = Step();
    if (on_step) on_step(log);
    result.log.push_back(log);
  }
  result.checkpoint = MakeCheckpoint();
  return result;
}

TrainResult Train(const TrainConfig& config, const DatasetManifest& manifest,
                  std::vector<PairAnnotation> annotations, ImageProvider images,
                  const std::function<void(const StepLog&)>& on_step) {
  Trainer trainer(config, manifest, std::move(annotations), std::move(images));
  return trainer.Run(on_step);
}

}  // namespace reltrav
