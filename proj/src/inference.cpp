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
#include "reltrav/inference.hpp"

#include <unordered_map>

namespace reltrav {

ImageProvider DiskImageProvider(const DatasetManifest& manifest) {
  return [&manifest](const ImageEntry& e) {
    Tensor t = ToTensor(ReadPpm(manifest.Resolve(e.path)));
    if (t.width != e.width || t.height != e.height) {
      throw Error(ErrorCode::kInvalidDimensions,
                  "image " + e.image_id + " does not match its manifest dimensions");
    }
    return t;
  };
}

ClassMapProvider DiskClassMapProvider(const DatasetManifest& manifest) {
  return [&manifest](const ImageEntry& e) {
    if (!e.gt_path) throw Error(ErrorCode::kInvalidArgument, "image " + e.image_id + " has no gt_path");
    return ReadPgm(manifest.Resolve(*e.gt_path));
  };
}

double MapCoordinate(double v, int from_size, int to_size) {
  return (v + 0.5) * static_cast<double>(to_size) / static_cast<double>(from_size) - 0.5;
}

TraversabilityMap PredictMap(const Network& network, const ParamSet& params, const Tensor& image) {
  const ModelConfig& cfg = network.config();
  return network.Forward(params, ResizeBilinear(image, cfg.input_height, cfg.input_width));
}

std::vector<std::pair<double, double>> PredictPairs(const Network& network, const ParamSet& params,
                                                    const DatasetManifest& manifest,
                                                    std::span<const PairAnnotation> annotations,
                                                    const ImageProvider& images) {
  std::unordered_map<std::string, TraversabilityMap> maps;
  auto read = [&](const PointRef& p) {
    const ImageEntry& e = manifest.Get(p.image_id);
    auto it = maps.find(p.image_id);
    if (it == maps.end()) {
      it = maps.emplace(p.image_id, PredictMap(network, params, images(e))).first;
    }
    const TraversabilityMap& m = it->second;
    return SampleBilinear(m, MapCoordinate(p.x, e.width, m.width),
                          MapCoordinate(p.y, e.height, m.height));
  };
  std::vector<std::pair<double, double>> out;
  out.reserve(annotations.size());
  for (const PairAnnotation& ann : annotations) {
    const double pa = read(ann.a);
    const double pb = read(ann.b);
    out.emplace_back(pa, pb);
  }
  return out;
}

HdrReport EvaluateHdr(const Network& network, const ParamSet& params,
                      const DatasetManifest& manifest, std::span<const PairAnnotation> annotations,
                      std::span<const double> taus, const ImageProvider& images) {
  const auto preds = PredictPairs(network, params, manifest, annotations, images);
  std::vector<int> labels;
  labels.reserve(annotations.size());
  for (const PairAnnotation& a : annotations) labels.push_back(a.t);
  return Hdr(preds, labels, taus);
}

namespace {

// Runs the model and brings the class map to the model's resolution.
template <typename Fn>
void ForEachImage(const Network& network, const ParamSet& params, const DatasetManifest& manifest,
                  const TierTable& tiers, const ImageProvider& images,
                  const ClassMapProvider& classes, Fn&& fn) {
  const ModelConfig& cfg = network.config();
  for (const ImageEntry& e : manifest.images()) {
    const TraversabilityMap pred = PredictMap(network, params, images(e));
    const Grid<int> cls = ResizeNearest(classes(e), cfg.input_height, cfg.input_width);
    TierMap gt(cls.height, cls.width);
    for (std::size_t i = 0; i < cls.values.size(); ++i) gt.values[i] = tiers.TierOf(cls.values[i]);
    fn(pred, gt);
  }
}

}  // namespace

std::map<int, std::vector<double>> CollectTierScores(const Network& network, const ParamSet& params,
                                                     const DatasetManifest& manifest,
                                                     const TierTable& tiers,
                                                     const ImageProvider& images,
                                                     const ClassMapProvider& classes) {
  std::map<int, std::vector<double>> out;
  ForEachImage(network, params, manifest, tiers, images, classes,
               [&](const TraversabilityMap& pred, const TierMap& gt) {
                 for (std::size_t i = 0; i < gt.values.size(); ++i) {
                   out[gt.values[i]].push_back(pred.values[i]);
                 }
               });
  return out;
}

SegMetrics SegEvaluate(const Network& network, const ParamSet& params,
                       const DatasetManifest& manifest, const TierTable& tiers,
                       const TierCutoffs& cutoffs, const ImageProvider& images,
                       const ClassMapProvider& classes) {
  ConfusionMatrix cm{};
  ForEachImage(network, params, manifest, tiers, images, classes,
               [&](const TraversabilityMap& pred, const TierMap& gt) {
                 AccumulateConfusion(Discretize(pred, cutoffs), gt, &cm);
               });
  return MetricsFromConfusion(cm);
}

double InteriorFraction(std::span<const TraversabilityMap> maps, double lo, double hi) {
  std::size_t inside = 0;
  std::size_t total = 0;
  for (const TraversabilityMap& m : maps) {
    for (double v : m.values) inside += (v >= lo && v <= hi);
    total += m.values.size();
  }
  if (total == 0) throw Error(ErrorCode::kEmptySet, "no pixels");
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace reltrav
