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
#ifndef RELTRAV_INFERENCE_HPP_
#define RELTRAV_INFERENCE_HPP_

#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/image.hpp"
#include "reltrav/metrics.hpp"
#include "reltrav/model.hpp"
#include "reltrav/pairgen.hpp"

namespace reltrav {

// Supplies a native-resolution RGB tensor for a manifest entry.
using ImageProvider = std::function<Tensor(const ImageEntry&)>;
// Supplies the ground-truth class map for a manifest entry.
using ClassMapProvider = std::function<Grid<int>(const ImageEntry&)>;

// Reads entry.path (binary PPM) relative to the manifest.
ImageProvider DiskImageProvider(const DatasetManifest& manifest);
// Reads entry.gt_path (PGM class ids) relative to the manifest.
ClassMapProvider DiskClassMapProvider(const DatasetManifest& manifest);

// Pixel-center mapping between two resolutions of the same frame.
double MapCoordinate(double v, int from_size, int to_size);

// Resizes the whole image to the model's input resolution and runs it.
TraversabilityMap PredictMap(const Network& network, const ParamSet& params, const Tensor& image);

// Predictions (p_a, p_b) at the annotated points, read bilinearly from each
// point's own image.
std::vector<std::pair<double, double>> PredictPairs(const Network& network, const ParamSet& params,
                                                    const DatasetManifest& manifest,
                                                    std::span<const PairAnnotation> annotations,
                                                    const ImageProvider& images);

HdrReport EvaluateHdr(const Network& network, const ParamSet& params,
                      const DatasetManifest& manifest, std::span<const PairAnnotation> annotations,
                      std::span<const double> taus, const ImageProvider& images);

// Model scores on every pixel grouped by the ground-truth tier of the pixel.
std::map<int, std::vector<double>> CollectTierScores(const Network& network, const ParamSet& params,
                                                     const DatasetManifest& manifest,
                                                     const TierTable& tiers,
                                                     const ImageProvider& images,
                                                     const ClassMapProvider& classes);

SegMetrics SegEvaluate(const Network& network, const ParamSet& params,
                       const DatasetManifest& manifest, const TierTable& tiers,
                       const TierCutoffs& cutoffs, const ImageProvider& images,
                       const ClassMapProvider& classes);

// Fraction of all pixels whose score lies in [lo, hi].
double InteriorFraction(std::span<const TraversabilityMap> maps, double lo = 0.2, double hi = 0.8);

}  // namespace reltrav

#endif  // RELTRAV_INFERENCE_HPP_
