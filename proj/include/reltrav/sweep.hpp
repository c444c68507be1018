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
#ifndef RELTRAV_SWEEP_HPP_
#define RELTRAV_SWEEP_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reltrav/synthworld.hpp"
#include "reltrav/trainer.hpp"

namespace reltrav {

// Label-budget study on synthetic data: HDR on held-out pairs as a function
// of the fraction of annotated training images.
struct SweepConfig {
  std::vector<double> fractions{0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int n_images = 200;
  int n_heldout = 100;
  double tau = 0.25;
  SynthConfig synth;
  // Base training config; the seed is replaced per run. With steps = 0 every
  // fraction trains for the same number of epochs over its own labels.
  TrainConfig train;
};

struct SweepRow {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t images = 0;  // annotated training images
  std::size_t labels = 0;
  double hdr = 0.0;
  std::string ToJson() const;
};

struct SweepSummary {
  double fraction = 0.0;
  double median_hdr = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summary;  // ascending fraction
  // Median HDR never increases as the fraction grows.
  bool MonotoneNonIncreasing() const;
  std::string ToJsonLines() const;
};

// For each seed, fractions select nested prefixes of one seeded image order;
// an annotation is kept when its first point lies in a selected image.
SweepResult RunLabelSweep(const SweepConfig& config,
                          const std::function<void(const SweepRow&)>& on_row = {});

double Median(std::vector<double> values);

}  // namespace reltrav

#endif  // RELTRAV_SWEEP_HPP_
