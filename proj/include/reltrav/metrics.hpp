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
#ifndef RELTRAV_METRICS_HPP_
#define RELTRAV_METRICS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/pairgen.hpp"

namespace reltrav {

// Thresholded ordinal: 1 if p_b - p_a > tau, -1 if p_b - p_a < -tau, else 0
// (equality band is closed).
int OrdinalOf(double p_a, double p_b, double tau);

struct HdrRow {
  double tau = 0.0;
  double hdr = 0.0;
  std::optional<double> hdr_eq;   // absent when n_eq == 0
  std::optional<double> hdr_neq;  // absent when n_neq == 0
  std::size_t n = 0;
  std::size_t n_eq = 0;
  std::size_t n_neq = 0;
  // Raw disagreement counts; hdr = (miss_eq + miss_neq) / n exactly.
  std::size_t miss_eq = 0;
  std::size_t miss_neq = 0;
};

struct HdrReport {
  std::vector<HdrRow> rows;
  const HdrRow& At(double tau) const;
  // One {tau, hdr, hdr_eq, hdr_neq, n, n_eq, n_neq} object per line.
  std::string ToJsonLines() const;
  std::string ToTable() const;
};

// Human disagreement rate per threshold, split by ground-truth label class.
// kEmptySet for no pairs, kLengthMismatch for differing lengths.
HdrReport Hdr(std::span<const std::pair<double, double>> predictions, std::span<const int> labels,
              std::span<const double> taus);

inline constexpr int kNumTiers = 4;

struct TierCutoffs {
  // cutoff[3] separates tier 3 from 2, cutoff[2] tier 2 from 1, cutoff[1]
  // tier 1 from 0. cutoff[0] is unused.
  std::array<double, kNumTiers> cutoff{};
  std::array<double, kNumTiers> mean{};
  std::array<double, kNumTiers> stddev{};  // population

  std::string ToJson(const TierTable* tiers = nullptr) const;
  static TierCutoffs FromJson(const std::string& text, TierTable* tiers = nullptr);
};

// cutoff_N = ((mu_N - sigma_N) + (mu_{N-1} + sigma_{N-1})) / 2 for N in
// {3, 2, 1}. kEmptyTier if a tier has no scores; kNonMonotoneCutoffs unless
// cutoff_3 > cutoff_2 > cutoff_1.
TierCutoffs ComputeTierCutoffs(const std::map<int, std::vector<double>>& scores_by_tier);

// Lower tier at an exact cutoff.
int TierOfScore(double score, const TierCutoffs& cutoffs);
TierMap Discretize(const TraversabilityMap& map, const TierCutoffs& cutoffs);

// Rows: ground truth, columns: prediction.
using ConfusionMatrix = std::array<std::array<std::int64_t, kNumTiers>, kNumTiers>;

struct SegMetrics {
  std::array<std::optional<double>, kNumTiers> iou;  // absent for classes not in gt
  std::array<std::optional<double>, kNumTiers> acc;
  std::array<std::int64_t, kNumTiers> gt_count{};
  double miou = 0.0;
  double fw_miou = 0.0;
  double macc = 0.0;
  double fw_macc = 0.0;
  std::string ToJson() const;
};

void AccumulateConfusion(const TierMap& pred, const TierMap& gt, ConfusionMatrix* cm);
SegMetrics MetricsFromConfusion(const ConfusionMatrix& cm);
// kShapeMismatch on differing shapes; kInvalidArgument for tiers outside 0..3.
SegMetrics ComputeSegMetrics(const TierMap& pred, const TierMap& gt);

}  // namespace reltrav

#endif  // RELTRAV_METRICS_HPP_
