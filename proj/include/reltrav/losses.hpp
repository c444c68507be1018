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
#ifndef RELTRAV_LOSSES_HPP_
#define RELTRAV_LOSSES_HPP_

#include <string>
#include <string_view>

#include "reltrav/core.hpp"

namespace reltrav {

// Pairwise ranking losses over two predictions p_a, p_b and an ordinal label
// t in {-1, 0, 1}. Every t = 0 branch penalizes the difference d = p_b - p_a
// directly; the t != 0 branches differ:
//
//   diw      ln(1 + exp(-t d))
//   snow     ln(1 + exp(-t clip(d, -c, c)))
//   rizz     max(0, L - t d)^2
//   rizz_l1  max(0, L - t d)        (and |d| for t = 0)
enum class LossKind { kRizz, kRizzL1, kDiw, kSnow };

std::string_view LossKindName(LossKind kind);
LossKind ParseLossKind(std::string_view name);

struct LossConfig {
  double margin = 0.5;              // L
  double snow_clamp = 1.0;          // c
  double consistency_weight = 1.0;  // lambda
  void Validate() const;
};

// Loss value with its partial derivatives.
struct LossValue {
  double value = 0.0;
  double d_pa = 0.0;
  double d_pb = 0.0;
};

namespace losses {

// ln(1 + exp(z)) computed as max(z, 0) + ln(1 + exp(-|z|)).
double Softplus(double z);

LossValue Diw(double p_a, double p_b, int t);
LossValue Snow(double p_a, double p_b, int t, double clamp);
LossValue Rizz(double p_a, double p_b, int t, double margin);
LossValue RizzL1(double p_a, double p_b, int t, double margin);

LossValue Pair(LossKind kind, double p_a, double p_b, int t, const LossConfig& config);

// Mean squared difference over all pixels; kShapeMismatch on differing shapes.
double Consistency(const TraversabilityMap& student, const TraversabilityMap& teacher);
// d Consistency / d student, same shape as the inputs.
Grid<double> ConsistencyGrad(const TraversabilityMap& student, const TraversabilityMap& teacher);

// acc + lambda * cons.
double Total(double acc, double cons, double lambda);

}  // namespace losses
}  // namespace reltrav

#endif  // RELTRAV_LOSSES_HPP_
