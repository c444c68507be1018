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
#include "reltrav/losses.hpp"

#include <algorithm>
#include <cmath>

namespace reltrav {

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kRizz: return "rizz";
    case LossKind::kRizzL1: return "rizz_l1";
    case LossKind::kDiw: return "diw";
    case LossKind::kSnow: return "snow";
  }
  return "rizz";
}

LossKind ParseLossKind(std::string_view name) {
  if (name == "rizz") return LossKind::kRizz;
  if (name == "rizz_l1") return LossKind::kRizzL1;
  if (name == "diw") return LossKind::kDiw;
  if (name == "snow") return LossKind::kSnow;
  throw Error(ErrorCode::kInvalidArgument, "unknown loss '" + std::string(name) + "'");
}

void LossConfig::Validate() const {
  if (!(margin > 0.0)) throw Error(ErrorCode::kInvalidArgument, "margin must be > 0");
  if (!(snow_clamp > 0.0)) throw Error(ErrorCode::kInvalidArgument, "snow clamp must be > 0");
  if (!(consistency_weight >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "consistency weight must be >= 0");
  }
}

namespace losses {

namespace {

void CheckLabel(int t) {
  if (t < -1 || t > 1) throw Error(ErrorCode::kInvalidLabel, "label t must be -1, 0 or 1");
}

// (p_b - p_a)^2 for equality pairs.
LossValue SquaredEquality(double p_a, double p_b) {
  const double d = p_b - p_a;
  return {d * d, -2.0 * d, 2.0 * d};
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

LossValue Diw(double p_a, double p_b, int t) {
  CheckLabel(t);
  if (t == 0) return SquaredEquality(p_a, p_b);
  const double z = -t * (p_b - p_a);
  // d softplus(z) / dz = sigmoid(z); dz / dp_b = -t.
  const double g = Sigmoid(z);
  return {Softplus(z), t * g, -t * g};
}

LossValue Snow(double p_a, double p_b, int t, double clamp) {
  CheckLabel(t);
  if (t == 0) return SquaredEquality(p_a, p_b);
  const double d = p_b - p_a;
  const double clipped = std::clamp(d, -clamp, clamp);
  const double z = -t * clipped;
  const double g = (d > -clamp && d < clamp) ? Sigmoid(z) : 0.0;
  return {Softplus(z), t * g, -t * g};
}

LossValue Rizz(double p_a, double p_b, int t, double margin) {
  CheckLabel(t);
  if (t == 0) return SquaredEquality(p_a, p_b);
  const double h = std::max(0.0, margin - t * (p_b - p_a));
  // d h^2 / d p_b = -2 h t.
  return {h * h, 2.0 * h * t, -2.0 * h * t};
}

LossValue RizzL1(double p_a, double p_b, int t, double margin) {
  CheckLabel(t);
  const double d = p_b - p_a;
  if (t == 0) {
    const double s = (d > 0) - (d < 0);
    return {std::abs(d), -s, s};
  }
  const double h = margin - t * d;
  if (h <= 0.0) return {0.0, 0.0, 0.0};
  return {h, static_cast<double>(t), static_cast<double>(-t)};
}

LossValue Pair(LossKind kind, double p_a, double p_b, int t, const LossConfig& config) {
  switch (kind) {
    case LossKind::kRizz: return Rizz(p_a, p_b, t, config.margin);
    case LossKind::kRizzL1: return RizzL1(p_a, p_b, t, config.margin);
    case LossKind::kDiw: return Diw(p_a, p_b, t);
    case LossKind::kSnow: return Snow(p_a, p_b, t, config.snow_clamp);
  }
  return {};
}

double Consistency(const TraversabilityMap& student, const TraversabilityMap& teacher) {
  if (!student.SameShape(teacher)) {
    throw Error(ErrorCode::kShapeMismatch, "consistency loss needs maps of equal shape");
  }
  if (student.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double d = student.values[i] - teacher.values[i];
    sum += d * d;
  }
  return sum / static_cast<double>(student.size());
}

Grid<double> ConsistencyGrad(const TraversabilityMap& student, const TraversabilityMap& teacher) {
  if (!student.SameShape(teacher)) {
    throw Error(ErrorCode::kShapeMismatch, "consistency loss needs maps of equal shape");
  }
  Grid<double> g(student.height, student.width);
  const double scale = student.size() == 0 ? 0.0 : 2.0 / static_cast<double>(student.size());
  for (std::size_t i = 0; i < student.size(); ++i) {
    g.values[i] = scale * (student.values[i] - teacher.values[i]);
  }
  return g;
}

double Total(double acc, double cons, double lambda) { return acc + lambda * cons; }

}  // namespace losses
}  // namespace reltrav
