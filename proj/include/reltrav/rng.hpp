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
#ifndef RELTRAV_RNG_HPP_
#define RELTRAV_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace reltrav {

// Seeded random source. All randomness in the toolkit flows through one of
// these; child streams are derived with DeriveSeed so per-image work does not
// depend on iteration order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Inclusive on both ends.
  int UniformInt(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::size_t Index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  double Normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool Bernoulli(double p) { return Uniform01() < p; }
  std::uint64_t NextU64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix64(std::uint64_t x);
// FNV-1a over the bytes, finalized with SplitMix64.
std::uint64_t StableHash(std::string_view s);
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key);
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t key);

}  // namespace reltrav

#endif  // RELTRAV_RNG_HPP_
