// Copyright 2026 The ebreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EBREG_RNG_HPP
#define EBREG_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace ebreg {

// Seedable, splittable random stream. The core engine is std::mt19937_64
// (algorithm pinned by the standard); uniform and normal variates are
// produced by our own transforms so that streams are bit-identical across
// platforms and standard library implementations. Substreams are derived
// from the parent's seed only, never from its position, so child("init")
// always names the same stream for a given root seed.
class Rng {
 public:
  // Recorded in checkpoints so a stored run names the exact sampler.
  static constexpr const char* kAlgorithm = "splitmix64+mt19937_64+boxmuller/v1";

  explicit Rng(std::uint64_t seed);

  Rng child(std::string_view name) const;
  Rng child(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // floor(uniform() * n), n >= 1.
  int uniform_int(int n);

  // Standard normal via Box-Muller; second variate of each pair is cached.
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ebreg

#endif  // EBREG_RNG_HPP
