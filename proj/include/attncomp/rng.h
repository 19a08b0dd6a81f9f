/* Copyright 2026 The attncomp Authors. All Rights Reserved.

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

#ifndef ATTNCOMP_RNG_H_
#define ATTNCOMP_RNG_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace attncomp {

// PCG64 (pcg_setseq_128_xsl_rr_64) with the reference seeding procedure, so
// streams can be reproduced from any language with 128-bit arithmetic.
// normal() uses the Box-Muller transform and caches the second variate.
class Pcg64 {
 public:
  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbULL;

  explicit Pcg64(std::uint64_t seed, std::uint64_t stream = kDefaultStream);

  std::uint64_t next();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal variate.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  void step();

  unsigned __int128 state_ = 0;
  unsigned __int128 increment_ = 0;
  std::optional<double> spare_normal_;
};

// SplitMix64 finalizer over (seed, index): derives independent child seeds for
// per-sample or per-round streams from one master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace attncomp

#endif  // ATTNCOMP_RNG_H_
