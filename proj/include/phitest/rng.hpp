/*
 * Copyright 2026 The phitest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PHITEST_RNG_HPP
#define PHITEST_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace phitest {

// Deterministic splitmix64-based generator. All randomness in the library
// flows through this class so that a fixed seed yields bit-identical results
// across runs and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[i], v[static_cast<std::size_t>(j)]);
    }
  }

  // Derives a stream seed from a master seed and a counter. Documented in the
  // README: sub-seed k of master seed s is splitmix64 applied to s xor
  // (k+1) * golden-ratio constant.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
    Rng r(master ^ ((stream + 1) * 0x9e3779b97f4a7c15ULL));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace phitest

#endif  // PHITEST_RNG_HPP
