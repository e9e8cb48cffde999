// Copyright 2026 The trajrisk Authors
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

#ifndef TRAJRISK_RNG_HPP_
#define TRAJRISK_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace trajrisk
{

// All randomness in the project flows through this wrapper so that results
// are bit-reproducible across platforms. std::mt19937_64 is standardized;
// the std distributions are not, so uniform/normal are generated here.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1), safe as a log/inverse-cdf argument
  double uniform01_open()
  {
    double u = uniform01();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller without state caching: two uniforms per normal draw
  double normal()
  {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t uniform_index(std::uint64_t n)  // [0, n)
  {
    return n == 0 ? 0 : engine_() % n;
  }

private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer, used to derive independent stream seeds from a
// global seed plus a stage label and index
inline std::uint64_t mix_u64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV offset basis
  for (const char c : label) {
    h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  }
  return mix_u64(base ^ mix_u64(h + index));
}

}  // namespace trajrisk

#endif  // TRAJRISK_RNG_HPP_
