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

#ifndef TRAJRISK_TTC_HPP_
#define TRAJRISK_TTC_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "trajrisk/types.hpp"

namespace trajrisk
{

// g(t) = P(t)^2 + Q(t)^2 - (r_i + r_j)^2 where P and Q are the cubic
// relative-displacement polynomials in x and y under the constant-control
// assumption. The vehicles' bounding circles touch where g(t) = 0.
struct CollisionPolynomial
{
  std::array<double, 7> coeffs{};  // c0..c6 of g
  std::int64_t id_i = 0;
  std::int64_t id_j = 0;
  double radius_sum = 0.0;

  double eval(double t) const
  {
    double acc = 0.0;
    for (int k = 6; k >= 0; --k) {
      acc = acc * t + coeffs[static_cast<std::size_t>(k)];
    }
    return acc;
  }

  double eval_derivative(double t) const
  {
    double acc = 0.0;
    for (int k = 6; k >= 1; --k) {
      acc = acc * t + k * coeffs[static_cast<std::size_t>(k)];
    }
    return acc;
  }
};

enum class TtcStatus { root_found, no_root, already_overlapping };

struct TTCResult
{
  double value = std::numeric_limits<double>::infinity();  // seconds
  std::int64_t id_i = 0;
  std::int64_t id_j = 0;
  int frame_index = 0;
  TtcStatus status = TtcStatus::no_root;
};

struct TtcConfig
{
  double horizon = 10.0;  // root search bound, seconds
  double window_low = 0.1;
  double window_high = 3.0;
  double root_tol = 1e-9;
};

/// Expands the squared-center-distance condition for an ordered pair into
/// the degree-6 collision polynomial. Steering is clamped to
/// |delta| <= pi/2 - 1e-3 before tan.
CollisionPolynomial build_polynomial(const ObjectState & state_i, const ObjectState & state_j);

/// All real roots of g in [0, horizon], ascending, each satisfying
/// |g(root)| <= tol * max(1, |g(0)|). Sign changes are bracketed on a grid
/// of step 1e-3 * horizon and polished by bisection plus a Newton step;
/// tangent (double) roots are recovered from the derivative and reported
/// once.
std::vector<double> real_roots(const CollisionPolynomial & poly, double horizon, double tol);

/// Smallest nonnegative collision time: already_overlapping (value 0) when
/// g(0) < 0, the smallest root in [0, horizon] when one exists, infinity
/// otherwise.
TTCResult ttc_pair(const ObjectState & state_i, const ObjectState & state_j, double horizon);

/// TTC for every unordered pair in a frame whose value falls inside the
/// near-miss window [window_low, window_high]; pairs outside are omitted.
std::vector<TTCResult> ttc_frame(
  const std::vector<ObjectState> & states, const TtcConfig & config, int frame_index = 0);

/// Minimum of g over [0, horizon] on the bracketing grid (tangency filter
/// support for the oracle-agreement tests).
double min_g_over_horizon(const CollisionPolynomial & poly, double horizon);

}  // namespace trajrisk

#endif  // TRAJRISK_TTC_HPP_
