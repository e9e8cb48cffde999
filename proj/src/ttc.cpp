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

#include "trajrisk/ttc.hpp"

#include <algorithm>
#include <cmath>

namespace trajrisk
{

namespace
{

constexpr double kSteeringClampMargin = 1e-3;
constexpr int kBisectionIterations = 80;

struct Cubic
{
  // a0 + a1 t + a2 t^2 + a3 t^3
  double a0, a1, a2, a3;
};

// Displacement cubics of one vehicle under constant acceleration and
// steering; curvature enters through k = tan(delta) / wheelbase.
void displacement_cubics(const ObjectState & s, Cubic & px, Cubic & qy)
{
  const double limit = M_PI / 2.0 - kSteeringClampMargin;
  const double delta = std::clamp(s.steering, -limit, limit);
  const double k = std::tan(delta) / s.wheelbase;
  const double c = std::cos(s.heading);
  const double sn = std::sin(s.heading);

  px.a0 = s.x;
  px.a1 = s.speed * c;
  px.a2 = 0.5 * (s.accel * c - s.speed * s.speed * sn * k);
  px.a3 = -(1.0 / 12.0) * s.accel * s.speed * sn * k;

  qy.a0 = s.y;
  qy.a1 = s.speed * sn;
  qy.a2 = 0.5 * (s.accel * sn + s.speed * s.speed * c * k);
  qy.a3 = (1.0 / 12.0) * s.accel * s.speed * c * k;
}

// accumulates (a0 + a1 t + a2 t^2 + a3 t^3)^2 into c0..c6
void accumulate_square(const Cubic & p, std::array<double, 7> & c)
{
  const double a[4] = {p.a0, p.a1, p.a2, p.a3};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      c[static_cast<std::size_t>(i + j)] += a[i] * a[j];
    }
  }
}

}  // namespace

CollisionPolynomial build_polynomial(const ObjectState & state_i, const ObjectState & state_j)
{
  Cubic pxi, qyi, pxj, qyj;
  displacement_cubics(state_i, pxi, qyi);
  displacement_cubics(state_j, pxj, qyj);

  const Cubic p{pxi.a0 - pxj.a0, pxi.a1 - pxj.a1, pxi.a2 - pxj.a2, pxi.a3 - pxj.a3};
  const Cubic q{qyi.a0 - qyj.a0, qyi.a1 - qyj.a1, qyi.a2 - qyj.a2, qyi.a3 - qyj.a3};

  CollisionPolynomial poly;
  poly.id_i = state_i.object_id;
  poly.id_j = state_j.object_id;
  poly.radius_sum = state_i.radius + state_j.radius;
  accumulate_square(p, poly.coeffs);
  accumulate_square(q, poly.coeffs);
  poly.coeffs[0] -= poly.radius_sum * poly.radius_sum;
  return poly;
}

namespace
{

double bisect(const CollisionPolynomial & poly, double lo, double hi, double g_lo)
{
  for (int iter = 0; iter < kBisectionIterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {
      break;
    }
    const double g_mid = poly.eval(mid);
    if (g_mid == 0.0) {
      return mid;
    }
    if ((g_lo < 0.0) == (g_mid < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// bisection on g' to locate the extremum inside [lo, hi]
double bisect_derivative(const CollisionPolynomial & poly, double lo, double hi)
{
  double d_lo = poly.eval_derivative(lo);
  for (int iter = 0; iter < kBisectionIterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {
      break;
    }
    const double d_mid = poly.eval_derivative(mid);
    if (d_mid == 0.0) {
      return mid;
    }
    if ((d_lo < 0.0) == (d_mid < 0.0)) {
      lo = mid;
      d_lo = d_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double newton_polish(const CollisionPolynomial & poly, double root, double lo, double hi)
{
  const double d = poly.eval_derivative(root);
  if (d != 0.0) {
    const double next = root - poly.eval(root) / d;
    if (next >= lo && next <= hi && std::abs(poly.eval(next)) <= std::abs(poly.eval(root))) {
      return next;
    }
  }
  return root;
}

}  // namespace

std::vector<double> real_roots(const CollisionPolynomial & poly, double horizon, double tol)
{
  const int n_cells = 1000;
  const double step = horizon / n_cells;
  const double scale = std::max(1.0, std::abs(poly.eval(0.0)));
  const double accept = tol * scale;

  std::vector<double> roots;
  auto push_root = [&roots](double r) {
    for (const double existing : roots) {
      if (std::abs(existing - r) <= 1e-9) {
        return;
      }
    }
    roots.push_back(r);
  };

  double t_prev = 0.0;
  double g_prev = poly.eval(0.0);
  if (g_prev == 0.0) {
    push_root(0.0);
  }
  for (int cell = 1; cell <= n_cells; ++cell) {
    const double t = cell * step;
    const double g = poly.eval(t);
    if (g == 0.0) {
      push_root(t);
    } else if (g_prev != 0.0 && (g_prev < 0.0) != (g < 0.0)) {
      double root = bisect(poly, t_prev, t, g_prev);
      root = newton_polish(poly, root, t_prev, t);
      if (std::abs(poly.eval(root)) <= accept) {
        push_root(root);
      }
    } else if (g_prev > 0.0 && g > 0.0) {
      // tangency: a local minimum dipping to ~zero leaves no sign change
      const double d_prev = poly.eval_derivative(t_prev);
      const double d = poly.eval_derivative(t);
      if (d_prev < 0.0 && d > 0.0) {
        const double t_min = bisect_derivative(poly, t_prev, t);
        if (std::abs(poly.eval(t_min)) <= accept) {
          push_root(t_min);
        }
      }
    }
    t_prev = t;
    g_prev = g;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

TTCResult ttc_pair(const ObjectState & state_i, const ObjectState & state_j, double horizon)
{
  const CollisionPolynomial poly = build_polynomial(state_i, state_j);
  TTCResult result;
  result.id_i = state_i.object_id;
  result.id_j = state_j.object_id;
  if (poly.eval(0.0) < 0.0) {
    result.value = 0.0;
    result.status = TtcStatus::already_overlapping;
    return result;
  }
  const auto roots = real_roots(poly, horizon, 1e-9);
  if (!roots.empty()) {
    result.value = roots.front();
    result.status = TtcStatus::root_found;
  }
  return result;
}

std::vector<TTCResult> ttc_frame(
  const std::vector<ObjectState> & states, const TtcConfig & config, int frame_index)
{
  std::vector<TTCResult> results;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      TTCResult r = ttc_pair(states[i], states[j], config.horizon);
      if (r.value >= config.window_low && r.value <= config.window_high) {
        r.frame_index = frame_index;
        results.push_back(r);
      }
    }
  }
  return results;
}

double min_g_over_horizon(const CollisionPolynomial & poly, double horizon)
{
  const int n_cells = 1000;
  const double step = horizon / n_cells;
  double min_g = poly.eval(0.0);
  for (int cell = 1; cell <= n_cells; ++cell) {
    min_g = std::min(min_g, poly.eval(cell * step));
  }
  // refine around interior minima picked up by the derivative
  for (int cell = 1; cell <= n_cells; ++cell) {
    const double a = (cell - 1) * step;
    const double b = cell * step;
    if (poly.eval_derivative(a) < 0.0 && poly.eval_derivative(b) > 0.0) {
      min_g = std::min(min_g, poly.eval(bisect_derivative(poly, a, b)));
    }
  }
  return min_g;
}

}  // namespace trajrisk
