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

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "trajrisk/blocks.hpp"
#include "trajrisk/synth.hpp"
#include "trajrisk/trajectory.hpp"
#include "trajrisk/ttc.hpp"

using namespace trajrisk;
using test_support::make_state;

TEST_CASE("simulate_bicycle covers the analytic motion cases")
{
  // straight line
  const ObjectState straight = make_state(1, 1.0, -2.0, 0.5, 8.0, 0.0, 0.0, 2.7, 1.5);
  const auto line = simulate_bicycle(straight, 1e-3, 2.0);
  const TrajectorySample & end = line.back();
  CHECK(end.t == doctest::Approx(2.0));
  CHECK(end.x == doctest::Approx(1.0 + 16.0 * std::cos(0.5)).epsilon(1e-9));
  CHECK(end.y == doctest::Approx(-2.0 + 16.0 * std::sin(0.5)).epsilon(1e-9));
  CHECK(end.heading == doctest::Approx(0.5));

  // pure acceleration from rest: x(1) = a/2
  const ObjectState accelerating = make_state(1, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 2.7, 1.5);
  const auto gained = simulate_bicycle(accelerating, 1e-3, 1.0);
  CHECK(std::abs(gained.back().x - 0.5) < 1e-3);
  CHECK(gained.back().speed == doctest::Approx(1.0).epsilon(1e-9));

  // constant-speed turn: heading grows at v tan(delta) / L
  const ObjectState turning = make_state(1, 0.0, 0.0, 0.2, 6.0, 0.0, 0.1, 3.0, 1.5);
  const auto arc = simulate_bicycle(turning, 1e-4, 1.5);
  const double expected_heading = 0.2 + 6.0 * 1.5 * std::tan(0.1) / 3.0;
  CHECK(std::abs(arc.back().heading - expected_heading) < 1e-4);
}

TEST_CASE("oracle_ttc analytic cases")
{
  const ObjectState i = make_state(1, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 2.4, 1.0);
  const ObjectState j = make_state(2, 20.0, 0.0, M_PI, 5.0, 0.0, 0.0, 2.4, 1.0);
  CHECK(std::abs(oracle_ttc(i, j, 1e-3, 10.0) - 1.8) < 2e-3);

  const ObjectState away = make_state(2, 20.0, 0.0, 0.0, 5.0, 0.0, 0.0, 2.4, 1.0);
  CHECK(std::isinf(oracle_ttc(i, away, 1e-3, 10.0)));

  // co-located at start
  ObjectState k = i;
  k.object_id = 3;
  CHECK(oracle_ttc(i, k, 1e-3, 10.0) == 0.0);
}

TEST_CASE("oracle agreement contract on seeded random scenarios")
{
  // scenario ranges keep collisions inside the regime where the cubic
  // expansion tracks the nonlinear model; see the acceptance suite for the
  // full 1000-scenario run
  ScenarioSpec spec;
  spec.position = {-12.0, 12.0};
  spec.speed = {2.0, 12.0};
  spec.accel = {-1.0, 1.0};
  spec.steering = {-0.003, 0.003};

  int agree = 0, total = 0;
  for (int t = 0; t < 250; ++t) {
    Rng rng(derive_seed(7, "oracle_agreement", static_cast<std::uint64_t>(t)));
    const ObjectState a = random_state(spec, rng, 1);
    const ObjectState b = random_state(spec, rng, 2);
    const auto poly = build_polynomial(a, b);
    const double margin = poly.radius_sum * poly.radius_sum * 1e-3;
    if (std::abs(min_g_over_horizon(poly, 10.0)) <= margin) {
      continue;
    }
    const double pt = ttc_pair(a, b, 10.0).value;
    const double ot = oracle_ttc(a, b, 2.5e-4, 10.0);
    ++total;
    if ((std::isinf(pt) && std::isinf(ot)) ||
        (std::isfinite(pt) && std::isfinite(ot) && std::abs(pt - ot) <= 0.01)) {
      ++agree;
    }
  }
  CHECK(total >= 240);
  CHECK(static_cast<double>(agree) / total >= 0.99);
}

TEST_CASE("gen_segment head_on produces exactly one block with the analytic minimum")
{
  ScenarioSpec spec;
  spec.kind = ScenarioKind::head_on;
  spec.seed = 3;
  const SegmentDataset ds = gen_segment(spec, 1);
  CHECK(ds.records.size() == 2 * kMaxFramesPerSegment);

  const auto frames = globalize(ds, TransformConfig{});
  TtcConfig config;
  std::vector<std::vector<TTCResult>> results;
  for (const auto & fs : frames) {
    results.push_back(ttc_frame(fs.states, config, fs.frame_index));
  }
  const auto series = track_pairs(results);
  REQUIRE(series.size() == 1);
  const BlockDataset blocks = extract_blocks(series, frames, 1);
  REQUIRE(blocks.blocks.size() == 1);
  // gap shrinks 1 m per frame from 18.55 m at 10 m/s closure: the smallest
  // in-window TTC is 0.155 s at frame 17
  CHECK(blocks.blocks[0].x == doctest::Approx(-0.155).epsilon(1e-6));
  CHECK(blocks.blocks[0].ttc_frame == 17);
}

TEST_CASE("gen_segment single vehicle yields no pairs")
{
  ScenarioSpec spec;
  spec.kind = ScenarioKind::random_field;
  spec.n_vehicles = 1;
  spec.seed = 9;
  const SegmentDataset ds = gen_segment(spec, 1);
  const auto frames = globalize(ds, TransformConfig{});
  for (const auto & fs : frames) {
    CHECK(ttc_frame(fs.states, TtcConfig{}).empty());
  }
}

TEST_CASE("gen_segment is deterministic per seed")
{
  ScenarioSpec spec;
  spec.kind = ScenarioKind::random_field;
  spec.n_vehicles = 46;
  spec.seed = 1234;
  const std::string a = serialize_segment(gen_segment(spec, 2));
  const std::string b = serialize_segment(gen_segment(spec, 2));
  CHECK(a == b);
  CHECK(a.find("46") != std::string::npos);

  ScenarioSpec other = spec;
  other.seed = 1235;
  CHECK(serialize_segment(gen_segment(other, 2)) != a);
}

TEST_CASE("crossing and lane_change kinds yield conflicts")
{
  for (const ScenarioKind kind : {ScenarioKind::crossing, ScenarioKind::lane_change}) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.seed = 21;
    const SegmentDataset ds = gen_segment(spec, 1);
    const auto frames = globalize(ds, TransformConfig{});
    TtcConfig config;
    std::size_t hits = 0;
    for (const auto & fs : frames) {
      hits += ttc_frame(fs.states, config, fs.frame_index).size();
    }
    CHECK(hits > 0);
  }
}

TEST_CASE("gen_blocks respects the truncation window")
{
  SyntheticBlockSpec spec;
  spec.seed = 5;
  SiteTruth site;
  site.site_id = 1;
  site.n_blocks = 400;
  // heavy upper-tail mass forces many rejections
  site.params = {-0.6, std::log(0.8), 0.15};
  spec.sites = {site};
  const BlockDataset ds = gen_blocks(spec);
  REQUIRE(ds.blocks.size() == 400);
  for (const Block & b : ds.blocks) {
    CHECK(b.x >= -3.0);
    CHECK(b.x <= -0.1);
    CHECK(b.covariates.size() == 4);
  }
}

TEST_CASE("gen_blocks degenerate scale concentrates at mu")
{
  SyntheticBlockSpec spec;
  spec.seed = 6;
  SiteTruth site;
  site.site_id = 1;
  site.n_blocks = 100;
  site.params = {-1.5, std::log(1e-4), 0.0};
  spec.sites = {site};
  for (const Block & b : gen_blocks(spec).blocks) {
    CHECK(std::abs(b.x + 1.5) < 0.01);
  }
}

TEST_CASE("gen_blocks determinism and urban-site moment targeting")
{
  SyntheticBlockSpec spec;
  spec.seed = 77;
  SiteTruth site;
  site.site_id = 1;
  site.n_blocks = 58;
  // Gumbel moment-matched to a mean minimum TTC near 1.96 s
  site.params = {-2.298, std::log(0.585), 0.0};
  spec.sites = {site};

  const BlockDataset a = gen_blocks(spec);
  const BlockDataset b = gen_blocks(spec);
  CHECK(serialize_blocks(a) == serialize_blocks(b));

  const auto rows = summarize_sites(a);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].count == 58);
  CHECK(rows[0].ttc_min_avg == doctest::Approx(1.96).epsilon(0.13));
  CHECK(rows[0].ttc_min_min >= 0.1);
  CHECK(rows[0].ttc_min_max <= 3.0);
}

TEST_CASE("generator specs reject physically insane ranges")
{
  ScenarioSpec bad_steering;
  bad_steering.steering = {-0.6, 0.6};
  CHECK_THROWS_AS(gen_segment(bad_steering, 1), block_error);

  ScenarioSpec negative_speed;
  negative_speed.speed = {-1.0, 5.0};
  CHECK_THROWS_AS(gen_segment(negative_speed, 1), block_error);

  SyntheticBlockSpec wild_shape;
  wild_shape.seed = 1;
  SiteTruth site;
  site.site_id = 1;
  site.n_blocks = 5;
  site.params = {-2.0, -0.6, 1.2};
  wild_shape.sites = {site};
  CHECK_THROWS_AS(gen_blocks(wild_shape), block_error);

  SyntheticBlockSpec empty_window;
  empty_window.seed = 1;
  site.params = {-2.0, -0.6, 0.1};
  empty_window.sites = {site};
  empty_window.window_low = -0.1;
  empty_window.window_high = -3.0;
  CHECK_THROWS_AS(gen_blocks(empty_window), block_error);
}

TEST_CASE("block truth archive lists every site")
{
  SyntheticBlockSpec spec;
  spec.seed = 3;
  for (int s = 1; s <= 2; ++s) {
    SiteTruth site;
    site.site_id = s;
    site.n_blocks = 10;
    site.params = {-2.0, -0.6, 0.1};
    spec.sites.push_back(site);
  }
  const std::string truth = serialize_block_truth(spec);
  CHECK(truth.find("\"site_id\": 1") != std::string::npos);
  CHECK(truth.find("\"site_id\": 2") != std::string::npos);
  CHECK(truth.find("\"seed\": 3") != std::string::npos);
}
