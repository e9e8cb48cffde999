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
#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "trajrisk/csv.hpp"
#include "trajrisk/synth.hpp"
#include "trajrisk/trajectory.hpp"

using namespace trajrisk;

TEST_CASE("to_global_heading composes and wraps")
{
  CHECK(to_global_heading(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(to_global_heading(1.0, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(to_global_heading(3.0, 1.0) == doctest::Approx(-2.2831853071795862).epsilon(1e-12));

  // identity at zero ego heading over the whole wrap interval
  for (double h = -M_PI + 1e-9; h <= M_PI; h += 0.37) {
    CHECK(to_global_heading(0.0, h) == doctest::Approx(h).epsilon(1e-12));
  }
  CHECK(to_global_heading(0.0, M_PI) == doctest::Approx(M_PI));
}

TEST_CASE("speed and acceleration projections")
{
  CHECK(to_global_speed(3.0, 4.0, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(to_global_speed(3.0, 4.0, M_PI / 2.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(to_global_speed(3.0, 4.0, std::atan2(4.0, 3.0)) == doctest::Approx(5.0).epsilon(1e-9));

  CHECK(to_global_accel(1.0, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(to_global_accel(0.0, 2.0, M_PI / 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(to_global_accel(1.0, 1.0, M_PI / 4.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("projection preserves the velocity norm under rotation")
{
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const double vx = rng.uniform(-20, 20);
    const double vy = rng.uniform(-20, 20);
    const double th = rng.uniform(-M_PI, M_PI);
    const double along = to_global_speed(vx, vy, th);
    const double across = -vx * std::sin(th) + vy * std::cos(th);
    CHECK(along * along + across * across == doctest::Approx(vx * vx + vy * vy).epsilon(1e-9));
  }
}

TEST_CASE("derive_steering floors the speed and stays inside (-pi/2, pi/2)")
{
  CHECK(derive_steering(0.0, 3.0, 10.0, 0.1) == 0.0);
  CHECK(derive_steering(0.1, 3.0, 10.0, 0.1) == doctest::Approx(0.029991004856877900).epsilon(1e-12));
  // zero speed floors at 0.1: atan(0.5 * 3 / 0.1) = atan(15)
  CHECK(derive_steering(0.5, 3.0, 0.0, 0.1) == doctest::Approx(1.5042281630190728).epsilon(1e-12));

  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const double s =
      derive_steering(rng.uniform(-500, 500), rng.uniform(0.5, 5), rng.uniform(-1, 30), 0.1);
    CHECK(s > -M_PI / 2.0);
    CHECK(s < M_PI / 2.0);
  }
}

namespace
{

const char * kHeader =
  "segment_id,frame_index,object_id,is_ego,x,y,heading_raw,speed_x,speed_y,accel_x,accel_y,"
  "length,width,coordinate_frame\n";

std::string write_fixture(const std::string & name, const std::string & body)
{
  const std::string dir = test_support::temp_dir("trajectory_" + name);
  const std::string path = dir + "/segment.csv";
  write_text_file(path, std::string(kHeader) + body);
  return path;
}

}  // namespace

TEST_CASE("parse_segment accepts a well-formed file")
{
  const std::string path = write_fixture(
    "ok",
    "seg1,0,1,1,0.0,0.0,0.1,5.0,0.0,0.0,0.0,4.5,2.0,global\n"
    "seg1,0,2,0,10.0,2.0,0.2,4.0,0.5,0.1,0.0,4.0,1.9,local\n"
    "seg1,1,1,1,0.5,0.0,0.1,5.0,0.0,0.0,0.0,4.5,2.0,global\n"
    "seg1,1,2,0,10.4,2.0,0.2,4.0,0.5,0.1,0.0,4.0,1.9,local\n"
    "seg1,2,1,1,1.0,0.0,0.1,5.0,0.0,0.0,0.0,4.5,2.0,global\n"
    "seg1,2,2,0,10.8,2.0,0.2,4.0,0.5,0.1,0.0,4.0,1.9,local\n");
  const SegmentDataset ds = parse_segment(path, 3);
  CHECK(ds.records.size() == 6);
  CHECK(ds.site_id == 3);
  CHECK(ds.segment_id == "seg1");
}

TEST_CASE("parse_segment error paths")
{
  // missing heading_raw column
  const std::string dir = test_support::temp_dir("trajectory_missingcol");
  const std::string path = dir + "/segment.csv";
  write_text_file(
    path,
    "segment_id,frame_index,object_id,is_ego,x,y,speed_x,speed_y,accel_x,accel_y,length,width,"
    "coordinate_frame\n"
    "seg1,0,1,1,0,0,5,0,0,0,4.5,2.0,global\n");
  try {
    parse_segment(path, 1);
    FAIL("expected parse_error");
  } catch (const parse_error & e) {
    CHECK(e.kind == parse_error::code::missing_column);
    CHECK(std::string(e.what()).find("heading_raw") != std::string::npos);
  }

  // duplicate (frame, object)
  const std::string dup = write_fixture(
    "dup",
    "seg1,0,1,1,0,0,0.1,5,0,0,0,4.5,2.0,global\n"
    "seg1,0,1,0,1,0,0.1,5,0,0,0,4.5,2.0,global\n");
  CHECK_THROWS_AS(parse_segment(dup, 1), parse_error);

  // two distinct ego rows in one frame
  const std::string twoego = write_fixture(
    "twoego",
    "seg1,0,1,1,0,0,0.1,5,0,0,0,4.5,2.0,global\n"
    "seg1,0,2,1,1,0,0.1,5,0,0,0,4.5,2.0,global\n");
  CHECK_THROWS_AS(parse_segment(twoego, 1), parse_error);

  // local record without an ego in its frame
  const std::string noego = write_fixture(
    "noego", "seg1,0,2,0,1,0,0.1,5,0,0,0,4.5,2.0,local\n");
  try {
    parse_segment(noego, 1);
    FAIL("expected parse_error");
  } catch (const parse_error & e) {
    CHECK(e.kind == parse_error::code::missing_ego);
  }

  // malformed numeric field
  const std::string bad = write_fixture(
    "badnum", "seg1,0,1,1,zzz,0,0.1,5,0,0,0,4.5,2.0,global\n");
  try {
    parse_segment(bad, 1);
    FAIL("expected parse_error");
  } catch (const parse_error & e) {
    CHECK(e.kind == parse_error::code::malformed_row);
  }

  // nonpositive dimensions
  const std::string dims = write_fixture(
    "dims", "seg1,0,1,1,0,0,0.1,5,0,0,0,0.0,2.0,global\n");
  CHECK_THROWS_AS(parse_segment(dims, 1), parse_error);
}

TEST_CASE("globalize propagates a missing ego on hand-built datasets")
{
  SegmentDataset ds;
  ds.site_id = 1;
  FrameRecord rec;
  rec.segment_id = "hand";
  rec.frame_index = 0;
  rec.object_id = 7;
  rec.is_ego = false;
  rec.length = 4.0;
  rec.width = 2.0;
  rec.coordinate_frame = CoordinateFrame::local;
  ds.records.push_back(rec);
  try {
    globalize(ds, TransformConfig{});
    FAIL("expected parse_error");
  } catch (const parse_error & e) {
    CHECK(e.kind == parse_error::code::missing_ego);
  }
}

TEST_CASE("globalize composes local headings with the frame ego heading")
{
  const std::string path = write_fixture(
    "compose",
    "seg1,0,1,1,0.0,0.0,1.0,5.0,0.0,0.0,0.0,4.5,2.0,global\n"
    "seg1,0,2,0,10.0,2.0,0.5,4.0,0.5,0.0,0.0,4.0,1.9,local\n");
  const SegmentDataset ds = parse_segment(path, 1);
  const auto frames = globalize(ds, TransformConfig{});
  REQUIRE(frames.size() == 1);
  REQUIRE(frames[0].states.size() == 2);
  CHECK(frames[0].states[0].heading == doctest::Approx(1.0));
  CHECK(frames[0].states[1].heading == doctest::Approx(1.5));
}

TEST_CASE("globalize is the identity on global datasets and round-trips")
{
  // constant-control synthetic segment, already global, velocity aligned
  // with the heading so the projected scalars equal the true ones
  ScenarioSpec spec;
  spec.kind = ScenarioKind::head_on;
  spec.seed = 5;
  const SegmentDataset ds = gen_segment(spec, 1);
  const TransformConfig config;
  const auto frames = globalize(ds, config);

  std::size_t checked = 0;
  for (const auto & fs : frames) {
    for (const auto & s : fs.states) {
      for (const auto & rec : ds.records) {
        if (rec.frame_index != fs.frame_index || rec.object_id != s.object_id) {
          continue;
        }
        ++checked;
        CHECK(s.heading == doctest::Approx(rec.heading_raw).epsilon(1e-12));
        CHECK(s.x == rec.x);
        CHECK(s.y == rec.y);
        const double v = std::hypot(rec.speed_x, rec.speed_y);
        CHECK(std::abs(std::abs(s.speed) - v) < 1e-9);
        CHECK(s.wheelbase == doctest::Approx(0.6 * rec.length).epsilon(1e-12));
        CHECK(s.radius == doctest::Approx(0.5 * std::hypot(rec.length, rec.width)).epsilon(1e-12));
      }
    }
  }
  CHECK(checked == ds.records.size());

  // serialize -> reparse -> globalize reproduces the states bit-for-bit
  const std::string dir = test_support::temp_dir("trajectory_roundtrip");
  write_text_file(dir + "/states.csv", serialize_global_states(ds, frames));
  const SegmentDataset again = parse_segment(dir + "/states.csv", 1);
  const auto frames2 = globalize(again, config);
  REQUIRE(frames2.size() == frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    REQUIRE(frames2[f].states.size() == frames[f].states.size());
    for (std::size_t k = 0; k < frames[f].states.size(); ++k) {
      const ObjectState & a = frames[f].states[k];
      const ObjectState & b = frames2[f].states[k];
      CHECK(a.heading == b.heading);
      CHECK(a.speed == b.speed);
      CHECK(a.accel == b.accel);
      CHECK(a.steering == b.steering);
      CHECK(a.radius == b.radius);
    }
  }
}

TEST_CASE("globalize matches an independent scripted transform on a full segment")
{
  ScenarioSpec spec;
  spec.kind = ScenarioKind::random_field;
  spec.n_vehicles = 6;
  spec.seed = 31;
  SegmentDataset ds = gen_segment(spec, 1);

  // pretend the non-ego records were measured ego-relative: subtract the
  // frame ego heading so globalize has to add it back
  std::map<int, double> ego_heading;
  for (const auto & rec : ds.records) {
    if (rec.is_ego) {
      ego_heading[rec.frame_index] = rec.heading_raw;
    }
  }
  for (auto & rec : ds.records) {
    if (!rec.is_ego) {
      rec.heading_raw = rec.heading_raw - ego_heading[rec.frame_index];
      rec.coordinate_frame = CoordinateFrame::local;
    }
  }

  const TransformConfig config;
  const auto frames = globalize(ds, config);

  // scripted reference: direct formula evaluation per record with explicit
  // per-object heading differencing
  std::map<std::int64_t, std::vector<std::pair<int, double>>> object_headings;
  for (const auto & rec : ds.records) {
    const double heading = rec.is_ego
                             ? wrap_angle(rec.heading_raw)
                             : wrap_angle(ego_heading[rec.frame_index] + rec.heading_raw);
    object_headings[rec.object_id].emplace_back(rec.frame_index, heading);
  }

  std::size_t checked = 0;
  for (const auto & rec : ds.records) {
    const auto & series = object_headings[rec.object_id];
    std::size_t pos = 0;
    while (series[pos].first != rec.frame_index) {
      ++pos;
    }
    const double heading = series[pos].second;
    double rate = 0.0;
    if (pos > 0) {
      rate = wrap_angle(series[pos].second - series[pos - 1].second) /
             (0.1 * (series[pos].first - series[pos - 1].first));
    } else if (series.size() > 1) {
      rate = wrap_angle(series[1].second - series[0].second) /
             (0.1 * (series[1].first - series[0].first));
    }
    const double speed = rec.speed_x * std::cos(heading) + rec.speed_y * std::sin(heading);
    const double accel = rec.accel_x * std::cos(heading) + rec.accel_y * std::sin(heading);
    const double wheelbase = 0.6 * rec.length;
    const double steering =
      std::clamp(std::atan(rate * wheelbase / std::max(std::abs(speed), 0.1)),
                 -M_PI / 2.0 + 1e-3, M_PI / 2.0 - 1e-3);

    for (const auto & fs : frames) {
      if (fs.frame_index != rec.frame_index) {
        continue;
      }
      for (const auto & s : fs.states) {
        if (s.object_id != rec.object_id) {
          continue;
        }
        ++checked;
        CHECK(s.heading == doctest::Approx(heading).epsilon(1e-12));
        CHECK(s.speed == doctest::Approx(speed).epsilon(1e-12));
        CHECK(s.accel == doctest::Approx(accel).epsilon(1e-12));
        CHECK(s.steering == doctest::Approx(steering).epsilon(1e-10));
      }
    }
  }
  CHECK(checked == ds.records.size());
}
