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

#include "trajrisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trajrisk/csv.hpp"
#include "trajrisk/trajectory.hpp"

namespace trajrisk
{

namespace
{

struct BicycleState
{
  double x, y, heading, speed;
};

BicycleState euler_step(const BicycleState & s, double accel, double curvature, double dt)
{
  BicycleState next;
  next.x = s.x + dt * s.speed * std::cos(s.heading);
  next.y = s.y + dt * s.speed * std::sin(s.heading);
  next.heading = s.heading + dt * s.speed * curvature;
  next.speed = s.speed + dt * accel;
  return next;
}

double curvature_of(const ObjectState & s)
{
  return std::tan(s.steering) / s.wheelbase;
}

}  // namespace

void ScenarioSpec::validate() const
{
  const bool ranges_ordered = speed.lo <= speed.hi && accel.lo <= accel.hi &&
                              steering.lo <= steering.hi && position.lo <= position.hi &&
                              length.lo <= length.hi && width.lo <= width.hi;
  if (!ranges_ordered || speed.lo < 0.0 || std::max(std::abs(steering.lo), std::abs(steering.hi)) >= 0.5 ||
      length.lo <= 0.0 || width.lo <= 0.0 || n_vehicles < 1) {
    throw block_error("scenario ranges are not physically sane");
  }
}

void SyntheticBlockSpec::validate() const
{
  if (window_low >= window_high) {
    throw block_error("synthetic block window is empty");
  }
  for (const SiteTruth & site : sites) {
    if (std::abs(site.params.xi) >= 1.0 || site.n_blocks < 0) {
      throw block_error(
        "synthetic truth for site " + std::to_string(site.site_id) + " is out of range");
    }
  }
}

std::vector<TrajectorySample> simulate_bicycle(const ObjectState & initial, double dt, double t_max)
{
  const double k = curvature_of(initial);
  const int n_steps = static_cast<int>(std::ceil(t_max / dt));
  std::vector<TrajectorySample> samples;
  samples.reserve(static_cast<std::size_t>(n_steps) + 1);
  BicycleState s{initial.x, initial.y, initial.heading, initial.speed};
  samples.push_back({0.0, s.x, s.y, s.heading, s.speed});
  for (int step = 1; step <= n_steps; ++step) {
    s = euler_step(s, initial.accel, k, dt);
    samples.push_back({step * dt, s.x, s.y, s.heading, s.speed});
  }
  return samples;
}

double oracle_ttc(const ObjectState & state_i, const ObjectState & state_j, double dt, double horizon)
{
  const double k_i = curvature_of(state_i);
  const double k_j = curvature_of(state_j);
  const double r_sum = state_i.radius + state_j.radius;
  const double r2 = r_sum * r_sum;

  auto dist2 = [](const BicycleState & a, const BicycleState & b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
  };

  BicycleState a{state_i.x, state_i.y, state_i.heading, state_i.speed};
  BicycleState b{state_j.x, state_j.y, state_j.heading, state_j.speed};
  if (dist2(a, b) <= r2) {
    return 0.0;
  }

  const int n_steps = static_cast<int>(std::ceil(horizon / dt));
  for (int step = 1; step <= n_steps; ++step) {
    const BicycleState prev_a = a;
    const BicycleState prev_b = b;
    a = euler_step(a, state_i.accel, k_i, dt);
    b = euler_step(b, state_j.accel, k_j, dt);
    if (dist2(a, b) > r2) {
      continue;
    }
    // bisect the crossing inside the bracketing step; a partial Euler step
    // from the previous sample is continuous in tau and matches both ends
    double lo = 0.0;
    double hi = dt;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const BicycleState ma = euler_step(prev_a, state_i.accel, k_i, mid);
      const BicycleState mb = euler_step(prev_b, state_j.accel, k_j, mid);
      if (dist2(ma, mb) > r2) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return (step - 1) * dt + 0.5 * (lo + hi);
  }
  return std::numeric_limits<double>::infinity();
}

ObjectState random_state(const ScenarioSpec & spec, Rng & rng, std::int64_t object_id)
{
  ObjectState s;
  s.object_id = object_id;
  s.x = rng.uniform(spec.position.lo, spec.position.hi);
  s.y = rng.uniform(spec.position.lo, spec.position.hi);
  s.heading = rng.uniform(-M_PI, M_PI);
  s.speed = rng.uniform(spec.speed.lo, spec.speed.hi);
  s.accel = rng.uniform(spec.accel.lo, spec.accel.hi);
  s.steering = rng.uniform(spec.steering.lo, spec.steering.hi);
  const double length = rng.uniform(spec.length.lo, spec.length.hi);
  const double width = rng.uniform(spec.width.lo, spec.width.hi);
  s.wheelbase = 0.6 * length;
  s.radius = 0.5 * std::hypot(length, width);
  return s;
}

namespace
{

struct SeedVehicle
{
  ObjectState state;
  double length;
  double width;
};

std::vector<SeedVehicle> scenario_vehicles(const ScenarioSpec & spec, Rng & rng)
{
  std::vector<SeedVehicle> vehicles;
  auto make = [](std::int64_t id, double x, double y, double heading, double speed, double accel,
                 double steering, double length, double width) {
    SeedVehicle v;
    v.state.object_id = id;
    v.state.x = x;
    v.state.y = y;
    v.state.heading = heading;
    v.state.speed = speed;
    v.state.accel = accel;
    v.state.steering = steering;
    v.length = length;
    v.width = width;
    v.state.wheelbase = 0.6 * length;
    v.state.radius = 0.5 * std::hypot(length, width);
    return v;
  };

  switch (spec.kind) {
    case ScenarioKind::head_on: {
      // radius sum 2 * 0.5 * hypot(4, 2) = 4.47214; effective gap 18.55 m at
      // 10 m/s closure keeps every in-window TTC away from the window edges
      const double half_gap = 0.5 * (18.55 + std::hypot(4.0, 2.0));
      vehicles.push_back(make(1, -half_gap, 0.0, 0.0, 5.0, 0.0, 0.0, 4.0, 2.0));
      vehicles.push_back(make(2, half_gap, 0.0, M_PI, 5.0, 0.0, 0.0, 4.0, 2.0));
      break;
    }
    case ScenarioKind::crossing: {
      vehicles.push_back(make(1, -24.0, 0.0, 0.0, 8.0, 0.0, 0.0, 4.2, 2.0));
      vehicles.push_back(make(2, 0.0, -21.5, M_PI / 2.0, 7.0, 0.0, 0.0, 4.6, 2.1));
      break;
    }
    case ScenarioKind::lane_change: {
      vehicles.push_back(make(1, 0.0, 0.0, 0.0, 8.0, 0.0, 0.0, 4.4, 2.0));
      vehicles.push_back(make(2, -14.0, 3.5, -0.02, 11.0, 0.0, -0.012, 4.8, 2.1));
      break;
    }
    case ScenarioKind::random_field: {
      for (int i = 0; i < spec.n_vehicles; ++i) {
        const double length = rng.uniform(spec.length.lo, spec.length.hi);
        const double width = rng.uniform(spec.width.lo, spec.width.hi);
        SeedVehicle v;
        v.state.object_id = i + 1;
        v.state.x = rng.uniform(spec.position.lo, spec.position.hi);
        v.state.y = rng.uniform(spec.position.lo, spec.position.hi);
        v.state.heading = rng.uniform(-M_PI, M_PI);
        v.state.speed = rng.uniform(spec.speed.lo, spec.speed.hi);
        v.state.accel = rng.uniform(spec.accel.lo, spec.accel.hi);
        v.state.steering = rng.uniform(spec.steering.lo, spec.steering.hi);
        v.length = length;
        v.width = width;
        v.state.wheelbase = 0.6 * length;
        v.state.radius = 0.5 * std::hypot(length, width);
        vehicles.push_back(v);
      }
      break;
    }
  }
  return vehicles;
}

}  // namespace

SegmentDataset gen_segment(const ScenarioSpec & spec, int site_id)
{
  spec.validate();
  Rng rng(derive_seed(spec.seed, "gen_segment"));
  const auto vehicles = scenario_vehicles(spec, rng);

  SegmentDataset dataset;
  dataset.site_id = site_id;
  dataset.segment_id = "synset" + std::to_string(site_id);

  const double sim_dt = 1e-3;
  const int substeps = static_cast<int>(std::round(kFramePeriod / sim_dt));
  for (const auto & v : vehicles) {
    const double k = curvature_of(v.state);
    BicycleState s{v.state.x, v.state.y, v.state.heading, v.state.speed};
    for (int frame = 0; frame < kMaxFramesPerSegment; ++frame) {
      FrameRecord rec;
      rec.segment_id = dataset.segment_id;
      rec.frame_index = frame;
      rec.object_id = v.state.object_id;
      rec.is_ego = v.state.object_id == 1;
      rec.x = s.x;
      rec.y = s.y;
      rec.heading_raw = wrap_angle(s.heading);
      rec.speed_x = s.speed * std::cos(s.heading);
      rec.speed_y = s.speed * std::sin(s.heading);
      rec.accel_x = v.state.accel * std::cos(s.heading);
      rec.accel_y = v.state.accel * std::sin(s.heading);
      rec.length = v.length;
      rec.width = v.width;
      rec.coordinate_frame = CoordinateFrame::global;
      dataset.records.push_back(std::move(rec));
      for (int sub = 0; sub < substeps; ++sub) {
        s = euler_step(s, v.state.accel, k, sim_dt);
      }
    }
  }
  std::stable_sort(
    dataset.records.begin(), dataset.records.end(), [](const FrameRecord & a, const FrameRecord & b) {
      return a.frame_index != b.frame_index ? a.frame_index < b.frame_index
                                            : a.object_id < b.object_id;
    });
  return dataset;
}

std::string serialize_segment(const SegmentDataset & dataset, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "segment_id,frame_index,object_id,is_ego,x,y,heading_raw,speed_x,speed_y,"
         "accel_x,accel_y,length,width,coordinate_frame\n";
  for (const FrameRecord & rec : dataset.records) {
    out << rec.segment_id << ',' << rec.frame_index << ',' << rec.object_id << ','
        << (rec.is_ego ? 1 : 0) << ',' << format_double(rec.x) << ',' << format_double(rec.y)
        << ',' << format_double(rec.heading_raw) << ',' << format_double(rec.speed_x) << ','
        << format_double(rec.speed_y) << ',' << format_double(rec.accel_x) << ','
        << format_double(rec.accel_y) << ',' << format_double(rec.length) << ','
        << format_double(rec.width) << ','
        << (rec.coordinate_frame == CoordinateFrame::global ? "global" : "local") << "\n";
  }
  return out.str();
}

namespace
{

// standard covariate distributions used when a site truth does not specify
// its own (zero slopes: the covariates then carry no signal)
void fill_default_covariates(SiteTruth & site)
{
  site.covariate_names = kBlockCovariates;
  site.covariate_means = {3.0, 2.5, -0.2, 0.1};
  site.covariate_sds = {1.5, 1.2, 0.5, 0.5};
  site.mu_slopes.assign(4, 0.0);
  site.theta_slopes.assign(4, 0.0);
}

}  // namespace

BlockDataset gen_blocks(const SyntheticBlockSpec & spec)
{
  spec.validate();
  BlockDataset dataset;
  for (std::size_t s = 0; s < spec.sites.size(); ++s) {
    SiteTruth site = spec.sites[s];
    if (site.covariate_names.empty()) {
      fill_default_covariates(site);
    }
    Rng rng(derive_seed(spec.seed, "gen_blocks", static_cast<std::uint64_t>(site.site_id)));
    for (int n = 0; n < site.n_blocks; ++n) {
      Block block;
      block.site_id = site.site_id;
      block.pair_i = 1000 * (static_cast<std::int64_t>(s) + 1) + 2 * n;
      block.pair_j = block.pair_i + 1;
      block.ttc_frame = n % kMaxFramesPerSegment;

      GevParams p;
      double x = 0.0;
      bool accepted = false;
      for (int attempt = 0; attempt < 100000; ++attempt) {
        p = site.params;
        for (std::size_t c = 0; c < site.covariate_names.size(); ++c) {
          const double value = rng.normal(site.covariate_means[c], site.covariate_sds[c]);
          block.covariates[site.covariate_names[c]] = value;
          p.mu += site.mu_slopes[c] * value;
          p.log_sigma += site.theta_slopes[c] * value;
        }
        x = gev_sample(p, rng);
        if (x >= spec.window_low && x <= spec.window_high) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        throw block_error(
          "truncation window rejects virtually all draws for site " + std::to_string(site.site_id));
      }
      block.x = x;
      dataset.blocks.push_back(std::move(block));
    }
  }
  return dataset;
}

std::string serialize_block_truth(const SyntheticBlockSpec & spec, const std::string & config_hash)
{
  std::ostringstream out;
  out << "{\n";
  if (!config_hash.empty()) {
    out << "  \"config_hash\": \"" << config_hash << "\",\n";
  }
  out << "  \"seed\": " << spec.seed << ",\n  \"window\": [" << format_double(spec.window_low)
      << ", " << format_double(spec.window_high) << "],\n  \"sites\": [\n";
  for (std::size_t s = 0; s < spec.sites.size(); ++s) {
    const SiteTruth & site = spec.sites[s];
    out << "    {\"site_id\": " << site.site_id << ", \"n_blocks\": " << site.n_blocks
        << ", \"mu\": " << format_double(site.params.mu)
        << ", \"log_sigma\": " << format_double(site.params.log_sigma)
        << ", \"xi\": " << format_double(site.params.xi);
    if (!site.covariate_names.empty()) {
      out << ", \"covariates\": [";
      for (std::size_t c = 0; c < site.covariate_names.size(); ++c) {
        out << (c ? ", " : "") << "{\"name\": \"" << site.covariate_names[c]
            << "\", \"mu_slope\": " << format_double(site.mu_slopes[c])
            << ", \"theta_slope\": " << format_double(site.theta_slopes[c]) << "}";
      }
      out << "]";
    }
    out << "}" << (s + 1 < spec.sites.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

}  // namespace trajrisk
