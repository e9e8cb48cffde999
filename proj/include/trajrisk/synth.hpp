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

#ifndef TRAJRISK_SYNTH_HPP_
#define TRAJRISK_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajrisk/blocks.hpp"
#include "trajrisk/gev.hpp"
#include "trajrisk/types.hpp"

namespace trajrisk
{

enum class ScenarioKind { head_on, crossing, lane_change, random_field };

struct Range
{
  double lo = 0.0;
  double hi = 0.0;
};

struct ScenarioSpec
{
  ScenarioKind kind = ScenarioKind::random_field;
  int n_vehicles = 2;
  std::uint64_t seed = 0;
  Range speed{1.0, 12.0};
  Range accel{-1.5, 1.5};
  Range steering{-0.02, 0.02};
  Range position{-20.0, 20.0};
  Range length{3.5, 5.5};
  Range width{1.8, 2.2};

  // physically sane generation: |steering| < 0.5 rad, speeds >= 0
  void validate() const;
};

struct TrajectorySample
{
  double t, x, y, heading, speed;
};

/// Forward-Euler integration of the kinematic bicycle model
/// (x' = v cos, y' = v sin, theta' = v tan(delta)/L, v' = a) with the
/// initial state's acceleration and steering held constant.
std::vector<TrajectorySample> simulate_bicycle(const ObjectState & initial, double dt, double t_max);

/// Dense-simulation collision time: first instant the center distance drops
/// to r_i + r_j, refined by bisection between bracketing samples. This is
/// the independent check for the closed-form polynomial TTC; it integrates
/// the nonlinear model rather than expanding it.
double oracle_ttc(const ObjectState & state_i, const ObjectState & state_j, double dt, double horizon);

/// Draws a random constant-control state from the scenario ranges.
ObjectState random_state(const ScenarioSpec & spec, Rng & rng, std::int64_t object_id);

/// A 200-frame segment of constant-control vehicles in the trajectory file
/// schema (coordinate_frame = global), deterministic per seed.
SegmentDataset gen_segment(const ScenarioSpec & spec, int site_id);

/// Serializes a synthetic segment to the trajectory file format.
std::string serialize_segment(const SegmentDataset & dataset, const std::string & header_comment = "");

struct SiteTruth
{
  int site_id = 0;
  int n_blocks = 0;
  // stationary truth, or intercepts when slopes are present
  GevParams params;
  // covariate name -> (slope on mu, slope on theta), evaluated on the raw
  // covariate scale used when sampling
  std::vector<std::string> covariate_names;
  std::vector<double> mu_slopes;
  std::vector<double> theta_slopes;
  std::vector<double> covariate_means;
  std::vector<double> covariate_sds;
};

struct SyntheticBlockSpec
{
  std::uint64_t seed = 0;
  std::vector<SiteTruth> sites;
  double window_low = -3.0;   // truncation window on the negated-TTC scale
  double window_high = -0.1;

  // |true shape| < 1 per site, nonempty window
  void validate() const;
};

/// Samples block maxima from per-site (optionally covariate-linked) GEV
/// truth, rejection-truncated to the window. The returned dataset carries
/// the standard near-miss covariates; truth is archived by the caller.
BlockDataset gen_blocks(const SyntheticBlockSpec & spec);

std::string serialize_block_truth(const SyntheticBlockSpec & spec, const std::string & config_hash = "");

}  // namespace trajrisk

#endif  // TRAJRISK_SYNTH_HPP_
