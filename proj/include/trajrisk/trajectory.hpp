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

#ifndef TRAJRISK_TRAJECTORY_HPP_
#define TRAJRISK_TRAJECTORY_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "trajrisk/types.hpp"

namespace trajrisk
{

class parse_error : public std::runtime_error
{
public:
  enum class code {
    missing_column,
    malformed_row,
    duplicate_object_in_frame,
    missing_ego,
  };

  parse_error(code c, const std::string & what) : std::runtime_error(what), kind(c) {}

  code kind;
};

class transform_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Parses a delimited trajectory file (header row with the FrameRecord field
/// names; extra columns are ignored) and validates the dataset invariants.
SegmentDataset parse_segment(const std::string & path, int site_id);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Global heading of an object whose heading was measured relative to the
/// ego vehicle: theta = ego + local, wrapped to (-pi, pi].
double to_global_heading(double ego_heading, double local_heading);

/// Projects velocity components onto the global heading direction:
/// v = v_x cos(theta) + v_y sin(theta). The result is signed.
double to_global_speed(double speed_x, double speed_y, double heading);

/// Same projection for acceleration components.
double to_global_accel(double accel_x, double accel_y, double heading);

/// Steering angle from the heading rate: atan(rate * wheelbase / v), with v
/// floored at min_speed and the result clamped strictly inside (-pi/2, pi/2).
double derive_steering(double heading_rate, double wheelbase, double speed, double min_speed);

/// Transforms a parsed segment into per-frame global states. Local records
/// are globalized with the frame's ego heading; steering comes from the
/// wrapped per-object heading difference between consecutive frames.
std::vector<FrameStates> globalize(const SegmentDataset & dataset, const TransformConfig & config);

/// Serializes globalized states back to the input schema with the derived
/// columns (heading, speed, accel, steering, wheelbase, radius) appended.
/// `header_comment`, when nonempty, is written as a leading '#' line.
std::string serialize_global_states(
  const SegmentDataset & dataset, const std::vector<FrameStates> & frames,
  const std::string & header_comment = "");

}  // namespace trajrisk

#endif  // TRAJRISK_TRAJECTORY_HPP_
