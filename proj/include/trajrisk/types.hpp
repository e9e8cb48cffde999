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

#ifndef TRAJRISK_TYPES_HPP_
#define TRAJRISK_TYPES_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace trajrisk
{

// One segment frame is 0.1 s; a segment covers at most 200 frames (20 s).
constexpr double kFramePeriod = 0.1;
constexpr int kMaxFramesPerSegment = 200;

enum class CoordinateFrame { global, local };

// One row of a trajectory file: a single object's raw kinematics in one
// frame. heading_raw is global for the ego vehicle and ego-relative for
// everything else when coordinate_frame == local.
struct FrameRecord
{
  std::string segment_id;
  int frame_index = 0;
  std::int64_t object_id = 0;
  bool is_ego = false;
  double x = 0.0;
  double y = 0.0;
  double heading_raw = 0.0;
  double speed_x = 0.0;
  double speed_y = 0.0;
  double accel_x = 0.0;
  double accel_y = 0.0;
  double length = 0.0;
  double width = 0.0;
  CoordinateFrame coordinate_frame = CoordinateFrame::global;
};

// Globalized kinematic state used by the collision polynomial: scalar speed
// and acceleration along the (global) heading, constant steering, bounding
// radius around the center.
struct ObjectState
{
  std::int64_t object_id = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;    // global, wrapped to (-pi, pi]
  double speed = 0.0;      // signed, along heading
  double accel = 0.0;      // signed, along heading
  double steering = 0.0;   // strictly inside (-pi/2, pi/2)
  double wheelbase = 0.0;  // > 0
  double radius = 0.0;     // > 0
};

struct SegmentDataset
{
  int site_id = 0;
  std::string segment_id;
  // sorted by (frame_index, object_id); no duplicate (frame_index, object_id)
  std::vector<FrameRecord> records;
};

struct FrameStates
{
  int frame_index = 0;
  std::vector<ObjectState> states;
};

struct TransformConfig
{
  double wheelbase_ratio = 0.6;  // wheelbase = ratio * object length
  double radius_scale = 1.0;     // radius = scale * 0.5 * sqrt(L^2 + W^2)
  double min_speed = 0.1;        // m/s floor for the steering derivation
};

}  // namespace trajrisk

#endif  // TRAJRISK_TYPES_HPP_
