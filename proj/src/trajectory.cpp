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

#include "trajrisk/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "trajrisk/csv.hpp"

namespace trajrisk
{

namespace
{

constexpr double kSteeringClampMargin = 1e-3;

const char * const kRequiredColumns[] = {
  "segment_id", "frame_index", "object_id", "is_ego",  "x",      "y",     "heading_raw",
  "speed_x",    "speed_y",     "accel_x",   "accel_y", "length", "width", "coordinate_frame",
};

[[noreturn]] void malformed(int line, const std::string & detail)
{
  throw parse_error(
    parse_error::code::malformed_row, "malformed row at line " + std::to_string(line) + ": " + detail);
}

bool parse_bool(std::string_view s, bool & out)
{
  if (s == "1" || s == "true") {
    out = true;
    return true;
  }
  if (s == "0" || s == "false") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

double wrap_angle(double angle)
{
  double w = std::remainder(angle, 2.0 * M_PI);
  if (w <= -M_PI) {
    w += 2.0 * M_PI;
  }
  return w;
}

double to_global_heading(double ego_heading, double local_heading)
{
  return wrap_angle(ego_heading + local_heading);
}

double to_global_speed(double speed_x, double speed_y, double heading)
{
  return speed_x * std::cos(heading) + speed_y * std::sin(heading);
}

double to_global_accel(double accel_x, double accel_y, double heading)
{
  return accel_x * std::cos(heading) + accel_y * std::sin(heading);
}

double derive_steering(double heading_rate, double wheelbase, double speed, double min_speed)
{
  const double v = std::max(std::abs(speed), min_speed);
  const double steering = std::atan(heading_rate * wheelbase / v);
  const double limit = M_PI / 2.0 - kSteeringClampMargin;
  return std::clamp(steering, -limit, limit);
}

SegmentDataset parse_segment(const std::string & path, int site_id)
{
  const CsvTable table = read_csv(path);

  std::size_t col[std::size(kRequiredColumns)];
  for (std::size_t i = 0; i < std::size(kRequiredColumns); ++i) {
    const auto found = table.column(kRequiredColumns[i]);
    if (!found) {
      throw parse_error(
        parse_error::code::missing_column, std::string("missing column: ") + kRequiredColumns[i]);
    }
    col[i] = *found;
  }

  SegmentDataset dataset;
  dataset.site_id = site_id;
  dataset.records.reserve(table.rows.size());

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto & row = table.rows[r];
    const int line = table.line_numbers[r];
    if (row.size() != table.header.size()) {
      malformed(line, "expected " + std::to_string(table.header.size()) + " fields");
    }

    FrameRecord rec;
    rec.segment_id = row[col[0]];
    long long tmp = 0;
    if (!parse_long(row[col[1]], tmp) || tmp < 0) {
      malformed(line, "bad frame_index");
    }
    rec.frame_index = static_cast<int>(tmp);
    if (!parse_long(row[col[2]], tmp)) {
      malformed(line, "bad object_id");
    }
    rec.object_id = tmp;
    if (!parse_bool(row[col[3]], rec.is_ego)) {
      malformed(line, "bad is_ego");
    }
    const std::size_t numeric_cols[] = {col[4], col[5], col[6], col[7], col[8], col[9], col[10], col[11], col[12]};
    double * const targets[] = {&rec.x,       &rec.y,       &rec.heading_raw,
                                &rec.speed_x, &rec.speed_y, &rec.accel_x,
                                &rec.accel_y, &rec.length,  &rec.width};
    for (std::size_t i = 0; i < std::size(numeric_cols); ++i) {
      if (!parse_double(row[numeric_cols[i]], *targets[i]) || !std::isfinite(*targets[i])) {
        malformed(line, "bad numeric field " + table.header[numeric_cols[i]]);
      }
    }
    if (rec.length <= 0.0 || rec.width <= 0.0) {
      malformed(line, "nonpositive dimensions");
    }
    const auto & frame_str = row[col[13]];
    if (frame_str == "global") {
      rec.coordinate_frame = CoordinateFrame::global;
    } else if (frame_str == "local") {
      rec.coordinate_frame = CoordinateFrame::local;
    } else {
      malformed(line, "bad coordinate_frame");
    }

    if (dataset.records.empty()) {
      dataset.segment_id = rec.segment_id;
    }
    dataset.records.push_back(std::move(rec));
  }

  std::stable_sort(
    dataset.records.begin(), dataset.records.end(), [](const FrameRecord & a, const FrameRecord & b) {
      return a.frame_index != b.frame_index ? a.frame_index < b.frame_index
                                            : a.object_id < b.object_id;
    });

  // dataset-level invariants
  std::set<std::pair<int, std::int64_t>> seen;
  std::map<int, int> ego_count;
  std::map<int, bool> has_local;
  int min_frame = 0;
  int max_frame = 0;
  bool first = true;
  for (const auto & rec : dataset.records) {
    if (!seen.insert({rec.frame_index, rec.object_id}).second) {
      throw parse_error(
        parse_error::code::duplicate_object_in_frame,
        "duplicate object " + std::to_string(rec.object_id) + " in frame " +
          std::to_string(rec.frame_index));
    }
    if (rec.is_ego && ++ego_count[rec.frame_index] > 1) {
      malformed(0, "multiple ego records in frame " + std::to_string(rec.frame_index));
    }
    if (rec.coordinate_frame == CoordinateFrame::local) {
      has_local[rec.frame_index] = true;
    }
    min_frame = first ? rec.frame_index : std::min(min_frame, rec.frame_index);
    max_frame = first ? rec.frame_index : std::max(max_frame, rec.frame_index);
    first = false;
  }
  if (!first && max_frame - min_frame + 1 > kMaxFramesPerSegment) {
    malformed(0, "segment spans more than " + std::to_string(kMaxFramesPerSegment) + " frames");
  }
  for (const auto & [frame, local] : has_local) {
    if (local && ego_count[frame] == 0) {
      throw parse_error(
        parse_error::code::missing_ego,
        "frame " + std::to_string(frame) + " has local records but no ego record");
    }
  }
  return dataset;
}

std::vector<FrameStates> globalize(const SegmentDataset & dataset, const TransformConfig & config)
{
  // frame -> record indices, sorted by object id through dataset ordering
  std::map<int, std::vector<std::size_t>> frames;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    frames[dataset.records[i].frame_index].push_back(i);
  }

  // pass 1: global headings (local records need the frame's ego heading)
  std::vector<double> heading(dataset.records.size(), 0.0);
  for (const auto & [frame, indices] : frames) {
    bool need_ego = false;
    double ego_heading = 0.0;
    bool have_ego = false;
    for (const std::size_t i : indices) {
      const auto & rec = dataset.records[i];
      if (rec.is_ego) {
        ego_heading = wrap_angle(rec.heading_raw);
        have_ego = true;
      }
      if (!rec.is_ego && rec.coordinate_frame == CoordinateFrame::local) {
        need_ego = true;
      }
    }
    if (need_ego && !have_ego) {
      throw parse_error(
        parse_error::code::missing_ego,
        "frame " + std::to_string(frame) + " has local records but no ego record");
    }
    for (const std::size_t i : indices) {
      const auto & rec = dataset.records[i];
      if (!rec.is_ego && rec.coordinate_frame == CoordinateFrame::local) {
        heading[i] = to_global_heading(ego_heading, rec.heading_raw);
      } else {
        heading[i] = wrap_angle(rec.heading_raw);
      }
    }
  }

  // pass 2: per-object heading rate from wrapped differences between the
  // object's consecutive observations (forward difference at the first one)
  std::map<std::int64_t, std::vector<std::size_t>> by_object;
  for (const auto & [frame, indices] : frames) {
    for (const std::size_t i : indices) {
      by_object[dataset.records[i].object_id].push_back(i);
    }
  }
  std::vector<double> heading_rate(dataset.records.size(), 0.0);
  for (const auto & [object_id, indices] : by_object) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const std::size_t curr = indices[k];
      std::size_t from = curr;
      std::size_t to = curr;
      if (k > 0) {
        from = indices[k - 1];
      } else if (indices.size() > 1) {
        to = indices[1];
      }
      if (from == to) {
        continue;  // object observed once
      }
      const double dt =
        kFramePeriod * (dataset.records[to].frame_index - dataset.records[from].frame_index);
      heading_rate[curr] = wrap_angle(heading[to] - heading[from]) / dt;
    }
  }

  std::vector<FrameStates> result;
  result.reserve(frames.size());
  for (const auto & [frame, indices] : frames) {
    FrameStates fs;
    fs.frame_index = frame;
    fs.states.reserve(indices.size());
    for (const std::size_t i : indices) {
      const auto & rec = dataset.records[i];
      ObjectState state;
      state.object_id = rec.object_id;
      state.x = rec.x;
      state.y = rec.y;
      state.heading = heading[i];
      state.speed = to_global_speed(rec.speed_x, rec.speed_y, heading[i]);
      state.accel = to_global_accel(rec.accel_x, rec.accel_y, heading[i]);
      state.wheelbase = config.wheelbase_ratio * rec.length;
      state.radius = config.radius_scale * 0.5 * std::hypot(rec.length, rec.width);
      state.steering =
        derive_steering(heading_rate[i], state.wheelbase, state.speed, config.min_speed);
      fs.states.push_back(state);
    }
    result.push_back(std::move(fs));
  }
  return result;
}

std::string serialize_global_states(
  const SegmentDataset & dataset, const std::vector<FrameStates> & frames,
  const std::string & header_comment)
{
  std::map<std::pair<int, std::int64_t>, const ObjectState *> states;
  for (const auto & fs : frames) {
    for (const auto & s : fs.states) {
      states[{fs.frame_index, s.object_id}] = &s;
    }
  }

  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "segment_id,frame_index,object_id,is_ego,x,y,heading_raw,speed_x,speed_y,"
         "accel_x,accel_y,length,width,coordinate_frame,"
         "heading,speed,accel,steering,wheelbase,radius\n";
  for (const auto & rec : dataset.records) {
    const auto it = states.find({rec.frame_index, rec.object_id});
    if (it == states.end()) {
      throw transform_error(
        "no globalized state for object " + std::to_string(rec.object_id) + " in frame " +
        std::to_string(rec.frame_index));
    }
    const ObjectState & s = *it->second;
    out << rec.segment_id << ',' << rec.frame_index << ',' << rec.object_id << ','
        << (rec.is_ego ? 1 : 0) << ',' << format_double(rec.x) << ',' << format_double(rec.y)
        << ',' << format_double(s.heading) << ',' << format_double(rec.speed_x) << ','
        << format_double(rec.speed_y) << ',' << format_double(rec.accel_x) << ','
        << format_double(rec.accel_y) << ',' << format_double(rec.length) << ','
        << format_double(rec.width) << ",global," << format_double(s.heading) << ','
        << format_double(s.speed) << ',' << format_double(s.accel) << ','
        << format_double(s.steering) << ',' << format_double(s.wheelbase) << ','
        << format_double(s.radius) << "\n";
  }
  return out.str();
}

}  // namespace trajrisk
