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

#include "trajrisk/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trajrisk/csv.hpp"

namespace trajrisk
{

std::vector<int> BlockDataset::site_ids() const
{
  std::vector<int> ids;
  for (const Block & b : blocks) {
    if (std::find(ids.begin(), ids.end(), b.site_id) == ids.end()) {
      ids.push_back(b.site_id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<const Block *> BlockDataset::site_blocks(int site_id) const
{
  std::vector<const Block *> out;
  for (const Block & b : blocks) {
    if (b.site_id == site_id) {
      out.push_back(&b);
    }
  }
  return out;
}

std::vector<ConflictSeries> track_pairs(const std::vector<std::vector<TTCResult>> & frame_results)
{
  std::map<std::pair<std::int64_t, std::int64_t>, ConflictSeries> series;
  for (const auto & frame : frame_results) {
    for (const TTCResult & r : frame) {
      const auto key = std::minmax(r.id_i, r.id_j);
      auto & s = series[key];
      s.id_i = key.first;
      s.id_j = key.second;
      s.samples.emplace_back(r.frame_index, r.value);
    }
  }
  std::vector<ConflictSeries> out;
  out.reserve(series.size());
  for (auto & [key, s] : series) {
    std::sort(s.samples.begin(), s.samples.end());
    out.push_back(std::move(s));
  }
  return out;
}

namespace
{

const ObjectState * find_state(const std::vector<FrameStates> & frames, int frame_index, std::int64_t id)
{
  for (const auto & fs : frames) {
    if (fs.frame_index != frame_index) {
      continue;
    }
    for (const auto & s : fs.states) {
      if (s.object_id == id) {
        return &s;
      }
    }
  }
  return nullptr;
}

}  // namespace

BlockDataset extract_blocks(
  const std::vector<ConflictSeries> & series, const std::vector<FrameStates> & frames, int site_id)
{
  BlockDataset dataset;
  for (const ConflictSeries & s : series) {
    if (s.samples.empty()) {
      continue;
    }
    int min_frame = s.samples.front().first;
    double min_ttc = s.samples.front().second;
    for (const auto & [frame, ttc] : s.samples) {
      if (ttc < min_ttc) {
        min_ttc = ttc;
        min_frame = frame;
      }
    }

    const ObjectState * a = find_state(frames, min_frame, s.id_i);
    const ObjectState * b = find_state(frames, min_frame, s.id_j);
    if (a == nullptr || b == nullptr) {
      throw block_error(
        "missing state for pair (" + std::to_string(s.id_i) + "," + std::to_string(s.id_j) +
        ") at frame " + std::to_string(min_frame));
    }
    // vehicle 1 carries the larger speed at the minimum-TTC frame
    const ObjectState * veh1 = a;
    const ObjectState * veh2 = b;
    if (b->speed > a->speed || (b->speed == a->speed && b->object_id < a->object_id)) {
      std::swap(veh1, veh2);
    }

    Block block;
    block.site_id = site_id;
    block.pair_i = s.id_i;
    block.pair_j = s.id_j;
    block.x = -min_ttc;
    block.ttc_frame = min_frame;
    block.covariates["spd_veh1"] = veh1->speed;
    block.covariates["spd_veh2"] = veh2->speed;
    block.covariates["acc_veh1"] = veh1->accel;
    block.covariates["acc_veh2"] = veh2->accel;
    dataset.blocks.push_back(std::move(block));
  }
  std::sort(dataset.blocks.begin(), dataset.blocks.end(), [](const Block & a, const Block & b) {
    return std::tie(a.site_id, a.pair_i, a.pair_j) < std::tie(b.site_id, b.pair_i, b.pair_j);
  });
  return dataset;
}

std::vector<SiteSummary> summarize_sites(const BlockDataset & dataset)
{
  std::vector<SiteSummary> out;
  for (const int site : dataset.site_ids()) {
    const auto blocks = dataset.site_blocks(site);
    if (blocks.empty()) {
      continue;
    }
    SiteSummary s;
    s.site_id = site;
    s.count = static_cast<int>(blocks.size());
    s.ttc_min_min = -blocks.front()->x;
    s.ttc_min_max = -blocks.front()->x;
    for (const Block * b : blocks) {
      const double ttc = -b->x;
      s.ttc_min_avg += ttc;
      s.ttc_min_min = std::min(s.ttc_min_min, ttc);
      s.ttc_min_max = std::max(s.ttc_min_max, ttc);
      for (const auto & [name, value] : b->covariates) {
        s.covariate_means[name] += value;
      }
    }
    s.ttc_min_avg /= s.count;
    for (auto & [name, value] : s.covariate_means) {
      value /= s.count;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void warn_small_sites(BlockDataset & dataset, int min_blocks)
{
  for (const int site : dataset.site_ids()) {
    const auto n = dataset.site_blocks(site).size();
    if (static_cast<int>(n) < min_blocks) {
      dataset.warnings.push_back(
        "site " + std::to_string(site) + " has " + std::to_string(n) + " blocks (fewer than " +
        std::to_string(min_blocks) + ")");
    }
  }
}

std::string serialize_blocks(const BlockDataset & dataset, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "site_id,pair_i,pair_j,x,ttc_frame,spd_veh1,spd_veh2,acc_veh1,acc_veh2\n";
  for (const Block & b : dataset.blocks) {
    out << b.site_id << ',' << b.pair_i << ',' << b.pair_j << ',' << format_double(b.x) << ','
        << b.ttc_frame;
    for (const auto & name : kBlockCovariates) {
      out << ',' << format_double(b.covariates.count(name) ? b.covariates.at(name) : 0.0);
    }
    out << "\n";
  }
  return out.str();
}

BlockDataset parse_blocks(const std::string & path)
{
  const CsvTable table = read_csv(path);
  const char * const required[] = {"site_id", "pair_i", "pair_j", "x", "ttc_frame"};
  std::size_t col[5];
  for (std::size_t i = 0; i < 5; ++i) {
    const auto found = table.column(required[i]);
    if (!found) {
      throw block_error(std::string("block file missing column: ") + required[i]);
    }
    col[i] = *found;
  }
  std::vector<std::pair<std::string, std::size_t>> covariate_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    bool fixed = false;
    for (const auto & r : required) {
      if (table.header[i] == r) {
        fixed = true;
      }
    }
    if (!fixed) {
      covariate_cols.emplace_back(table.header[i], i);
    }
  }

  BlockDataset dataset;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto & row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw block_error("block file row " + std::to_string(table.line_numbers[r]) + " malformed");
    }
    Block b;
    long long tmp = 0;
    double d = 0.0;
    if (!parse_long(row[col[0]], tmp)) throw block_error("bad site_id");
    b.site_id = static_cast<int>(tmp);
    if (!parse_long(row[col[1]], tmp)) throw block_error("bad pair_i");
    b.pair_i = tmp;
    if (!parse_long(row[col[2]], tmp)) throw block_error("bad pair_j");
    b.pair_j = tmp;
    if (!parse_double(row[col[3]], d) || !std::isfinite(d)) throw block_error("bad x");
    b.x = d;
    if (!parse_long(row[col[4]], tmp)) throw block_error("bad ttc_frame");
    b.ttc_frame = static_cast<int>(tmp);
    for (const auto & [name, idx] : covariate_cols) {
      if (!parse_double(row[idx], d) || !std::isfinite(d)) {
        throw block_error("bad covariate " + name);
      }
      b.covariates[name] = d;
    }
    dataset.blocks.push_back(std::move(b));
  }
  return dataset;
}

std::string serialize_site_summaries(
  const std::vector<SiteSummary> & summaries, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "site_id,block_count,ttc_min_avg,ttc_min_min,ttc_min_max";
  for (const auto & name : kBlockCovariates) {
    out << ",mean_" << name;
  }
  out << "\n";
  for (const SiteSummary & s : summaries) {
    out << s.site_id << ',' << s.count << ',' << format_double(s.ttc_min_avg) << ','
        << format_double(s.ttc_min_min) << ',' << format_double(s.ttc_min_max);
    for (const auto & name : kBlockCovariates) {
      out << ',' << format_double(s.covariate_means.count(name) ? s.covariate_means.at(name) : 0.0);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace trajrisk
