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

#ifndef TRAJRISK_BLOCKS_HPP_
#define TRAJRISK_BLOCKS_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trajrisk/ttc.hpp"
#include "trajrisk/types.hpp"

namespace trajrisk
{

// Standard block covariates. Vehicle 1 is the pair member with the larger
// speed at the minimum-TTC frame (ties broken by lower object id).
inline const std::vector<std::string> kBlockCovariates = {
  "spd_veh1", "spd_veh2", "acc_veh1", "acc_veh2"};

struct ConflictSeries
{
  std::int64_t id_i = 0;  // id_i < id_j
  std::int64_t id_j = 0;
  std::vector<std::pair<int, double>> samples;  // (frame_index, ttc), frame-sorted
};

// One conflicting pair's extreme: x is the negated minimum TTC over the
// pair's in-window samples.
struct Block
{
  int site_id = 0;
  std::int64_t pair_i = 0;
  std::int64_t pair_j = 0;
  double x = 0.0;  // in [-window_high, -window_low], e.g. [-3.0, -0.1]
  int ttc_frame = 0;
  std::map<std::string, double> covariates;
};

struct BlockDataset
{
  std::vector<Block> blocks;  // ordered by (site_id, pair_i, pair_j)
  std::vector<std::string> warnings;

  std::vector<int> site_ids() const;
  std::vector<const Block *> site_blocks(int site_id) const;
};

struct SiteSummary
{
  int site_id = 0;
  int count = 0;
  double ttc_min_avg = 0.0;
  double ttc_min_min = 0.0;
  double ttc_min_max = 0.0;
  std::map<std::string, double> covariate_means;
};

class block_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Groups per-frame TTC results into one series per unordered pair. A pair
/// qualifies with a single in-window sample anywhere in the segment.
std::vector<ConflictSeries> track_pairs(const std::vector<std::vector<TTCResult>> & frame_results);

/// One block per series: x = -min(ttc), covariates read from both members'
/// states at the minimum-TTC frame. Throws block_error (MissingState) when a
/// pair member is absent from that frame.
BlockDataset extract_blocks(
  const std::vector<ConflictSeries> & series, const std::vector<FrameStates> & frames, int site_id);

/// Per-site frequency and TTC_min statistics (empty sites are skipped).
std::vector<SiteSummary> summarize_sites(const BlockDataset & dataset);

/// Appends a warning per site with fewer than 30 blocks; these are
/// processed, not rejected.
void warn_small_sites(BlockDataset & dataset, int min_blocks = 30);

std::string serialize_blocks(const BlockDataset & dataset, const std::string & header_comment = "");
BlockDataset parse_blocks(const std::string & path);

std::string serialize_site_summaries(const std::vector<SiteSummary> & summaries, const std::string & header_comment = "");

}  // namespace trajrisk

#endif  // TRAJRISK_BLOCKS_HPP_
