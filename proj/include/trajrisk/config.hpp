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

#ifndef TRAJRISK_CONFIG_HPP_
#define TRAJRISK_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajrisk/mcmc.hpp"
#include "trajrisk/synth.hpp"
#include "trajrisk/ttc.hpp"
#include "trajrisk/types.hpp"

namespace trajrisk
{

class config_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct SegmentInput
{
  std::string path;
  int site_id = 0;
};

struct GroupSpec
{
  std::string name;
  std::vector<int> site_ids;
};

enum class SynthMode { segments, blocks };

struct SynthConfig
{
  SynthMode mode = SynthMode::segments;
  ScenarioKind kind = ScenarioKind::random_field;
  int n_vehicles = 12;
  std::vector<int> sites = {1};
  Range speed{1.0, 12.0};
  Range accel{-1.5, 1.5};
  Range steering{-0.02, 0.02};
  Range position{-25.0, 25.0};
  // blocks mode: per-site truth, parallel to `sites`
  std::vector<int> blocks_per_site;
  std::vector<double> mu;
  std::vector<double> log_sigma;
  std::vector<double> xi;
};

struct PipelineConfig
{
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  std::vector<SegmentInput> segments;
  std::string blocks_file;  // optional external block maxima

  TransformConfig transform;
  TtcConfig ttc;

  std::vector<ModelVariant> variants = {
    ModelVariant::stationary_fixed, ModelVariant::stationary_random,
    ModelVariant::nonstationary_fixed, ModelVariant::nonstationary_random};
  std::vector<std::string> covariates_mu;
  std::vector<std::string> covariates_theta;
  std::vector<GroupSpec> groups;  // default: one group over all sites

  PriorSpec priors;
  SamplerConfig sampler;  // sampler.seed is derived per stage from `seed`

  long long annual_blocks = 0;
  ModelVariant validate_variant = ModelVariant::nonstationary_random;
  std::vector<double> lambda_grid = {-0.2, -0.3, -0.4, -0.5, -0.6, -0.7, -0.8, -0.9};
  int k_folds = 5;
  int ppc_reps = 200;

  SynthConfig synth;
};

/// Parses the sectioned key-value configuration file. Unknown sections or
/// keys and missing mandatory fields (pipeline.seed) raise config_error with
/// the offending field path.
PipelineConfig load_config(const std::string & path);

/// FNV-1a hash of the canonical serialization of every semantically
/// meaningful field (out_dir excluded: it changes where results go, not what
/// they are). 16 hex digits.
std::string config_hash(const PipelineConfig & config);

std::string canonical_config(const PipelineConfig & config);

}  // namespace trajrisk

#endif  // TRAJRISK_CONFIG_HPP_
