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

#ifndef TRAJRISK_PIPELINE_HPP_
#define TRAJRISK_PIPELINE_HPP_

#include <string>

#include "trajrisk/config.hpp"

namespace trajrisk
{

class upstream_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Each command reads upstream artifacts from config.out_dir and writes its
// own outputs there; all are idempotent given the same config and seed, and
// every output carries the config hash and seed in a header.
void cmd_ingest(const PipelineConfig & config);
void cmd_ttc(const PipelineConfig & config);
void cmd_blocks(const PipelineConfig & config);
void cmd_fit(const PipelineConfig & config);
void cmd_compare(const PipelineConfig & config);
void cmd_risk(const PipelineConfig & config);
void cmd_validate(const PipelineConfig & config);
void cmd_synth(const PipelineConfig & config);
void cmd_all(const PipelineConfig & config);

// artifact path helpers (shared with the tests)
std::string states_path(const PipelineConfig & config, int site_id);
std::string ttc_path(const PipelineConfig & config, int site_id);
std::string blocks_path(const PipelineConfig & config);
std::string fit_basename(const PipelineConfig & config, const std::string & group, ModelVariant variant);
std::string compare_path(const PipelineConfig & config);

}  // namespace trajrisk

#endif  // TRAJRISK_PIPELINE_HPP_
