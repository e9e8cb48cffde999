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

#ifndef TRAJRISK_RISK_HPP_
#define TRAJRISK_RISK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajrisk/mcmc.hpp"

namespace trajrisk
{

class risk_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Probability that a block's negated minimum TTC reaches zero, i.e.
/// 1 - F(0) under the block's GEV parameters. Off-support geometry is
/// resolved by the piecewise-complete cdf.
double risk_of_crash(const GevParams & params);

/// Probability that the block maximum exceeds a severity threshold lambda
/// (negated-TTC scale): 1 - F(lambda). At lambda = 0 this is risk_of_crash.
double exceedance_probability(const GevParams & params, double lambda);

/// CF = sum of per-block crash probabilities.
double crash_frequency(const std::vector<double> & rc_values);

/// CF_year = (T / t) * CF. Throws risk_error when t = 0.
double annualize(double cf, long long t_observed_blocks, long long T_annual_blocks);

/// Expected near misses at threshold lambda: sum over blocks of
/// Pr(X_n >= lambda).
double expected_near_misses(const std::vector<GevParams> & block_params, double lambda);

struct IntervalEstimate
{
  double mean = 0.0;
  double lo = 0.0;  // 2.5%
  double hi = 0.0;  // 97.5%
};

struct BlockRisk
{
  int site_id = 0;
  std::int64_t pair_i = 0;
  std::int64_t pair_j = 0;
  IntervalEstimate rc;
};

struct SiteRisk
{
  int site_id = 0;
  int observed_blocks = 0;  // t
  IntervalEstimate cf;
  IntervalEstimate cf_year;
};

struct RiskReport
{
  std::vector<BlockRisk> blocks;
  std::vector<SiteRisk> sites;
  long long annual_blocks = 0;  // T
};

/// Draw-wise RC per block and CF per site with 95% credible intervals.
/// annual_blocks (T) comes from configuration; there is no endorsed default.
RiskReport build_risk_report(const PosteriorSummary & fit, long long annual_blocks);

struct ValidationCell
{
  int site_id = 0;
  double lambda = 0.0;
  IntervalEstimate estimated;  // expected count, parameter uncertainty only
  // posterior-predictive count interval (adds the Bernoulli realization
  // noise of the held-out blocks); observed counts are judged against this
  long long pred_lo = 0;
  long long pred_hi = 0;
  long long observed = 0;
};

struct ValidationReport
{
  int k_folds = 0;
  std::vector<double> lambda_grid;
  std::vector<ValidationCell> cells;  // ordered by (site, lambda)
  // fold index per (site, block order) for reproducibility checks
  std::vector<std::vector<int>> fold_assignment;
  std::vector<int> fold_sites;
};

/// Seeded per-site k-fold validation: for each fold the model is refitted on
/// the remaining blocks and expected near-miss counts on the held-out blocks
/// are compared with observed exceedances, per threshold. Estimates combine
/// folds draw-by-draw. Throws risk_error when any site has fewer blocks than
/// folds.
ValidationReport kfold_validate(
  const BlockDataset & data, const ModelSpec & spec, const PriorSpec & priors,
  const SamplerConfig & config, int k_folds, const std::vector<double> & lambda_grid);

std::string serialize_risk_report(const RiskReport & report, const std::string & config_hash, std::uint64_t seed);
std::string serialize_risk_blocks(const RiskReport & report, const std::string & header_comment = "");
std::string serialize_risk_sites(const RiskReport & report, const std::string & header_comment = "");
std::string serialize_validation(const ValidationReport & report, const std::string & header_comment = "");
std::string serialize_validation_json(const ValidationReport & report, const std::string & config_hash, std::uint64_t seed);

}  // namespace trajrisk

#endif  // TRAJRISK_RISK_HPP_
