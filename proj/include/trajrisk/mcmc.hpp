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

#ifndef TRAJRISK_MCMC_HPP_
#define TRAJRISK_MCMC_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trajrisk/gev.hpp"

namespace trajrisk
{

struct PriorSpec
{
  // coefficients and hyper means: Normal(0, coef_variance)
  double coef_variance = 1e5;
  // hyper variances of the random-intercept process layer: InverseGamma
  double ig_shape = 0.001;
  double ig_rate = 0.001;
  // shape intercepts: uniform on (-xi_bound, xi_bound)
  double xi_bound = 1.0;
};

struct SamplerConfig
{
  int n_chains = 2;
  int n_iter = 50000;   // total per chain, burn-in included
  int burn_in = 20000;
  std::uint64_t seed = 0;
  double target_accept = 0.44;
  int adapt_window = 50;

  void validate() const;
};

struct ParameterSummary
{
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double bgr = 0.0;
};

struct DicResult
{
  double dbar = 0.0;
  double pd = 0.0;
  double dic = 0.0;
};

struct PosteriorSummary
{
  ModelSpec spec;
  std::vector<std::string> param_names;
  std::vector<ParameterSummary> parameters;
  DicResult deviance;
  std::vector<std::string> warnings;

  // retained draws per chain, row-major n_retained x n_params
  std::vector<std::vector<double>> draws;
  int n_params = 0;
  int n_retained = 0;

  // the coefficients refer to this standardized copy of the input data
  StandardizedData standardized;

  // adaptation freezes at the end of burn-in; both snapshots per chain
  std::vector<std::vector<double>> step_sizes_burnin_end;
  std::vector<std::vector<double>> step_sizes_final;

  double draw_value(int chain, int i, int p) const
  {
    return draws[static_cast<std::size_t>(chain)]
                [static_cast<std::size_t>(i) * static_cast<std::size_t>(n_params) +
                 static_cast<std::size_t>(p)];
  }
  int total_draws() const { return n_retained * static_cast<int>(draws.size()); }
  // pooled index: chain-major
  std::span<const double> pooled_draw(int index) const
  {
    const int chain = index / n_retained;
    const int i = index % n_retained;
    return {
      draws[static_cast<std::size_t>(chain)].data() +
        static_cast<std::size_t>(i) * static_cast<std::size_t>(n_params),
      static_cast<std::size_t>(n_params)};
  }
};

class mcmc_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Three-layer log posterior: data likelihood, site-intercept process layer
/// (random variants), coefficient priors. -inf propagates; it is never an
/// error.
double log_posterior(
  const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data,
  const PriorSpec & priors);

/// Moment-matched Gumbel initials on the pooled data (slopes zero, shape
/// 0.1, hyper variances modest).
std::vector<double> initial_values(const ParamLayout & layout, const BlockDataset & data);

/// Initial proposal scales, also used to jitter non-first chains.
std::vector<double> initial_steps(const ParamLayout & layout, const BlockDataset & data);

struct ChainResult
{
  std::vector<double> draws;  // n_retained x n_params, row-major
  std::vector<double> data_loglik;  // per retained draw
  std::vector<double> step_sizes_burnin_end;
  std::vector<double> step_sizes_final;
  int n_retained = 0;
};

/// One component-wise Gaussian random-walk Metropolis chain with step-size
/// adaptation toward target_accept during burn-in only. Deterministic for a
/// given chain_seed.
ChainResult run_single_chain(
  const ParamLayout & layout, const BlockDataset & data, const PriorSpec & priors,
  const SamplerConfig & config, std::span<const double> init, std::uint64_t chain_seed);

/// Fits a model: standardizes covariates, runs n_chains chains (chain k > 0
/// jitters the initials), and assembles per-parameter statistics, BGR,
/// deviance decomposition, and warnings. Deterministic given the config
/// seed. A BGR above 1.1 adds a NonConvergence warning, never an error.
PosteriorSummary run_mcmc(
  const ModelSpec & spec, const BlockDataset & data, const PriorSpec & priors,
  const SamplerConfig & config);

/// Brooks-Gelman-Rubin potential scale reduction over equal-length chains of
/// one parameter: sqrt(((n-1)/n W + B/n) / W). Throws mcmc_error when the
/// within-chain variance is zero (degenerate chains).
double bgr_statistic(const std::vector<std::vector<double>> & chains);

/// DIC from retained draws: Dbar = mean deviance, pD = Dbar - D(posterior
/// mean), deviance = -2 * data-layer log likelihood (conditional DIC).
DicResult compute_dic(
  const ParamLayout & layout, const BlockDataset & data,
  const std::vector<std::vector<double>> & draws, int n_params);

inline DicResult dic_from(double dbar, double pd) { return {dbar, pd, dbar + pd}; }

struct PpcSummary
{
  std::vector<double> grid;
  std::vector<double> observed_density;
  std::vector<double> rep_q05;
  std::vector<double> rep_q50;
  std::vector<double> rep_q95;
  // one replicated dataset per sampled draw, x values in data block order
  std::vector<std::vector<double>> replicates;
};

/// Posterior predictive replication: n_rep draws evenly spaced through the
/// retained sample, one inverse-cdf replicated dataset per draw, plus a
/// kernel density summary on a fixed grid.
PpcSummary posterior_predictive(
  const ParamLayout & layout, const BlockDataset & data, const PosteriorSummary & fit, int n_rep,
  std::uint64_t seed);

std::string serialize_draws(const PosteriorSummary & fit, const std::string & header_comment = "");
std::string serialize_summary(const PosteriorSummary & fit, const std::string & config_hash, std::uint64_t seed);
std::string serialize_ppc(const PpcSummary & ppc, const std::string & header_comment = "");

struct DrawArchive
{
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> draws;  // per chain, row-major
  int n_params = 0;
  int n_retained = 0;
};

DrawArchive parse_draws(const std::string & path);

// type-7 quantile of a sample (linear interpolation), used everywhere a
// credible bound is reported
double quantile(std::vector<double> values, double p);

}  // namespace trajrisk

#endif  // TRAJRISK_MCMC_HPP_
