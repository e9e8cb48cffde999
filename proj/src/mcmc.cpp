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

#include "trajrisk/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trajrisk/csv.hpp"

namespace trajrisk
{

namespace
{

constexpr double kEulerGamma = 0.57721566490153286;

double log_normal_pdf(double x, double mean, double variance)
{
  const double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * variance) - d * d / (2.0 * variance);
}

// log density of InverseGamma(shape, rate) at t > 0
double log_invgamma_pdf(double t, double shape, double rate)
{
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(t) - rate / t;
}

// process + prior layers; the data layer is handled separately so that
// site-local proposals can reuse cached per-site likelihoods
double log_prior_process(
  const ParamLayout & layout, std::span<const double> coeffs, const PriorSpec & priors)
{
  const ModelSpec & spec = layout.spec();
  const double v0 = priors.coef_variance;
  double total = 0.0;

  // shape support bound applies to every xi intercept in every variant
  const int n_intercepts = spec.random_intercepts() ? spec.n_sites() : 1;
  for (int k = 0; k < n_intercepts; ++k) {
    const double xi = coeffs[static_cast<std::size_t>(layout.xi_intercept(k))];
    if (std::abs(xi) >= priors.xi_bound) {
      return kLogZero;
    }
  }

  for (std::size_t k = 0; k < spec.covariates_mu.size(); ++k) {
    total += log_normal_pdf(coeffs[static_cast<std::size_t>(layout.mu_slope(static_cast<int>(k)))], 0.0, v0);
  }
  for (std::size_t k = 0; k < spec.covariates_theta.size(); ++k) {
    total += log_normal_pdf(coeffs[static_cast<std::size_t>(layout.theta_slope(static_cast<int>(k)))], 0.0, v0);
  }

  if (!spec.random_intercepts()) {
    total += log_normal_pdf(coeffs[static_cast<std::size_t>(layout.mu_intercept(0))], 0.0, v0);
    total += log_normal_pdf(coeffs[static_cast<std::size_t>(layout.theta_intercept(0))], 0.0, v0);
    total += -std::log(2.0 * priors.xi_bound);  // uniform shape prior
    return total;
  }

  // random-intercept variants: site intercepts are Gaussian around a hyper
  // mean with an inverse-gamma hyper variance, per parameter family
  struct Family
  {
    int (ParamLayout::*intercept)(int) const;
    int hyper_mean;
    int hyper_log_var;
  };
  const Family families[] = {
    {&ParamLayout::mu_intercept, layout.mu_hyper_mean(), layout.mu_hyper_log_var()},
    {&ParamLayout::theta_intercept, layout.theta_hyper_mean(), layout.theta_hyper_log_var()},
    {&ParamLayout::xi_intercept, layout.xi_hyper_mean(), layout.xi_hyper_log_var()},
  };
  for (const Family & fam : families) {
    const double hyper_mean = coeffs[static_cast<std::size_t>(fam.hyper_mean)];
    const double log_var = coeffs[static_cast<std::size_t>(fam.hyper_log_var)];
    const double var = std::exp(log_var);
    if (!std::isfinite(var) || var <= 0.0) {
      return kLogZero;
    }
    for (int m = 0; m < spec.n_sites(); ++m) {
      total += log_normal_pdf(coeffs[static_cast<std::size_t>((layout.*fam.intercept)(m))], hyper_mean, var);
    }
    total += log_normal_pdf(hyper_mean, 0.0, v0);
    // sampled on the log scale: inverse-gamma density plus the Jacobian
    total += log_invgamma_pdf(var, priors.ig_shape, priors.ig_rate) + log_var;
  }
  return total;
}

double quantile_sorted(const std::vector<double> & sorted, double p)
{
  const std::size_t n = sorted.size();
  if (n == 1) {
    return sorted[0];
  }
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) {
    return sorted[n - 1];
  }
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double quantile(std::vector<double> values, double p)
{
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

void SamplerConfig::validate() const
{
  if (burn_in >= n_iter) {
    throw mcmc_error("burn_in must be below n_iter");
  }
  if (n_chains < 2) {
    throw mcmc_error("at least two chains are required for BGR");
  }
  if (adapt_window <= 0 || target_accept <= 0.0 || target_accept >= 1.0) {
    throw mcmc_error("invalid sampler configuration");
  }
}

double log_posterior(
  const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data,
  const PriorSpec & priors)
{
  const double pp = log_prior_process(layout, coeffs, priors);
  if (pp == kLogZero) {
    return kLogZero;
  }
  const double ll = dataset_loglik(layout, coeffs, data);
  if (ll == kLogZero) {
    return kLogZero;
  }
  return pp + ll;
}

std::vector<double> initial_values(const ParamLayout & layout, const BlockDataset & data)
{
  double mean = 0.0;
  double sd = 1.0;
  if (!data.blocks.empty()) {
    for (const Block & b : data.blocks) {
      mean += b.x;
    }
    mean /= static_cast<double>(data.blocks.size());
    if (data.blocks.size() > 1) {
      double ss = 0.0;
      for (const Block & b : data.blocks) {
        ss += (b.x - mean) * (b.x - mean);
      }
      sd = std::sqrt(ss / (static_cast<double>(data.blocks.size()) - 1.0));
      sd = std::max(sd, 1e-3);
    }
  }
  const double sigma0 = sd * std::sqrt(6.0) / M_PI;
  const double mu0 = mean - kEulerGamma * sigma0;
  const double theta0 = std::log(sigma0);

  const ModelSpec & spec = layout.spec();
  std::vector<double> init(static_cast<std::size_t>(layout.size()), 0.0);
  const int n_intercepts = spec.random_intercepts() ? spec.n_sites() : 1;
  for (int k = 0; k < n_intercepts; ++k) {
    init[static_cast<std::size_t>(layout.mu_intercept(k))] = mu0;
    init[static_cast<std::size_t>(layout.theta_intercept(k))] = theta0;
    init[static_cast<std::size_t>(layout.xi_intercept(k))] = 0.1;
  }
  if (spec.random_intercepts()) {
    init[static_cast<std::size_t>(layout.mu_hyper_mean())] = mu0;
    init[static_cast<std::size_t>(layout.mu_hyper_log_var())] = std::log(0.25);
    init[static_cast<std::size_t>(layout.theta_hyper_mean())] = theta0;
    init[static_cast<std::size_t>(layout.theta_hyper_log_var())] = std::log(0.25);
    init[static_cast<std::size_t>(layout.xi_hyper_mean())] = 0.1;
    init[static_cast<std::size_t>(layout.xi_hyper_log_var())] = std::log(0.25);
  }
  return init;
}

std::vector<double> initial_steps(const ParamLayout & layout, const BlockDataset & data)
{
  double sd = 1.0;
  if (data.blocks.size() > 1) {
    double mean = 0.0;
    for (const Block & b : data.blocks) {
      mean += b.x;
    }
    mean /= static_cast<double>(data.blocks.size());
    double ss = 0.0;
    for (const Block & b : data.blocks) {
      ss += (b.x - mean) * (b.x - mean);
    }
    sd = std::max(std::sqrt(ss / (static_cast<double>(data.blocks.size()) - 1.0)), 1e-3);
  }
  const double mu_scale = std::max(0.25 * sd, 0.05);

  std::vector<double> steps(static_cast<std::size_t>(layout.size()), 0.25);
  for (int i = 0; i < layout.size(); ++i) {
    const std::string & name = layout.names()[static_cast<std::size_t>(i)];
    if (name.rfind("alpha_mu", 0) == 0 || name.rfind("delta_mu", 0) == 0) {
      steps[static_cast<std::size_t>(i)] = mu_scale;
    } else if (layout.is_xi_intercept(i) || name.rfind("delta_xi", 0) == 0) {
      steps[static_cast<std::size_t>(i)] = 0.15;
    } else if (layout.is_hyper_log_var(i)) {
      steps[static_cast<std::size_t>(i)] = 0.75;
    }
  }
  return steps;
}

namespace
{

// per-site data likelihood cache: hyper components never touch the data,
// site intercepts touch one site, everything else touches all sites
struct LikelihoodCache
{
  std::vector<int> site_ids;
  std::vector<double> per_site;
  double total = 0.0;

  void rebuild(const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data)
  {
    total = 0.0;
    for (std::size_t s = 0; s < site_ids.size(); ++s) {
      per_site[s] = dataset_loglik_site(layout, coeffs, data, site_ids[s]);
      total += per_site[s];
    }
  }
};

bool touches_data(const ParamLayout & layout, int comp)
{
  const std::string & name = layout.names()[static_cast<std::size_t>(comp)];
  return name.rfind("delta_", 0) != 0 && name.rfind("log_tau2_", 0) != 0;
}

}  // namespace

ChainResult run_single_chain(
  const ParamLayout & layout, const BlockDataset & data, const PriorSpec & priors,
  const SamplerConfig & config, std::span<const double> init, std::uint64_t chain_seed)
{
  const int n_params = layout.size();
  Rng rng(chain_seed);

  std::vector<double> theta(init.begin(), init.end());

  LikelihoodCache cache;
  cache.site_ids = layout.spec().site_ids;
  cache.per_site.assign(cache.site_ids.size(), 0.0);
  cache.rebuild(layout, theta, data);
  double prior_term = log_prior_process(layout, theta, priors);
  if (cache.total == kLogZero || prior_term == kLogZero) {
    throw mcmc_error("initial state has zero posterior density");
  }

  std::vector<double> steps = initial_steps(layout, data);
  std::vector<int> accept_count(static_cast<std::size_t>(n_params), 0);
  int batch = 0;

  ChainResult result;
  result.n_retained = config.n_iter - config.burn_in;
  result.draws.reserve(
    static_cast<std::size_t>(result.n_retained) * static_cast<std::size_t>(n_params));
  result.data_loglik.reserve(static_cast<std::size_t>(result.n_retained));

  std::vector<double> proposal(theta);
  for (int iter = 0; iter < config.n_iter; ++iter) {
    for (int comp = 0; comp < n_params; ++comp) {
      const double old_value = theta[static_cast<std::size_t>(comp)];
      const double new_value = old_value + steps[static_cast<std::size_t>(comp)] * rng.normal();
      proposal[static_cast<std::size_t>(comp)] = new_value;

      const double new_prior = log_prior_process(layout, proposal, priors);
      bool accepted = false;
      if (new_prior != kLogZero) {
        double delta = new_prior - prior_term;
        const int site = layout.site_of_component(comp);
        double new_total = cache.total;
        std::vector<double> new_per_site;
        double new_site_ll = 0.0;
        bool data_ok = true;
        if (touches_data(layout, comp)) {
          if (site >= 0) {
            new_site_ll =
              dataset_loglik_site(layout, proposal, data, cache.site_ids[static_cast<std::size_t>(site)]);
            data_ok = new_site_ll != kLogZero;
            if (data_ok) {
              delta += new_site_ll - cache.per_site[static_cast<std::size_t>(site)];
              new_total = cache.total - cache.per_site[static_cast<std::size_t>(site)] + new_site_ll;
            }
          } else {
            new_per_site.resize(cache.site_ids.size());
            new_total = 0.0;
            for (std::size_t s = 0; s < cache.site_ids.size() && data_ok; ++s) {
              new_per_site[s] = dataset_loglik_site(layout, proposal, data, cache.site_ids[s]);
              data_ok = new_per_site[s] != kLogZero;
              new_total += new_per_site[s];
            }
            if (data_ok) {
              delta += new_total - cache.total;
            }
          }
        }
        if (data_ok && (delta >= 0.0 || std::log(rng.uniform01_open()) < delta)) {
          accepted = true;
          theta[static_cast<std::size_t>(comp)] = new_value;
          prior_term = new_prior;
          if (touches_data(layout, comp)) {
            if (site >= 0) {
              cache.per_site[static_cast<std::size_t>(site)] = new_site_ll;
            } else {
              cache.per_site = std::move(new_per_site);
            }
            cache.total = new_total;
          }
        }
      }
      if (!accepted) {
        proposal[static_cast<std::size_t>(comp)] = old_value;
      } else {
        ++accept_count[static_cast<std::size_t>(comp)];
      }
    }

    // step adaptation during burn-in only (detailed balance afterwards)
    if (iter < config.burn_in && (iter + 1) % config.adapt_window == 0) {
      ++batch;
      const double gain = std::min(0.1, 1.0 / std::sqrt(static_cast<double>(batch)));
      for (int comp = 0; comp < n_params; ++comp) {
        const double rate = static_cast<double>(accept_count[static_cast<std::size_t>(comp)]) /
                            static_cast<double>(config.adapt_window);
        steps[static_cast<std::size_t>(comp)] *= std::exp(rate > config.target_accept ? gain : -gain);
        accept_count[static_cast<std::size_t>(comp)] = 0;
      }
    }
    if (iter + 1 == config.burn_in) {
      result.step_sizes_burnin_end = steps;
    }
    if (iter >= config.burn_in) {
      result.draws.insert(result.draws.end(), theta.begin(), theta.end());
      result.data_loglik.push_back(cache.total);
    }
  }
  result.step_sizes_final = steps;
  if (result.step_sizes_burnin_end.empty()) {
    result.step_sizes_burnin_end = result.step_sizes_final;
  }
  return result;
}

double bgr_statistic(const std::vector<std::vector<double>> & chains)
{
  if (chains.size() < 2) {
    throw mcmc_error("BGR needs at least two chains");
  }
  const std::size_t n = chains.front().size();
  if (n < 2) {
    throw mcmc_error("BGR needs chains of length at least two");
  }
  for (const auto & c : chains) {
    if (c.size() != n) {
      throw mcmc_error("BGR needs equal-length chains");
    }
  }

  const double m = static_cast<double>(chains.size());
  const double dn = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (const auto & c : chains) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / dn;
    double ss = 0.0;
    for (const double x : c) {
      ss += (x - mean) * (x - mean);
    }
    w += ss / (dn - 1.0);
    means.push_back(mean);
  }
  w /= m;
  if (w <= 0.0) {
    throw mcmc_error("degenerate chains: zero within-chain variance");
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (const double mean : means) {
    b += (mean - grand) * (mean - grand);
  }
  b = dn * b / (m - 1.0);
  return std::sqrt(((dn - 1.0) / dn * w + b / dn) / w);
}

DicResult compute_dic(
  const ParamLayout & layout, const BlockDataset & data,
  const std::vector<std::vector<double>> & draws, int n_params)
{
  DicResult out;
  std::vector<double> theta_bar(static_cast<std::size_t>(n_params), 0.0);
  std::size_t count = 0;
  for (const auto & chain : draws) {
    const std::size_t rows = chain.size() / static_cast<std::size_t>(n_params);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::span<const double> row{
        chain.data() + i * static_cast<std::size_t>(n_params), static_cast<std::size_t>(n_params)};
      out.dbar += -2.0 * dataset_loglik(layout, row, data);
      for (int p = 0; p < n_params; ++p) {
        theta_bar[static_cast<std::size_t>(p)] += row[static_cast<std::size_t>(p)];
      }
      ++count;
    }
  }
  if (count == 0) {
    throw mcmc_error("DIC needs at least one draw");
  }
  out.dbar /= static_cast<double>(count);
  for (double & v : theta_bar) {
    v /= static_cast<double>(count);
  }
  const double d_at_mean = -2.0 * dataset_loglik(layout, theta_bar, data);
  if (!std::isfinite(d_at_mean)) {
    // the posterior mean can fall off support on weak data; pD is then
    // undefined rather than infinite
    out.pd = std::numeric_limits<double>::quiet_NaN();
    out.dic = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.pd = out.dbar - d_at_mean;
  out.dic = out.dbar + out.pd;
  return out;
}

PosteriorSummary run_mcmc(
  const ModelSpec & spec, const BlockDataset & data, const PriorSpec & priors,
  const SamplerConfig & config)
{
  config.validate();
  spec.validate();

  PosteriorSummary fit;
  fit.spec = spec;
  fit.standardized = standardize_covariates(data);
  const BlockDataset & sdata = fit.standardized.data;

  const ParamLayout layout(spec);
  fit.param_names = layout.names();
  fit.n_params = layout.size();
  fit.n_retained = config.n_iter - config.burn_in;

  const std::vector<double> base_init = initial_values(layout, sdata);
  const std::vector<double> jitter_scale = initial_steps(layout, sdata);

  for (int chain = 0; chain < config.n_chains; ++chain) {
    const std::uint64_t chain_seed =
      derive_seed(config.seed, "mcmc_chain", static_cast<std::uint64_t>(chain));
    std::vector<double> init = base_init;
    if (chain > 0) {
      Rng jitter_rng(derive_seed(config.seed, "mcmc_init", static_cast<std::uint64_t>(chain)));
      for (int p = 0; p < layout.size(); ++p) {
        init[static_cast<std::size_t>(p)] +=
          jitter_rng.uniform(-0.5, 0.5) * jitter_scale[static_cast<std::size_t>(p)];
        if (layout.is_xi_intercept(p)) {
          init[static_cast<std::size_t>(p)] =
            std::clamp(init[static_cast<std::size_t>(p)], -0.9 * priors.xi_bound, 0.9 * priors.xi_bound);
        }
      }
      // pull the jitter back toward the base point until the posterior is
      // finite (off-support shape/location combinations are possible)
      for (int shrink = 0; shrink < 60; ++shrink) {
        if (log_posterior(layout, init, sdata, priors) != kLogZero) {
          break;
        }
        for (int p = 0; p < layout.size(); ++p) {
          init[static_cast<std::size_t>(p)] =
            0.5 * (init[static_cast<std::size_t>(p)] + base_init[static_cast<std::size_t>(p)]);
        }
      }
    }
    ChainResult cr = run_single_chain(layout, sdata, priors, config, init, chain_seed);
    fit.draws.push_back(std::move(cr.draws));
    fit.step_sizes_burnin_end.push_back(std::move(cr.step_sizes_burnin_end));
    fit.step_sizes_final.push_back(std::move(cr.step_sizes_final));
  }

  // per-parameter statistics over the pooled retained draws
  const int total = fit.total_draws();
  for (int p = 0; p < fit.n_params; ++p) {
    ParameterSummary ps;
    ps.name = fit.param_names[static_cast<std::size_t>(p)];
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(total));
    std::vector<std::vector<double>> per_chain;
    for (std::size_t chain = 0; chain < fit.draws.size(); ++chain) {
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(fit.n_retained));
      for (int i = 0; i < fit.n_retained; ++i) {
        values.push_back(fit.draw_value(static_cast<int>(chain), i, p));
      }
      pooled.insert(pooled.end(), values.begin(), values.end());
      per_chain.push_back(std::move(values));
    }
    ps.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(total);
    double ss = 0.0;
    for (const double x : pooled) {
      ss += (x - ps.mean) * (x - ps.mean);
    }
    ps.sd = total > 1 ? std::sqrt(ss / (static_cast<double>(total) - 1.0)) : 0.0;
    std::sort(pooled.begin(), pooled.end());
    ps.q025 = quantile_sorted(pooled, 0.025);
    ps.q975 = quantile_sorted(pooled, 0.975);
    try {
      ps.bgr = bgr_statistic(per_chain);
    } catch (const mcmc_error &) {
      ps.bgr = std::numeric_limits<double>::quiet_NaN();
      fit.warnings.push_back("DegenerateChains: " + ps.name);
    }
    if (std::isfinite(ps.bgr) && ps.bgr > 1.1) {
      fit.warnings.push_back(
        "NonConvergence: " + ps.name + " BGR=" + format_double(ps.bgr, 4));
    }
    fit.parameters.push_back(std::move(ps));
  }

  fit.deviance = compute_dic(layout, sdata, fit.draws, fit.n_params);
  if (!std::isfinite(fit.deviance.pd)) {
    fit.warnings.push_back("UndefinedPD: posterior-mean parameters sit off support for some block");
  }
  return fit;
}

namespace
{

double kde_bandwidth(const std::vector<double> & values)
{
  const double n = static_cast<double>(values.size());
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : values) {
    ss += (x - mean) * (x - mean);
  }
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 1.0;
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 1e-9) {
    spread = std::max(sd, 1e-3);
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> kde(const std::vector<double> & values, const std::vector<double> & grid, double h)
{
  std::vector<double> density(grid.size(), 0.0);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * M_PI));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (const double x : values) {
      const double u = (grid[g] - x) / h;
      acc += std::exp(-0.5 * u * u);
    }
    density[g] = acc * norm;
  }
  return density;
}

}  // namespace

PpcSummary posterior_predictive(
  const ParamLayout & layout, const BlockDataset & data, const PosteriorSummary & fit, int n_rep,
  std::uint64_t seed)
{
  if (fit.total_draws() == 0 || n_rep <= 0) {
    throw mcmc_error("posterior predictive needs retained draws");
  }
  PpcSummary out;

  const int total = fit.total_draws();
  const int reps = std::min(n_rep, total);
  for (int k = 0; k < reps; ++k) {
    const int index = reps == 1 ? 0 : static_cast<int>(
      static_cast<long long>(k) * (total - 1) / (reps - 1));
    const auto draw = fit.pooled_draw(index);
    Rng rng(derive_seed(seed, "ppc_rep", static_cast<std::uint64_t>(k)));
    std::vector<double> rep;
    rep.reserve(data.blocks.size());
    for (const Block & block : data.blocks) {
      rep.push_back(gev_sample(link_eval(layout, draw, block), rng));
    }
    out.replicates.push_back(std::move(rep));
  }

  std::vector<double> observed;
  observed.reserve(data.blocks.size());
  for (const Block & block : data.blocks) {
    observed.push_back(block.x);
  }
  const double h = kde_bandwidth(observed);
  const double lo = *std::min_element(observed.begin(), observed.end()) - 3.0 * h;
  const double hi = *std::max_element(observed.begin(), observed.end()) + 3.0 * h;
  const int n_grid = 61;
  for (int g = 0; g < n_grid; ++g) {
    out.grid.push_back(lo + (hi - lo) * g / (n_grid - 1));
  }
  out.observed_density = kde(observed, out.grid, h);

  std::vector<std::vector<double>> rep_density;
  for (const auto & rep : out.replicates) {
    rep_density.push_back(kde(rep, out.grid, h));
  }
  for (int g = 0; g < n_grid; ++g) {
    std::vector<double> column;
    column.reserve(rep_density.size());
    for (const auto & d : rep_density) {
      column.push_back(d[static_cast<std::size_t>(g)]);
    }
    std::sort(column.begin(), column.end());
    out.rep_q05.push_back(quantile_sorted(column, 0.05));
    out.rep_q50.push_back(quantile_sorted(column, 0.50));
    out.rep_q95.push_back(quantile_sorted(column, 0.95));
  }
  return out;
}

std::string serialize_draws(const PosteriorSummary & fit, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "chain,draw";
  for (const auto & name : fit.param_names) {
    out << ',' << name;
  }
  out << "\n";
  for (std::size_t chain = 0; chain < fit.draws.size(); ++chain) {
    for (int i = 0; i < fit.n_retained; ++i) {
      out << chain << ',' << i;
      for (int p = 0; p < fit.n_params; ++p) {
        out << ',' << format_double(fit.draw_value(static_cast<int>(chain), i, p));
      }
      out << "\n";
    }
  }
  return out.str();
}

namespace
{

std::string json_number(double v)
{
  return std::isfinite(v) ? format_double(v) : std::string("null");
}

}  // namespace

std::string serialize_summary(
  const PosteriorSummary & fit, const std::string & config_hash, std::uint64_t seed)
{
  std::ostringstream out;
  out << "{\n";
  out << "  \"config_hash\": \"" << config_hash << "\",\n";
  out << "  \"seed\": " << seed << ",\n";
  out << "  \"variant\": \"" << variant_name(fit.spec.variant) << "\",\n";
  out << "  \"sites\": [";
  for (std::size_t i = 0; i < fit.spec.site_ids.size(); ++i) {
    out << (i ? ", " : "") << fit.spec.site_ids[i];
  }
  out << "],\n";
  out << "  \"n_chains\": " << fit.draws.size() << ",\n";
  out << "  \"n_retained_per_chain\": " << fit.n_retained << ",\n";
  out << "  \"parameters\": [\n";
  for (std::size_t p = 0; p < fit.parameters.size(); ++p) {
    const ParameterSummary & ps = fit.parameters[p];
    out << "    {\"name\": \"" << ps.name << "\", \"mean\": " << json_number(ps.mean)
        << ", \"sd\": " << json_number(ps.sd) << ", \"q2.5\": " << json_number(ps.q025)
        << ", \"q97.5\": " << json_number(ps.q975) << ", \"bgr\": " << json_number(ps.bgr)
        << "}" << (p + 1 < fit.parameters.size() ? "," : "") << "\n";
  }
  out << "  ],\n";
  // raw-scale view of the coefficients (standardization undone per site)
  out << "  \"covariate_transforms\": [\n";
  std::size_t k = 0;
  for (const auto & [key, t] : fit.standardized.transforms) {
    out << "    {\"site\": " << key.first << ", \"covariate\": \"" << key.second
        << "\", \"mean\": " << format_double(t.mean) << ", \"sd\": " << format_double(t.sd) << "}"
        << (++k < fit.standardized.transforms.size() ? "," : "") << "\n";
  }
  out << "  ],\n";
  out << "  \"dbar\": " << json_number(fit.deviance.dbar) << ",\n";
  out << "  \"pd\": " << json_number(fit.deviance.pd) << ",\n";
  out << "  \"dic\": " << json_number(fit.deviance.dic) << ",\n";
  out << "  \"warnings\": [";
  for (std::size_t i = 0; i < fit.warnings.size(); ++i) {
    out << (i ? ", " : "") << "\"" << fit.warnings[i] << "\"";
  }
  out << "]\n}\n";
  return out.str();
}

std::string serialize_ppc(const PpcSummary & ppc, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "x,observed_density,rep_q05,rep_q50,rep_q95\n";
  for (std::size_t g = 0; g < ppc.grid.size(); ++g) {
    out << format_double(ppc.grid[g]) << ',' << format_double(ppc.observed_density[g]) << ','
        << format_double(ppc.rep_q05[g]) << ',' << format_double(ppc.rep_q50[g]) << ','
        << format_double(ppc.rep_q95[g]) << "\n";
  }
  return out.str();
}

DrawArchive parse_draws(const std::string & path)
{
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "chain" || table.header[1] != "draw") {
    throw mcmc_error("draw archive header must start with chain,draw");
  }
  DrawArchive archive;
  archive.param_names.assign(table.header.begin() + 2, table.header.end());
  archive.n_params = static_cast<int>(archive.param_names.size());

  for (const auto & row : table.rows) {
    if (row.size() != table.header.size()) {
      throw mcmc_error("draw archive row has wrong arity");
    }
    long long chain = 0;
    if (!parse_long(row[0], chain) || chain < 0) {
      throw mcmc_error("bad chain id in draw archive");
    }
    while (archive.draws.size() <= static_cast<std::size_t>(chain)) {
      archive.draws.emplace_back();
    }
    for (std::size_t p = 2; p < row.size(); ++p) {
      double v = 0.0;
      if (!parse_double(row[p], v)) {
        throw mcmc_error("bad draw value in draw archive");
      }
      archive.draws[static_cast<std::size_t>(chain)].push_back(v);
    }
  }
  archive.n_retained = archive.draws.empty()
                         ? 0
                         : static_cast<int>(archive.draws[0].size()) / archive.n_params;
  return archive;
}

}  // namespace trajrisk
