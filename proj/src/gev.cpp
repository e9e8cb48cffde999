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

#include "trajrisk/gev.hpp"

#include <algorithm>
#include <cmath>

namespace trajrisk
{

double gev_logpdf(double x, const GevParams & p)
{
  const double sigma = p.sigma();
  const double w = (x - p.mu) / sigma;
  if (std::abs(p.xi) < kXiGumbelTol) {
    return -p.log_sigma - w - std::exp(-w);
  }
  const double z = 1.0 + p.xi * w;
  if (z <= 0.0) {
    return kLogZero;
  }
  const double log_z = std::log(z);
  return -p.log_sigma - (1.0 + 1.0 / p.xi) * log_z - std::exp(-log_z / p.xi);
}

double gev_cdf(double x, const GevParams & p)
{
  const double sigma = p.sigma();
  const double w = (x - p.mu) / sigma;
  if (std::abs(p.xi) < kXiGumbelTol) {
    return std::exp(-std::exp(-w));
  }
  const double z = 1.0 + p.xi * w;
  if (z <= 0.0) {
    // xi > 0: below the lower endpoint; xi < 0: above the upper endpoint
    return p.xi > 0.0 ? 0.0 : 1.0;
  }
  return std::exp(-std::exp(-std::log(z) / p.xi));
}

double gev_quantile(double u, const GevParams & p)
{
  const double sigma = p.sigma();
  const double neg_log_u = -std::log(u);
  if (std::abs(p.xi) < kXiGumbelTol) {
    return p.mu - sigma * std::log(neg_log_u);
  }
  return p.mu + sigma * (std::pow(neg_log_u, -p.xi) - 1.0) / p.xi;
}

double gev_sample(const GevParams & p, Rng & rng)
{
  return gev_quantile(rng.uniform01_open(), p);
}

std::string variant_name(ModelVariant v)
{
  switch (v) {
    case ModelVariant::stationary_fixed:
      return "stationary_fixed";
    case ModelVariant::stationary_random:
      return "stationary_random";
    case ModelVariant::nonstationary_fixed:
      return "nonstationary_fixed";
    case ModelVariant::nonstationary_random:
      return "nonstationary_random";
  }
  return "unknown";
}

ModelVariant variant_from_name(const std::string & name)
{
  if (name == "stationary_fixed") return ModelVariant::stationary_fixed;
  if (name == "stationary_random") return ModelVariant::stationary_random;
  if (name == "nonstationary_fixed") return ModelVariant::nonstationary_fixed;
  if (name == "nonstationary_random") return ModelVariant::nonstationary_random;
  throw model_error("unknown model variant: " + name);
}

void ModelSpec::validate() const
{
  if (site_ids.empty()) {
    throw model_error("model spec has no sites");
  }
  if (!nonstationary() && (!covariates_mu.empty() || !covariates_theta.empty())) {
    throw model_error("stationary variants take no covariates");
  }
}

int ModelSpec::site_index(int site_id) const
{
  for (std::size_t i = 0; i < site_ids.size(); ++i) {
    if (site_ids[i] == site_id) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

ParamLayout::ParamLayout(const ModelSpec & spec) : spec_(spec)
{
  spec_.validate();
  const int n_sites = spec_.n_sites();
  const bool random = spec_.random_intercepts();
  const int n_intercepts = random ? n_sites : 1;

  auto add = [this](const std::string & name, int site) {
    names_.push_back(name);
    component_site_.push_back(site);
    return static_cast<int>(names_.size()) - 1;
  };
  auto intercept_name = [&](const std::string & family, int k) {
    return random ? "alpha_" + family + "0[" + std::to_string(spec_.site_ids[static_cast<std::size_t>(k)]) + "]"
                  : "alpha_" + family + "0";
  };

  mu0_begin_ = static_cast<int>(names_.size());
  for (int k = 0; k < n_intercepts; ++k) {
    add(intercept_name("mu", k), random ? k : -1);
  }
  mu_slope_begin_ = static_cast<int>(names_.size());
  for (const auto & cov : spec_.covariates_mu) {
    add("alpha_mu_" + cov, -1);
  }
  if (random) {
    mu_hyper_mean_ = add("delta_mu0", -1);
    mu_hyper_log_var_ = add("log_tau2_mu0", -1);
  }

  theta0_begin_ = static_cast<int>(names_.size());
  for (int k = 0; k < n_intercepts; ++k) {
    add(intercept_name("theta", k), random ? k : -1);
  }
  theta_slope_begin_ = static_cast<int>(names_.size());
  for (const auto & cov : spec_.covariates_theta) {
    add("alpha_theta_" + cov, -1);
  }
  if (random) {
    theta_hyper_mean_ = add("delta_theta0", -1);
    theta_hyper_log_var_ = add("log_tau2_theta0", -1);
  }

  xi0_begin_ = static_cast<int>(names_.size());
  for (int k = 0; k < n_intercepts; ++k) {
    add(intercept_name("xi", k), random ? k : -1);
  }
  if (random) {
    xi_hyper_mean_ = add("delta_xi0", -1);
    xi_hyper_log_var_ = add("log_tau2_xi0", -1);
  }
}

int ParamLayout::mu_intercept(int site_index) const
{
  return mu0_begin_ + (spec_.random_intercepts() ? site_index : 0);
}

int ParamLayout::theta_intercept(int site_index) const
{
  return theta0_begin_ + (spec_.random_intercepts() ? site_index : 0);
}

int ParamLayout::xi_intercept(int site_index) const
{
  return xi0_begin_ + (spec_.random_intercepts() ? site_index : 0);
}

int ParamLayout::mu_slope(int covariate_index) const { return mu_slope_begin_ + covariate_index; }

int ParamLayout::theta_slope(int covariate_index) const
{
  return theta_slope_begin_ + covariate_index;
}

bool ParamLayout::is_xi_intercept(int index) const
{
  const int n = spec_.random_intercepts() ? spec_.n_sites() : 1;
  return index >= xi0_begin_ && index < xi0_begin_ + n;
}

bool ParamLayout::is_hyper_log_var(int index) const
{
  return index == mu_hyper_log_var_ || index == theta_hyper_log_var_ || index == xi_hyper_log_var_;
}

int ParamLayout::site_of_component(int index) const { return component_site_[static_cast<std::size_t>(index)]; }

namespace
{

double covariate_value(const Block & block, const std::string & name)
{
  const auto it = block.covariates.find(name);
  if (it == block.covariates.end()) {
    throw model_error("missing covariate: " + name);
  }
  return it->second;
}

}  // namespace

GevParams link_eval(const ParamLayout & layout, std::span<const double> coeffs, const Block & block)
{
  const ModelSpec & spec = layout.spec();
  const int site = spec.site_index(block.site_id);
  if (site < 0) {
    throw model_error("block site " + std::to_string(block.site_id) + " not in model spec");
  }
  GevParams p;
  p.mu = coeffs[static_cast<std::size_t>(layout.mu_intercept(site))];
  p.log_sigma = coeffs[static_cast<std::size_t>(layout.theta_intercept(site))];
  p.xi = coeffs[static_cast<std::size_t>(layout.xi_intercept(site))];
  for (std::size_t k = 0; k < spec.covariates_mu.size(); ++k) {
    p.mu += coeffs[static_cast<std::size_t>(layout.mu_slope(static_cast<int>(k)))] *
            covariate_value(block, spec.covariates_mu[k]);
  }
  for (std::size_t k = 0; k < spec.covariates_theta.size(); ++k) {
    p.log_sigma += coeffs[static_cast<std::size_t>(layout.theta_slope(static_cast<int>(k)))] *
                   covariate_value(block, spec.covariates_theta[k]);
  }
  return p;
}

double dataset_loglik(
  const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data)
{
  double total = 0.0;
  for (const Block & block : data.blocks) {
    const double term = gev_logpdf(block.x, link_eval(layout, coeffs, block));
    if (term == kLogZero) {
      return kLogZero;
    }
    total += term;
  }
  return total;
}

double dataset_loglik_site(
  const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data,
  int site_id)
{
  double total = 0.0;
  for (const Block & block : data.blocks) {
    if (block.site_id != site_id) {
      continue;
    }
    const double term = gev_logpdf(block.x, link_eval(layout, coeffs, block));
    if (term == kLogZero) {
      return kLogZero;
    }
    total += term;
  }
  return total;
}

StandardizedData standardize_covariates(const BlockDataset & data)
{
  StandardizedData out;
  out.data = data;

  std::map<std::pair<int, std::string>, std::vector<double>> values;
  for (const Block & block : data.blocks) {
    for (const auto & [name, value] : block.covariates) {
      values[{block.site_id, name}].push_back(value);
    }
  }
  for (const auto & [key, v] : values) {
    CovariateTransform t;
    const double n = static_cast<double>(v.size());
    for (const double x : v) {
      t.mean += x;
    }
    t.mean /= n;
    if (v.size() > 1) {
      double ss = 0.0;
      for (const double x : v) {
        ss += (x - t.mean) * (x - t.mean);
      }
      const double sd = std::sqrt(ss / (n - 1.0));
      t.sd = sd > 1e-12 ? sd : 1.0;
    }
    out.transforms[key] = t;
  }
  for (Block & block : out.data.blocks) {
    for (auto & [name, value] : block.covariates) {
      const CovariateTransform & t = out.transforms.at({block.site_id, name});
      value = (value - t.mean) / t.sd;
    }
  }
  return out;
}

}  // namespace trajrisk
