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

#ifndef TRAJRISK_GEV_HPP_
#define TRAJRISK_GEV_HPP_

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajrisk/blocks.hpp"
#include "trajrisk/rng.hpp"

namespace trajrisk
{

// Reparameterized GEV: sigma = exp(log_sigma) is positive by construction;
// the shape is kept inside (-1, 1) by its prior.
struct GevParams
{
  double mu = 0.0;
  double log_sigma = 0.0;  // vartheta
  double xi = 0.0;

  double sigma() const { return std::exp(log_sigma); }
};

// |xi| below this evaluates on the Gumbel branch; the xi != 0 branch loses
// digits to cancellation well before this point matters statistically.
constexpr double kXiGumbelTol = 1e-6;

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Log density of the reparameterized GEV; -inf off support.
double gev_logpdf(double x, const GevParams & p);

/// Distribution function, piecewise-complete: off-support x maps to 0 or 1
/// by tail side.
double gev_cdf(double x, const GevParams & p);

/// Inverse of gev_cdf on (0, 1).
double gev_quantile(double u, const GevParams & p);

double gev_sample(const GevParams & p, Rng & rng);

enum class ModelVariant {
  stationary_fixed,
  stationary_random,
  nonstationary_fixed,
  nonstationary_random,  // HBSRP
};

std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string & name);

struct ModelSpec
{
  ModelVariant variant = ModelVariant::stationary_fixed;
  std::vector<std::string> covariates_mu;     // empty for stationary variants
  std::vector<std::string> covariates_theta;  // empty for stationary variants
  std::vector<int> site_ids;                  // order defines the site index

  int n_sites() const { return static_cast<int>(site_ids.size()); }
  bool random_intercepts() const
  {
    return variant == ModelVariant::stationary_random ||
           variant == ModelVariant::nonstationary_random;
  }
  bool nonstationary() const
  {
    return variant == ModelVariant::nonstationary_fixed ||
           variant == ModelVariant::nonstationary_random;
  }
  void validate() const;
  int site_index(int site_id) const;  // -1 when unknown
};

// Flat coefficient-vector layout for one model. Per GEV parameter family
// (mu, theta, xi) there are site intercepts (one shared intercept for fixed
// variants), shared covariate slopes for mu/theta, and, for random-intercept
// variants, a hyper mean and a log hyper variance driving the process layer.
class ParamLayout
{
public:
  explicit ParamLayout(const ModelSpec & spec);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string> & names() const { return names_; }

  int mu_intercept(int site_index) const;
  int theta_intercept(int site_index) const;
  int xi_intercept(int site_index) const;
  int mu_slope(int covariate_index) const;
  int theta_slope(int covariate_index) const;

  // -1 for fixed variants
  int mu_hyper_mean() const { return mu_hyper_mean_; }
  int mu_hyper_log_var() const { return mu_hyper_log_var_; }
  int theta_hyper_mean() const { return theta_hyper_mean_; }
  int theta_hyper_log_var() const { return theta_hyper_log_var_; }
  int xi_hyper_mean() const { return xi_hyper_mean_; }
  int xi_hyper_log_var() const { return xi_hyper_log_var_; }

  bool is_xi_intercept(int index) const;
  bool is_hyper_log_var(int index) const;
  // site whose data likelihood the component touches; -1 = all sites
  int site_of_component(int index) const;

  const ModelSpec & spec() const { return spec_; }

private:
  ModelSpec spec_;
  std::vector<std::string> names_;
  std::vector<int> component_site_;
  int mu0_begin_ = 0, theta0_begin_ = 0, xi0_begin_ = 0;
  int mu_slope_begin_ = 0, theta_slope_begin_ = 0;
  int mu_hyper_mean_ = -1, mu_hyper_log_var_ = -1;
  int theta_hyper_mean_ = -1, theta_hyper_log_var_ = -1;
  int xi_hyper_mean_ = -1, xi_hyper_log_var_ = -1;
};

class model_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Identity-link evaluation of the per-block GEV parameters:
/// mu = alpha_mu0[site] + sum(slope * covariate), likewise for theta;
/// xi comes from the site intercept only. Throws model_error
/// (MissingCovariate) when the block lacks a named covariate.
GevParams link_eval(const ParamLayout & layout, std::span<const double> coeffs, const Block & block);

/// Sum of gev_logpdf over all blocks; -inf as soon as any block is off
/// support.
double dataset_loglik(
  const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data);

/// Same sum restricted to one site (site-local proposals only need this).
double dataset_loglik_site(
  const ParamLayout & layout, std::span<const double> coeffs, const BlockDataset & data,
  int site_id);

// Per-(site, covariate) affine transform recorded when standardizing.
struct CovariateTransform
{
  double mean = 0.0;
  double sd = 1.0;
};

struct StandardizedData
{
  BlockDataset data;
  // keyed by (site_id, covariate name)
  std::map<std::pair<int, std::string>, CovariateTransform> transforms;
};

/// Standardizes every covariate to per-site mean 0 and variance 1 (constant
/// covariates keep sd 1). Transforms are kept for raw-scale back-reporting.
StandardizedData standardize_covariates(const BlockDataset & data);

}  // namespace trajrisk

#endif  // TRAJRISK_GEV_HPP_
