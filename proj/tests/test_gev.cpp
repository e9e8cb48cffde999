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

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "trajrisk/gev.hpp"

using namespace trajrisk;

TEST_CASE("gev_logpdf reference values")
{
  // Gumbel limit at x = mu with unit sigma: -(0) - exp(-0) = -1
  CHECK(gev_logpdf(0.0, {0.0, 0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-12));

  // high-precision evaluation of the xi != 0 branch
  const GevParams p{-2.499, -0.846, 0.299};
  CHECK(gev_logpdf(-1.0, p) == doctest::Approx(-2.3523266868033053).epsilon(1e-12));

  // off support
  const GevParams q{0.0, 0.0, 0.3};
  CHECK(gev_logpdf(-10.0, q) == kLogZero);
}

TEST_CASE("gev_cdf reference values")
{
  for (const double xi : {-0.4, 0.0, 0.4}) {
    CHECK(gev_cdf(0.0, {0.0, 0.0, xi}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  CHECK(gev_cdf(1e9, {0.0, 0.0, 0.2}) == doctest::Approx(1.0));
  CHECK(gev_cdf(-1e9, {0.0, 0.0, 0.2}) == doctest::Approx(0.0));
  // above the Weibull upper endpoint
  CHECK(gev_cdf(100.0, {0.0, 0.0, -0.3}) == 1.0);

  CHECK(gev_cdf(-0.5, {-1.5, -0.7, 0.1}) == doctest::Approx(0.8524282415181547).epsilon(1e-12));
}

TEST_CASE("gev_cdf matches quadrature of the density")
{
  const GevParams p{-1.5, -0.7, 0.1};
  double lo = 0.0, hi = 0.0;
  test_support::gev_integration_bounds(p, lo, hi);
  const auto pdf = [&p](double x) { return std::exp(gev_logpdf(x, p)); };
  const double integral = test_support::adaptive_simpson(pdf, lo, -0.5, 1e-10);
  CHECK(integral == doctest::Approx(gev_cdf(-0.5, p)).epsilon(1e-6));
}

TEST_CASE("gev pdf integrates to one over the (xi, sigma) grid")
{
  for (const double xi : {-0.4, -0.1, 0.0, 0.1, 0.4}) {
    for (const double sigma : {0.3, 1.0, 3.0}) {
      const double integral = test_support::gev_mass_quadrature({0.5, std::log(sigma), xi});
      INFO("xi=", xi, " sigma=", sigma);
      CHECK(std::abs(integral - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("cdf derivative equals the density")
{
  for (const double xi : {-0.3, 0.0, 0.25}) {
    const GevParams p{-1.0, std::log(0.8), xi};
    for (const double x : {-2.0, -1.3, -1.0, -0.4, 0.3}) {
      if (gev_logpdf(x, p) == kLogZero) {
        continue;
      }
      const double h = 1e-6;
      const double fd = (gev_cdf(x + h, p) - gev_cdf(x - h, p)) / (2.0 * h);
      CHECK(fd == doctest::Approx(std::exp(gev_logpdf(x, p))).epsilon(1e-5));
    }
  }
}

TEST_CASE("continuity across the Gumbel switch")
{
  // standard grid covering the bulk of the distribution; beyond |w| ~ 2 the
  // genuine GEV-vs-Gumbel gap at |xi| ~ 1e-6 itself exceeds 1e-5
  const GevParams gumbel{-1.2, std::log(0.6), 0.0};
  const double sigma = gumbel.sigma();
  for (const double xi : {1e-7, -1e-7, 1.01e-6, -1.01e-6}) {
    const GevParams p{-1.2, std::log(0.6), xi};
    for (const double w : {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5}) {
      const double x = gumbel.mu + w * sigma;
      CHECK(std::abs(gev_logpdf(x, p) - gev_logpdf(x, gumbel)) <= 1e-5);
      CHECK(std::abs(gev_cdf(x, p) - gev_cdf(x, gumbel)) <= 1e-5);
    }
  }
}

TEST_CASE("gev_cdf is nondecreasing")
{
  for (const double xi : {-0.4, 0.0, 0.4}) {
    const GevParams p{0.0, 0.0, xi};
    double last = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.05) {
      const double c = gev_cdf(x, p);
      CHECK(c >= last);
      last = c;
    }
    CHECK(last <= 1.0);
  }
}

TEST_CASE("quantile inverts the cdf")
{
  Rng rng(7);
  for (const double xi : {-0.35, 0.0, 0.2}) {
    const GevParams p{-1.9, std::log(0.4), xi};
    for (int i = 0; i < 200; ++i) {
      const double u = rng.uniform(1e-6, 1.0 - 1e-6);
      CHECK(gev_cdf(gev_quantile(u, p), p) == doctest::Approx(u).epsilon(1e-9));
    }
  }
  // u = exp(-1) maps to mu for every shape
  for (const double xi : {-0.35, 0.0, 0.2}) {
    const GevParams p{-1.234, 0.3, xi};
    CHECK(gev_quantile(std::exp(-1.0), p) == doctest::Approx(p.mu).epsilon(1e-12));
  }
}

namespace
{

Block make_block(int site, double x, std::map<std::string, double> covariates = {})
{
  Block b;
  b.site_id = site;
  b.x = x;
  b.covariates = std::move(covariates);
  if (b.covariates.empty()) {
    for (const auto & name : kBlockCovariates) {
      b.covariates[name] = 0.0;
    }
  }
  return b;
}

}  // namespace

TEST_CASE("link_eval stationary fixed returns the intercepts")
{
  ModelSpec spec;
  spec.variant = ModelVariant::stationary_fixed;
  spec.site_ids = {1, 2};
  const ParamLayout layout(spec);
  REQUIRE(layout.size() == 3);

  const std::vector<double> coeffs = {-2.499, -0.846, 0.299};
  const GevParams p = link_eval(layout, coeffs, make_block(2, -1.0));
  CHECK(p.mu == -2.499);
  CHECK(p.log_sigma == -0.846);
  CHECK(p.xi == 0.299);
}

TEST_CASE("link_eval applies covariate slopes")
{
  ModelSpec spec;
  spec.variant = ModelVariant::nonstationary_fixed;
  spec.site_ids = {1};
  spec.covariates_mu = {"spd_veh2"};
  const ParamLayout layout(spec);
  // layout: mu0, mu slope, theta0, xi0
  std::vector<double> coeffs(static_cast<std::size_t>(layout.size()), 0.0);
  coeffs[static_cast<std::size_t>(layout.mu_intercept(0))] = -2.489;
  coeffs[static_cast<std::size_t>(layout.mu_slope(0))] = -0.028;
  const GevParams p = link_eval(layout, coeffs, make_block(1, -1.0, {{"spd_veh2", 2.0}}));
  CHECK(p.mu == doctest::Approx(-2.489 - 0.056).epsilon(1e-12));

  CHECK_THROWS_AS(
    link_eval(layout, coeffs, make_block(1, -1.0, {{"spd_veh1", 2.0}})), model_error);
}

TEST_CASE("dataset_loglik sums per-block terms")
{
  ModelSpec spec;
  spec.variant = ModelVariant::stationary_fixed;
  spec.site_ids = {1};
  const ParamLayout layout(spec);

  BlockDataset data;
  data.blocks.push_back(make_block(1, -1.4));
  const std::vector<double> at_mode = {-1.4, 0.0, 0.0};
  CHECK(dataset_loglik(layout, at_mode, data) == doctest::Approx(-1.0).epsilon(1e-9));

  // 20-block fixture: total equals the sum of individual terms
  Rng rng(11);
  BlockDataset big;
  for (int i = 0; i < 20; ++i) {
    big.blocks.push_back(make_block(1, -0.2 - 2.5 * rng.uniform01()));
  }
  const std::vector<double> coeffs = {-1.7, -0.5, 0.12};
  double expected = 0.0;
  for (const Block & b : big.blocks) {
    expected += gev_logpdf(b.x, {coeffs[0], coeffs[1], coeffs[2]});
  }
  CHECK(dataset_loglik(layout, coeffs, big) == doctest::Approx(expected).epsilon(1e-12));

  // any off-support block poisons the sum
  big.blocks.push_back(make_block(1, 5.0));
  const std::vector<double> weibull = {-1.7, -0.5, -0.4};
  CHECK(dataset_loglik(layout, weibull, big) == kLogZero);
}

TEST_CASE("stationary likelihood equals nonstationary with zero slopes")
{
  ModelSpec stationary;
  stationary.variant = ModelVariant::stationary_fixed;
  stationary.site_ids = {1, 2};
  ModelSpec nonstationary;
  nonstationary.variant = ModelVariant::nonstationary_fixed;
  nonstationary.site_ids = {1, 2};
  nonstationary.covariates_mu = {"spd_veh1", "spd_veh2"};
  nonstationary.covariates_theta = {"acc_veh1"};

  const ParamLayout ls(stationary);
  const ParamLayout ln(nonstationary);

  BlockDataset data;
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    data.blocks.push_back(make_block(
      1 + i % 2, -0.2 - 2.5 * rng.uniform01(),
      {{"spd_veh1", rng.normal(3, 1)},
       {"spd_veh2", rng.normal(2, 1)},
       {"acc_veh1", rng.normal(0, 0.5)},
       {"acc_veh2", rng.normal(0, 0.5)}}));
  }
  const std::vector<double> sc = {-1.9, -0.6, 0.05};
  std::vector<double> nc(static_cast<std::size_t>(ln.size()), 0.0);
  nc[static_cast<std::size_t>(ln.mu_intercept(0))] = -1.9;
  nc[static_cast<std::size_t>(ln.theta_intercept(0))] = -0.6;
  nc[static_cast<std::size_t>(ln.xi_intercept(0))] = 0.05;
  CHECK(dataset_loglik(ls, sc, data) == dataset_loglik(ln, nc, data));
}

TEST_CASE("standardize_covariates centers and scales per site")
{
  BlockDataset data;
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    data.blocks.push_back(make_block(
      1 + i % 2, -1.0,
      {{"spd_veh1", rng.normal(4 + i % 2, 2)}, {"spd_veh2", rng.normal(2, 1)}}));
  }
  const StandardizedData sd = standardize_covariates(data);
  for (const int site : {1, 2}) {
    double sum = 0.0, ss = 0.0;
    int n = 0;
    for (const Block & b : sd.data.blocks) {
      if (b.site_id != site) {
        continue;
      }
      sum += b.covariates.at("spd_veh1");
      ++n;
    }
    const double mean = sum / n;
    for (const Block & b : sd.data.blocks) {
      if (b.site_id == site) {
        ss += (b.covariates.at("spd_veh1") - mean) * (b.covariates.at("spd_veh1") - mean);
      }
    }
    CHECK(std::abs(mean) < 1e-12);
    CHECK(ss / (n - 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sd.transforms.count({site, "spd_veh1"}) == 1);
  }

  // constant covariate: sd falls back to 1, values center to zero
  BlockDataset constant;
  for (int i = 0; i < 5; ++i) {
    constant.blocks.push_back(make_block(1, -1.0, {{"spd_veh1", 7.0}}));
  }
  const StandardizedData sc = standardize_covariates(constant);
  for (const Block & b : sc.data.blocks) {
    CHECK(b.covariates.at("spd_veh1") == 0.0);
  }
}

TEST_CASE("param layout names and spec validation")
{
  ModelSpec spec;
  spec.variant = ModelVariant::nonstationary_random;
  spec.site_ids = {1, 2};
  spec.covariates_mu = {"spd_veh2"};
  spec.covariates_theta = {"acc_veh2"};
  const ParamLayout layout(spec);
  // 2 mu0 + 1 slope + 2 hyper, 2 theta0 + 1 slope + 2 hyper, 2 xi0 + 2 hyper
  CHECK(layout.size() == 14);
  CHECK(layout.names()[static_cast<std::size_t>(layout.mu_intercept(1))] == "alpha_mu0[2]");
  CHECK(layout.site_of_component(layout.mu_intercept(1)) == 1);
  CHECK(layout.site_of_component(layout.mu_slope(0)) == -1);
  CHECK(layout.is_hyper_log_var(layout.mu_hyper_log_var()));
  CHECK(layout.is_xi_intercept(layout.xi_intercept(0)));

  ModelSpec bad;
  bad.variant = ModelVariant::stationary_fixed;
  bad.site_ids = {1};
  bad.covariates_mu = {"spd_veh1"};
  CHECK_THROWS_AS(bad.validate(), model_error);
}
