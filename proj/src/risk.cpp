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

#include "trajrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trajrisk/csv.hpp"

namespace trajrisk
{

double risk_of_crash(const GevParams & params) { return 1.0 - gev_cdf(0.0, params); }

double exceedance_probability(const GevParams & params, double lambda)
{
  return 1.0 - gev_cdf(lambda, params);
}

double crash_frequency(const std::vector<double> & rc_values)
{
  double cf = 0.0;
  for (const double rc : rc_values) {
    if (rc < 0.0 || rc > 1.0 || !std::isfinite(rc)) {
      throw risk_error("crash probabilities must lie in [0, 1]");
    }
    cf += rc;
  }
  return cf;
}

double annualize(double cf, long long t_observed_blocks, long long T_annual_blocks)
{
  if (t_observed_blocks == 0) {
    throw risk_error("cannot annualize with zero observed blocks");
  }
  return static_cast<double>(T_annual_blocks) / static_cast<double>(t_observed_blocks) * cf;
}

double expected_near_misses(const std::vector<GevParams> & block_params, double lambda)
{
  double total = 0.0;
  for (const GevParams & p : block_params) {
    total += exceedance_probability(p, lambda);
  }
  return total;
}

namespace
{

IntervalEstimate summarize_draws(std::vector<double> values)
{
  IntervalEstimate e;
  e.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const auto q = [&values](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) {
      return values.back();
    }
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
  };
  e.lo = q(0.025);
  e.hi = q(0.975);
  return e;
}

}  // namespace

RiskReport build_risk_report(const PosteriorSummary & fit, long long annual_blocks)
{
  const ParamLayout layout(fit.spec);
  const BlockDataset & data = fit.standardized.data;
  const int total = fit.total_draws();
  if (total == 0) {
    throw risk_error("risk report needs retained draws");
  }

  RiskReport report;
  report.annual_blocks = annual_blocks;

  const auto site_ids = data.site_ids();
  std::vector<std::vector<double>> site_cf(
    site_ids.size(), std::vector<double>(static_cast<std::size_t>(total), 0.0));

  std::vector<double> rc_draws(static_cast<std::size_t>(total));
  for (const Block & block : data.blocks) {
    for (int d = 0; d < total; ++d) {
      rc_draws[static_cast<std::size_t>(d)] = risk_of_crash(link_eval(layout, fit.pooled_draw(d), block));
    }
    const std::size_t site_index = static_cast<std::size_t>(
      std::find(site_ids.begin(), site_ids.end(), block.site_id) - site_ids.begin());
    for (int d = 0; d < total; ++d) {
      site_cf[site_index][static_cast<std::size_t>(d)] += rc_draws[static_cast<std::size_t>(d)];
    }
    BlockRisk br;
    br.site_id = block.site_id;
    br.pair_i = block.pair_i;
    br.pair_j = block.pair_j;
    br.rc = summarize_draws(rc_draws);
    report.blocks.push_back(std::move(br));
  }

  for (std::size_t s = 0; s < site_ids.size(); ++s) {
    SiteRisk sr;
    sr.site_id = site_ids[s];
    sr.observed_blocks = static_cast<int>(data.site_blocks(site_ids[s]).size());
    sr.cf = summarize_draws(site_cf[s]);
    std::vector<double> cf_year(site_cf[s]);
    for (double & v : cf_year) {
      v = annualize(v, sr.observed_blocks, annual_blocks);
    }
    sr.cf_year = summarize_draws(cf_year);
    report.sites.push_back(std::move(sr));
  }
  return report;
}

ValidationReport kfold_validate(
  const BlockDataset & data, const ModelSpec & spec, const PriorSpec & priors,
  const SamplerConfig & config, int k_folds, const std::vector<double> & lambda_grid)
{
  if (k_folds < 2) {
    throw risk_error("k-fold validation needs at least two folds");
  }
  const auto site_ids = data.site_ids();
  ValidationReport report;
  report.k_folds = k_folds;
  report.lambda_grid = lambda_grid;
  report.fold_sites = site_ids;

  // seeded per-site shuffle, fold = shuffled position mod k
  std::map<int, std::vector<int>> site_fold;  // site -> fold per block (site order)
  for (const int site : site_ids) {
    const auto blocks = data.site_blocks(site);
    if (static_cast<int>(blocks.size()) < k_folds) {
      throw risk_error(
        "site " + std::to_string(site) + " has " + std::to_string(blocks.size()) +
        " blocks, fewer than " + std::to_string(k_folds) + " folds");
    }
    std::vector<int> order(blocks.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, "kfold_site", static_cast<std::uint64_t>(site)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
      std::swap(order[i - 1], order[j]);
    }
    std::vector<int> folds(blocks.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      folds[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) % k_folds;
    }
    site_fold[site] = folds;
    report.fold_assignment.push_back(std::move(folds));
  }

  // fold id per block in dataset order
  std::vector<int> block_fold(data.blocks.size());
  {
    std::map<int, int> site_cursor;
    for (std::size_t i = 0; i < data.blocks.size(); ++i) {
      const int site = data.blocks[i].site_id;
      block_fold[i] = site_fold[site][static_cast<std::size_t>(site_cursor[site]++)];
    }
  }

  // per-(site, lambda) accumulators across folds, matched by draw index:
  // expected counts plus posterior-predictive count realizations
  const int n_draws_expected = (config.n_iter - config.burn_in) * config.n_chains;
  std::map<std::pair<int, std::size_t>, std::vector<double>> estimates;
  std::map<std::pair<int, std::size_t>, std::vector<double>> predicted;
  for (const int site : site_ids) {
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
      estimates[{site, l}].assign(static_cast<std::size_t>(n_draws_expected), 0.0);
      predicted[{site, l}].assign(static_cast<std::size_t>(n_draws_expected), 0.0);
    }
  }
  std::map<std::pair<int, std::size_t>, long long> observed;

  for (int fold = 0; fold < k_folds; ++fold) {
    BlockDataset train;
    BlockDataset test;
    for (std::size_t i = 0; i < data.blocks.size(); ++i) {
      (block_fold[i] == fold ? test : train).blocks.push_back(data.blocks[i]);
    }

    SamplerConfig fold_config = config;
    fold_config.seed = derive_seed(config.seed, "kfold_fit", static_cast<std::uint64_t>(fold));
    const PosteriorSummary fit = run_mcmc(spec, train, priors, fold_config);
    const ParamLayout layout(spec);

    // held-out covariates standardized with the training transforms
    BlockDataset test_std = test;
    for (Block & block : test_std.blocks) {
      for (auto & [name, value] : block.covariates) {
        const auto it = fit.standardized.transforms.find({block.site_id, name});
        if (it != fit.standardized.transforms.end()) {
          value = (value - it->second.mean) / it->second.sd;
        }
      }
    }

    const int total = fit.total_draws();
    if (total != n_draws_expected) {
      throw risk_error("fold fits must retain identical draw counts");
    }
    Rng pred_rng(derive_seed(config.seed, "kfold_pred", static_cast<std::uint64_t>(fold)));
    for (std::size_t i = 0; i < test_std.blocks.size(); ++i) {
      const Block & block = test_std.blocks[i];
      for (int d = 0; d < total; ++d) {
        // one uniform per (block, draw): exceedance events are nested in
        // lambda, so the same uniform realizes every threshold consistently
        const double u = pred_rng.uniform01();
        const auto draw = fit.pooled_draw(d);
        const GevParams params = link_eval(layout, draw, block);
        for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
          const double p = exceedance_probability(params, lambda_grid[l]);
          estimates[{block.site_id, l}][static_cast<std::size_t>(d)] += p;
          if (u < p) {
            predicted[{block.site_id, l}][static_cast<std::size_t>(d)] += 1.0;
          }
        }
      }
      for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
        if (test.blocks[i].x >= lambda_grid[l]) {
          ++observed[{block.site_id, l}];
        }
      }
    }
  }

  for (const int site : site_ids) {
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
      ValidationCell cell;
      cell.site_id = site;
      cell.lambda = lambda_grid[l];
      cell.estimated = summarize_draws(estimates[{site, l}]);
      const IntervalEstimate pred = summarize_draws(predicted[{site, l}]);
      cell.pred_lo = static_cast<long long>(pred.lo);
      cell.pred_hi = static_cast<long long>(std::ceil(pred.hi));
      cell.observed = observed.count({site, l}) ? observed[{site, l}] : 0;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string serialize_risk_report(
  const RiskReport & report, const std::string & config_hash, std::uint64_t seed)
{
  std::ostringstream out;
  out << "{\n  \"config_hash\": \"" << config_hash << "\",\n  \"seed\": " << seed
      << ",\n  \"annual_blocks\": " << report.annual_blocks << ",\n  \"sites\": [\n";
  for (std::size_t s = 0; s < report.sites.size(); ++s) {
    const SiteRisk & sr = report.sites[s];
    out << "    {\"site_id\": " << sr.site_id << ", \"observed_blocks\": " << sr.observed_blocks
        << ", \"cf\": {\"mean\": " << format_double(sr.cf.mean)
        << ", \"q2.5\": " << format_double(sr.cf.lo) << ", \"q97.5\": " << format_double(sr.cf.hi)
        << "}, \"cf_year\": {\"mean\": " << format_double(sr.cf_year.mean)
        << ", \"q2.5\": " << format_double(sr.cf_year.lo)
        << ", \"q97.5\": " << format_double(sr.cf_year.hi) << "}}"
        << (s + 1 < report.sites.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

std::string serialize_risk_blocks(const RiskReport & report, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "site_id,pair_i,pair_j,rc_mean,rc_q2.5,rc_q97.5\n";
  for (const BlockRisk & br : report.blocks) {
    out << br.site_id << ',' << br.pair_i << ',' << br.pair_j << ',' << format_double(br.rc.mean)
        << ',' << format_double(br.rc.lo) << ',' << format_double(br.rc.hi) << "\n";
  }
  return out.str();
}

std::string serialize_risk_sites(const RiskReport & report, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "site_id,observed_blocks,cf_mean,cf_q2.5,cf_q97.5,cf_year_mean,cf_year_q2.5,cf_year_q97.5\n";
  for (const SiteRisk & sr : report.sites) {
    out << sr.site_id << ',' << sr.observed_blocks << ',' << format_double(sr.cf.mean) << ','
        << format_double(sr.cf.lo) << ',' << format_double(sr.cf.hi) << ','
        << format_double(sr.cf_year.mean) << ',' << format_double(sr.cf_year.lo) << ','
        << format_double(sr.cf_year.hi) << "\n";
  }
  return out.str();
}

std::string serialize_validation(const ValidationReport & report, const std::string & header_comment)
{
  std::ostringstream out;
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << "site_id,lambda,estimate,q2.5,q97.5,pred_lo,pred_hi,observed\n";
  for (const ValidationCell & cell : report.cells) {
    out << cell.site_id << ',' << format_double(cell.lambda) << ','
        << format_double(cell.estimated.mean) << ',' << format_double(cell.estimated.lo) << ','
        << format_double(cell.estimated.hi) << ',' << cell.pred_lo << ',' << cell.pred_hi << ','
        << cell.observed << "\n";
  }
  return out.str();
}

std::string serialize_validation_json(
  const ValidationReport & report, const std::string & config_hash, std::uint64_t seed)
{
  std::ostringstream out;
  out << "{\n  \"config_hash\": \"" << config_hash << "\",\n  \"seed\": " << seed
      << ",\n  \"k_folds\": " << report.k_folds << ",\n  \"cells\": [\n";
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const ValidationCell & cell = report.cells[i];
    out << "    {\"site_id\": " << cell.site_id << ", \"lambda\": " << format_double(cell.lambda)
        << ", \"estimate\": " << format_double(cell.estimated.mean)
        << ", \"q2.5\": " << format_double(cell.estimated.lo)
        << ", \"q97.5\": " << format_double(cell.estimated.hi)
        << ", \"pred_lo\": " << cell.pred_lo << ", \"pred_hi\": " << cell.pred_hi
        << ", \"observed\": " << cell.observed << "}" << (i + 1 < report.cells.size() ? "," : "")
        << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

}  // namespace trajrisk
