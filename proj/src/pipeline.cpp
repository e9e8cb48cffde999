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

#include "trajrisk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "trajrisk/csv.hpp"
#include "trajrisk/risk.hpp"
#include "trajrisk/trajectory.hpp"

namespace trajrisk
{

namespace
{

std::string out_file(const PipelineConfig & config, const std::string & name)
{
  return (std::filesystem::path(config.out_dir) / name).string();
}

std::string meta_line(const PipelineConfig & config)
{
  return "config_hash=" + config_hash(config) + " seed=" + std::to_string(config.seed);
}

void require_upstream(const std::string & path, const std::string & producer)
{
  if (!std::filesystem::exists(path)) {
    throw upstream_error(path + " is missing; run " + producer + " first");
  }
}

std::vector<GroupSpec> effective_groups(const PipelineConfig & config, const std::vector<int> & sites)
{
  if (!config.groups.empty()) {
    for (const auto & group : config.groups) {
      for (const int site : group.site_ids) {
        if (std::find(sites.begin(), sites.end(), site) == sites.end()) {
          throw config_error(
            "group " + group.name + " references site " + std::to_string(site) +
            " absent from the block data");
        }
      }
    }
    return config.groups;
  }
  GroupSpec all;
  all.name = "all";
  all.site_ids = sites;
  return {all};
}

ModelSpec model_spec_for(const PipelineConfig & config, ModelVariant variant, const GroupSpec & group)
{
  ModelSpec spec;
  spec.variant = variant;
  spec.site_ids = group.site_ids;
  if (spec.nonstationary()) {
    spec.covariates_mu = config.covariates_mu;
    spec.covariates_theta = config.covariates_theta;
  }
  return spec;
}

BlockDataset load_block_data(const PipelineConfig & config)
{
  std::string path = config.blocks_file;
  if (path.empty()) {
    path = blocks_path(config);
    require_upstream(path, "blocks");
  } else if (!std::filesystem::exists(path)) {
    throw config_error("input.blocks_file does not exist: " + path);
  }
  return parse_blocks(path);
}

BlockDataset group_subset(const BlockDataset & data, const GroupSpec & group)
{
  BlockDataset out;
  for (const Block & b : data.blocks) {
    if (std::find(group.site_ids.begin(), group.site_ids.end(), b.site_id) != group.site_ids.end()) {
      out.blocks.push_back(b);
    }
  }
  return out;
}

const char * status_name(TtcStatus status)
{
  switch (status) {
    case TtcStatus::root_found:
      return "root_found";
    case TtcStatus::no_root:
      return "no_root";
    case TtcStatus::already_overlapping:
      return "already_overlapping";
  }
  return "unknown";
}

}  // namespace

std::string states_path(const PipelineConfig & config, int site_id)
{
  return out_file(config, "global_states_site" + std::to_string(site_id) + ".csv");
}

std::string ttc_path(const PipelineConfig & config, int site_id)
{
  return out_file(config, "ttc_site" + std::to_string(site_id) + ".csv");
}

std::string blocks_path(const PipelineConfig & config) { return out_file(config, "blocks.csv"); }

std::string fit_basename(const PipelineConfig & config, const std::string & group, ModelVariant variant)
{
  return out_file(config, "fit_" + group + "_" + variant_name(variant));
}

std::string compare_path(const PipelineConfig & config)
{
  return out_file(config, "dic_compare.csv");
}

void cmd_ingest(const PipelineConfig & config)
{
  if (config.segments.empty()) {
    throw config_error("input.segments is empty");
  }
  std::set<int> seen;
  for (const auto & seg : config.segments) {
    if (!seen.insert(seg.site_id).second) {
      throw config_error("duplicate site id in input.segments: " + std::to_string(seg.site_id));
    }
    if (!std::filesystem::exists(seg.path)) {
      throw config_error("input segment does not exist: " + seg.path);
    }
  }
  for (const auto & seg : config.segments) {
    const SegmentDataset dataset = parse_segment(seg.path, seg.site_id);
    const auto frames = globalize(dataset, config.transform);
    write_text_file(
      states_path(config, seg.site_id), serialize_global_states(dataset, frames, meta_line(config)));
  }
}

namespace
{

std::vector<FrameStates> parse_global_states(const std::string & path)
{
  const CsvTable table = read_csv(path);
  const char * const required[] = {"frame_index", "object_id", "x",        "y",         "heading",
                                   "speed",       "accel",     "steering", "wheelbase", "radius"};
  std::size_t col[std::size(required)];
  for (std::size_t i = 0; i < std::size(required); ++i) {
    const auto found = table.column(required[i]);
    if (!found) {
      throw parse_error(
        parse_error::code::missing_column, std::string("states file missing column: ") + required[i]);
    }
    col[i] = *found;
  }
  std::map<int, FrameStates> frames;
  for (const auto & row : table.rows) {
    long long frame = 0, object = 0;
    if (!parse_long(row[col[0]], frame) || !parse_long(row[col[1]], object)) {
      throw parse_error(parse_error::code::malformed_row, "bad states row");
    }
    ObjectState s;
    s.object_id = object;
    double * const targets[] = {&s.x,        &s.y,     &s.heading,  &s.speed,
                                &s.accel,    &s.steering, &s.wheelbase, &s.radius};
    for (std::size_t i = 0; i < std::size(targets); ++i) {
      if (!parse_double(row[col[i + 2]], *targets[i])) {
        throw parse_error(parse_error::code::malformed_row, "bad states row");
      }
    }
    auto & fs = frames[static_cast<int>(frame)];
    fs.frame_index = static_cast<int>(frame);
    fs.states.push_back(s);
  }
  std::vector<FrameStates> out;
  out.reserve(frames.size());
  for (auto & [frame, fs] : frames) {
    out.push_back(std::move(fs));
  }
  return out;
}

std::vector<std::vector<TTCResult>> parse_ttc_dump(const std::string & path)
{
  const CsvTable table = read_csv(path);
  const char * const required[] = {"frame_index", "id_i", "id_j", "ttc", "status"};
  std::size_t col[std::size(required)];
  for (std::size_t i = 0; i < std::size(required); ++i) {
    const auto found = table.column(required[i]);
    if (!found) {
      throw parse_error(
        parse_error::code::missing_column, std::string("ttc dump missing column: ") + required[i]);
    }
    col[i] = *found;
  }
  std::map<int, std::vector<TTCResult>> by_frame;
  for (const auto & row : table.rows) {
    long long frame = 0, id_i = 0, id_j = 0;
    double ttc = 0.0;
    if (!parse_long(row[col[0]], frame) || !parse_long(row[col[1]], id_i) ||
        !parse_long(row[col[2]], id_j) || !parse_double(row[col[3]], ttc)) {
      throw parse_error(parse_error::code::malformed_row, "bad ttc dump row");
    }
    TTCResult r;
    r.frame_index = static_cast<int>(frame);
    r.id_i = id_i;
    r.id_j = id_j;
    r.value = ttc;
    r.status = TtcStatus::root_found;
    by_frame[r.frame_index].push_back(r);
  }
  std::vector<std::vector<TTCResult>> out;
  for (auto & [frame, results] : by_frame) {
    out.push_back(std::move(results));
  }
  return out;
}

}  // namespace

void cmd_ttc(const PipelineConfig & config)
{
  if (config.segments.empty()) {
    throw config_error("input.segments is empty");
  }
  for (const auto & seg : config.segments) {
    require_upstream(states_path(config, seg.site_id), "ingest");
    const auto frames = parse_global_states(states_path(config, seg.site_id));
    std::ostringstream out;
    out << "# " << meta_line(config) << "\n";
    out << "frame_index,id_i,id_j,ttc,status\n";
    for (const auto & fs : frames) {
      for (const TTCResult & r : ttc_frame(fs.states, config.ttc, fs.frame_index)) {
        out << r.frame_index << ',' << r.id_i << ',' << r.id_j << ',' << format_double(r.value)
            << ',' << status_name(r.status) << "\n";
      }
    }
    write_text_file(ttc_path(config, seg.site_id), out.str());
  }
}

void cmd_blocks(const PipelineConfig & config)
{
  if (config.segments.empty()) {
    throw config_error("input.segments is empty");
  }
  BlockDataset merged;
  for (const auto & seg : config.segments) {
    require_upstream(ttc_path(config, seg.site_id), "ttc");
    require_upstream(states_path(config, seg.site_id), "ingest");
    const auto results = parse_ttc_dump(ttc_path(config, seg.site_id));
    const auto frames = parse_global_states(states_path(config, seg.site_id));
    const auto series = track_pairs(results);
    BlockDataset dataset = extract_blocks(series, frames, seg.site_id);
    merged.blocks.insert(merged.blocks.end(), dataset.blocks.begin(), dataset.blocks.end());
  }
  warn_small_sites(merged);
  std::string content = serialize_blocks(merged, meta_line(config));
  for (const auto & warning : merged.warnings) {
    content += "# warning: " + warning + "\n";
  }
  write_text_file(blocks_path(config), content);
  write_text_file(
    out_file(config, "site_summary.csv"),
    serialize_site_summaries(summarize_sites(merged), meta_line(config)));
}

void cmd_fit(const PipelineConfig & config)
{
  const BlockDataset data = load_block_data(config);
  const auto groups = effective_groups(config, data.site_ids());
  const std::string hash = config_hash(config);

  for (const auto & group : groups) {
    const BlockDataset sub = group_subset(data, group);
    for (const ModelVariant variant : config.variants) {
      const ModelSpec spec = model_spec_for(config, variant, group);
      SamplerConfig sampler = config.sampler;
      sampler.seed = derive_seed(config.seed, "fit:" + group.name + ":" + variant_name(variant));
      const PosteriorSummary fit = run_mcmc(spec, sub, config.priors, sampler);

      const std::string base = fit_basename(config, group.name, variant);
      write_text_file(base + ".summary.json", serialize_summary(fit, hash, config.seed));
      write_text_file(base + ".draws.csv", serialize_draws(fit, meta_line(config)));

      const ParamLayout layout(spec);
      const PpcSummary ppc = posterior_predictive(
        layout, fit.standardized.data, fit, config.ppc_reps,
        derive_seed(config.seed, "ppc:" + group.name + ":" + variant_name(variant)));
      write_text_file(base + ".ppc.csv", serialize_ppc(ppc, meta_line(config)));
    }
  }
}

namespace
{

double extract_json_number(const std::string & text, const std::string & key)
{
  const std::string needle = "\"" + key + "\": ";
  const auto pos = text.find(needle);
  if (pos == std::string::npos) {
    throw upstream_error("summary file lacks field " + key);
  }
  double v = 0.0;
  const auto start = pos + needle.size();
  auto end = text.find_first_of(",\n}", start);
  if (end == std::string::npos) {
    throw upstream_error("summary file has a bad " + key + " field");
  }
  const auto field = std::string_view(text).substr(start, end - start);
  if (field == "null") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (!parse_double(field, v)) {
    throw upstream_error("summary file has a bad " + key + " field");
  }
  return v;
}

}  // namespace

void cmd_compare(const PipelineConfig & config)
{
  const BlockDataset data = load_block_data(config);
  const auto groups = effective_groups(config, data.site_ids());

  std::ostringstream out;
  out << "# " << meta_line(config) << "\n";
  out << "group,variant,dbar,pd,dic,dic_display,delta_dic,evidence\n";
  for (const auto & group : groups) {
    struct Row
    {
      ModelVariant variant;
      double dbar, pd, dic;
    };
    std::vector<Row> rows;
    for (const ModelVariant variant : config.variants) {
      const std::string path = fit_basename(config, group.name, variant) + ".summary.json";
      require_upstream(path, "fit");
      const std::string text = read_text_file(path);
      rows.push_back({
        variant,
        extract_json_number(text, "dbar"),
        extract_json_number(text, "pd"),
        extract_json_number(text, "dic"),
      });
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Row & row : rows) {
      if (std::isfinite(row.dic)) {
        best = std::min(best, row.dic);
      }
    }
    if (!std::isfinite(best)) {
      throw upstream_error("no variant in group " + group.name + " has a finite DIC");
    }
    for (const Row & row : rows) {
      // evidence bands on the DIC difference: >10 strong, 5-10 substantial,
      // <5 competitive; undefined pD rows are listed but out of the race
      std::string evidence;
      std::string delta_text;
      if (!std::isfinite(row.dic)) {
        evidence = "undefined";
      } else {
        const double delta = row.dic - best;
        delta_text = format_double(delta);
        evidence = delta == 0.0  ? "best"
                   : delta > 10.0 ? "strong"
                   : delta >= 5.0 ? "substantial"
                                  : "competitive";
      }
      out << group.name << ',' << variant_name(row.variant) << ',' << format_double(row.dbar)
          << ',' << (std::isfinite(row.pd) ? format_double(row.pd) : "") << ','
          << (std::isfinite(row.dic) ? format_double(row.dic) : "") << ','
          << (std::isfinite(row.dic) ? format_double(row.dic, 2) : "") << ',' << delta_text << ','
          << evidence << "\n";
    }
  }
  write_text_file(compare_path(config), out.str());
}

void cmd_risk(const PipelineConfig & config)
{
  if (config.annual_blocks <= 0) {
    // annualization has no defensible default; the ratio T/t is site policy
    throw config_error("risk.annual_blocks must be a positive block count");
  }
  const BlockDataset data = load_block_data(config);
  const auto groups = effective_groups(config, data.site_ids());
  const std::string hash = config_hash(config);

  for (const auto & group : groups) {
    const BlockDataset sub = group_subset(data, group);
    for (const ModelVariant variant : config.variants) {
      const std::string base = fit_basename(config, group.name, variant);
      require_upstream(base + ".draws.csv", "fit");
      const DrawArchive archive = parse_draws(base + ".draws.csv");

      PosteriorSummary fit;
      fit.spec = model_spec_for(config, variant, group);
      if (archive.param_names != ParamLayout(fit.spec).names()) {
        throw upstream_error(
          base + ".draws.csv does not match the configured model; rerun fit");
      }
      fit.param_names = archive.param_names;
      fit.n_params = archive.n_params;
      fit.n_retained = archive.n_retained;
      fit.draws = archive.draws;
      fit.standardized = standardize_covariates(sub);

      const RiskReport report = build_risk_report(fit, config.annual_blocks);
      write_text_file(
        out_file(config, "risk_" + group.name + "_" + variant_name(variant) + ".json"),
        serialize_risk_report(report, hash, config.seed));
      write_text_file(
        out_file(config, "risk_blocks_" + group.name + "_" + variant_name(variant) + ".csv"),
        serialize_risk_blocks(report, meta_line(config)));
      write_text_file(
        out_file(config, "risk_sites_" + group.name + "_" + variant_name(variant) + ".csv"),
        serialize_risk_sites(report, meta_line(config)));
    }
  }
}

void cmd_validate(const PipelineConfig & config)
{
  const BlockDataset data = load_block_data(config);
  const auto groups = effective_groups(config, data.site_ids());
  const std::string hash = config_hash(config);

  for (const auto & group : groups) {
    const BlockDataset sub = group_subset(data, group);
    const ModelSpec spec = model_spec_for(config, config.validate_variant, group);
    SamplerConfig sampler = config.sampler;
    sampler.seed = derive_seed(config.seed, "validate:" + group.name);
    const ValidationReport report =
      kfold_validate(sub, spec, config.priors, sampler, config.k_folds, config.lambda_grid);
    write_text_file(
      out_file(config, "validation_" + group.name + ".csv"),
      serialize_validation(report, meta_line(config)));
    write_text_file(
      out_file(config, "validation_" + group.name + ".json"),
      serialize_validation_json(report, hash, config.seed));
  }
}

void cmd_synth(const PipelineConfig & config)
{
  if (config.synth.mode == SynthMode::segments) {
    for (const int site : config.synth.sites) {
      ScenarioSpec spec;
      spec.kind = config.synth.kind;
      spec.n_vehicles = config.synth.n_vehicles;
      spec.seed = derive_seed(config.seed, "synth_segment", static_cast<std::uint64_t>(site));
      spec.speed = config.synth.speed;
      spec.accel = config.synth.accel;
      spec.steering = config.synth.steering;
      spec.position = config.synth.position;
      const SegmentDataset dataset = gen_segment(spec, site);
      write_text_file(
        out_file(config, "synth_site" + std::to_string(site) + ".csv"),
        serialize_segment(dataset, meta_line(config)));
    }
    return;
  }

  SyntheticBlockSpec spec;
  spec.seed = derive_seed(config.seed, "synth_blocks");
  for (std::size_t i = 0; i < config.synth.sites.size(); ++i) {
    SiteTruth site;
    site.site_id = config.synth.sites[i];
    site.n_blocks = config.synth.blocks_per_site[i];
    site.params = {config.synth.mu[i], config.synth.log_sigma[i], config.synth.xi[i]};
    spec.sites.push_back(std::move(site));
  }
  BlockDataset dataset = gen_blocks(spec);
  warn_small_sites(dataset);
  write_text_file(out_file(config, "synth_blocks.csv"), serialize_blocks(dataset, meta_line(config)));
  write_text_file(out_file(config, "synth_truth.json"), serialize_block_truth(spec, config_hash(config)));
}

void cmd_all(const PipelineConfig & config)
{
  if (!config.segments.empty()) {
    cmd_ingest(config);
    cmd_ttc(config);
    cmd_blocks(config);
  } else if (config.blocks_file.empty()) {
    throw config_error("cmd all needs input.segments or input.blocks_file");
  }
  cmd_fit(config);
  cmd_compare(config);
  cmd_risk(config);
  cmd_validate(config);
}

}  // namespace trajrisk
