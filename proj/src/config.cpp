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

#include "trajrisk/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "trajrisk/csv.hpp"

namespace trajrisk
{

namespace
{

std::string trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

std::vector<std::string> split_list(const std::string & value)
{
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

class KvReader
{
public:
  explicit KvReader(const std::string & path)
  {
    std::ifstream in(path);
    if (!in) {
      throw config_error("cannot open config file: " + path);
    }
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') {
        continue;
      }
      if (t.front() == '[') {
        if (t.back() != ']') {
          throw config_error("config line " + std::to_string(line_no) + ": unterminated section");
        }
        section = trim(std::string_view(t).substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key = trim(std::string_view(t).substr(0, eq));
      const std::string value = trim(std::string_view(t).substr(eq + 1));
      if (section.empty()) {
        throw config_error("config line " + std::to_string(line_no) + ": key outside a section");
      }
      values_[section + "." + key] = value;
    }
  }

  bool has(const std::string & path) const { return values_.count(path) > 0; }

  std::string get_string(const std::string & path, const std::string & fallback)
  {
    consumed_.insert(path);
    const auto it = values_.find(path);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string & path)
  {
    consumed_.insert(path);
    const auto it = values_.find(path);
    if (it == values_.end()) {
      throw config_error("missing config field: " + path);
    }
    return it->second;
  }

  double get_double(const std::string & path, double fallback)
  {
    consumed_.insert(path);
    const auto it = values_.find(path);
    if (it == values_.end()) {
      return fallback;
    }
    double v = 0.0;
    if (!parse_double(it->second, v)) {
      throw config_error("bad number in config field: " + path);
    }
    return v;
  }

  long long get_int(const std::string & path, long long fallback)
  {
    consumed_.insert(path);
    const auto it = values_.find(path);
    if (it == values_.end()) {
      return fallback;
    }
    long long v = 0;
    if (!parse_long(it->second, v)) {
      throw config_error("bad integer in config field: " + path);
    }
    return v;
  }

  std::vector<std::string> get_list(const std::string & path)
  {
    consumed_.insert(path);
    const auto it = values_.find(path);
    return it == values_.end() ? std::vector<std::string>{} : split_list(it->second);
  }

  void check_unknown() const
  {
    for (const auto & [path, value] : values_) {
      if (!consumed_.count(path)) {
        throw config_error("unknown config field: " + path);
      }
    }
  }

private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

Range get_range(KvReader & reader, const std::string & path, Range fallback)
{
  const auto items = reader.get_list(path);
  if (items.empty()) {
    return fallback;
  }
  if (items.size() != 2) {
    throw config_error("config field " + path + " needs exactly two numbers");
  }
  Range r;
  if (!parse_double(items[0], r.lo) || !parse_double(items[1], r.hi)) {
    throw config_error("bad number in config field: " + path);
  }
  return r;
}

std::vector<double> get_doubles(KvReader & reader, const std::string & path, std::vector<double> fallback)
{
  const auto items = reader.get_list(path);
  if (items.empty()) {
    return fallback;
  }
  std::vector<double> out;
  for (const auto & item : items) {
    double v = 0.0;
    if (!parse_double(item, v)) {
      throw config_error("bad number in config field: " + path);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<int> get_ints(KvReader & reader, const std::string & path, std::vector<int> fallback)
{
  const auto items = reader.get_list(path);
  if (items.empty()) {
    return fallback;
  }
  std::vector<int> out;
  for (const auto & item : items) {
    long long v = 0;
    if (!parse_long(item, v)) {
      throw config_error("bad integer in config field: " + path);
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

ScenarioKind scenario_kind_from(const std::string & name)
{
  if (name == "head_on") return ScenarioKind::head_on;
  if (name == "crossing") return ScenarioKind::crossing;
  if (name == "lane_change") return ScenarioKind::lane_change;
  if (name == "random_field") return ScenarioKind::random_field;
  throw config_error("unknown synth.kind: " + name);
}

std::string scenario_kind_name(ScenarioKind kind)
{
  switch (kind) {
    case ScenarioKind::head_on:
      return "head_on";
    case ScenarioKind::crossing:
      return "crossing";
    case ScenarioKind::lane_change:
      return "lane_change";
    case ScenarioKind::random_field:
      return "random_field";
  }
  return "unknown";
}

}  // namespace

PipelineConfig load_config(const std::string & path)
{
  KvReader reader(path);
  PipelineConfig config;

  {
    const std::string seed = reader.require_string("pipeline.seed");
    long long v = 0;
    if (!parse_long(seed, v) || v < 0) {
      throw config_error("pipeline.seed must be a nonnegative integer");
    }
    config.seed = static_cast<std::uint64_t>(v);
  }
  config.out_dir = reader.get_string("pipeline.out_dir", "out");

  for (const auto & item : reader.get_list("input.segments")) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) {
      throw config_error("input.segments entries must look like path:site_id");
    }
    SegmentInput seg;
    seg.path = trim(std::string_view(item).substr(0, colon));
    long long site = 0;
    if (!parse_long(trim(std::string_view(item).substr(colon + 1)), site)) {
      throw config_error("bad site id in input.segments: " + item);
    }
    seg.site_id = static_cast<int>(site);
    config.segments.push_back(std::move(seg));
  }
  config.blocks_file = reader.get_string("input.blocks_file", "");

  config.transform.wheelbase_ratio = reader.get_double("transform.wheelbase_ratio", 0.6);
  config.transform.radius_scale = reader.get_double("transform.radius_scale", 1.0);
  config.transform.min_speed = reader.get_double("transform.min_speed", 0.1);
  if (config.transform.wheelbase_ratio <= 0.0 || config.transform.radius_scale <= 0.0) {
    throw config_error("transform ratios must be positive");
  }

  config.ttc.horizon = reader.get_double("ttc.horizon", 10.0);
  config.ttc.window_low = reader.get_double("ttc.window_low", 0.1);
  config.ttc.window_high = reader.get_double("ttc.window_high", 3.0);
  config.ttc.root_tol = reader.get_double("ttc.root_tol", 1e-9);
  if (config.ttc.horizon <= 0.0 || config.ttc.root_tol <= 0.0 ||
      config.ttc.window_low > config.ttc.window_high) {
    throw config_error("invalid ttc settings");
  }

  if (reader.has("model.variants")) {
    config.variants.clear();
    for (const auto & name : reader.get_list("model.variants")) {
      try {
        config.variants.push_back(variant_from_name(name));
      } catch (const model_error & e) {
        throw config_error(std::string("model.variants: ") + e.what());
      }
    }
  }
  if (config.variants.empty()) {
    throw config_error("model.variants must name at least one variant");
  }
  config.covariates_mu = reader.get_list("model.covariates_mu");
  config.covariates_theta = reader.get_list("model.covariates_theta");
  {
    // groups are ';'-separated name:site,site entries
    const std::string raw = reader.get_string("model.groups", "");
    if (!raw.empty()) {
      std::stringstream ss(raw);
      std::string entry;
      while (std::getline(ss, entry, ';')) {
        entry = trim(entry);
        if (entry.empty()) {
          continue;
        }
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
          throw config_error("model.groups entries must look like name:site,site");
        }
        GroupSpec group;
        group.name = trim(std::string_view(entry).substr(0, colon));
        for (const auto & site : split_list(entry.substr(colon + 1))) {
          long long v = 0;
          if (!parse_long(site, v)) {
            throw config_error("bad site id in model.groups: " + entry);
          }
          group.site_ids.push_back(static_cast<int>(v));
        }
        if (group.name.empty() || group.site_ids.empty()) {
          throw config_error("model.groups entries must look like name:site,site");
        }
        config.groups.push_back(std::move(group));
      }
    }
  }

  config.priors.coef_variance = reader.get_double("priors.coef_variance", 1e5);
  config.priors.ig_shape = reader.get_double("priors.ig_shape", 0.001);
  config.priors.ig_rate = reader.get_double("priors.ig_rate", 0.001);
  config.priors.xi_bound = reader.get_double("priors.xi_bound", 1.0);
  if (config.priors.coef_variance <= 0.0 || config.priors.ig_shape <= 0.0 ||
      config.priors.ig_rate <= 0.0 || config.priors.xi_bound <= 0.0) {
    throw config_error("prior hyperparameters must be positive");
  }

  config.sampler.n_chains = static_cast<int>(reader.get_int("sampler.chains", 2));
  config.sampler.n_iter = static_cast<int>(reader.get_int("sampler.iterations", 50000));
  config.sampler.burn_in = static_cast<int>(reader.get_int("sampler.burn_in", 20000));
  config.sampler.target_accept = reader.get_double("sampler.target_accept", 0.44);
  config.sampler.adapt_window = static_cast<int>(reader.get_int("sampler.adapt_window", 50));
  try {
    config.sampler.validate();
  } catch (const mcmc_error & e) {
    throw config_error(std::string("sampler: ") + e.what());
  }

  config.annual_blocks = reader.get_int("risk.annual_blocks", 0);
  {
    const std::string name = reader.get_string("risk.variant", "nonstationary_random");
    try {
      config.validate_variant = variant_from_name(name);
    } catch (const model_error & e) {
      throw config_error(std::string("risk.variant: ") + e.what());
    }
  }
  config.lambda_grid = get_doubles(reader, "risk.lambda_grid", config.lambda_grid);
  for (const double lambda : config.lambda_grid) {
    if (lambda >= 0.0) {
      // thresholds live on the negated-TTC scale
      throw config_error("risk.lambda_grid entries must be negative");
    }
  }
  config.k_folds = static_cast<int>(reader.get_int("risk.k_folds", 5));
  config.ppc_reps = static_cast<int>(reader.get_int("ppc.n_rep", 200));
  if (config.k_folds < 2 || config.ppc_reps < 1) {
    throw config_error("risk.k_folds needs >= 2 and ppc.n_rep >= 1");
  }

  {
    const std::string mode = reader.get_string("synth.mode", "segments");
    if (mode == "segments") {
      config.synth.mode = SynthMode::segments;
    } else if (mode == "blocks") {
      config.synth.mode = SynthMode::blocks;
    } else {
      throw config_error("synth.mode must be segments or blocks");
    }
  }
  config.synth.kind = scenario_kind_from(reader.get_string("synth.kind", "random_field"));
  config.synth.n_vehicles = static_cast<int>(reader.get_int("synth.n_vehicles", 12));
  config.synth.sites = get_ints(reader, "synth.sites", {1});
  config.synth.speed = get_range(reader, "synth.speed", config.synth.speed);
  config.synth.accel = get_range(reader, "synth.accel", config.synth.accel);
  config.synth.steering = get_range(reader, "synth.steering", config.synth.steering);
  config.synth.position = get_range(reader, "synth.position", config.synth.position);
  {
    const auto counts = get_ints(reader, "synth.blocks_per_site", {});
    config.synth.blocks_per_site = counts;
    config.synth.mu = get_doubles(reader, "synth.mu", {});
    config.synth.log_sigma = get_doubles(reader, "synth.log_sigma", {});
    config.synth.xi = get_doubles(reader, "synth.xi", {});
    if (config.synth.mode == SynthMode::blocks) {
      const std::size_t n = config.synth.sites.size();
      if (config.synth.blocks_per_site.size() != n || config.synth.mu.size() != n ||
          config.synth.log_sigma.size() != n || config.synth.xi.size() != n) {
        throw config_error(
          "synth blocks mode needs blocks_per_site, mu, log_sigma, xi lists matching synth.sites");
      }
    }
  }

  reader.check_unknown();
  return config;
}

std::string canonical_config(const PipelineConfig & config)
{
  std::ostringstream out;
  out << "seed=" << config.seed << "\n";
  for (const auto & seg : config.segments) {
    out << "segment=" << seg.path << ":" << seg.site_id << "\n";
  }
  out << "blocks_file=" << config.blocks_file << "\n";
  out << "wheelbase_ratio=" << format_double(config.transform.wheelbase_ratio) << "\n";
  out << "radius_scale=" << format_double(config.transform.radius_scale) << "\n";
  out << "min_speed=" << format_double(config.transform.min_speed) << "\n";
  out << "horizon=" << format_double(config.ttc.horizon) << "\n";
  out << "window=" << format_double(config.ttc.window_low) << ","
      << format_double(config.ttc.window_high) << "\n";
  out << "root_tol=" << format_double(config.ttc.root_tol) << "\n";
  out << "variants=";
  for (const auto v : config.variants) {
    out << variant_name(v) << ",";
  }
  out << "\n";
  out << "covariates_mu=";
  for (const auto & c : config.covariates_mu) {
    out << c << ",";
  }
  out << "\ncovariates_theta=";
  for (const auto & c : config.covariates_theta) {
    out << c << ",";
  }
  out << "\n";
  for (const auto & g : config.groups) {
    out << "group=" << g.name << ":";
    for (const int s : g.site_ids) {
      out << s << ",";
    }
    out << "\n";
  }
  out << "coef_variance=" << format_double(config.priors.coef_variance) << "\n";
  out << "ig=" << format_double(config.priors.ig_shape) << ","
      << format_double(config.priors.ig_rate) << "\n";
  out << "xi_bound=" << format_double(config.priors.xi_bound) << "\n";
  out << "chains=" << config.sampler.n_chains << "\n";
  out << "iterations=" << config.sampler.n_iter << "\n";
  out << "burn_in=" << config.sampler.burn_in << "\n";
  out << "target_accept=" << format_double(config.sampler.target_accept) << "\n";
  out << "adapt_window=" << config.sampler.adapt_window << "\n";
  out << "annual_blocks=" << config.annual_blocks << "\n";
  out << "validate_variant=" << variant_name(config.validate_variant) << "\n";
  out << "lambda_grid=";
  for (const double l : config.lambda_grid) {
    out << format_double(l) << ",";
  }
  out << "\nk_folds=" << config.k_folds << "\n";
  out << "ppc_reps=" << config.ppc_reps << "\n";
  out << "synth_mode=" << (config.synth.mode == SynthMode::segments ? "segments" : "blocks") << "\n";
  out << "synth_kind=" << scenario_kind_name(config.synth.kind) << "\n";
  out << "synth_vehicles=" << config.synth.n_vehicles << "\n";
  out << "synth_sites=";
  for (const int s : config.synth.sites) {
    out << s << ",";
  }
  out << "\n";
  out << "synth_speed=" << format_double(config.synth.speed.lo) << ","
      << format_double(config.synth.speed.hi) << "\n";
  out << "synth_accel=" << format_double(config.synth.accel.lo) << ","
      << format_double(config.synth.accel.hi) << "\n";
  out << "synth_steering=" << format_double(config.synth.steering.lo) << ","
      << format_double(config.synth.steering.hi) << "\n";
  out << "synth_position=" << format_double(config.synth.position.lo) << ","
      << format_double(config.synth.position.hi) << "\n";
  out << "synth_blocks=";
  for (std::size_t i = 0; i < config.synth.blocks_per_site.size(); ++i) {
    out << config.synth.blocks_per_site[i] << ":" << format_double(config.synth.mu[i]) << ":"
        << format_double(config.synth.log_sigma[i]) << ":" << format_double(config.synth.xi[i])
        << ",";
  }
  out << "\n";
  return out.str();
}

std::string config_hash(const PipelineConfig & config)
{
  const std::string canon = canonical_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : canon) {
    h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trajrisk
