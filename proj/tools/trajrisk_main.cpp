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

#include <cstdio>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "trajrisk/pipeline.hpp"

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitUpstream = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions
{
  std::string config_path;
  std::string out_override;
  long long seed_override = -1;
  bool has_seed_override = false;
};

int run_command(const CommonOptions & opts, const std::function<void(const trajrisk::PipelineConfig &)> & command)
{
  try {
    trajrisk::PipelineConfig config = trajrisk::load_config(opts.config_path);
    if (opts.has_seed_override) {
      config.seed = static_cast<std::uint64_t>(opts.seed_override);
    }
    if (!opts.out_override.empty()) {
      config.out_dir = opts.out_override;
    }
    command(config);
    return 0;
  } catch (const trajrisk::config_error & e) {
    std::fprintf(stderr, "trajrisk: error: config: %s\n", e.what());
    return kExitConfig;
  } catch (const trajrisk::upstream_error & e) {
    std::fprintf(stderr, "trajrisk: error: upstream: %s\n", e.what());
    return kExitUpstream;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "trajrisk: error: failure: %s\n", e.what());
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"trajectory-to-risk estimation pipeline"};
  app.require_subcommand(1);

  CommonOptions opts;

  struct Command
  {
    const char * name;
    const char * description;
    void (*run)(const trajrisk::PipelineConfig &);
  };
  const Command commands[] = {
    {"ingest", "parse trajectory files and globalize kinematics", trajrisk::cmd_ingest},
    {"ttc", "per-frame pairwise time-to-collision", trajrisk::cmd_ttc},
    {"blocks", "block maxima per conflicting pair with site summaries", trajrisk::cmd_blocks},
    {"fit", "posterior sampling for each requested model variant", trajrisk::cmd_fit},
    {"compare", "DIC table across fitted variants", trajrisk::cmd_compare},
    {"risk", "crash-risk indices and crash-frequency estimates", trajrisk::cmd_risk},
    {"validate", "k-fold near-miss count validation", trajrisk::cmd_validate},
    {"synth", "synthetic trajectory segments or block maxima", trajrisk::cmd_synth},
    {"all", "full pipeline", trajrisk::cmd_all},
  };

  void (*selected)(const trajrisk::PipelineConfig &) = nullptr;
  for (const Command & command : commands) {
    CLI::App * sub = app.add_subcommand(command.name, command.description);
    sub->add_option("--config", opts.config_path, "configuration file")->required();
    sub->add_option("--seed", opts.seed_override, "override pipeline.seed");
    sub->add_option("--out", opts.out_override, "override pipeline.out_dir");
    sub->callback([&selected, &command]() { selected = command.run; });
  }

  CLI11_PARSE(app, argc, argv);

  const auto * seed_opt = app.get_subcommands().front()->get_option("--seed");
  opts.has_seed_override = seed_opt->count() > 0;

  return run_command(opts, selected);
}
