// nullnet command line: thin wrapper over the shared C library.
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nullnet/nullnet.h"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kStageFailure = 3;

struct ConfigHandle {
  nullnet_config* ptr = nullptr;
  ~ConfigHandle() { nullnet_config_free(ptr); }
};

struct Overrides {
  std::string config;
  std::map<std::string, std::string> values;
  bool keep_subdomains = false;
};

void report(const char* what, nullnet_status st) {
  std::fprintf(stderr, "nullnet: %s: %s (%s)\n", what, nullnet_last_error(), nullnet_status_name(st));
}

void add_overrides(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* opt = cmd->add_option("--config", o.config, "pipeline configuration file");
  if (config_required) opt->required();
  const std::vector<std::pair<std::string, std::string>> keys{
      {"--null-model", "exact, chung-lu or auto"},
      {"--sparse-threshold", "connectance below which auto uses Chung-Lu"},
      {"--fdr-family", "nonzero or all-pairs"},
      {"--distribution", "poisson or poisson-binomial"},
      {"--alpha", "FDR level"},
      {"--seed", "master seed"},
      {"--output", "output directory"},
      {"--restarts", "Louvain restarts (0: one per node, capped)"},
      {"--min-occurrence", "domain occurrence threshold for both reports"},
      {"--threads", "worker threads for pair validation"},
  };
  for (const auto& [flag, help] : keys) cmd->add_option(flag, o.values[flag.substr(2)], help);
  cmd->add_flag("--keep-subdomains", o.keep_subdomains, "count subdomains separately");
}

// Returns a validated config or the exit code to stop with.
std::optional<int> load(const Overrides& o, ConfigHandle& h) {
  nullnet_status st = o.config.empty() ? nullnet_config_new(&h.ptr)
                                       : nullnet_config_load(o.config.c_str(), &h.ptr);
  if (st != NULLNET_OK) {
    report("config", st);
    return kValidation;
  }
  for (const auto& [key, value] : o.values) {
    if (value.empty()) continue;
    if ((st = nullnet_config_set(h.ptr, key.c_str(), value.c_str())) != NULLNET_OK) {
      report("config", st);
      return kValidation;
    }
  }
  if (o.keep_subdomains && (st = nullnet_config_set(h.ptr, "keep-subdomains", "true")) != NULLNET_OK) {
    report("config", st);
    return kValidation;
  }
  if ((st = nullnet_config_validate(h.ptr)) != NULLNET_OK) {
    report("config", st);
    return kValidation;
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Null-model validated projections, communities and reputability reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nullnet_version()));

  const std::vector<std::string> stages{"ingest", "build", "fit", "communities", "hubs", "report"};
  std::map<std::string, Overrides> stage_opts;
  for (const auto& s : stages) add_overrides(app.add_subcommand(s, "run the " + s + " stage"), stage_opts[s], true);

  Overrides project_opts;
  std::string project_input, project_output = "projection.csv";
  bool project_directed = false;
  auto* project = app.add_subcommand("project", "validate projections (stage, or a single graph with --input)");
  add_overrides(project, project_opts, false);
  project->add_option("--input", project_input, "bipartite CSV (left_id,right_id) or user/post CSV");
  project->add_option("--out-file", project_output, "projection CSV written with --input");
  project->add_flag("--directed", project_directed, "input is a user/post CSV (user_id,post_id,kind)");

  Overrides propagate_opts;
  std::string seeds;
  auto* propagate = app.add_subcommand("propagate", "propagate community labels on the retweet projection");
  add_overrides(propagate, propagate_opts, true);
  propagate->add_option("--seeds", seeds, "node_id,community CSV overriding the verified partition");

  Overrides run_opts;
  std::string from_stage;
  auto* run = app.add_subcommand("run", "run the whole pipeline");
  add_overrides(run, run_opts, true);
  run->add_option("--from-stage", from_stage, "resume from this stage")
      ->check(CLI::IsMember({"ingest", "build", "fit", "project", "communities", "propagate", "hubs", "report"}));

  std::string synth_dir;
  std::uint64_t synth_seed = 7;
  std::size_t synth_users = 2000;
  auto* synth = app.add_subcommand("synth", "write the planted four-community fixture");
  synth->add_option("--out", synth_dir, "directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--users", synth_users, "number of users");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  nullnet_status st = NULLNET_OK;
  ConfigHandle h;

  if (synth->parsed()) {
    if ((st = nullnet_synth(synth_dir.c_str(), synth_seed, synth_users)) != NULLNET_OK) {
      report("synth", st);
      return st == NULLNET_INVALID_ARGUMENT ? kValidation : kStageFailure;
    }
    return kOk;
  }

  if (run->parsed()) {
    if (auto rc = load(run_opts, h)) return *rc;
    st = nullnet_run_pipeline(h.ptr, from_stage.empty() ? nullptr : from_stage.c_str());
    if (st != NULLNET_OK) {
      report("run", st);
      return kStageFailure;
    }
    return kOk;
  }

  if (project->parsed()) {
    if (auto rc = load(project_opts, h)) return *rc;
    if (!project_input.empty()) {
      st = nullnet_project_file(h.ptr, project_input.c_str(), project_directed ? 1 : 0,
                                project_output.c_str());
    } else if (project_opts.config.empty()) {
      std::fprintf(stderr, "nullnet: project needs --config or --input\n");
      return kValidation;
    } else {
      st = nullnet_run_stage(h.ptr, "project");
    }
    if (st != NULLNET_OK) {
      report("project", st);
      return kStageFailure;
    }
    return kOk;
  }

  if (propagate->parsed()) {
    if (!seeds.empty()) propagate_opts.values["seeds"] = seeds;
    if (auto rc = load(propagate_opts, h)) return *rc;
    if ((st = nullnet_run_stage(h.ptr, "propagate")) != NULLNET_OK) {
      report("propagate", st);
      return kStageFailure;
    }
    return kOk;
  }

  for (const auto& s : stages) {
    if (!app.got_subcommand(s)) continue;
    if (auto rc = load(stage_opts[s], h)) return *rc;
    if ((st = nullnet_run_stage(h.ptr, s.c_str())) != NULLNET_OK) {
      report(s.c_str(), st);
      return kStageFailure;
    }
    return kOk;
  }
  return kValidation;
}
