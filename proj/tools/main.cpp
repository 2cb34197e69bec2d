#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "kvconfig.hpp"

namespace {

using spsaoi::tools::ExperimentSpec;
using spsaoi::tools::KvConfig;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = -1;
  std::string format;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value configuration file");
  cmd->add_option("--set", args.sets, "override a config key, key=value")
      ->take_all();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "rng seed");
  cmd->add_option("--threads", args.threads, "worker threads for sweeps");
  cmd->add_option("--format", args.format, "comma list from {csv,json}");
}

ExperimentSpec build_spec(const std::string& mode, const CommonArgs& args) {
  KvConfig kv;
  if (!args.config_path.empty()) kv = KvConfig::parse_file(args.config_path);
  kv.set("mode", mode);
  for (const auto& s : args.sets) kv.set_from_arg(s);
  // Flag and environment overrides, flags last.
  if (const char* env = std::getenv("SPSAOI_OUT")) {
    if (!kv.has("out")) kv.set("out", env);
  }
  if (const char* env = std::getenv("SPSAOI_THREADS")) {
    if (!kv.has("threads")) kv.set("threads", env);
  }
  if (!args.out_dir.empty()) kv.set("out", args.out_dir);
  if (args.seed >= 0) kv.set("seed", std::to_string(args.seed));
  if (args.threads >= 0) kv.set("threads", std::to_string(args.threads));
  if (!args.format.empty()) kv.set("formats", args.format);
  return ExperimentSpec::from_kv(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information experiments for semi-persistent scheduling"};
  app.require_subcommand(1);

  const std::vector<std::string> modes = {"simulate", "analytic", "compare",
                                          "validate", "sweep", "oracle"};
  std::map<std::string, CommonArgs> args;
  for (const auto& name : modes) {
    auto* cmd = app.add_subcommand(name);
    add_common(cmd, args[name]);
  }

  CLI11_PARSE(app, argc, argv);

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    const ExperimentSpec spec = build_spec(mode, args[mode]);
    return spsaoi::tools::run_experiment(spec);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    err["mode"] = mode;
    std::cerr << err.dump() << std::endl;
    return 1;
  }
}
