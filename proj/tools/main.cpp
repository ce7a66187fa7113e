// Command line entry point.
//
//   osp run      --config <file> [--seed S] [--out DIR] [--threads N]
//   osp sweep    --config <file> [--seed S] [--out DIR] [--threads N]
//   osp gen-data --config <file> [--seed S] --out DIR
//   osp verify   [--suite NAME] [--seed S]
//
// Exit status 0 on success, 1 on any error or failed check.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "osp/harness.hpp"
#include "osp/verify.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts.config_path, "config file");
  if (config_required) c->required();
  cmd->add_option("--seed", opts.seed, "master seed override")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--out", opts.out, "output directory override");
  cmd->add_option("--threads", opts.threads, "worker threads over repetitions");
}

osp::ExperimentConfig load(const CommonOpts& opts) {
  osp::ExperimentConfig cfg = osp::parse_config_file(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out.empty()) cfg.out = opts.out;
  if (opts.threads > 0) cfg.threads = opts.threads;
  osp::validate(cfg);
  return cfg;
}

int do_run(const CommonOpts& opts) {
  osp::RunResult run = osp::run_experiment(load(opts));
  std::printf("run: %s horizon=%ld reps=%d q=%.6g\n", run.cfg.structure.c_str(),
              run.cfg.horizon, run.cfg.reps, run.q);
  std::printf("  mean regret %.6g (stddev %.6g), mean loss %.6g\n",
              run.mean_regret, run.stddev_regret, run.mean_loss);
  std::printf("  expected-loss bound violations: %ld\n", run.total_violations);
  if (!run.cfg.out.empty())
    std::printf("  wrote %s/{config.txt,reps.csv,curves.csv,rounds.csv}\n",
                run.cfg.out.c_str());
  return run.total_violations == 0 ? 0 : 1;
}

int do_sweep(const CommonOpts& opts) {
  auto runs = osp::run_sweep(load(opts));
  long violations = 0;
  for (const auto& run : runs) {
    std::printf("sweep point: out=%s mean regret %.6g (stddev %.6g)\n",
                run.cfg.out.c_str(), run.mean_regret, run.stddev_regret);
    violations += run.total_violations;
  }
  std::printf("sweep: %zu points, %ld violations\n", runs.size(), violations);
  return violations == 0 ? 0 : 1;
}

int do_gen_data(const CommonOpts& opts) {
  osp::ExperimentConfig cfg = load(opts);
  if (cfg.out.empty())
    throw osp::ConfigError("gen-data: needs --out or out = <dir> in the config");
  osp::generate_data(cfg, cfg.out);
  std::printf("gen-data: wrote %s/{features.csv,labels.csv,labels_embed.csv,meta.txt}\n",
              cfg.out.c_str());
  return 0;
}

int do_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<osp::CheckResult> checks =
      suite.empty() ? osp::run_all_suites(seed)
                    : osp::run_suite(suite, seed);
  int failed = 0;
  for (const auto& c : checks) {
    if (!c.pass) ++failed;
    std::printf("%-58s %s  slack=% .3e%s%s\n", c.name.c_str(),
                c.pass ? "pass" : "FAIL", c.slack, c.detail.empty() ? "" : "  ",
                c.detail.c_str());
  }
  std::printf("verify: %zu checks, %d failed\n", checks.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online structured prediction experiments"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, gen_opts;
  std::string suite;
  std::uint64_t verify_seed = 1;

  add_common(app.add_subcommand("run", "play one experiment"), run_opts, true);
  add_common(app.add_subcommand("sweep", "grid of experiments"), sweep_opts, true);
  add_common(app.add_subcommand("gen-data", "write the configured stream to disk"),
             gen_opts, true);
  auto* verify_cmd = app.add_subcommand("verify", "run property suites");
  verify_cmd->add_option("--suite", suite, "one suite (default: all)");
  verify_cmd->add_option("--seed", verify_seed, "seed for randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return do_run(run_opts);
    if (app.got_subcommand("sweep")) return do_sweep(sweep_opts);
    if (app.got_subcommand("gen-data")) return do_gen_data(gen_opts);
    return do_verify(suite, verify_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
