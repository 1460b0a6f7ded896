// risdelay: train, evaluate and sweep the delay-minimising RIS allocator.
//
// Exit status: 0 when every invariant holds, 1 when an invariant fails,
// 2 on configuration or input errors.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "risdelay/common.hpp"
#include "risdelay/harness/config.hpp"
#include "risdelay/harness/csv.hpp"
#include "risdelay/harness/runner.hpp"
#include "risdelay/harness/scenarios.hpp"
#include "risdelay/kernels.hpp"

namespace fs = std::filesystem;
using namespace risdelay;
using namespace risdelay::harness;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset_name = "desk";
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("-c,--config", a.config_path, "JSON config file");
  cmd->add_option("-p,--preset", a.preset_name, "Preset when the config names none (paper, desk)");
  cmd->add_option("-s,--set", a.sets, "Override a field, e.g. --set ppo.episodes=40");
  cmd->add_flag("-q,--quiet", a.quiet, "Suppress progress output");
}

RunConfig load(const CommonArgs& a) {
  if (a.config_path.empty()) return load_config(json::object(), a.sets, a.preset_name);
  return load_config_file(a.config_path, a.sets, a.preset_name);
}

int finish(const InvariantReport& report) {
  std::cerr << report.checks << " invariant checks, " << report.failures.size() << " failed\n";
  for (const auto& f : report.failures) std::cerr << "  FAIL " << f << '\n';
  return report.ok() ? 0 : 1;
}

std::function<void(const ppo::EpisodeSummary&)> progress(bool quiet) {
  if (quiet) return {};
  return [](const ppo::EpisodeSummary& s) {
    std::cerr << s.stage << " episode " << s.episode << " return " << s.raw_return
              << " mean backlog " << s.mean_backlog << '\n';
  };
}

int cmd_train(const CommonArgs& a, bool force) {
  std::optional<double> capacity;
  const RunConfig cfg = resolve(load(a), &capacity);
  const auto art = train_or_load(cfg, progress(a.quiet), force);
  const fs::path dir = run_dir(cfg);
  write_training_csv(dir / "training.csv", cfg.run.name, art);

  InvariantReport report;
  if (cfg.ppo.pretrain_episodes > 0) {
    report.expect(!art.stage1_theta_hash.empty() &&
                      art.stage1_theta_hash == art.stage2_initial_theta_hash,
                  "stage 2 did not start from the stage-1 PPO-Theta weights");
  }
  bool finite = true;
  for (const auto* v : {&art.pretrain, &art.finetune}) {
    for (const auto& s : *v) finite = finite && std::isfinite(s.raw_return) && std::isfinite(s.scaled_return);
  }
  report.expect(finite, "non-finite training return");
  report.expect(static_cast<int>(art.finetune.size()) == cfg.ppo.episodes,
                "fine-tuning episode count differs from ppo.episodes");

  write_json(dir / "train.json", {{"config", to_json(cfg)},
                                  {"calibrated_capacity", capacity ? json(*capacity) : json(nullptr)},
                                  {"training_hash", art.hash},
                                  {"checkpoint_dir", art.dir.string()},
                                  {"from_cache", art.from_cache},
                                  {"invariant_failures", report.failures}});
  std::cout << "checkpoint " << art.final_checkpoint.string() << (art.from_cache ? " (cached)" : "")
            << "\ntraining csv " << (dir / "training.csv").string() << '\n';
  return finish(report);
}

int cmd_eval(const CommonArgs& a, std::vector<std::string> policies, int seeds) {
  RunConfig loaded = load(a);
  if (seeds > 0) loaded.run.eval_seeds = seeds;
  std::optional<double> capacity;
  const RunConfig cfg = resolve(loaded, &capacity);
  if (policies.empty()) policies = {cfg.run.policy};

  std::optional<TrainedArtifacts> art;
  for (const auto& p : policies) {
    if (policy_needs_training(p) && !art) art = train_or_load(cfg, progress(a.quiet));
  }
  InvariantReport report;
  std::vector<EvalRow> rows;
  for (const auto& p : policies) {
    if (!a.quiet) std::cerr << "evaluating " << p << '\n';
    auto r = evaluate(cfg, p, art ? &*art : nullptr, "eval", "nominal", report);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const fs::path dir = run_dir(cfg);
  write_eval_csv(dir / "eval.csv", rows);
  const auto summary = summarize(rows);
  write_json(dir / "eval.json", {{"config", to_json(cfg)},
                                 {"calibrated_capacity", capacity ? json(*capacity) : json(nullptr)},
                                 {"summary", summary},
                                 {"invariant_failures", report.failures}});
  std::cout << summary.dump(2) << '\n';
  return finish(report);
}

int cmd_sweep(const CommonArgs& a, const std::string& scenario, std::vector<std::string> policies,
              int seeds, bool traces) {
  RunConfig cfg = load(a);
  if (seeds > 0) cfg.run.eval_seeds = seeds;
  SweepOptions opts;
  opts.policies = std::move(policies);
  opts.write_traces = traces;
  if (!a.quiet) opts.log = [](const std::string& m) { std::cerr << m << '\n'; };
  opts.on_episode = progress(a.quiet);
  const auto res = run_sweep(scenario, cfg, opts);
  std::cout << "wrote " << res.csv.string() << " (" << res.rows.size() << " rows)\n";
  return finish(res.report);
}

int cmd_baseline_check(const CommonArgs& a, int seeds) {
  RunConfig cfg = resolve(load(a));
  cfg.run.eval_seeds = seeds;
  InvariantReport report;
  std::vector<EvalRow> rows;
  for (const std::string p : {"random", "max_sum_rate", "no_ris"}) {
    auto r = evaluate(cfg, p, nullptr, "baseline_check", "nominal", report);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  // Paired seeds see the same arrivals whatever the policy.
  for (std::size_t i = 0; i < static_cast<std::size_t>(seeds); ++i) {
    report.expect(rows[i].arrivals == rows[seeds + i].arrivals &&
                      rows[i].arrivals == rows[2 * seeds + i].arrivals,
                  "paired seeds produced different arrivals");
  }
  // Zero traffic: delay is undefined and must be flagged, not fabricated.
  RunConfig idle = cfg;
  idle.env.traffic.lambda_per_slot.assign(cfg.env.dims.users, 0.0);
  idle.run.eval_seeds = 1;
  auto r = evaluate(idle, "random", nullptr, "baseline_check", "zero_traffic", report);
  report.expect(!r.front().average_delay_ms && r.front().delay_flagged,
                "zero-traffic episode reported a delay");
  rows.insert(rows.end(), r.begin(), r.end());

  const fs::path dir = run_dir(cfg);
  write_eval_csv(dir / "baseline_check.csv", rows);
  std::cout << summarize(rows).dump(2) << '\n';
  return finish(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted OFDM delay minimisation: simulator, PPO trainer and experiment harness"};
  app.require_subcommand(1);

  CommonArgs common;
  bool force = false;
  std::vector<std::string> policies;
  int seeds = 0;
  std::string scenario;
  bool no_traces = false;

  auto* train = app.add_subcommand("train", "Run the two-stage training schedule");
  add_common(train, common);
  train->add_flag("--force", force, "Retrain even when a cached checkpoint exists");

  auto* eval = app.add_subcommand("eval", "Paired-seed evaluation of one or more policies");
  add_common(eval, common);
  eval->add_option("--policy", policies, "proposed, max_min_rate, max_sum_rate, random, no_ris");
  eval->add_option("--seeds", seeds, "Number of evaluation seeds");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario grid and write a tidy CSV");
  add_common(sweep, common);
  sweep->add_option("scenario", scenario, "lambda, burst, gap, elements, robustness")->required();
  sweep->add_option("--policy", policies, "Policies to evaluate (default depends on scenario)");
  sweep->add_option("--seeds", seeds, "Number of evaluation seeds");
  sweep->add_flag("--no-traces", no_traces, "Skip per-slot trace CSVs");

  auto* check = app.add_subcommand("baseline-check", "Invariant checks on the non-learned policies");
  add_common(check, common);
  int check_seeds = 3;
  check->add_option("--seeds", check_seeds, "Number of evaluation seeds");

  auto* show = app.add_subcommand("config", "Print the resolved configuration as JSON");
  add_common(show, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!common.quiet) std::cerr << "kernels: " << kernels::active().name << '\n';
    if (*train) return cmd_train(common, force);
    if (*eval) return cmd_eval(common, policies, seeds);
    if (*sweep) return cmd_sweep(common, scenario, policies, seeds, !no_traces);
    if (*check) return cmd_baseline_check(common, check_seeds);
    if (*show) {
      std::cout << to_json(load(common)).dump(2) << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
