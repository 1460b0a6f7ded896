#include "risdelay/harness/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>

#include "risdelay/common.hpp"
#include "risdelay/harness/csv.hpp"
#include "risdelay/harness/metrics.hpp"

namespace risdelay::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string label(const std::string& key, double v) { return key + "=" + cell(v); }

bool needs_training(const std::vector<std::string>& policies) {
  return std::any_of(policies.begin(), policies.end(), policy_needs_training);
}

struct Context {
  const SweepOptions& opts;
  fs::path out_dir;
  SweepResult& result;

  void log(const std::string& msg) const {
    if (opts.log) opts.log(msg);
  }
  void add(std::vector<EvalRow> rows) {
    result.rows.insert(result.rows.end(), std::make_move_iterator(rows.begin()),
                       std::make_move_iterator(rows.end()));
  }
};

std::optional<TrainedArtifacts> maybe_train(const RunConfig& resolved,
                                            const std::vector<std::string>& policies,
                                            const Context& ctx) {
  if (!needs_training(policies)) return std::nullopt;
  ctx.log("training (or loading) agent " + training_hash(resolved));
  return train_or_load(resolved, ctx.opts.on_episode);
}

void eval_all(const RunConfig& cfg, const std::vector<std::string>& policies,
              const TrainedArtifacts* art, const std::string& scenario, const std::string& variant,
              Context& ctx, const EpisodeHook& hook = {}, bool keep_trace = false) {
  for (const auto& p : policies) {
    ctx.log(scenario + " " + variant + " " + p);
    ctx.add(evaluate(cfg, p, art, scenario, variant, ctx.result.report, hook, keep_trace));
  }
}

void sweep_lambda(const RunConfig& cfg, const std::vector<std::string>& policies, Context& ctx) {
  const RunConfig base = resolve(cfg);
  const auto art = maybe_train(base, policies, ctx);
  const TrainedArtifacts* a = art ? &*art : nullptr;
  if (!cfg.sweeps.load_fractions.empty()) {
    for (double f : cfg.sweeps.load_fractions) {
      RunConfig point = base;
      point.calibration.load_fraction = f;
      point = resolve(point);
      eval_all(point, policies, a, "lambda", label("load", f), ctx);
    }
  } else {
    for (double v : cfg.sweeps.lambda_values) {
      RunConfig point = base;
      point.calibration.load_fraction = 0.0;
      point.env.traffic.lambda_per_slot.assign(point.env.dims.users, v);
      validate(point);
      eval_all(point, policies, a, "lambda", label("lambda", v), ctx);
    }
  }
}

void sweep_burst(const RunConfig& cfg, const std::vector<std::string>& policies, Context& ctx) {
  const RunConfig base = resolve(cfg);
  const auto art = maybe_train(base, policies, ctx);
  const TrainedArtifacts* a = art ? &*art : nullptr;
  const RunConfig burst = with_bursts(base);
  const auto& bursts = burst.env.scenario.bursts;
  const int K = base.env.dims.users;

  // Arrivals are keyed by seed only, so a burst-free rollout of any policy
  // yields the Poisson part of every burst run's arrivals.
  InvariantReport scratch;
  const auto nominal = evaluate(base, "random", nullptr, "burst", "nominal", scratch);
  std::vector<std::int64_t> injected(K, 0);
  for (const auto& b : bursts) injected[b.user] += b.packets;

  const bool traces = ctx.opts.write_traces;
  const fs::path trace_dir = ctx.out_dir / "traces";
  for (const auto& p : policies) {
    auto hook = [&](EpisodeOutcome& out) {
      auto& row = out.row;
      for (std::size_t j = 0; j < bursts.size(); ++j) {
        const auto cap = j + 1 < bursts.size() ? bursts[j + 1].slot
                                               : static_cast<std::int64_t>(burst.env.scenario.episode_slots);
        row.recovery_slots.push_back(
            recovery_slots(out.backlog[bursts[j].user], bursts[j].slot, bursts[j].packets, cap));
      }
      const auto& ref = nominal[row.seed_index];
      for (int k = 0; k < K; ++k) {
        ctx.result.report.expect(row.arrivals[k] - ref.arrivals[k] == injected[k],
                                 p + ": burst run arrivals differ from nominal by other than the injected packets");
      }
      if (traces && row.seed_index == 0) {
        fs::create_directories(trace_dir);
        std::ofstream os(trace_dir / ("burst_" + p + ".csv"));
        traffic::write_trace_csv(os, out.trace);
      }
    };
    ctx.log("burst " + p);
    ctx.add(evaluate(burst, p, a, "burst", "burst", ctx.result.report, hook, traces));
  }
}

void sweep_gap(const RunConfig& cfg, const std::vector<std::string>& policies, Context& ctx) {
  const RunConfig base = resolve(cfg);
  const auto art = maybe_train(base, policies, ctx);
  const TrainedArtifacts* a = art ? &*art : nullptr;
  for (double f : cfg.sweeps.gap_fractions) {
    eval_all(with_gap(base, f), policies, a, "gap", label("gap", f), ctx);
  }
}

void sweep_elements(const RunConfig& cfg, const std::vector<std::string>& policies, Context& ctx) {
  const RunConfig base = resolve(cfg);
  for (int m : cfg.sweeps.element_values) {
    RunConfig point = base;
    point.env.dims.elements = m;
    validate(point);
    const auto art = maybe_train(point, policies, ctx);
    eval_all(point, policies, art ? &*art : nullptr, "elements", "M=" + std::to_string(m), ctx);
  }
}

void sweep_robustness(const RunConfig& cfg, const std::vector<std::string>& policies, Context& ctx) {
  const RunConfig base = resolve(cfg);
  const auto art = maybe_train(base, policies, ctx);
  const TrainedArtifacts* a = art ? &*art : nullptr;
  eval_all(base, policies, a, "robustness", "nominal", ctx);
  for (const auto& v : cfg.sweeps.robustness) {
    eval_all(with_overrides(base, v.overrides), policies, a, "robustness", v.name, ctx);
  }
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"lambda", "burst", "gap", "elements", "robustness"};
  return names;
}

std::vector<std::string> default_policies(const std::string& scenario) {
  if (scenario == "lambda") return {"proposed", "max_sum_rate", "random", "no_ris"};
  if (scenario == "burst") return {"proposed", "max_min_rate", "max_sum_rate"};
  if (scenario == "gap") return {"proposed", "max_min_rate", "max_sum_rate"};
  if (scenario == "elements") return {"proposed", "max_sum_rate"};
  if (scenario == "robustness") return {"proposed", "max_sum_rate", "random"};
  throw ConfigError("unknown scenario '" + scenario + "'");
}

std::int64_t burst_packets(const RunConfig& resolved) {
  const auto lambda = env::effective_lambda(resolved.env);
  return static_cast<std::int64_t>(std::llround(resolved.sweeps.burst_scale_slots * mean(lambda)));
}

RunConfig with_bursts(const RunConfig& resolved) {
  RunConfig out = resolved;
  const std::int64_t packets = burst_packets(resolved);
  out.env.scenario.bursts.clear();
  const int K = resolved.env.dims.users;
  for (std::size_t j = 0; j < resolved.sweeps.burst_slots.size(); ++j) {
    out.env.scenario.bursts.push_back(
        {resolved.sweeps.burst_slots[j], static_cast<int>(j % K), packets});
  }
  validate(out);
  return out;
}

RunConfig with_gap(const RunConfig& resolved, double fraction) {
  RunConfig out = resolved;
  const int K = resolved.env.dims.users;
  const double g = fraction * mean(resolved.env.traffic.lambda_per_slot);
  out.env.scenario.lambda_gap.assign(K, 0.0);
  if (K > 1) {
    for (int k = 0; k < K; ++k) {
      out.env.scenario.lambda_gap[k] = g * (1.0 - 2.0 * k / (K - 1));
    }
  }
  validate(out);
  return out;
}

SweepResult run_sweep(const std::string& name, const RunConfig& cfg, const SweepOptions& opts) {
  const auto policies = opts.policies.empty() ? default_policies(name) : opts.policies;
  for (const auto& p : policies) {
    if (std::find(policy_names().begin(), policy_names().end(), p) == policy_names().end()) {
      throw ConfigError("unknown policy '" + p + "'");
    }
  }
  SweepResult result;
  result.scenario = name;
  Context ctx{opts, opts.out_dir.empty() ? run_dir(cfg) : opts.out_dir, result};

  if (name == "lambda") {
    sweep_lambda(cfg, policies, ctx);
  } else if (name == "burst") {
    sweep_burst(cfg, policies, ctx);
  } else if (name == "gap") {
    sweep_gap(cfg, policies, ctx);
  } else if (name == "elements") {
    sweep_elements(cfg, policies, ctx);
  } else if (name == "robustness") {
    sweep_robustness(cfg, policies, ctx);
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }

  result.csv = ctx.out_dir / ("sweep_" + name + ".csv");
  write_eval_csv(result.csv, result.rows);
  json manifest = {{"scenario", name},
                   {"policies", policies},
                   {"config", to_json(cfg)},
                   {"summary", summarize(result.rows)},
                   {"invariant_checks", result.report.checks},
                   {"invariant_failures", result.report.failures}};
  write_json(ctx.out_dir / ("sweep_" + name + ".json"), manifest);
  return result;
}

}  // namespace risdelay::harness
