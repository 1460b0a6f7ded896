#include "risdelay/harness/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <unistd.h>

#include "risdelay/common.hpp"
#include "risdelay/harness/csv.hpp"
#include "risdelay/harness/metrics.hpp"
#include "risdelay/nn/archive.hpp"

namespace risdelay::harness {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path output_root() {
  const char* env = std::getenv("RISDELAY_OUTPUT_ROOT");
  if (env != nullptr && *env != '\0') return fs::path(env);
  return fs::path("risdelay-out");
}

fs::path run_dir(const RunConfig& cfg) {
  if (!cfg.run.output_dir.empty()) return fs::path(cfg.run.output_dir);
  return output_root() / cfg.run.name;
}

void InvariantReport::expect(bool ok, const std::string& what) {
  ++checks;
  if (!ok) failures.push_back(what);
}

void InvariantReport::merge(const InvariantReport& other) {
  checks += other.checks;
  failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

const std::vector<std::string>& eval_columns() {
  static const std::vector<std::string> cols = {
      "run_id",         "scenario",   "variant",      "policy",       "seed_index",
      "seed",           "lambda",     "elements",     "average_delay_ms", "jitter_ms",
      "delay_flagged",  "mean_return", "mean_backlog", "backlog_spread", "arrivals",
      "delivered",      "recovery_slots"};
  return cols;
}

std::vector<std::string> to_cells(const EvalRow& r) {
  return {r.run_id,
          r.scenario,
          r.variant,
          r.policy,
          cell(r.seed_index),
          cell(r.seed),
          cell(r.lambda),
          cell(r.elements),
          cell(r.average_delay_ms),
          cell(r.jitter_ms),
          cell(r.delay_flagged ? 1 : 0),
          cell(r.mean_return),
          cell(r.mean_backlog),
          cell(r.backlog_spread),
          cell(r.arrivals),
          cell(r.delivered),
          cell(r.recovery_slots)};
}

EpisodeOutcome run_policy_episode(env::Environment& env, baselines::Policy& policy,
                                  std::uint64_t seed, InvariantReport& report, bool keep_trace) {
  const auto& cfg = env.config();
  const int K = cfg.dims.users;
  EpisodeOutcome out;
  auto& row = out.row;
  row.policy = policy.name();
  row.seed = seed;
  row.lambda = env::effective_lambda(cfg);
  row.elements = cfg.dims.elements;

  env.reset(seed);
  policy.begin_episode(seed);
  out.backlog.assign(K, {});
  for (int k = 0; k < K; ++k) out.backlog[k].push_back(env.state().backlog[k]);

  bool phases_ok = true, owners_ok = true;
  double ret = 0.0;
  while (!env.done()) {
    const auto action = policy.act(env);
    if (static_cast<int>(action.phases.size()) != cfg.dims.elements) phases_ok = false;
    for (double p : action.phases) {
      if (!(p >= 0.0 && p < kTwoPi)) phases_ok = false;
    }
    if (static_cast<int>(action.assign.owner.size()) != cfg.dims.subcarriers) owners_ok = false;
    for (int o : action.assign.owner) {
      if (o < 0 || o >= K) owners_ok = false;
    }
    const auto res = env.step(action.phases, action.assign);
    ret += res.reward;
    for (int k = 0; k < K; ++k) out.backlog[k].push_back(res.record.backlog[k]);
  }
  report.expect(phases_ok, policy.name() + ": phases outside [0, 2pi) or wrong length");
  report.expect(owners_ok, policy.name() + ": subcarrier owner out of range");

  const auto& ledger = env.ledger();
  row.arrivals.resize(K);
  row.delivered.resize(K);
  for (int k = 0; k < K; ++k) {
    row.arrivals[k] = ledger.total_arrivals(k);
    row.delivered[k] = ledger.total_departures(k);
    report.expect(ledger.total_arrivals(k) - ledger.total_departures(k) == ledger.backlog(k),
                  policy.name() + ": queue conservation broken for user " + std::to_string(k));
  }
  std::vector<std::int64_t> traced(K, 0);
  for (const auto& rec : env.trace()) {
    for (int k = 0; k < K; ++k) traced[k] += rec.delivered[k];
  }
  report.expect(traced == row.delivered, policy.name() + ": trace deliveries disagree with ledger");

  const auto stats = env.delay_stats();
  row.average_delay_ms = stats.average_delay_ms;
  row.jitter_ms = stats.jitter_ms;
  row.delay_flagged = stats.has_exclusions();
  const double slot_ms = cfg.traffic.slot_seconds * 1e3;
  if (row.average_delay_ms) {
    report.expect(std::isfinite(*row.average_delay_ms) && *row.average_delay_ms >= slot_ms - 1e-9,
                  policy.name() + ": average delay below one slot or non-finite");
  }
  if (row.jitter_ms) {
    report.expect(std::isfinite(*row.jitter_ms) && *row.jitter_ms >= 0.0,
                  policy.name() + ": jitter negative or non-finite");
  }
  const int T = env.steps_taken();
  row.mean_return = ret;
  row.mean_backlog = T > 0 ? -ret / T : 0.0;
  row.backlog_spread = backlog_spread(out.backlog);
  if (keep_trace) out.trace = env.trace_rows();
  return out;
}

std::uint64_t eval_seed(const RunMeta& run, int index) {
  return derive_seed(run.eval_seed_base, Stream::kEvalEpisode, static_cast<std::uint64_t>(index));
}

double calibrate_capacity(const RunConfig& cfg) {
  env::EnvConfig e = cfg.env;
  e.dims.elements = 0;
  e.traffic.lambda_per_slot.assign(e.dims.users, 0.0);
  e.scenario.bursts.clear();
  e.scenario.lambda_gap.clear();
  e.scenario.episode_slots = cfg.calibration.slots;
  env::Environment env(e);
  double total = 0.0;
  std::int64_t slots = 0;
  for (int ep = 0; ep < cfg.calibration.episodes; ++ep) {
    env.reset(derive_seed(cfg.calibration.seed, Stream::kEvalEpisode, 1000000 + ep));
    while (!env.done()) {
      const auto assign = baselines::best_gain_assignment(env.effective({}));
      const auto res = env.step({}, assign);
      for (auto d : res.record.deliverable) total += static_cast<double>(d);
      ++slots;
    }
  }
  return slots > 0 ? total / static_cast<double>(slots) : 0.0;
}

RunConfig resolve(const RunConfig& cfg, std::optional<double>* capacity) {
  RunConfig out = cfg;
  if (cfg.calibration.load_fraction > 0.0) {
    const double cap = calibrate_capacity(cfg);
    if (capacity != nullptr) *capacity = cap;
    const double lambda = cfg.calibration.load_fraction * cap / cfg.env.dims.users;
    out.env.traffic.lambda_per_slot.assign(cfg.env.dims.users, lambda);
  } else if (capacity != nullptr) {
    capacity->reset();
  }
  validate(out);
  return out;
}

namespace {

json metrics_json(const ppo::UpdateMetrics& m) {
  return {{"actor_loss", m.actor_loss},       {"critic_loss", m.critic_loss},
          {"entropy", m.entropy},             {"mean_ratio", m.mean_ratio},
          {"clip_fraction", m.clip_fraction}, {"approx_kl", m.approx_kl}};
}

ppo::UpdateMetrics metrics_from(const json& j) {
  ppo::UpdateMetrics m;
  m.actor_loss = j.at("actor_loss").get<double>();
  m.critic_loss = j.at("critic_loss").get<double>();
  m.entropy = j.at("entropy").get<double>();
  m.mean_ratio = j.at("mean_ratio").get<double>();
  m.clip_fraction = j.at("clip_fraction").get<double>();
  m.approx_kl = j.at("approx_kl").get<double>();
  return m;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json summary_json(const ppo::EpisodeSummary& s) {
  return {{"episode", s.episode},
          {"stage", s.stage},
          {"seed", s.seed},
          {"raw_return", s.raw_return},
          {"scaled_return", s.scaled_return},
          {"mean_backlog", s.mean_backlog},
          {"mean_min_rate_bps", s.mean_min_rate_bps},
          {"average_delay_ms", opt_json(s.average_delay_ms)},
          {"jitter_ms", opt_json(s.jitter_ms)},
          {"theta", metrics_json(s.theta)},
          {"assign", metrics_json(s.assign)}};
}

ppo::EpisodeSummary summary_from(const json& j) {
  ppo::EpisodeSummary s;
  s.episode = j.at("episode").get<int>();
  s.stage = j.at("stage").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.raw_return = j.at("raw_return").get<double>();
  s.scaled_return = j.at("scaled_return").get<double>();
  s.mean_backlog = j.at("mean_backlog").get<double>();
  s.mean_min_rate_bps = j.at("mean_min_rate_bps").get<double>();
  s.average_delay_ms = opt_from(j.at("average_delay_ms"));
  s.jitter_ms = opt_from(j.at("jitter_ms"));
  s.theta = metrics_from(j.at("theta"));
  s.assign = metrics_from(j.at("assign"));
  return s;
}

bool load_cached(const fs::path& dir, TrainedArtifacts& art) {
  const auto manifest = dir / "training.json";
  if (!fs::exists(manifest) || !nn::archive_exists(dir / "final")) return false;
  json doc;
  try {
    std::ifstream in(manifest);
    in >> doc;
    art.pretrain.clear();
    art.finetune.clear();
    for (const auto& s : doc.at("pretrain")) art.pretrain.push_back(summary_from(s));
    for (const auto& s : doc.at("finetune")) art.finetune.push_back(summary_from(s));
    art.stage1_theta_hash = doc.at("stage1_theta_hash").get<std::string>();
    art.stage2_initial_theta_hash = doc.at("stage2_initial_theta_hash").get<std::string>();
    art.train_seconds = doc.value("train_seconds", 0.0);
  } catch (const json::exception&) {
    return false;
  }
  if (!art.pretrain.empty() && !nn::archive_exists(dir / "stage1")) return false;
  return true;
}

}  // namespace

TrainedArtifacts train_or_load(const RunConfig& cfg,
                               const std::function<void(const ppo::EpisodeSummary&)>& on_episode,
                               bool force) {
  TrainedArtifacts art;
  art.hash = training_hash(cfg);
  art.dir = output_root() / "cache" / art.hash;
  art.final_checkpoint = art.dir / "final";
  art.stage1 = cfg.ppo.pretrain_episodes > 0 ? art.dir / "stage1" : fs::path();

  if (!force && load_cached(art.dir, art)) {
    art.from_cache = true;
    return art;
  }

  // Train into a private directory and rename, so an interrupted run never
  // leaves a half-written cache entry behind.
  const fs::path tmp = art.dir.string() + ".tmp-" + std::to_string(::getpid());
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const auto start = std::chrono::steady_clock::now();
  const auto outcome = ppo::train_with_transfer(cfg.env, cfg.ppo, tmp, on_episode);
  art.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  art.pretrain = outcome.pretrain;
  art.finetune = outcome.finetune;
  art.stage1_theta_hash = outcome.stage1_theta_hash;
  art.stage2_initial_theta_hash = outcome.stage2_initial_theta_hash;

  json doc;
  doc["hash"] = art.hash;
  doc["config"] = to_json(cfg);
  doc["stage1_theta_hash"] = art.stage1_theta_hash;
  doc["stage2_initial_theta_hash"] = art.stage2_initial_theta_hash;
  doc["train_seconds"] = art.train_seconds;
  doc["pretrain"] = json::array();
  doc["finetune"] = json::array();
  for (const auto& s : art.pretrain) doc["pretrain"].push_back(summary_json(s));
  for (const auto& s : art.finetune) doc["finetune"].push_back(summary_json(s));
  write_json(tmp / "training.json", doc);
  write_training_csv(tmp / "training.csv", cfg.run.name, art);

  fs::remove_all(art.dir);
  fs::rename(tmp, art.dir);
  return art;
}

const std::vector<std::string>& training_columns() {
  static const std::vector<std::string> cols = {
      "run_id",           "stage",          "episode",          "seed",
      "raw_return",       "scaled_return",  "mean_backlog",     "mean_min_rate_bps",
      "average_delay_ms", "jitter_ms",      "theta_actor_loss", "theta_critic_loss",
      "theta_entropy",    "theta_approx_kl", "assign_actor_loss", "assign_critic_loss",
      "assign_entropy",   "assign_approx_kl"};
  return cols;
}

void write_training_csv(const fs::path& path, const std::string& run_id,
                        const TrainedArtifacts& art) {
  CsvWriter w(path, training_columns());
  auto emit = [&](const ppo::EpisodeSummary& s) {
    w.write({run_id, s.stage, cell(s.episode), cell(s.seed), cell(s.raw_return),
             cell(s.scaled_return), cell(s.mean_backlog), cell(s.mean_min_rate_bps),
             cell(s.average_delay_ms), cell(s.jitter_ms), cell(s.theta.actor_loss),
             cell(s.theta.critic_loss), cell(s.theta.entropy), cell(s.theta.approx_kl),
             cell(s.assign.actor_loss), cell(s.assign.critic_loss), cell(s.assign.entropy),
             cell(s.assign.approx_kl)});
  };
  for (const auto& s : art.pretrain) emit(s);
  for (const auto& s : art.finetune) emit(s);
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {"proposed", "max_min_rate", "max_sum_rate",
                                                 "random", "no_ris"};
  return names;
}

bool policy_needs_training(const std::string& name) {
  return name == "proposed" || name == "max_min_rate";
}

env::EnvConfig eval_env(const RunConfig& cfg, const std::string& policy) {
  env::EnvConfig e = cfg.env;
  e.scenario.position_mode = cfg.run.eval_position_mode;
  if (policy == "no_ris") e.dims.elements = 0;
  return e;
}

std::unique_ptr<baselines::Policy> make_policy(const std::string& name, const RunConfig& cfg,
                                               const TrainedArtifacts* art) {
  if (name == "random") return baselines::make_random_policy();
  if (name == "max_sum_rate") return baselines::make_max_sum_rate_policy(cfg.baselines.max_sum_rate_sweeps);
  if (name == "no_ris") return baselines::make_no_ris_policy(eval_env(cfg, name));
  if (name == "proposed" || name == "max_min_rate") {
    if (art == nullptr) throw ConfigError("policy '" + name + "' needs a trained checkpoint");
    if (name == "max_min_rate") {
      if (art->stage1.empty()) throw ConfigError("max_min_rate needs ppo.pretrain_episodes > 0");
      return baselines::make_max_min_rate_policy(art->stage1, cfg.env.dims, cfg.ppo);
    }
    auto agent = ppo::make_agent(cfg.env.dims, cfg.ppo, cfg.ppo.seed);
    ppo::load_agent(art->final_checkpoint, agent);
    return baselines::make_agent_policy("proposed", std::move(agent), ppo::ActMode::kDeterministic);
  }
  throw ConfigError("unknown policy '" + name + "'");
}

std::vector<EvalRow> evaluate(const RunConfig& cfg, const std::string& policy,
                              const TrainedArtifacts* art, const std::string& scenario,
                              const std::string& variant, InvariantReport& report,
                              const EpisodeHook& hook, bool keep_trace) {
  auto pol = make_policy(policy, cfg, art);
  env::Environment env(eval_env(cfg, policy));
  std::vector<EvalRow> rows;
  for (int i = 0; i < cfg.run.eval_seeds; ++i) {
    auto out = run_policy_episode(env, *pol, eval_seed(cfg.run, i), report, keep_trace);
    out.row.run_id = cfg.run.name;
    out.row.scenario = scenario;
    out.row.variant = variant;
    out.row.seed_index = i;
    if (hook) hook(out);
    rows.push_back(out.row);
  }
  return rows;
}

void write_eval_csv(const fs::path& path, const std::vector<EvalRow>& rows) {
  CsvWriter w(path, eval_columns());
  for (const auto& r : rows) w.write(to_cells(r));
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json summarize(const std::vector<EvalRow>& rows) {
  struct Acc {
    std::vector<double> delay, jitter, backlog;
    int flagged = 0, n = 0;
  };
  std::map<std::string, Acc> by_key;
  for (const auto& r : rows) {
    auto& a = by_key[r.scenario + "/" + r.variant + "/" + r.policy];
    ++a.n;
    if (r.average_delay_ms) a.delay.push_back(*r.average_delay_ms);
    if (r.jitter_ms) a.jitter.push_back(*r.jitter_ms);
    if (r.delay_flagged) ++a.flagged;
    a.backlog.push_back(r.mean_backlog);
  }
  json out = json::object();
  for (const auto& [key, a] : by_key) {
    out[key] = {{"episodes", a.n},
                {"mean_delay_ms", a.delay.empty() ? json(nullptr) : json(mean(a.delay))},
                {"mean_jitter_ms", a.jitter.empty() ? json(nullptr) : json(mean(a.jitter))},
                {"mean_backlog", mean(a.backlog)},
                {"flagged_episodes", a.flagged}};
  }
  return out;
}

}  // namespace risdelay::harness
