#include "risdelay/harness/config.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "risdelay/common.hpp"
#include "risdelay/nn/archive.hpp"

namespace risdelay::harness {

using nlohmann::json;

namespace {

// Bumped whenever training semantics change so cached checkpoints are not
// reused across incompatible builds.
constexpr const char* kTrainingRevision = "1";

json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number, got string '" + s + "'");
  }
  return j.get<double>();
}

std::vector<double> get_nums(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_num(v));
  return out;
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string critic_target_name(ppo::CriticTarget t) {
  return t == ppo::CriticTarget::kGae ? "gae" : "td";
}

ppo::CriticTarget critic_target_from(const std::string& s) {
  if (s == "td") return ppo::CriticTarget::kTd;
  if (s == "gae") return ppo::CriticTarget::kGae;
  throw ConfigError("ppo.critic_target must be 'td' or 'gae', got '" + s + "'");
}

// Item schemas for arrays of objects whose default is empty.
const json& array_item_schema(const std::string& path) {
  static const json bursts = {{"slot", 0}, {"user", 0}, {"packets", 0}};
  static const json robustness = {{"name", ""}, {"overrides", json::object()}};
  static const json none;
  if (path == "scenario.bursts") return bursts;
  if (path == "sweeps.robustness") return robustness;
  return none;
}

bool free_form(const std::string& path) {
  return path.size() >= 9 && path.compare(path.size() - 9, 9, "overrides") == 0;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

bool numeric_like(const json& v) {
  if (v.is_number()) return true;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    return s == "inf" || s == "+inf" || s == "-inf";
  }
  return false;
}

void parse_file(const std::string& path, json& out) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    in >> out;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::string to_string(env::PositionMode m) {
  switch (m) {
    case env::PositionMode::kPerStep:
      return "per_step";
    case env::PositionMode::kPerEpisode:
      return "per_episode";
    case env::PositionMode::kFixed:
      return "fixed";
  }
  return "per_episode";
}

env::PositionMode position_mode_from_string(const std::string& s) {
  if (s == "per_step") return env::PositionMode::kPerStep;
  if (s == "per_episode") return env::PositionMode::kPerEpisode;
  if (s == "fixed") return env::PositionMode::kFixed;
  throw ConfigError("position mode must be per_step, per_episode or fixed; got '" + s + "'");
}

std::vector<std::string> preset_names() { return {"paper", "desk"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.env.traffic.lambda_per_slot.assign(c.env.dims.users, 9.5);
  c.env.scenario.position_mode = env::PositionMode::kPerStep;
  c.run.eval_position_mode = env::PositionMode::kPerEpisode;
  c.sweeps.lambda_values = {8.5, 9.0, 9.5, 10.0};
  c.sweeps.gap_fractions = {0.0, 0.05, 0.1, 0.15, 0.2};
  c.sweeps.element_values = {36, 64, 100};
  c.sweeps.robustness = {
      {"delay_taps", {{"fading", {{"taps_direct", 6}, {"taps_bs_ris", 3}, {"taps_ris_user", 4}}}}},
      {"distribution", {{"geometry", {{"annulus_inner_m", 12.0}, {"annulus_outer_m", 15.0}}}}},
      {"rician", {{"fading", {{"k_bs_ris_db", 3.0}, {"k_ris_user_db", 4.0}}}}},
  };
  if (name == "paper") return c;
  if (name != "desk") throw ConfigError("unknown preset '" + name + "'");

  c.run.name = "desk";
  c.env.dims = {2, 4, 8, 2};
  c.env.traffic.lambda_per_slot.assign(2, 1.0);
  c.calibration.load_fraction = 0.8;
  c.env.scenario.position_mode = env::PositionMode::kFixed;
  c.env.scenario.geometry_seed = 7;
  c.run.eval_position_mode = env::PositionMode::kFixed;
  c.ppo.episodes = 60;
  c.ppo.pretrain_episodes = 20;
  // Sixty episodes leave room for about sixty updates, too few for the
  // full-scale learning rates and widths to move the policy.
  c.ppo.theta_hidden = {64, 64};
  c.ppo.assign_hidden = {64, 64};
  c.ppo.critic_hidden = {64, 64};
  c.ppo.actor_lr = 3e-4;
  c.ppo.critic_lr = 1e-3;
  // Desk backlogs sit around ten packets.
  c.env.queue_scale = 5.0;
  c.sweeps.lambda_values.clear();
  c.sweeps.load_fractions = {0.6, 0.7, 0.8, 0.9};
  c.sweeps.gap_fractions = {0.0, 0.1, 0.2, 0.3};
  c.sweeps.element_values = {4, 8, 16};
  // Four subcarriers bound the tap span at 4, so the longer-channel variant
  // shifts power between links instead of lengthening them.
  c.sweeps.robustness[0].overrides = {
      {"fading", {{"taps_direct", 2}, {"taps_bs_ris", 3}, {"taps_ris_user", 2}}}};
  return c;
}

json to_json(const RunConfig& c) {
  const auto& e = c.env;
  json bursts = json::array();
  for (const auto& b : e.scenario.bursts) {
    bursts.push_back({{"slot", b.slot}, {"user", b.user}, {"packets", b.packets}});
  }
  json robustness = json::array();
  for (const auto& v : c.sweeps.robustness) {
    robustness.push_back({{"name", v.name}, {"overrides", v.overrides}});
  }
  return {
      {"preset", c.preset},
      {"run",
       {{"name", c.run.name},
        {"seed", c.run.seed},
        {"output_dir", c.run.output_dir},
        {"policy", c.run.policy},
        {"eval_seeds", c.run.eval_seeds},
        {"eval_seed_base", c.run.eval_seed_base},
        {"eval_position_mode", to_string(c.run.eval_position_mode)}}},
      {"dims",
       {{"users", e.dims.users},
        {"subcarriers", e.dims.subcarriers},
        {"elements", e.dims.elements},
        {"antennas", e.dims.antennas}}},
      {"geometry",
       {{"bs_ris_vertical_m", e.geometry.bs_ris_vertical_m},
        {"bs_ris_horizontal_m", e.geometry.bs_ris_horizontal_m},
        {"annulus_inner_m", e.geometry.annulus_inner_m},
        {"annulus_outer_m", e.geometry.annulus_outer_m},
        {"sector_start_deg", e.geometry.sector_start_deg},
        {"sector_width_deg", e.geometry.sector_width_deg}}},
      {"fading",
       {{"beta0_db", e.fading.beta0_db},
        {"d0_m", e.fading.d0_m},
        {"xi_direct", e.fading.xi_direct},
        {"xi_bs_ris", e.fading.xi_bs_ris},
        {"xi_ris_user", e.fading.xi_ris_user},
        {"k_bs_ris_db", num(e.fading.k_bs_ris_db)},
        {"k_ris_user_db", num(e.fading.k_ris_user_db)},
        {"taps_direct", e.fading.taps_direct},
        {"taps_bs_ris", e.fading.taps_bs_ris},
        {"taps_ris_user", e.fading.taps_ris_user},
        {"cyclic_prefix", e.fading.cyclic_prefix}}},
      {"traffic",
       {{"lambda_per_slot", nums(e.traffic.lambda_per_slot)},
        {"packet_bits", e.traffic.packet_bits},
        {"slot_seconds", e.traffic.slot_seconds}}},
      {"calibration",
       {{"load_fraction", c.calibration.load_fraction},
        {"episodes", c.calibration.episodes},
        {"slots", c.calibration.slots},
        {"seed", c.calibration.seed}}},
      {"phy",
       {{"p_max_dbm", num(e.phy.p_max_dbm)},
        {"subcarrier_bw_hz", e.phy.subcarrier_bw_hz},
        {"noise_psd_dbm_hz", e.phy.noise_psd_dbm_hz}}},
      {"scenario",
       {{"episode_slots", e.scenario.episode_slots},
        {"position_mode", to_string(e.scenario.position_mode)},
        {"geometry_seed", e.scenario.geometry_seed},
        {"bursts", bursts},
        {"lambda_gap", nums(e.scenario.lambda_gap)}}},
      {"state", {{"queue_scale", e.queue_scale}}},
      {"ppo",
       {{"gamma", c.ppo.gamma},
        {"gae_lambda", c.ppo.gae_lambda},
        {"clip", c.ppo.clip},
        {"entropy_coef", c.ppo.entropy_coef},
        {"epochs", c.ppo.epochs},
        {"minibatch", c.ppo.minibatch},
        {"actor_lr", c.ppo.actor_lr},
        {"critic_lr", c.ppo.critic_lr},
        {"episodes", c.ppo.episodes},
        {"buffer_capacity", c.ppo.buffer_capacity},
        {"grad_clip", c.ppo.grad_clip},
        {"theta_hidden", c.ppo.theta_hidden},
        {"assign_hidden", c.ppo.assign_hidden},
        {"critic_hidden", c.ppo.critic_hidden},
        {"hidden_activation", nn::to_string(c.ppo.hidden_activation)},
        {"init_log_std", c.ppo.init_log_std},
        {"share_assignment_actors", c.ppo.share_assignment_actors},
        {"literal_eq22", c.ppo.literal_eq22},
        {"critic_target", critic_target_name(c.ppo.critic_target)},
        {"backlog_reward_scale", c.ppo.backlog_reward_scale},
        {"rate_reward_scale", c.ppo.rate_reward_scale},
        {"pretrain_episodes", c.ppo.pretrain_episodes},
        {"transfer_assignment_agents", c.ppo.transfer_assignment_agents},
        {"seed", c.ppo.seed}}},
      {"baselines", {{"max_sum_rate_sweeps", c.baselines.max_sum_rate_sweeps}}},
      {"sweeps",
       {{"lambda_values", nums(c.sweeps.lambda_values)},
        {"load_fractions", nums(c.sweeps.load_fractions)},
        {"gap_fractions", nums(c.sweeps.gap_fractions)},
        {"element_values", c.sweeps.element_values},
        {"burst_scale_slots", c.sweeps.burst_scale_slots},
        {"burst_slots", c.sweeps.burst_slots},
        {"robustness", robustness}}},
  };
}

RunConfig from_json(const json& j) {
  RunConfig c;
  try {
    c.preset = j.at("preset").get<std::string>();
    const auto& r = j.at("run");
    c.run.name = r.at("name").get<std::string>();
    c.run.seed = r.at("seed").get<std::uint64_t>();
    c.run.output_dir = r.at("output_dir").get<std::string>();
    c.run.policy = r.at("policy").get<std::string>();
    c.run.eval_seeds = r.at("eval_seeds").get<int>();
    c.run.eval_seed_base = r.at("eval_seed_base").get<std::uint64_t>();
    c.run.eval_position_mode = position_mode_from_string(r.at("eval_position_mode").get<std::string>());

    auto& e = c.env;
    const auto& d = j.at("dims");
    e.dims = {d.at("users").get<int>(), d.at("subcarriers").get<int>(), d.at("elements").get<int>(),
              d.at("antennas").get<int>()};
    const auto& g = j.at("geometry");
    e.geometry.bs_ris_vertical_m = get_num(g.at("bs_ris_vertical_m"));
    e.geometry.bs_ris_horizontal_m = get_num(g.at("bs_ris_horizontal_m"));
    e.geometry.annulus_inner_m = get_num(g.at("annulus_inner_m"));
    e.geometry.annulus_outer_m = get_num(g.at("annulus_outer_m"));
    e.geometry.sector_start_deg = get_num(g.at("sector_start_deg"));
    e.geometry.sector_width_deg = get_num(g.at("sector_width_deg"));
    const auto& f = j.at("fading");
    e.fading.beta0_db = get_num(f.at("beta0_db"));
    e.fading.d0_m = get_num(f.at("d0_m"));
    e.fading.xi_direct = get_num(f.at("xi_direct"));
    e.fading.xi_bs_ris = get_num(f.at("xi_bs_ris"));
    e.fading.xi_ris_user = get_num(f.at("xi_ris_user"));
    e.fading.k_bs_ris_db = get_num(f.at("k_bs_ris_db"));
    e.fading.k_ris_user_db = get_num(f.at("k_ris_user_db"));
    e.fading.taps_direct = f.at("taps_direct").get<int>();
    e.fading.taps_bs_ris = f.at("taps_bs_ris").get<int>();
    e.fading.taps_ris_user = f.at("taps_ris_user").get<int>();
    e.fading.cyclic_prefix = f.at("cyclic_prefix").get<int>();
    const auto& t = j.at("traffic");
    e.traffic.lambda_per_slot = get_nums(t.at("lambda_per_slot"));
    e.traffic.packet_bits = get_num(t.at("packet_bits"));
    e.traffic.slot_seconds = get_num(t.at("slot_seconds"));
    const auto& cal = j.at("calibration");
    c.calibration.load_fraction = get_num(cal.at("load_fraction"));
    c.calibration.episodes = cal.at("episodes").get<int>();
    c.calibration.slots = cal.at("slots").get<int>();
    c.calibration.seed = cal.at("seed").get<std::uint64_t>();
    const auto& p = j.at("phy");
    e.phy.p_max_dbm = get_num(p.at("p_max_dbm"));
    e.phy.subcarrier_bw_hz = get_num(p.at("subcarrier_bw_hz"));
    e.phy.noise_psd_dbm_hz = get_num(p.at("noise_psd_dbm_hz"));
    const auto& s = j.at("scenario");
    e.scenario.episode_slots = s.at("episode_slots").get<int>();
    e.scenario.position_mode = position_mode_from_string(s.at("position_mode").get<std::string>());
    e.scenario.geometry_seed = s.at("geometry_seed").get<std::uint64_t>();
    e.scenario.bursts.clear();
    for (const auto& b : s.at("bursts")) {
      e.scenario.bursts.push_back({b.at("slot").get<std::int64_t>(), b.at("user").get<int>(),
                                   b.at("packets").get<std::int64_t>()});
    }
    e.scenario.lambda_gap = get_nums(s.at("lambda_gap"));
    e.queue_scale = get_num(j.at("state").at("queue_scale"));

    const auto& pp = j.at("ppo");
    auto& o = c.ppo;
    o.gamma = get_num(pp.at("gamma"));
    o.gae_lambda = get_num(pp.at("gae_lambda"));
    o.clip = get_num(pp.at("clip"));
    o.entropy_coef = get_num(pp.at("entropy_coef"));
    o.epochs = pp.at("epochs").get<int>();
    o.minibatch = pp.at("minibatch").get<int>();
    o.actor_lr = get_num(pp.at("actor_lr"));
    o.critic_lr = get_num(pp.at("critic_lr"));
    o.episodes = pp.at("episodes").get<int>();
    o.buffer_capacity = pp.at("buffer_capacity").get<int>();
    o.grad_clip = get_num(pp.at("grad_clip"));
    o.theta_hidden = pp.at("theta_hidden").get<std::vector<int>>();
    o.assign_hidden = pp.at("assign_hidden").get<std::vector<int>>();
    o.critic_hidden = pp.at("critic_hidden").get<std::vector<int>>();
    o.hidden_activation = nn::activation_from_string(pp.at("hidden_activation").get<std::string>());
    o.init_log_std = get_num(pp.at("init_log_std"));
    o.share_assignment_actors = pp.at("share_assignment_actors").get<bool>();
    o.literal_eq22 = pp.at("literal_eq22").get<bool>();
    o.critic_target = critic_target_from(pp.at("critic_target").get<std::string>());
    o.backlog_reward_scale = get_num(pp.at("backlog_reward_scale"));
    o.rate_reward_scale = get_num(pp.at("rate_reward_scale"));
    o.pretrain_episodes = pp.at("pretrain_episodes").get<int>();
    o.transfer_assignment_agents = pp.at("transfer_assignment_agents").get<bool>();
    o.seed = pp.at("seed").get<std::uint64_t>();

    c.baselines.max_sum_rate_sweeps = j.at("baselines").at("max_sum_rate_sweeps").get<int>();

    const auto& sw = j.at("sweeps");
    c.sweeps.lambda_values = get_nums(sw.at("lambda_values"));
    c.sweeps.load_fractions = get_nums(sw.at("load_fractions"));
    c.sweeps.gap_fractions = get_nums(sw.at("gap_fractions"));
    c.sweeps.element_values = sw.at("element_values").get<std::vector<int>>();
    c.sweeps.burst_scale_slots = get_num(sw.at("burst_scale_slots"));
    c.sweeps.burst_slots = sw.at("burst_slots").get<std::vector<std::int64_t>>();
    c.sweeps.robustness.clear();
    for (const auto& v : sw.at("robustness")) {
      c.sweeps.robustness.push_back({v.at("name").get<std::string>(), v.at("overrides")});
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  } catch (const InvalidInput& ex) {
    throw ConfigError(ex.what());
  }
  return c;
}

void check_against_schema(const json& value, const json& schema, const std::string& path) {
  if (free_form(path)) return;
  if (schema.is_object()) {
    if (!value.is_object()) throw ConfigError("field '" + path + "' must be an object");
    for (auto it = value.begin(); it != value.end(); ++it) {
      const auto child = join(path, it.key());
      if (!schema.contains(it.key())) throw ConfigError("unknown config key '" + child + "'");
      check_against_schema(it.value(), schema.at(it.key()), child);
    }
    return;
  }
  if (schema.is_array()) {
    if (!value.is_array()) throw ConfigError("field '" + path + "' must be an array");
    const json& item = !schema.empty() ? schema.front() : array_item_schema(path);
    if (item.is_null()) return;
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_against_schema(value[i], item, path + "[" + std::to_string(i) + "]");
    }
    return;
  }
  if (numeric_like(schema)) {
    if (!numeric_like(value)) throw ConfigError("field '" + path + "' must be a number");
    if (schema.is_number_integer() && !value.is_number_integer()) {
      throw ConfigError("field '" + path + "' must be an integer");
    }
    if (schema.is_number_unsigned() && value.is_number_integer() && value.get<std::int64_t>() < 0) {
      throw ConfigError("field '" + path + "' must be non-negative");
    }
    return;
  }
  if (schema.is_boolean() && !value.is_boolean()) {
    throw ConfigError("field '" + path + "' must be true or false");
  }
  if (schema.is_string() && !value.is_string()) {
    throw ConfigError("field '" + path + "' must be a string");
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like a.b.c=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig with_overrides(const RunConfig& base, const json& patch) {
  json doc = to_json(base);
  check_against_schema(patch, doc);
  doc.merge_patch(patch);
  RunConfig out = from_json(doc);
  validate(out);
  return out;
}

RunConfig load_config(const json& doc_in, const std::vector<std::string>& overrides,
                      const std::string& default_preset) {
  json doc = doc_in.is_null() ? json::object() : doc_in;
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);
  const std::string name = doc.contains("preset") && doc["preset"].is_string()
                               ? doc["preset"].get<std::string>()
                               : default_preset;
  RunConfig base = preset(name);
  json full = to_json(base);
  check_against_schema(doc, full);
  // Arrays are replaced wholesale by merge_patch; objects merge key by key.
  full.merge_patch(doc);
  RunConfig out = from_json(full);
  validate(out);
  return out;
}

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides,
                           const std::string& default_preset) {
  json doc;
  parse_file(path, doc);
  return load_config(doc, overrides, default_preset);
}

void validate(const RunConfig& c) {
  try {
    env::validate(c.env);
    ppo::validate(c.ppo);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (c.run.eval_seeds < 1) throw ConfigError("run.eval_seeds must be >= 1");
  if (c.calibration.load_fraction < 0.0) throw ConfigError("calibration.load_fraction must be >= 0");
  if (c.calibration.load_fraction > 0.0 && (c.calibration.episodes < 1 || c.calibration.slots < 1)) {
    throw ConfigError("calibration.episodes and calibration.slots must be >= 1");
  }
  if (c.env.scenario.episode_slots > c.ppo.buffer_capacity) {
    throw ConfigError("scenario.episode_slots exceeds ppo.buffer_capacity");
  }
  if (c.baselines.max_sum_rate_sweeps < 0) throw ConfigError("baselines.max_sum_rate_sweeps must be >= 0");
  for (int m : c.sweeps.element_values) {
    if (m < 0) throw ConfigError("sweeps.element_values must be >= 0");
  }
}

std::string training_hash(const RunConfig& c) {
  json j = to_json(c);
  json key = {{"revision", kTrainingRevision},
              {"dims", j["dims"]},
              {"geometry", j["geometry"]},
              {"fading", j["fading"]},
              {"traffic", j["traffic"]},
              {"calibration", j["calibration"]},
              {"phy", j["phy"]},
              {"scenario", j["scenario"]},
              {"state", j["state"]},
              {"ppo", j["ppo"]}};
  const std::string text = key.dump();
  std::vector<double> pad((text.size() + sizeof(double) - 1) / sizeof(double), 0.0);
  std::memcpy(pad.data(), text.data(), text.size());
  return nn::hash_hex(pad);
}

}  // namespace risdelay::harness
