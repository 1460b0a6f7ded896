#include "risdelay/env.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "risdelay/common.hpp"
#include "risdelay/rng.hpp"

namespace risdelay::env {

void validate(const EnvConfig& cfg) {
  channel::validate(cfg.dims);
  channel::validate(cfg.geometry);
  channel::validate(cfg.fading);
  traffic::validate(cfg.traffic);
  const int K = cfg.dims.users;
  if (static_cast<int>(cfg.traffic.lambda_per_slot.size()) != K) {
    throw InvalidInput("traffic.lambda_per_slot must have one entry per user");
  }
  if (!cfg.scenario.lambda_gap.empty() && static_cast<int>(cfg.scenario.lambda_gap.size()) != K) {
    throw InvalidInput("scenario.lambda_gap must be empty or have one entry per user");
  }
  if (cfg.scenario.episode_slots < 1) throw InvalidInput("scenario.episode_slots must be >= 1");
  for (const auto& b : cfg.scenario.bursts) {
    if (b.slot < 0 || b.slot > cfg.scenario.episode_slots) {
      throw InvalidInput("burst slot " + std::to_string(b.slot) + " outside the episode");
    }
    if (b.user < 0 || b.user >= K) throw InvalidInput("burst user out of range");
    if (b.packets < 0) throw InvalidInput("burst packet count must be >= 0");
  }
  if (cfg.dims.subcarriers < cfg.fading.tap_span()) {
    throw InvalidInput("dims.subcarriers must be >= the channel tap span");
  }
  if (!(cfg.phy.subcarrier_bw_hz > 0.0)) throw InvalidInput("phy.subcarrier_bw_hz must be positive");
  if (!(cfg.queue_scale > 0.0)) throw InvalidInput("queue_scale must be positive");
  for (double l : effective_lambda(cfg)) {
    if (!(l >= 0.0)) throw InvalidInput("lambda plus gap must stay >= 0");
  }
}

std::vector<double> effective_lambda(const EnvConfig& cfg) {
  std::vector<double> out = cfg.traffic.lambda_per_slot;
  if (cfg.scenario.lambda_gap.size() == out.size()) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += cfg.scenario.lambda_gap[k];
  }
  return out;
}

StateScaling make_scaling(const EnvConfig& cfg) {
  const auto& g = cfg.geometry;
  const double radius = 0.5 * (g.annulus_inner_m + g.annulus_outer_m);
  const double rad = (g.sector_start_deg + 0.5 * g.sector_width_deg) * std::numbers::pi / 180.0;
  const channel::Point ris{g.bs_ris_horizontal_m, g.bs_ris_vertical_m};
  const channel::Point user{ris.x + radius * std::cos(rad), ris.y + radius * std::sin(rad)};
  const channel::Point bs{0.0, 0.0};

  const double beta_d = channel::path_loss(channel::distance(bs, user), cfg.fading.xi_direct,
                                           cfg.fading);
  const double beta_c =
      channel::path_loss(channel::distance(bs, ris), cfg.fading.xi_bs_ris, cfg.fading) *
      channel::path_loss(channel::distance(ris, user), cfg.fading.xi_ris_user, cfg.fading);
  StateScaling s;
  s.direct = 1.0 / std::sqrt(beta_d);
  s.cascaded = 1.0 / std::sqrt(beta_c);
  s.effective = 1.0 / std::sqrt(beta_d + cfg.dims.elements * beta_c);
  s.queue = 1.0 / cfg.queue_scale;
  return s;
}

std::size_t state_size(const channel::Dims& d) {
  return 2 * static_cast<std::size_t>(d.users) * d.subcarriers * d.antennas * (d.elements + 1) +
         2 * static_cast<std::size_t>(d.users);
}

std::vector<double> flatten(const GlobalState& s, const StateScaling& scale) {
  const auto& f = s.freq;
  channel::Dims d{f.users, f.subcarriers, f.elements, f.antennas};
  std::vector<double> x;
  x.reserve(state_size(d));
  for (const Complex& h : f.direct) {
    x.push_back(h.real() * scale.direct);
    x.push_back(h.imag() * scale.direct);
  }
  for (const Complex& h : f.cascaded) {
    x.push_back(h.real() * scale.cascaded);
    x.push_back(h.imag() * scale.cascaded);
  }
  for (std::int64_t q : s.backlog) x.push_back(static_cast<double>(q) * scale.queue);
  for (std::int64_t l : s.arrivals) x.push_back(static_cast<double>(l) * scale.queue);
  return x;
}

GlobalState unflatten(std::span<const double> x, const channel::Dims& d,
                      const StateScaling& scale) {
  if (x.size() != state_size(d)) throw InvalidInput("unflatten: wrong state length");
  GlobalState s;
  auto& f = s.freq;
  f.users = d.users;
  f.subcarriers = d.subcarriers;
  f.elements = d.elements;
  f.antennas = d.antennas;
  f.direct.resize(static_cast<std::size_t>(d.users) * d.subcarriers * d.antennas);
  f.cascaded.resize(f.direct.size() * d.elements);
  std::size_t i = 0;
  for (auto& h : f.direct) {
    h = {x[i] / scale.direct, x[i + 1] / scale.direct};
    i += 2;
  }
  for (auto& h : f.cascaded) {
    h = {x[i] / scale.cascaded, x[i + 1] / scale.cascaded};
    i += 2;
  }
  s.backlog.resize(d.users);
  s.arrivals.resize(d.users);
  for (auto& q : s.backlog) q = std::llround(x[i++] / scale.queue);
  for (auto& l : s.arrivals) l = std::llround(x[i++] / scale.queue);
  return s;
}

std::size_t observation_size(const channel::Dims& d) {
  return 2 * static_cast<std::size_t>(d.users) * d.antennas + 2 * static_cast<std::size_t>(d.users);
}

std::size_t critic_size(const channel::Dims& d) {
  return 2 * static_cast<std::size_t>(d.users) * d.subcarriers * d.antennas +
         2 * static_cast<std::size_t>(d.users);
}

AgentViews build_agent_views(const channel::EffectiveChannel& eff,
                             std::span<const std::int64_t> backlog,
                             std::span<const std::int64_t> arrivals, const StateScaling& scale) {
  const int K = eff.users, N = eff.subcarriers, Nt = eff.antennas;
  AgentViews v;
  v.observations.resize(N);
  v.critic.reserve(2 * static_cast<std::size_t>(K) * N * Nt + 2 * K);
  std::vector<double> tail;
  for (std::int64_t q : backlog) tail.push_back(static_cast<double>(q) * scale.queue);
  for (std::int64_t l : arrivals) tail.push_back(static_cast<double>(l) * scale.queue);

  for (int n = 0; n < N; ++n) {
    auto& o = v.observations[n];
    o.reserve(2 * static_cast<std::size_t>(K) * Nt + tail.size());
    for (int k = 0; k < K; ++k) {
      const Complex* row = eff.row(k, n);
      for (int t = 0; t < Nt; ++t) {
        o.push_back(row[t].real() * scale.effective);
        o.push_back(row[t].imag() * scale.effective);
      }
    }
    v.critic.insert(v.critic.end(), o.begin(), o.end());
    o.insert(o.end(), tail.begin(), tail.end());
  }
  v.critic.insert(v.critic.end(), tail.begin(), tail.end());
  return v;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  scaling_ = make_scaling(cfg_);
  traffic_ = cfg_.traffic;
  traffic_.lambda_per_slot = effective_lambda(cfg_);
  noise_w_ = phy::noise_power(cfg_.phy.noise_psd_dbm_hz, cfg_.phy.subcarrier_bw_hz);
  p_max_w_ = dbm_to_watts(cfg_.phy.p_max_dbm);
  if (cfg_.scenario.position_mode == PositionMode::kFixed) {
    Rng rng = make_rng(cfg_.scenario.geometry_seed, Stream::kGeometry);
    fixed_positions_ = channel::sample_user_positions(cfg_.geometry, cfg_.dims.users, rng);
  }
  ledger_ = traffic::PacketLedger(cfg_.dims.users);
}

void Environment::draw_positions(std::int64_t slot) {
  std::vector<channel::Point> users;
  switch (cfg_.scenario.position_mode) {
    case PositionMode::kFixed:
      users = fixed_positions_;
      break;
    case PositionMode::kPerEpisode: {
      Rng rng = make_rng(seed_, Stream::kPositions);
      users = channel::sample_user_positions(cfg_.geometry, cfg_.dims.users, rng);
      break;
    }
    case PositionMode::kPerStep: {
      Rng rng = make_rng(seed_, Stream::kPositions, static_cast<std::uint64_t>(slot));
      users = channel::sample_user_positions(cfg_.geometry, cfg_.dims.users, rng);
      break;
    }
  }
  geometry_ = channel::make_geometry(cfg_.geometry, std::move(users));
}

void Environment::draw_channel(std::int64_t slot) {
  if (cfg_.scenario.position_mode == PositionMode::kPerStep || slot == 0) draw_positions(slot);
  auto streams = channel::LinkStreams::from_seed(seed_, static_cast<std::uint64_t>(slot));
  const auto real = channel::sample_channel(geometry_, cfg_.fading, cfg_.dims, streams);
  state_.freq = channel::to_frequency(real, cfg_.dims.subcarriers);
}

std::vector<std::int64_t> Environment::draw_arrivals(std::int64_t slot) {
  Rng rng = make_rng(seed_, Stream::kArrivals, static_cast<std::uint64_t>(slot));
  auto arrivals = traffic::sample_arrivals(traffic_, rng);
  for (const auto& b : cfg_.scenario.bursts) {
    if (b.slot == slot) arrivals[b.user] += b.packets;
  }
  return arrivals;
}

const GlobalState& Environment::reset(std::uint64_t seed) {
  seed_ = seed;
  steps_ = 0;
  started_ = true;
  ledger_.clear();
  trace_.clear();
  state_ = GlobalState{};
  draw_channel(0);
  state_.arrivals = draw_arrivals(0);
  for (int k = 0; k < cfg_.dims.users; ++k) ledger_.enqueue(k, state_.arrivals[k], 0);
  state_.backlog = ledger_.backlog();
  state_.slot = 0;
  return state_;
}

channel::EffectiveChannel Environment::effective(std::span<const double> phases) const {
  return channel::effective_channel(state_.freq, phases);
}

AgentViews Environment::observe_agents(std::span<const double> phases) const {
  return build_agent_views(effective(phases), state_.backlog, state_.arrivals, scaling_);
}

StepResult Environment::step(std::span<const double> phases, const phy::Assignment& assign) {
  if (!started_) throw InvalidInput("step called before reset");
  if (done()) throw EpisodeFinished("episode already has " + std::to_string(steps_) + " steps");
  const int K = cfg_.dims.users;
  const std::int64_t slot = steps_ + 1;

  const auto eff = effective(phases);
  const auto link = phy::evaluate_link(eff, assign, noise_w_, p_max_w_, cfg_.phy.subcarrier_bw_hz);

  std::vector<std::int64_t> deliverable(K);
  for (int k = 0; k < K; ++k) deliverable[k] = traffic::deliverable(link.rate_per_user[k], traffic_);
  const auto arrivals = draw_arrivals(slot);
  const auto outcome = traffic::step(ledger_, deliverable, arrivals, slot);

  StepResult r;
  auto& rec = r.record;
  rec.slot = slot;
  rec.owner = assign.owner;
  rec.power = link.power;
  rec.rate_bps = link.rate_per_user;
  rec.deliverable = deliverable;
  rec.delivered = outcome.delivered;
  rec.arrivals = arrivals;
  rec.backlog = ledger_.backlog();
  double total = 0.0;
  for (std::int64_t q : rec.backlog) total += static_cast<double>(q);
  rec.reward = -total;
  r.reward = rec.reward;

  ++steps_;
  r.done = done();
  state_.backlog = rec.backlog;
  state_.arrivals = arrivals;
  state_.slot = slot;
  draw_channel(slot);
  trace_.push_back(rec);
  return r;
}

std::vector<traffic::TraceRow> Environment::trace_rows() const {
  std::vector<traffic::TraceRow> rows;
  rows.reserve(trace_.size() * cfg_.dims.users);
  for (const auto& rec : trace_) {
    for (int k = 0; k < cfg_.dims.users; ++k) {
      rows.push_back({rec.slot, k, rec.backlog[k], rec.arrivals[k], rec.delivered[k],
                      rec.rate_bps[k]});
    }
  }
  return rows;
}

traffic::DelayStats Environment::delay_stats() const {
  return traffic::delay_stats(ledger_, traffic_.slot_seconds);
}

}  // namespace risdelay::env
