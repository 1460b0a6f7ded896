#pragma once

// The MDP environment: per-slot channel redraws, hybrid action application
// (phases then assignment), MRT/water-filling service, queue update and the
// negative-backlog reward.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "risdelay/channel.hpp"
#include "risdelay/phy.hpp"
#include "risdelay/traffic.hpp"

namespace risdelay::env {

enum class PositionMode {
  kPerStep,     // users redrawn every slot
  kPerEpisode,  // users drawn once per reset from the episode seed
  kFixed,       // one deployment drawn from geometry_seed, shared by all episodes
};

struct BurstInjection {
  std::int64_t slot = 0;
  int user = 0;
  std::int64_t packets = 0;
};

struct ScenarioConfig {
  std::vector<BurstInjection> bursts;
  std::vector<double> lambda_gap;  // per-user offset added to lambda; may be empty
  int episode_slots = 1000;
  PositionMode position_mode = PositionMode::kPerEpisode;
  std::uint64_t geometry_seed = 0;
};

struct PhyConfig {
  double p_max_dbm = 10.0;
  double subcarrier_bw_hz = 180e3;
  double noise_psd_dbm_hz = -174.0;
};

struct EnvConfig {
  channel::Dims dims;
  channel::GeometryConfig geometry;
  channel::FadingConfig fading;
  traffic::TrafficConfig traffic;
  PhyConfig phy;
  ScenarioConfig scenario;
  double queue_scale = 50.0;  // q and l are divided by this in features
};

void validate(const EnvConfig& cfg);

// Effective lambda per user after the gap offsets.
std::vector<double> effective_lambda(const EnvConfig& cfg);

// Feature scale factors. Channel features are multiplied by the inverse
// square root of the nominal path loss of their link type, evaluated for a
// user at the centre of the deployment sector.
struct StateScaling {
  double direct = 1.0;
  double cascaded = 1.0;
  double effective = 1.0;
  double queue = 1.0 / 50.0;
};

StateScaling make_scaling(const EnvConfig& cfg);

struct GlobalState {
  channel::FrequencyChannel freq;
  std::vector<std::int64_t> backlog;   // q
  std::vector<std::int64_t> arrivals;  // l of the most recent slot
  std::int64_t slot = 0;
};

// Layout: direct [K][N][Nt] (re, im), cascaded [K][N][M][Nt] (re, im), q, l.
std::size_t state_size(const channel::Dims& dims);
std::vector<double> flatten(const GlobalState& s, const StateScaling& scale);
GlobalState unflatten(std::span<const double> x, const channel::Dims& dims,
                      const StateScaling& scale);

// Per-subcarrier agent inputs and the centralised critic input.
//   observations[n] = h_eff[:, n, :] (re, im; user-major) ++ q ++ l
//   critic          = h_eff ordered [n][k][t] (re, im) ++ q ++ l
struct AgentViews {
  std::vector<std::vector<double>> observations;
  std::vector<double> critic;
};

std::size_t observation_size(const channel::Dims& dims);
std::size_t critic_size(const channel::Dims& dims);

AgentViews build_agent_views(const channel::EffectiveChannel& eff,
                             std::span<const std::int64_t> backlog,
                             std::span<const std::int64_t> arrivals, const StateScaling& scale);

struct SlotRecord {
  std::int64_t slot = 0;  // ledger slot at which service and arrivals happen
  std::vector<int> owner;
  std::vector<double> power;
  std::vector<double> rate_bps;
  std::vector<std::int64_t> deliverable;
  std::vector<std::int64_t> delivered;
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> backlog;  // after service and arrivals
  double reward = 0.0;                // -sum(backlog)
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  SlotRecord record;
};

class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  const GlobalState& reset(std::uint64_t seed);
  StepResult step(std::span<const double> phases, const phy::Assignment& assign);

  AgentViews observe_agents(std::span<const double> phases) const;
  channel::EffectiveChannel effective(std::span<const double> phases) const;

  const GlobalState& state() const { return state_; }
  std::vector<double> flat_state() const { return flatten(state_, scaling_); }
  const channel::LinkGeometry& geometry() const { return geometry_; }
  const traffic::PacketLedger& ledger() const { return ledger_; }
  const std::vector<SlotRecord>& trace() const { return trace_; }
  const EnvConfig& config() const { return cfg_; }
  const StateScaling& scaling() const { return scaling_; }
  double noise_power() const { return noise_w_; }
  double p_max_w() const { return p_max_w_; }

  int steps_taken() const { return steps_; }
  bool done() const { return steps_ >= cfg_.scenario.episode_slots; }

  std::vector<traffic::TraceRow> trace_rows() const;
  traffic::DelayStats delay_stats() const;

 private:
  void draw_positions(std::int64_t slot);
  void draw_channel(std::int64_t slot);
  std::vector<std::int64_t> draw_arrivals(std::int64_t slot);

  EnvConfig cfg_;
  StateScaling scaling_;
  traffic::TrafficConfig traffic_;  // with gap offsets applied
  double noise_w_ = 0.0;
  double p_max_w_ = 0.0;
  std::uint64_t seed_ = 0;
  int steps_ = 0;
  bool started_ = false;
  std::vector<channel::Point> fixed_positions_;
  channel::LinkGeometry geometry_;
  GlobalState state_;
  traffic::PacketLedger ledger_;
  std::vector<SlotRecord> trace_;
};

}  // namespace risdelay::env
