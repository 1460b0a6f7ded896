#pragma once

// Poisson packet arrivals, per-user FCFS buffers and exact per-packet delay
// accounting.

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "risdelay/rng.hpp"

namespace risdelay::traffic {

struct TrafficConfig {
  std::vector<double> lambda_per_slot;  // mean packets per slot, per user
  double packet_bits = 512.0;
  double slot_seconds = 1e-3;
};

void validate(const TrafficConfig& cfg);

struct PacketRecord {
  std::int64_t arrival_slot = 0;
  std::optional<std::int64_t> departure_slot;  // empty while pending
};

// Per-user FCFS queues. Pending packets are kept as arrival slots in a
// deque; delivered packets are moved to `delivered`.
class PacketLedger {
 public:
  PacketLedger() = default;
  explicit PacketLedger(int users);

  int users() const { return static_cast<int>(pending_.size()); }

  // Backlog q_k (pending packet count).
  std::int64_t backlog(int k) const { return static_cast<std::int64_t>(pending_[k].size()); }
  std::vector<std::int64_t> backlog() const;

  const std::deque<std::int64_t>& pending(int k) const { return pending_[k]; }
  const std::vector<PacketRecord>& delivered(int k) const { return delivered_[k]; }

  std::int64_t total_arrivals(int k) const { return arrivals_[k]; }
  std::int64_t total_departures(int k) const { return departures_[k]; }

  // Appends `count` packets arriving in `slot` for user k.
  void enqueue(int k, std::int64_t count, std::int64_t slot);

  // Serves up to `count` oldest packets of user k at `slot`; returns the
  // number served.
  std::int64_t serve(int k, std::int64_t count, std::int64_t slot);

  // All records of user k in arrival order: delivered, then pending.
  std::vector<PacketRecord> records(int k) const;

  void clear();

 private:
  std::vector<std::deque<std::int64_t>> pending_;
  std::vector<std::vector<PacketRecord>> delivered_;
  std::vector<std::int64_t> arrivals_;
  std::vector<std::int64_t> departures_;
};

// Independent Poisson draws with means cfg.lambda_per_slot.
std::vector<std::int64_t> sample_arrivals(const TrafficConfig& cfg, Rng& rng);

// floor(slot_seconds * rate / packet_bits)
std::int64_t deliverable(double rate_bps, const TrafficConfig& cfg);

struct StepOutcome {
  std::vector<std::int64_t> delivered;  // Xi_k = min(D_k, q_k)
};

// Serves min(D_k, q_k) oldest packets stamped with `slot`, then appends the
// slot's arrivals. Same-slot arrivals are therefore not servable.
StepOutcome step(PacketLedger& ledger, std::span<const std::int64_t> deliverable_packets,
                 std::span<const std::int64_t> arrivals, std::int64_t slot);

struct DelayStats {
  // User-mean of per-user packet-mean delay; empty when no user delivered.
  std::optional<double> average_delay_ms;
  // User-mean of per-user population std of delay; empty as above.
  std::optional<double> jitter_ms;
  std::vector<double> user_mean_delay_ms;  // NaN for excluded users
  std::vector<double> user_jitter_ms;      // NaN for excluded users
  std::vector<std::int64_t> delivered_per_user;
  std::vector<bool> excluded;  // users with zero deliveries
  bool has_exclusions() const;
};

DelayStats delay_stats(const PacketLedger& ledger, double slot_seconds);

// One row per (slot, user) of the exported ledger trace.
struct TraceRow {
  std::int64_t slot = 0;
  int user = 0;
  std::int64_t backlog = 0;     // q_k after the slot
  std::int64_t arrivals = 0;    // l_k
  std::int64_t delivered = 0;   // Xi_k
  double rate_bps = 0.0;        // R_k
};

void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows);

}  // namespace risdelay::traffic
