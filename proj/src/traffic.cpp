#include "risdelay/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "risdelay/common.hpp"

namespace risdelay::traffic {

void validate(const TrafficConfig& cfg) {
  for (double l : cfg.lambda_per_slot) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw InvalidInput("traffic: lambda_per_slot entries must be finite and >= 0");
    }
  }
  if (!(cfg.packet_bits > 0.0)) throw InvalidInput("traffic: packet_bits must be positive");
  if (!(cfg.slot_seconds > 0.0)) throw InvalidInput("traffic: slot_seconds must be positive");
}

PacketLedger::PacketLedger(int users)
    : pending_(users), delivered_(users), arrivals_(users, 0), departures_(users, 0) {}

std::vector<std::int64_t> PacketLedger::backlog() const {
  std::vector<std::int64_t> q(pending_.size());
  for (std::size_t k = 0; k < pending_.size(); ++k) q[k] = static_cast<std::int64_t>(pending_[k].size());
  return q;
}

void PacketLedger::enqueue(int k, std::int64_t count, std::int64_t slot) {
  for (std::int64_t i = 0; i < count; ++i) pending_[k].push_back(slot);
  arrivals_[k] += count;
}

std::int64_t PacketLedger::serve(int k, std::int64_t count, std::int64_t slot) {
  auto& queue = pending_[k];
  const std::int64_t served = std::min<std::int64_t>(count, static_cast<std::int64_t>(queue.size()));
  for (std::int64_t i = 0; i < served; ++i) {
    delivered_[k].push_back({queue.front(), slot});
    queue.pop_front();
  }
  departures_[k] += served;
  return served;
}

std::vector<PacketRecord> PacketLedger::records(int k) const {
  std::vector<PacketRecord> out(delivered_[k]);
  for (std::int64_t a : pending_[k]) out.push_back({a, std::nullopt});
  return out;
}

void PacketLedger::clear() {
  for (auto& q : pending_) q.clear();
  for (auto& d : delivered_) d.clear();
  std::fill(arrivals_.begin(), arrivals_.end(), 0);
  std::fill(departures_.begin(), departures_.end(), 0);
}

std::vector<std::int64_t> sample_arrivals(const TrafficConfig& cfg, Rng& rng) {
  std::vector<std::int64_t> out(cfg.lambda_per_slot.size(), 0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double mean = cfg.lambda_per_slot[k];
    if (mean > 0.0) {
      std::poisson_distribution<std::int64_t> poisson(mean);
      out[k] = poisson(rng);
    }
  }
  return out;
}

std::int64_t deliverable(double rate_bps, const TrafficConfig& cfg) {
  if (!(rate_bps >= 0.0)) throw InvalidInput("deliverable: rate must be >= 0");
  // Relative slack absorbs rounding in T*R/L at exact packet multiples.
  const double packets = cfg.slot_seconds * rate_bps / cfg.packet_bits;
  return static_cast<std::int64_t>(std::floor(packets * (1.0 + 1e-12)));
}

StepOutcome step(PacketLedger& ledger, std::span<const std::int64_t> deliverable_packets,
                 std::span<const std::int64_t> arrivals, std::int64_t slot) {
  const int K = ledger.users();
  if (static_cast<int>(deliverable_packets.size()) != K || static_cast<int>(arrivals.size()) != K) {
    throw InvalidInput("traffic::step: vector lengths must equal the user count");
  }
  StepOutcome out;
  out.delivered.resize(K);
  for (int k = 0; k < K; ++k) out.delivered[k] = ledger.serve(k, deliverable_packets[k], slot);
  for (int k = 0; k < K; ++k) ledger.enqueue(k, arrivals[k], slot);
  return out;
}

bool DelayStats::has_exclusions() const {
  return std::any_of(excluded.begin(), excluded.end(), [](bool b) { return b; });
}

DelayStats delay_stats(const PacketLedger& ledger, double slot_seconds) {
  const int K = ledger.users();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double slot_ms = slot_seconds * 1e3;
  DelayStats s;
  s.user_mean_delay_ms.assign(K, nan);
  s.user_jitter_ms.assign(K, nan);
  s.delivered_per_user.assign(K, 0);
  s.excluded.assign(K, false);

  double delay_sum = 0.0;
  double jitter_sum = 0.0;
  int included = 0;
  for (int k = 0; k < K; ++k) {
    const auto& recs = ledger.delivered(k);
    s.delivered_per_user[k] = static_cast<std::int64_t>(recs.size());
    if (recs.empty()) {
      s.excluded[k] = true;
      continue;
    }
    std::int64_t sum = 0;
    for (const auto& r : recs) sum += *r.departure_slot - r.arrival_slot;
    const double n = static_cast<double>(recs.size());
    const double mean = static_cast<double>(sum) / n;
    double ss = 0.0;
    for (const auto& r : recs) {
      const double e = static_cast<double>(*r.departure_slot - r.arrival_slot) - mean;
      ss += e * e;
    }
    const double std_slots = std::sqrt(ss / n);
    s.user_mean_delay_ms[k] = mean * slot_ms;
    s.user_jitter_ms[k] = std_slots * slot_ms;
    delay_sum += s.user_mean_delay_ms[k];
    jitter_sum += s.user_jitter_ms[k];
    ++included;
  }
  if (included > 0) {
    s.average_delay_ms = delay_sum / included;
    s.jitter_ms = jitter_sum / included;
  }
  return s;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows) {
  os << "slot,user,q,arrivals,delivered,rate_bps\n";
  for (const auto& r : rows) {
    os << r.slot << ',' << r.user << ',' << r.backlog << ',' << r.arrivals << ',' << r.delivered
       << ',' << r.rate_bps << '\n';
  }
}

}  // namespace risdelay::traffic
