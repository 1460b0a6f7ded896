#pragma once

// Aggregate statistics over paired-seed evaluations and episode traces.

#include <cstdint>
#include <span>
#include <vector>

namespace risdelay::harness {

double mean(std::span<const double> v);

// Trailing moving average; element i averages v[max(0, i-window+1) .. i].
std::vector<double> moving_average(std::span<const double> v, int window);

// Differences are b - a per seed; std_error is the sample standard deviation
// of the differences over sqrt(n).
struct PairedStat {
  int n = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_diff = 0.0;
  double std_error = 0.0;
};

PairedStat paired(std::span<const double> a, std::span<const double> b);

// Slots after `burst_slot` until backlog[t] < threshold_fraction * packets,
// searched over t in [burst_slot, cap_slot]; cap_slot - burst_slot when the
// backlog never drops that low. backlog is indexed by ledger slot.
int recovery_slots(std::span<const std::int64_t> backlog, std::int64_t burst_slot,
                   std::int64_t packets, std::int64_t cap_slot, double threshold_fraction = 0.1);

// max_k mean_t q_k - min_k mean_t q_k; backlog[k] is user k's series.
double backlog_spread(const std::vector<std::vector<std::int64_t>>& backlog);

}  // namespace risdelay::harness
