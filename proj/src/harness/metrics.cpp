#include "risdelay/harness/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "risdelay/common.hpp"

namespace risdelay::harness {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> moving_average(std::span<const double> v, int window) {
  if (window < 1) throw InvalidInput("moving_average window must be >= 1");
  std::vector<double> out(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (i >= static_cast<std::size_t>(window)) acc -= v[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

PairedStat paired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("paired samples differ in length");
  PairedStat s;
  s.n = static_cast<int>(a.size());
  if (s.n == 0) return s;
  s.mean_a = mean(a);
  s.mean_b = mean(b);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
  s.mean_diff = mean(d);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : d) ss += (x - s.mean_diff) * (x - s.mean_diff);
    s.std_error = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

int recovery_slots(std::span<const std::int64_t> backlog, std::int64_t burst_slot,
                   std::int64_t packets, std::int64_t cap_slot, double threshold_fraction) {
  if (burst_slot < 0 || cap_slot < burst_slot) throw InvalidInput("recovery window is empty");
  const double threshold = threshold_fraction * static_cast<double>(packets);
  const std::int64_t last = std::min<std::int64_t>(cap_slot, static_cast<std::int64_t>(backlog.size()) - 1);
  for (std::int64_t t = burst_slot; t <= last; ++t) {
    if (static_cast<double>(backlog[t]) < threshold) return static_cast<int>(t - burst_slot);
  }
  return static_cast<int>(cap_slot - burst_slot);
}

double backlog_spread(const std::vector<std::vector<std::int64_t>>& backlog) {
  if (backlog.empty()) return 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& series : backlog) {
    double s = 0.0;
    for (auto q : series) s += static_cast<double>(q);
    const double m = series.empty() ? 0.0 : s / static_cast<double>(series.size());
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi - lo;
}

}  // namespace risdelay::harness
