#include "risdelay/phy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "risdelay/kernels.hpp"

namespace risdelay::phy {

void validate(const Assignment& a, int users, int subcarriers) {
  if (static_cast<int>(a.owner.size()) != subcarriers) {
    throw InvalidInput("assignment length " + std::to_string(a.owner.size()) +
                       " does not match N=" + std::to_string(subcarriers));
  }
  for (int o : a.owner) {
    if (o < 0 || o >= users) throw InvalidInput("assignment owner out of range");
  }
}

std::vector<Complex> mrt_direction(std::span<const Complex> h_row) {
  const double norm = std::sqrt(kernels::squared_norm(h_row.data(), h_row.size()));
  if (!(norm > 0.0)) throw DegenerateChannel("mrt_direction: zero channel vector");
  std::vector<Complex> w(h_row.size());
  for (std::size_t i = 0; i < h_row.size(); ++i) w[i] = std::conj(h_row[i]) / norm;
  return w;
}

double waterfill_budget(std::span<const double> c, double tau) {
  const double level = 1.0 / tau;
  double total = 0.0;
  for (double g : c) {
    if (g > 0.0) total += std::max(level - 1.0 / g, 0.0);
  }
  return total;
}

PowerAllocation waterfill(std::span<const double> c, double p_max) {
  if (!(p_max > 0.0) || !std::isfinite(p_max)) {
    throw InvalidInput("waterfill: p_max must be positive and finite");
  }
  double c_max = 0.0;
  double inv_max = 0.0;
  for (double g : c) {
    if (g < 0.0 || !std::isfinite(g)) throw InvalidInput("waterfill: gains must be finite and >= 0");
    if (g > 0.0) {
      c_max = std::max(c_max, g);
      inv_max = std::max(inv_max, 1.0 / g);
    }
  }
  if (!(c_max > 0.0)) throw NoUsableSubcarrier("waterfill: every subcarrier gain is zero");

  // budget(tau_hi) = 0 < p_max and budget(tau_lo) >= p_max.
  double hi = c_max;
  double lo = 1.0 / (p_max + inv_max);
  double tau = lo;
  for (int it = 0; it < 200; ++it) {
    tau = 0.5 * (lo + hi);
    const double residual = waterfill_budget(c, tau) - p_max;
    if (std::abs(residual) < 1e-12) break;
    if (residual > 0.0) {
      lo = tau;
    } else {
      hi = tau;
    }
  }

  // Closed-form water level on the active set, iterated to a fixed point so
  // the budget is met to rounding rather than to the bisection tolerance.
  double level = 1.0 / tau;
  for (int pass = 0; pass < 64; ++pass) {
    double inv_sum = 0.0;
    int active = 0;
    for (double g : c) {
      if (g > 0.0 && 1.0 / g < level) {
        inv_sum += 1.0 / g;
        ++active;
      }
    }
    if (active == 0) break;
    const double next = (p_max + inv_sum) / active;
    if (next == level) break;
    level = next;
  }

  PowerAllocation out;
  out.p.resize(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    out.p[n] = c[n] > 0.0 ? std::max(level - 1.0 / c[n], 0.0) : 0.0;
  }
  out.tau = 1.0 / level;
  return out;
}

double noise_power(double psd_dbm_per_hz, double bandwidth_hz) {
  return dbm_to_watts(psd_dbm_per_hz) * bandwidth_hz;
}

LinkQuality evaluate_link(const channel::EffectiveChannel& eff, const Assignment& assign,
                          double noise_power_w, double p_max_w, double subcarrier_bw_hz) {
  validate(assign, eff.users, eff.subcarriers);
  if (!(noise_power_w > 0.0)) throw InvalidInput("evaluate_link: noise power must be positive");
  const int N = eff.subcarriers;
  LinkQuality q;
  q.c.resize(N);
  q.gamma.assign(N, 0.0);
  q.power.assign(N, 0.0);
  q.rate_per_user.assign(eff.users, 0.0);

  bool usable = false;
  for (int n = 0; n < N; ++n) {
    const double gain = kernels::squared_norm(eff.row(assign.owner[n], n), eff.antennas);
    q.c[n] = gain / noise_power_w;
    usable = usable || q.c[n] > 0.0;
  }
  if (p_max_w > 0.0 && usable) {
    PowerAllocation pa = waterfill(q.c, p_max_w);
    q.power = std::move(pa.p);
    q.tau = pa.tau;
  }
  for (int n = 0; n < N; ++n) {
    q.gamma[n] = q.power[n] * q.c[n];
    q.rate_per_user[assign.owner[n]] += subcarrier_bw_hz * std::log2(1.0 + q.gamma[n]);
  }
  return q;
}

LinkQuality evaluate_link(const channel::FrequencyChannel& freq, std::span<const double> phases,
                          const Assignment& assign, double noise_power_w, double p_max_w,
                          double subcarrier_bw_hz) {
  return evaluate_link(channel::effective_channel(freq, phases), assign, noise_power_w, p_max_w,
                       subcarrier_bw_hz);
}

}  // namespace risdelay::phy
