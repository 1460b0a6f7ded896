#pragma once

// Active beamforming (MRT toward the subcarrier owner), water-filling power
// allocation and the per-user achievable rate for a given effective channel.

#include <span>
#include <vector>

#include "risdelay/channel.hpp"
#include "risdelay/common.hpp"

namespace risdelay::phy {

// owner[n] in {0..K-1}. One owner per subcarrier makes the binary-indicator
// and at-most-one-user constraints hold by construction.
struct Assignment {
  std::vector<int> owner;
};

void validate(const Assignment& a, int users, int subcarriers);

struct PowerAllocation {
  std::vector<double> p;  // W, per subcarrier
  double tau = 0.0;       // 1/W, the water level is 1/tau
};

struct LinkQuality {
  std::vector<double> c;      // |h_eff|^2 / sigma^2 of the owner, 1/W
  std::vector<double> gamma;  // per-subcarrier SNR
  std::vector<double> power;  // W
  double tau = 0.0;
  std::vector<double> rate_per_user;  // bit/s
};

// h^H / |h|. Throws DegenerateChannel for an all-zero row.
std::vector<Complex> mrt_direction(std::span<const Complex> h_row);

// p_n = (1/tau - 1/c_n)^+ with sum p_n = p_max. tau is located by bisection
// (at most 200 iterations or budget residual < 1e-12), after which the water
// level is recomputed in closed form from the identified active set.
// Zero gains receive zero power. Throws NoUsableSubcarrier if every c_n is 0.
PowerAllocation waterfill(std::span<const double> c, double p_max);

// Budget function sum_n (1/tau - 1/c_n)^+, exposed for tests.
double waterfill_budget(std::span<const double> c, double tau);

// sigma^2 = PSD * bandwidth.
double noise_power(double psd_dbm_per_hz, double bandwidth_hz);

// Rates for one slot. p_max <= 0 or an all-zero gain vector yields zero
// power and zero rate rather than an error.
LinkQuality evaluate_link(const channel::FrequencyChannel& freq, std::span<const double> phases,
                          const Assignment& assign, double noise_power_w, double p_max_w,
                          double subcarrier_bw_hz);

// Same, starting from an already combined effective channel.
LinkQuality evaluate_link(const channel::EffectiveChannel& eff, const Assignment& assign,
                          double noise_power_w, double p_max_w, double subcarrier_bw_hz);

}  // namespace risdelay::phy
