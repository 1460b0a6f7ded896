#pragma once

// Multi-tap fading channels for the direct (BS->user), BS->RIS and RIS->user
// links, their tap-domain cascade, and the per-subcarrier frequency response.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "risdelay/common.hpp"
#include "risdelay/rng.hpp"

namespace risdelay::channel {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

// System dimensions shared by every module.
struct Dims {
  int users = 3;         // K
  int subcarriers = 16;  // N
  int elements = 64;     // M
  int antennas = 4;      // Nt
};

void validate(const Dims& dims);

// Deployment layout. The BS sits at the origin and the RIS at (D2, D1);
// users are drawn uniformly (by area) from an annular sector centred on the
// RIS.
struct GeometryConfig {
  double bs_ris_vertical_m = 150.0;    // D1
  double bs_ris_horizontal_m = 130.0;  // D2
  double annulus_inner_m = 10.0;
  double annulus_outer_m = 13.0;
  double sector_start_deg = 180.0;
  double sector_width_deg = 90.0;
};

struct LinkGeometry {
  Point bs;
  Point ris;
  std::vector<Point> users;
  double bs_ris_vertical_m = 0.0;
  double bs_ris_horizontal_m = 0.0;
  double annulus_inner_m = 0.0;
  double annulus_outer_m = 0.0;

  double bs_user_distance(int k) const { return distance(bs, users[k]); }
  double ris_user_distance(int k) const { return distance(ris, users[k]); }
  double bs_ris_distance() const { return distance(bs, ris); }
};

void validate(const GeometryConfig& cfg);

std::vector<Point> sample_user_positions(const GeometryConfig& cfg, int users, Rng& rng);
LinkGeometry make_geometry(const GeometryConfig& cfg, std::vector<Point> users);

struct FadingConfig {
  double beta0_db = -30.0;
  double d0_m = 1.0;
  double xi_direct = 3.8;
  double xi_bs_ris = 2.2;
  double xi_ris_user = 2.4;
  double k_bs_ris_db = 4.0;    // may be +inf (pure LoS)
  double k_ris_user_db = 5.0;  // may be +inf (pure LoS)
  int taps_direct = 4;         // L0
  int taps_bs_ris = 2;         // L1
  int taps_ris_user = 3;       // L2
  int cyclic_prefix = 16;      // N_cp

  // L = max{L0, L1 + L2 - 1}
  int tap_span() const;
};

void validate(const FadingConfig& cfg);

// beta0 * (d / d0)^(-xi), linear power gain.
double path_loss(double d, double xi, const FadingConfig& cfg);

// Time-domain taps for one slot.
//   direct_taps   [L0][K][Nt]
//   bs_ris_taps   [L1][M][Nt]
//   ris_user_taps [L2][K][M]
struct ChannelRealization {
  int users = 0;
  int elements = 0;
  int antennas = 0;
  int taps_direct = 0;
  int taps_bs_ris = 0;
  int taps_ris_user = 0;
  std::int64_t slot_index = 0;
  std::vector<Complex> direct_taps;
  std::vector<Complex> bs_ris_taps;
  std::vector<Complex> ris_user_taps;

  ChannelRealization() = default;
  ChannelRealization(int users, int elements, int antennas, int l0, int l1, int l2);

  Complex& direct(int l, int k, int t) { return direct_taps[(l * users + k) * antennas + t]; }
  const Complex& direct(int l, int k, int t) const {
    return direct_taps[(l * users + k) * antennas + t];
  }
  Complex& bs_ris(int l, int m, int t) { return bs_ris_taps[(l * elements + m) * antennas + t]; }
  const Complex& bs_ris(int l, int m, int t) const {
    return bs_ris_taps[(l * elements + m) * antennas + t];
  }
  Complex& ris_user(int l, int k, int m) {
    return ris_user_taps[(l * users + k) * elements + m];
  }
  const Complex& ris_user(int l, int k, int m) const {
    return ris_user_taps[(l * users + k) * elements + m];
  }
};

// Composed BS->RIS->user taps, [L1+L2-1][K][M][Nt].
struct CascadedTaps {
  int taps = 0;
  int users = 0;
  int elements = 0;
  int antennas = 0;
  std::vector<Complex> values;

  Complex& at(int l, int k, int m, int t) {
    return values[((static_cast<std::size_t>(l) * users + k) * elements + m) * antennas + t];
  }
  const Complex& at(int l, int k, int m, int t) const {
    return values[((static_cast<std::size_t>(l) * users + k) * elements + m) * antennas + t];
  }
};

// Per-subcarrier responses.
//   direct   [K][N][Nt]
//   cascaded [K][N][M][Nt]
struct FrequencyChannel {
  int users = 0;
  int subcarriers = 0;
  int elements = 0;
  int antennas = 0;
  std::vector<Complex> direct;
  std::vector<Complex> cascaded;

  const Complex* direct_row(int k, int n) const {
    return direct.data() + (static_cast<std::size_t>(k) * subcarriers + n) * antennas;
  }
  const Complex* cascaded_block(int k, int n) const {
    return cascaded.data() +
           (static_cast<std::size_t>(k) * subcarriers + n) * elements * antennas;
  }
  Complex& direct_at(int k, int n, int t) {
    return direct[(static_cast<std::size_t>(k) * subcarriers + n) * antennas + t];
  }
  const Complex& direct_at(int k, int n, int t) const {
    return direct[(static_cast<std::size_t>(k) * subcarriers + n) * antennas + t];
  }
  Complex& cascaded_at(int k, int n, int m, int t) {
    return cascaded[((static_cast<std::size_t>(k) * subcarriers + n) * elements + m) * antennas + t];
  }
  const Complex& cascaded_at(int k, int n, int m, int t) const {
    return cascaded[((static_cast<std::size_t>(k) * subcarriers + n) * elements + m) * antennas + t];
  }
};

// Effective channel rows, [K][N][Nt].
struct EffectiveChannel {
  int users = 0;
  int subcarriers = 0;
  int antennas = 0;
  std::vector<Complex> values;

  const Complex* row(int k, int n) const {
    return values.data() + (static_cast<std::size_t>(k) * subcarriers + n) * antennas;
  }
};

// One generator per link so the direct-link draws do not depend on M.
struct LinkStreams {
  Rng direct;
  Rng bs_ris;
  Rng ris_user;

  static LinkStreams from_seed(std::uint64_t seed, std::uint64_t slot);
};

// Uniform linear array response with half-wavelength spacing along the
// x-axis: a_i = exp(j*pi*i*cos(phi)), phi the angle of `direction`.
std::vector<Complex> steering_vector(int size, Point direction);

ChannelRealization sample_channel(const LinkGeometry& geom, const FadingConfig& cfg,
                                  const Dims& dims, LinkStreams& streams);
// Convenience form drawing all three links from one generator.
ChannelRealization sample_channel(const LinkGeometry& geom, const FadingConfig& cfg,
                                  const Dims& dims, Rng& rng);

CascadedTaps compose_cascaded_taps(const ChannelRealization& real);

FrequencyChannel to_frequency(const ChannelRealization& real, int subcarriers);

// h_eff[k,n,:] = direct[k,n,:] + sum_m e^{j theta_m} cascaded[k,n,m,:]
EffectiveChannel effective_channel(const FrequencyChannel& freq, std::span<const double> phases);

}  // namespace risdelay::channel
