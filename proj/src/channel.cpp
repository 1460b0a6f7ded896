#include "risdelay/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "risdelay/kernels.hpp"

namespace risdelay::channel {
namespace {

// CN(0, variance): independent real and imaginary parts, each N(0, variance/2).
Complex complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

// Fraction of the link power carried by the LoS tap for a Rician factor.
double los_fraction(double k_db) {
  if (std::isinf(k_db) && k_db > 0) return 1.0;
  const double k = db_to_linear(k_db);
  return k / (k + 1.0);
}

// e^{-j 2 pi l n / N}, with l*n reduced modulo N first for accuracy.
Complex twiddle(int l, int n, int size) {
  const long long r = (static_cast<long long>(l) * n) % size;
  const double angle = -kTwoPi * static_cast<double>(r) / static_cast<double>(size);
  return {std::cos(angle), std::sin(angle)};
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void validate(const Dims& dims) {
  if (dims.users < 1) throw InvalidInput("users must be >= 1");
  if (dims.subcarriers < 1) throw InvalidInput("subcarriers must be >= 1");
  if (dims.elements < 0) throw InvalidInput("elements must be >= 0");
  if (dims.antennas < 1) throw InvalidInput("antennas must be >= 1");
}

void validate(const GeometryConfig& cfg) {
  require_positive(cfg.bs_ris_vertical_m, "geometry.bs_ris_vertical_m");
  require_positive(cfg.bs_ris_horizontal_m, "geometry.bs_ris_horizontal_m");
  require_positive(cfg.annulus_inner_m, "geometry.annulus_inner_m");
  if (!(cfg.annulus_outer_m >= cfg.annulus_inner_m)) {
    throw InvalidInput("geometry.annulus_outer_m must be >= annulus_inner_m");
  }
  if (!(cfg.sector_width_deg > 0.0 && cfg.sector_width_deg <= 360.0)) {
    throw InvalidInput("geometry.sector_width_deg must lie in (0, 360]");
  }
}

std::vector<Point> sample_user_positions(const GeometryConfig& cfg, int users, Rng& rng) {
  validate(cfg);
  const Point ris{cfg.bs_ris_horizontal_m, cfg.bs_ris_vertical_m};
  const double r2_lo = cfg.annulus_inner_m * cfg.annulus_inner_m;
  const double r2_hi = cfg.annulus_outer_m * cfg.annulus_outer_m;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(users);
  for (int k = 0; k < users; ++k) {
    const double radius = std::sqrt(r2_lo + (r2_hi - r2_lo) * unit(rng));
    const double deg = cfg.sector_start_deg + cfg.sector_width_deg * unit(rng);
    const double rad = deg * std::numbers::pi / 180.0;
    out.push_back({ris.x + radius * std::cos(rad), ris.y + radius * std::sin(rad)});
  }
  return out;
}

LinkGeometry make_geometry(const GeometryConfig& cfg, std::vector<Point> users) {
  validate(cfg);
  LinkGeometry g;
  g.bs = {0.0, 0.0};
  g.ris = {cfg.bs_ris_horizontal_m, cfg.bs_ris_vertical_m};
  g.users = std::move(users);
  g.bs_ris_vertical_m = cfg.bs_ris_vertical_m;
  g.bs_ris_horizontal_m = cfg.bs_ris_horizontal_m;
  g.annulus_inner_m = cfg.annulus_inner_m;
  g.annulus_outer_m = cfg.annulus_outer_m;
  for (std::size_t k = 0; k < g.users.size(); ++k) {
    if (!(g.bs_user_distance(static_cast<int>(k)) > 0.0) ||
        !(g.ris_user_distance(static_cast<int>(k)) > 0.0)) {
      throw InvalidInput("user position coincides with the BS or the RIS");
    }
  }
  return g;
}

int FadingConfig::tap_span() const {
  return std::max(taps_direct, taps_bs_ris + taps_ris_user - 1);
}

void validate(const FadingConfig& cfg) {
  if (cfg.taps_direct < 1 || cfg.taps_bs_ris < 1 || cfg.taps_ris_user < 1) {
    throw InvalidInput("tap counts L0, L1, L2 must be >= 1");
  }
  if (cfg.cyclic_prefix < cfg.tap_span()) {
    throw InvalidInput("cyclic prefix must cover the tap span max{L0, L1+L2-1}");
  }
  require_positive(cfg.d0_m, "fading.d0_m");
  if (!std::isfinite(cfg.beta0_db)) throw InvalidInput("fading.beta0_db must be finite");
  if (std::isnan(cfg.k_bs_ris_db) || std::isnan(cfg.k_ris_user_db) ||
      (std::isinf(cfg.k_bs_ris_db) && cfg.k_bs_ris_db < 0) ||
      (std::isinf(cfg.k_ris_user_db) && cfg.k_ris_user_db < 0)) {
    throw InvalidInput("Rician factors must be finite or +inf");
  }
}

double path_loss(double d, double xi, const FadingConfig& cfg) {
  if (!(d > 0.0)) throw InvalidInput("path_loss: distance must be positive");
  return db_to_linear(cfg.beta0_db) * std::pow(d / cfg.d0_m, -xi);
}

ChannelRealization::ChannelRealization(int users_, int elements_, int antennas_, int l0, int l1,
                                       int l2)
    : users(users_),
      elements(elements_),
      antennas(antennas_),
      taps_direct(l0),
      taps_bs_ris(l1),
      taps_ris_user(l2),
      direct_taps(static_cast<std::size_t>(l0) * users_ * antennas_),
      bs_ris_taps(static_cast<std::size_t>(l1) * elements_ * antennas_),
      ris_user_taps(static_cast<std::size_t>(l2) * users_ * elements_) {}

LinkStreams LinkStreams::from_seed(std::uint64_t seed, std::uint64_t slot) {
  return {make_rng(seed, Stream::kDirectLink, slot), make_rng(seed, Stream::kBsRisLink, slot),
          make_rng(seed, Stream::kRisUserLink, slot)};
}

std::vector<Complex> steering_vector(int size, Point direction) {
  const double norm = std::hypot(direction.x, direction.y);
  const double cos_phi = norm > 0.0 ? direction.x / norm : 1.0;
  std::vector<Complex> a(size);
  for (int i = 0; i < size; ++i) {
    const double angle = std::numbers::pi * i * cos_phi;
    a[i] = {std::cos(angle), std::sin(angle)};
  }
  return a;
}

ChannelRealization sample_channel(const LinkGeometry& geom, const FadingConfig& cfg,
                                  const Dims& dims, LinkStreams& streams) {
  validate(cfg);
  validate(dims);
  if (static_cast<int>(geom.users.size()) != dims.users) {
    throw InvalidInput("geometry user count does not match dims.users");
  }
  const int K = dims.users, M = dims.elements, Nt = dims.antennas;
  ChannelRealization real(K, M, Nt, cfg.taps_direct, cfg.taps_bs_ris, cfg.taps_ris_user);

  // Direct link: Rayleigh, power split uniformly across the L0 taps.
  for (int l = 0; l < cfg.taps_direct; ++l) {
    for (int k = 0; k < K; ++k) {
      const double beta = path_loss(geom.bs_user_distance(k), cfg.xi_direct, cfg);
      for (int t = 0; t < Nt; ++t) {
        real.direct(l, k, t) = complex_gaussian(streams.direct, beta / cfg.taps_direct);
      }
    }
  }
  if (M == 0) return real;

  // BS -> RIS: tap 0 carries the LoS outer product a_ris * a_bs^T.
  {
    const double beta = path_loss(geom.bs_ris_distance(), cfg.xi_bs_ris, cfg);
    const double los = los_fraction(cfg.k_bs_ris_db);
    const double los_amp = std::sqrt(beta * los);
    const double nlos_power = beta * (1.0 - los);
    const auto a_ris = steering_vector(M, {geom.bs.x - geom.ris.x, geom.bs.y - geom.ris.y});
    const auto a_bs = steering_vector(Nt, {geom.ris.x - geom.bs.x, geom.ris.y - geom.bs.y});
    const int L1 = cfg.taps_bs_ris;
    for (int m = 0; m < M; ++m) {
      for (int t = 0; t < Nt; ++t) real.bs_ris(0, m, t) = los_amp * a_ris[m] * a_bs[t];
    }
    if (nlos_power > 0.0) {
      const int first = L1 > 1 ? 1 : 0;
      const double per_tap = L1 > 1 ? nlos_power / (L1 - 1) : nlos_power;
      for (int l = first; l < L1; ++l) {
        for (int m = 0; m < M; ++m) {
          for (int t = 0; t < Nt; ++t) {
            real.bs_ris(l, m, t) += complex_gaussian(streams.bs_ris, per_tap);
          }
        }
      }
    }
  }

  // RIS -> user: tap 0 is the LoS steering row toward each user.
  {
    const double los = los_fraction(cfg.k_ris_user_db);
    const int L2 = cfg.taps_ris_user;
    for (int k = 0; k < K; ++k) {
      const double beta = path_loss(geom.ris_user_distance(k), cfg.xi_ris_user, cfg);
      const double los_amp = std::sqrt(beta * los);
      const double nlos_power = beta * (1.0 - los);
      const Point u = geom.users[k];
      const auto a_ris = steering_vector(M, {u.x - geom.ris.x, u.y - geom.ris.y});
      for (int m = 0; m < M; ++m) real.ris_user(0, k, m) = los_amp * a_ris[m];
      if (nlos_power > 0.0) {
        const int first = L2 > 1 ? 1 : 0;
        const double per_tap = L2 > 1 ? nlos_power / (L2 - 1) : nlos_power;
        for (int l = first; l < L2; ++l) {
          for (int m = 0; m < M; ++m) {
            real.ris_user(l, k, m) += complex_gaussian(streams.ris_user, per_tap);
          }
        }
      }
    }
  }
  return real;
}

ChannelRealization sample_channel(const LinkGeometry& geom, const FadingConfig& cfg,
                                  const Dims& dims, Rng& rng) {
  LinkStreams streams{Rng(rng()), Rng(rng()), Rng(rng())};
  return sample_channel(geom, cfg, dims, streams);
}

CascadedTaps compose_cascaded_taps(const ChannelRealization& real) {
  CascadedTaps out;
  out.taps = real.taps_bs_ris + real.taps_ris_user - 1;
  out.users = real.users;
  out.elements = real.elements;
  out.antennas = real.antennas;
  out.values.assign(static_cast<std::size_t>(out.taps) * out.users * out.elements * out.antennas,
                    Complex{});
  for (int l = 0; l < out.taps; ++l) {
    for (int i = 0; i < real.taps_ris_user; ++i) {
      const int g = l - i;
      if (g < 0 || g >= real.taps_bs_ris) continue;
      for (int k = 0; k < real.users; ++k) {
        for (int m = 0; m < real.elements; ++m) {
          const Complex r = real.ris_user(i, k, m);
          for (int t = 0; t < real.antennas; ++t) {
            out.at(l, k, m, t) += r * real.bs_ris(g, m, t);
          }
        }
      }
    }
  }
  return out;
}

FrequencyChannel to_frequency(const ChannelRealization& real, int subcarriers) {
  const int span = std::max(real.taps_direct, real.taps_bs_ris + real.taps_ris_user - 1);
  if (subcarriers < span) {
    throw InvalidInput("to_frequency: subcarrier count smaller than the tap span");
  }
  const int K = real.users, M = real.elements, Nt = real.antennas, N = subcarriers;
  FrequencyChannel f;
  f.users = K;
  f.subcarriers = N;
  f.elements = M;
  f.antennas = Nt;
  f.direct.assign(static_cast<std::size_t>(K) * N * Nt, Complex{});
  f.cascaded.assign(static_cast<std::size_t>(K) * N * M * Nt, Complex{});

  for (int n = 0; n < N; ++n) {
    for (int l = 0; l < real.taps_direct; ++l) {
      const Complex w = twiddle(l, n, N);
      for (int k = 0; k < K; ++k) {
        for (int t = 0; t < Nt; ++t) f.direct_at(k, n, t) += real.direct(l, k, t) * w;
      }
    }
  }
  if (M == 0) return f;

  const CascadedTaps casc = compose_cascaded_taps(real);
  const std::size_t block = static_cast<std::size_t>(M) * Nt;
  for (int n = 0; n < N; ++n) {
    for (int l = 0; l < casc.taps; ++l) {
      const Complex w = twiddle(l, n, N);
      for (int k = 0; k < K; ++k) {
        const Complex* src = &casc.at(l, k, 0, 0);
        Complex* dst = &f.cascaded_at(k, n, 0, 0);
        for (std::size_t i = 0; i < block; ++i) dst[i] += src[i] * w;
      }
    }
  }
  return f;
}

EffectiveChannel effective_channel(const FrequencyChannel& freq, std::span<const double> phases) {
  if (static_cast<int>(phases.size()) != freq.elements) {
    throw InvalidInput("effective_channel: phase vector length must equal M");
  }
  EffectiveChannel eff;
  eff.users = freq.users;
  eff.subcarriers = freq.subcarriers;
  eff.antennas = freq.antennas;
  eff.values = freq.direct;
  if (freq.elements == 0) return eff;

  std::vector<Complex> weights(phases.size());
  for (std::size_t m = 0; m < phases.size(); ++m) {
    weights[m] = {std::cos(phases[m]), std::sin(phases[m])};
  }
  const auto& kt = kernels::active();
  for (int k = 0; k < freq.users; ++k) {
    for (int n = 0; n < freq.subcarriers; ++n) {
      Complex* out = eff.values.data() +
                     (static_cast<std::size_t>(k) * freq.subcarriers + n) * freq.antennas;
      kt.complex_combine(weights.data(), freq.cascaded_block(k, n), out,
                         static_cast<std::size_t>(freq.elements),
                         static_cast<std::size_t>(freq.antennas));
    }
  }
  return eff;
}

}  // namespace risdelay::channel
