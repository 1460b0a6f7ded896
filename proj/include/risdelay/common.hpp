#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace risdelay {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Error hierarchy. Everything derives from Error so callers can catch the
// whole family; the concrete type names the failure class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A beamforming direction was requested for an all-zero channel.
class DegenerateChannel : public Error {
 public:
  using Error::Error;
};

// Water-filling was given no subcarrier with positive gain.
class NoUsableSubcarrier : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

// NaN or infinity surfaced during an optimization step.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Wraps an angle into [0, 2pi).
double canonical_phase(double theta);
void canonicalize_phases(std::span<double> phases);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace risdelay
