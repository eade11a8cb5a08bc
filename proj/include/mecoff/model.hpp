#pragma once

// Per-unit physical cost model: SNR, uplink rate, local/MEC latency and
// device-side energy. Every function is pure; units are SI (bits, cycles,
// seconds, hertz, watts, joules).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mecoff {

using UnitId = std::uint32_t;

// Constraint labels of the energy minimisation problem.
//   C1: MEC unit latency <= unit deadline
//   C2: local unit latency <= unit deadline
//   C3: user latency <= user deadline
//   C4: device clock <= f_max
//   C5: transmit power <= p_max
enum class Constraint : std::uint8_t { C1 = 1, C2, C3, C4, C5 };

inline const char* to_string(Constraint c) {
  switch (c) {
    case Constraint::C1: return "C1";
    case Constraint::C2: return "C2";
    case Constraint::C3: return "C3";
    case Constraint::C4: return "C4";
    case Constraint::C5: return "C5";
  }
  return "?";
}

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConstraintViolation : public std::domain_error {
 public:
  ConstraintViolation(Constraint which, const std::string& what)
      : std::domain_error(std::string(to_string(which)) + ": " + what), which_(which) {}

  Constraint which() const noexcept { return which_; }

 private:
  Constraint which_;
};

// Smallest executable work item.
struct Unit {
  UnitId id = 0;
  std::uint32_t user = 0;
  std::uint32_t task_id = 0;
  std::uint32_t type_id = 0;
  std::uint32_t source_id = 0;
  double d = 0.0;         // input data, bits
  double w = 0.0;         // workload, CPU cycles
  double deadline = 0.0;  // seconds

  bool operator==(const Unit&) const = default;
};

struct ChannelState {
  double h = 1.0;    // amplitude gain
  double bw = 1.0;   // Hz
  double n0 = 1.0;   // W/Hz

  // h^2 / (bw * n0): SNR per watt of transmit power.
  double gain_to_noise() const { return h * h / (bw * n0); }
};

struct DeviceCaps {
  double f_max = 2e9;          // cycles/s
  double p_max = 1.0;          // W
  double kappa = 1e-11;        // effective switched capacitance
  double user_deadline = 0.1;  // seconds
};

struct MecCaps {
  double f_mec = 20e9;  // cycles/s allocated to one user
};

inline void validate(const Unit& u) {
  if (!(u.d > 0.0) || !(u.w > 0.0) || !(u.deadline > 0.0)) {
    throw InvalidParameter("unit " + std::to_string(u.id) + ": d, w and deadline must be positive");
  }
}

inline void validate(const ChannelState& ch) {
  if (!(ch.h >= 0.0) || !(ch.bw > 0.0) || !(ch.n0 > 0.0)) {
    throw InvalidParameter("channel: requires h >= 0, bw > 0, n0 > 0");
  }
}

inline void validate(const DeviceCaps& caps) {
  if (!(caps.f_max > 0.0) || !(caps.p_max > 0.0) || !(caps.kappa > 0.0) || !(caps.user_deadline > 0.0)) {
    throw InvalidParameter("device caps: f_max, p_max, kappa and user_deadline must be positive");
  }
}

inline void validate(const MecCaps& mec) {
  if (!(mec.f_mec > 0.0)) throw InvalidParameter("mec caps: f_mec must be positive");
}

inline double snr(double p, const ChannelState& ch) { return p * ch.h * ch.h / (ch.bw * ch.n0); }

inline double uplink_rate(const ChannelState& ch, double snr_value) {
  if (!(snr_value >= 0.0)) throw InvalidParameter("uplink_rate: snr must be >= 0");
  return ch.bw * std::log1p(snr_value) / std::numbers::ln2;
}

inline double local_latency(double w, double f) {
  if (!(f > 0.0)) throw InvalidParameter("local_latency: frequency must be positive");
  return w / f;
}

inline double local_energy(const DeviceCaps& caps, double w, double f) {
  if (f > caps.f_max) throw ConstraintViolation(Constraint::C4, "clock frequency above f_max");
  return caps.kappa * w * f * f;
}

inline double tx_latency(double d, double r) {
  if (!(r > 0.0)) throw InvalidParameter("tx_latency: rate must be positive");
  return d / r;
}

inline double tx_energy(double p, double t) { return p * t; }

inline double mec_latency(double w, const MecCaps& mec) { return w / mec.f_mec; }

}  // namespace mecoff
