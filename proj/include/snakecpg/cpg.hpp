#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "snakecpg/config.hpp"

// Matsuoka oscillator network: four primitive extensor/flexor oscillators
// coupled head to tail in a chain.
namespace snakecpg::cpg {

inline constexpr std::size_t kOscillators = 4;
using Quad = std::array<double, kOscillators>;

struct OscillatorParams {
  double tau_r = 0.7696;   // discharge time constant (s)
  double tau_a = 1.7728;   // adaptation time constant (s)
  double a = 2.0935;       // mutual inhibition between extensor and flexor
  double b = 10.0355;      // self inhibition
  double w_down = 0.7844;  // inhibition of oscillator i+1 by oscillator i
  double w_up = 8.8669;    // inhibition of oscillator i by oscillator i+1
  double K_f = 1.0;        // frequency ratio, scales both time constants
  double c = 0.0;          // free-response tonic input
  double A_z = 4.6062;     // output amplification

  // Throws ConfigError when a field invariant is violated.
  void check() const;
};

struct IntegrationSettings {
  double dt = 1e-3;                // RK4 step (s)
  double control_interval = 0.05;  // tonic inputs are held this long (s)
};

struct NetworkState {
  Quad x_e{}, y_e{}, x_f{}, y_f{};

  // Zero state with x_e[0] = 0.01; the origin itself is a fixed point.
  static NetworkState seeded(double kick = 0.01);

  bool finite() const;
  // Extensor and flexor swapped in every oscillator.
  NetworkState mirrored() const;

  bool operator==(const NetworkState&) const = default;
};

// Tonic drive u = [u_e1, u_f1, ..., u_e4, u_f4].
struct TonicInputs {
  Quad u_e{}, u_f{};

  static TonicInputs uniform(double u_e, double u_f);
  TonicInputs swapped() const { return {u_f, u_e}; }

  bool operator==(const TonicInputs&) const = default;
};

struct CpgOutput {
  Quad psi{};
};

struct StabilityReport {
  bool oscillation_possible = false;
  double lhs = 0.0;  // (tau_a - tau_r)^2
  double rhs = 0.0;  // 4 tau_r tau_a b
};

// Checks the strict inequality (tau_a - tau_r)^2 < 4 tau_r tau_a b.
StabilityReport validate_params(const OscillatorParams& p);

// u_e = sigmoid(a), u_f = 1 - u_e, per oscillator.
TonicInputs decode_action(std::span<const double, kOscillators> action);

inline double firing(double x) { return x > 0.0 ? x : 0.0; }

// Time derivative of the full 16-dimensional network state.
NetworkState derivative(const NetworkState& s, const TonicInputs& u, const OscillatorParams& p);

// One classical RK4 step. Throws DivergenceError if the result is not finite.
NetworkState step_network(const NetworkState& s, const TonicInputs& u, const OscillatorParams& p,
                          double dt);

CpgOutput output(const NetworkState& s, const OscillatorParams& p);

using TonicSchedule = std::function<TonicInputs(double t)>;

TonicSchedule constant_schedule(const TonicInputs& u);
// Exclusive pulse train on every oscillator: u_e = high for the first `duty`
// fraction of each period and `low` otherwise, u_f = 1 - u_e.
TonicSchedule pulse_schedule(double period, double duty, double high = 1.0, double low = 0.0);
// Samples `inner` at the start of each control interval and holds it.
TonicSchedule held_schedule(TonicSchedule inner, double interval);

struct Trajectory {
  double dt = 0.0;
  std::vector<double> time;
  std::vector<NetworkState> states;
  std::vector<TonicInputs> tonic;
  std::vector<CpgOutput> output;

  std::size_t size() const { return time.size(); }
  std::vector<double> psi(std::size_t oscillator) const;

  static std::string csv_header();
  // Writes the header line and one row per sample (no comment lines).
  void write_csv_rows(std::ostream& out) const;
};

// Uniformly sampled trajectory from `ics` over [0, duration].
Trajectory simulate(const OscillatorParams& p, const TonicSchedule& schedule, double duration,
                    double dt, const NetworkState& ics);

// Parameter file plumbing; all keys are optional and default to the table values.
struct CpgConfig {
  OscillatorParams params;
  IntegrationSettings integration;
  NetworkState initial = NetworkState::seeded();
};

CpgConfig cpg_config_from(const KeyValueConfig& kv);
KeyValueConfig to_key_values(const CpgConfig& cfg);

}  // namespace snakecpg::cpg
