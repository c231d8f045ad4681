#pragma once

#include <span>
#include <string>
#include <vector>

#include "snakecpg/cpg.hpp"
#include "snakecpg/describing.hpp"
#include "snakecpg/measure.hpp"
#include "snakecpg/stats.hpp"

namespace snakecpg::df {

struct SweepSettings {
  double duration = 120.0;     // s
  double dt = 1e-3;            // s
  double transient_cut = -1;   // s; negative selects default_transient_cut
  std::size_t channel = 0;     // measured oscillator
  unsigned workers = 0;        // 0 = hardware concurrency
  MeasureOptions measure;
};

// Coupling off and A_z = 1, so psi is the bare z_e - z_f of each oscillator.
cpg::OscillatorParams isolated(const cpg::OscillatorParams& p);
// Same parameters with `a` chosen so that harmonic_gain == K_n.
cpg::OscillatorParams with_harmonic_gain(const cpg::OscillatorParams& p, double K_n);

struct BiasPoint {
  double K_n = 0.0;
  double u_e = 0.0;
  double measured = 0.0;
  double predicted = 0.0;
  double amplitude = 0.0;
  bool limit_cycle = false;
  bool ok = false;
  std::string error;
};

// Constant exclusive tonic inputs (u_e, 1 - u_e) on an isolated oscillator for
// every (K_n, u_e) pair, row-major.
std::vector<BiasPoint> bias_sweep(const cpg::OscillatorParams& base, std::span<const double> gains,
                                  std::span<const double> u_grid, const SweepSettings& settings = {});

struct BiasPanel {
  double K_n = 0.0;
  std::size_t limit_cycles = 0;
  std::size_t fixed_points = 0;
  // Midpoint between the largest fixed-point u_e below the first limit cycle
  // and that limit cycle; NaN when no fixed-point region precedes it.
  double bifurcation_u = 0.0;
  bool has_fit = false;
  LinearFit fit;  // measured on predicted, limit-cycle points only
};

std::vector<BiasPanel> summarize_bias(std::span<const BiasPoint> points);

struct DutySettings : SweepSettings {
  double period = 0.0;  // s; 0 selects 2 pi / omega_n
  double high = 1.0;
  double low = 0.0;
};

struct DutyPoint {
  double duty = 0.0;
  double measured = 0.0;
  double predicted = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  bool limit_cycle = false;
  bool ok = false;
  std::string error;
};

// Exclusive pulse-train tonic inputs on an isolated oscillator.
std::vector<DutyPoint> duty_sweep(const cpg::OscillatorParams& base, std::span<const double> duties,
                                  const DutySettings& settings = {}, const DutyFit& prediction = {});

struct DutySummary {
  LinearFit fit;   // measured bias on duty
  DutyFit fitted;  // (K_m, M) recovered from the fitted line
};

DutySummary summarize_duty(std::span<const DutyPoint> points, const cpg::OscillatorParams& base);

struct FrequencySettings : SweepSettings {
  double tonic = 1.0;  // u_e = u_f
};

struct FrequencyPoint {
  double K_f = 0.0;
  double measured = 0.0;   // rad/s
  double predicted = 0.0;  // natural_frequency at this K_f
  bool ok = false;
  std::string error;
};

// Full coupled network with constant tonic inputs.
std::vector<FrequencyPoint> frequency_sweep(const cpg::OscillatorParams& base,
                                            std::span<const double> kf_grid,
                                            const FrequencySettings& settings = {});

// log(omega) on log(K_f) over the successful points; slope is the exponent.
LinearFit frequency_exponent(std::span<const FrequencyPoint> points);

// Runs the network at K_f = 1 with step dt and at K_f with step K_f * dt for
// the same number of steps, and returns the largest state difference relative
// to the largest state magnitude.
double time_rescaling_error(const cpg::OscillatorParams& p, double K_f, double duration, double dt,
                            const cpg::TonicInputs& u);

}  // namespace snakecpg::df
