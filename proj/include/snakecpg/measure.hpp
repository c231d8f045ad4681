#pragma once

#include <cstddef>
#include <span>

#include "snakecpg/cpg.hpp"

namespace snakecpg::df {

struct SignalStats {
  double bias = 0.0;       // mean over an integer number of periods
  double amplitude = 0.0;  // half peak-to-peak
  double frequency = 0.0;  // rad/s, 0 when not oscillating
  double duty = 0.0;       // fraction of time above the midline
  bool is_limit_cycle = false;
  std::size_t periods = 0;
};

struct MeasureOptions {
  double amplitude_floor = 1e-3;
  double hysteresis = 0.05;     // crossing band, as a fraction of the amplitude
  double sustain_ratio = 0.9;   // last-third amplitude / middle-third amplitude
};

// `x` is sampled every `dt` seconds starting at t = 0. Throws DomainError if
// nothing is left after the transient.
SignalStats measure_signal(std::span<const double> x, double dt, double transient_cut,
                           const MeasureOptions& options = {});

// Measures psi of oscillator `channel`.
SignalStats measure(const cpg::Trajectory& traj, std::size_t channel, double transient_cut,
                    const MeasureOptions& options = {});

// max(10 s, 10 natural periods); 10 s when no natural frequency exists.
double default_transient_cut(const cpg::OscillatorParams& p);

}  // namespace snakecpg::df
