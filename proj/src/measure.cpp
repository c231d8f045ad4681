#include "snakecpg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "snakecpg/describing.hpp"
#include "snakecpg/errors.hpp"

namespace snakecpg::df {

namespace {

double half_range(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return 0.5 * (*hi - *lo);
}

double mean(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double fraction_above(std::span<const double> x, double level) {
  if (x.empty()) return 0.0;
  const auto n = std::count_if(x.begin(), x.end(), [level](double v) { return v > level; });
  return static_cast<double>(n) / static_cast<double>(x.size());
}

}  // namespace

SignalStats measure_signal(std::span<const double> x, double dt, double transient_cut,
                           const MeasureOptions& options) {
  if (!(dt > 0.0)) throw DomainError("sample interval must be positive");
  const auto start = static_cast<std::size_t>(std::ceil(std::max(0.0, transient_cut) / dt - 1e-9));
  if (start + 2 > x.size()) throw DomainError("signal is shorter than the transient cut");
  const auto s = x.subspan(start);

  const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
  const double midline = 0.5 * (*lo_it + *hi_it);
  const double band = options.hysteresis * 0.5 * (*hi_it - *lo_it);

  // Upward crossings of the midline, armed only after dipping below the band.
  std::vector<double> crossing_time;
  std::vector<std::size_t> crossing_index;
  bool armed = false;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < midline - band) armed = true;
    if (armed && s[i - 1] < midline && s[i] >= midline) {
      const double frac = (midline - s[i - 1]) / (s[i] - s[i - 1]);
      crossing_time.push_back((static_cast<double>(i - 1) + frac) * dt);
      crossing_index.push_back(i);
      armed = false;
    }
  }

  SignalStats stats;
  const std::size_t third = s.size() / 3;
  const double middle_amp = half_range(s.subspan(third, third));
  const double last_amp = half_range(s.subspan(2 * third));
  const bool oscillating = crossing_time.size() >= 2 && half_range(s) > options.amplitude_floor;

  if (!oscillating) {
    stats.bias = mean(s);
    stats.amplitude = half_range(s);
    stats.duty = fraction_above(s, midline);
    return stats;
  }

  const auto window = s.subspan(crossing_index.front(), crossing_index.back() - crossing_index.front());
  stats.periods = crossing_time.size() - 1;
  const double period = (crossing_time.back() - crossing_time.front()) / static_cast<double>(stats.periods);
  stats.frequency = 2.0 * std::numbers::pi / period;
  stats.bias = mean(window);
  stats.amplitude = half_range(window);
  stats.duty = fraction_above(window, midline);
  stats.is_limit_cycle = last_amp > options.amplitude_floor &&
                         last_amp >= options.sustain_ratio * middle_amp;
  return stats;
}

SignalStats measure(const cpg::Trajectory& traj, std::size_t channel, double transient_cut,
                    const MeasureOptions& options) {
  if (channel >= cpg::kOscillators) throw DomainError("no such oscillator channel");
  const auto psi = traj.psi(channel);
  return measure_signal(psi, traj.dt, transient_cut, options);
}

double default_transient_cut(const cpg::OscillatorParams& p) {
  try {
    return std::max(10.0, 10.0 * 2.0 * std::numbers::pi / natural_frequency(p));
  } catch (const DomainError&) {
    return 10.0;
  }
}

}  // namespace snakecpg::df
