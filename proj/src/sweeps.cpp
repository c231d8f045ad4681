#include "snakecpg/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "snakecpg/errors.hpp"
#include "snakecpg/parallel.hpp"

namespace snakecpg::df {

namespace {

std::vector<double> psi_series(const cpg::OscillatorParams& p, const cpg::TonicSchedule& schedule,
                               double duration, double dt, std::size_t channel) {
  const long n = std::lround(duration / dt);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  auto s = cpg::NetworkState::seeded();
  out.push_back(cpg::output(s, p).psi[channel]);
  for (long k = 0; k < n; ++k) {
    s = cpg::step_network(s, schedule(static_cast<double>(k) * dt), p, dt);
    out.push_back(cpg::output(s, p).psi[channel]);
  }
  return out;
}

double cut_for(const SweepSettings& settings, const cpg::OscillatorParams& p) {
  return settings.transient_cut >= 0.0 ? settings.transient_cut : default_transient_cut(p);
}

double max_abs(const cpg::NetworkState& s) {
  double m = 0.0;
  for (const auto* q : {&s.x_e, &s.y_e, &s.x_f, &s.y_f}) {
    for (double v : *q) m = std::max(m, std::abs(v));
  }
  return m;
}

double max_abs_diff(const cpg::NetworkState& a, const cpg::NetworkState& b) {
  double m = 0.0;
  const std::array<const cpg::Quad*, 4> qa{&a.x_e, &a.y_e, &a.x_f, &a.y_f};
  const std::array<const cpg::Quad*, 4> qb{&b.x_e, &b.y_e, &b.x_f, &b.y_f};
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < cpg::kOscillators; ++i) {
      m = std::max(m, std::abs((*qa[j])[i] - (*qb[j])[i]));
    }
  }
  return m;
}

}  // namespace

cpg::OscillatorParams isolated(const cpg::OscillatorParams& p) {
  cpg::OscillatorParams q = p;
  q.w_down = 0.0;
  q.w_up = 0.0;
  q.A_z = 1.0;
  return q;
}

cpg::OscillatorParams with_harmonic_gain(const cpg::OscillatorParams& p, double K_n) {
  if (!(K_n > 0.0)) throw DomainError("harmonic gain must be positive");
  cpg::OscillatorParams q = p;
  q.a = (p.tau_r + p.tau_a) / (p.tau_a * K_n);
  return q;
}

std::vector<BiasPoint> bias_sweep(const cpg::OscillatorParams& base, std::span<const double> gains,
                                  std::span<const double> u_grid, const SweepSettings& settings) {
  std::vector<BiasPoint> points(gains.size() * u_grid.size());
  parallel_for(
      points.size(),
      [&](std::size_t idx) {
        BiasPoint& pt = points[idx];
        pt.K_n = gains[idx / u_grid.size()];
        pt.u_e = u_grid[idx % u_grid.size()];
        try {
          const auto p = with_harmonic_gain(isolated(base), pt.K_n);
          pt.predicted = predict_bias_constant(pt.u_e, p);
          const auto schedule = cpg::constant_schedule(cpg::TonicInputs::uniform(pt.u_e, 1.0 - pt.u_e));
          const auto psi = psi_series(p, schedule, settings.duration, settings.dt, settings.channel);
          const auto stats = measure_signal(psi, settings.dt, cut_for(settings, p), settings.measure);
          pt.measured = stats.bias;
          pt.amplitude = stats.amplitude;
          pt.limit_cycle = stats.is_limit_cycle;
          pt.ok = true;
        } catch (const std::exception& e) {
          pt.error = e.what();
        }
      },
      settings.workers);
  return points;
}

std::vector<BiasPanel> summarize_bias(std::span<const BiasPoint> points) {
  std::map<double, std::vector<const BiasPoint*>> by_gain;
  for (const auto& pt : points) {
    if (pt.ok) by_gain[pt.K_n].push_back(&pt);
  }
  std::vector<BiasPanel> panels;
  for (auto& [gain, pts] : by_gain) {
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->u_e < b->u_e; });
    BiasPanel panel;
    panel.K_n = gain;
    panel.bifurcation_u = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x, y;
    const BiasPoint* last_fixed = nullptr;
    bool seen_cycle = false;
    for (const auto* pt : pts) {
      if (pt->limit_cycle) {
        ++panel.limit_cycles;
        x.push_back(pt->predicted);
        y.push_back(pt->measured);
        if (!seen_cycle && last_fixed) panel.bifurcation_u = 0.5 * (last_fixed->u_e + pt->u_e);
        seen_cycle = true;
      } else {
        ++panel.fixed_points;
        if (!seen_cycle) last_fixed = pt;
      }
    }
    if (x.size() >= 2) {
      try {
        panel.fit = linear_fit(x, y);
        panel.has_fit = true;
      } catch (const DomainError&) {
      }
    }
    panels.push_back(panel);
  }
  return panels;
}

std::vector<DutyPoint> duty_sweep(const cpg::OscillatorParams& base, std::span<const double> duties,
                                  const DutySettings& settings, const DutyFit& prediction) {
  const auto p = isolated(base);
  const double period =
      settings.period > 0.0 ? settings.period : 2.0 * std::numbers::pi / natural_frequency(p);
  std::vector<DutyPoint> points(duties.size());
  parallel_for(
      points.size(),
      [&](std::size_t idx) {
        DutyPoint& pt = points[idx];
        pt.duty = duties[idx];
        try {
          pt.predicted = predict_bias_duty(pt.duty, prediction, p);
          const auto schedule = cpg::pulse_schedule(period, pt.duty, settings.high, settings.low);
          const auto psi = psi_series(p, schedule, settings.duration, settings.dt, settings.channel);
          const auto stats = measure_signal(psi, settings.dt, cut_for(settings, p), settings.measure);
          pt.measured = stats.bias;
          pt.amplitude = stats.amplitude;
          pt.frequency = stats.frequency;
          pt.limit_cycle = stats.is_limit_cycle;
          pt.ok = true;
        } catch (const std::exception& e) {
          pt.error = e.what();
        }
      },
      settings.workers);
  return points;
}

DutySummary summarize_duty(std::span<const DutyPoint> points, const cpg::OscillatorParams& base) {
  std::vector<double> x, y;
  for (const auto& pt : points) {
    if (!pt.ok) continue;
    x.push_back(pt.duty);
    y.push_back(pt.measured);
  }
  DutySummary summary;
  summary.fit = linear_fit(x, y);
  summary.fitted = duty_fit_from_line(summary.fit.slope, summary.fit.intercept, isolated(base));
  return summary;
}

std::vector<FrequencyPoint> frequency_sweep(const cpg::OscillatorParams& base,
                                            std::span<const double> kf_grid,
                                            const FrequencySettings& settings) {
  std::vector<FrequencyPoint> points(kf_grid.size());
  parallel_for(
      points.size(),
      [&](std::size_t idx) {
        FrequencyPoint& pt = points[idx];
        pt.K_f = kf_grid[idx];
        try {
          auto p = base;
          p.K_f = pt.K_f;
          p.check();
          pt.predicted = natural_frequency(p);
          const auto schedule =
              cpg::constant_schedule(cpg::TonicInputs::uniform(settings.tonic, settings.tonic));
          const auto psi = psi_series(p, schedule, settings.duration, settings.dt, settings.channel);
          const auto stats = measure_signal(psi, settings.dt, cut_for(settings, p), settings.measure);
          if (!stats.is_limit_cycle) throw DomainError("no sustained oscillation");
          pt.measured = stats.frequency;
          pt.ok = true;
        } catch (const std::exception& e) {
          pt.error = e.what();
        }
      },
      settings.workers);
  return points;
}

LinearFit frequency_exponent(std::span<const FrequencyPoint> points) {
  std::vector<double> x, y;
  for (const auto& pt : points) {
    if (!pt.ok) continue;
    x.push_back(std::log(pt.K_f));
    y.push_back(std::log(pt.measured));
  }
  return linear_fit(x, y);
}

double time_rescaling_error(const cpg::OscillatorParams& p, double K_f, double duration, double dt,
                            const cpg::TonicInputs& u) {
  auto unit = p;
  unit.K_f = 1.0;
  auto scaled = p;
  scaled.K_f = K_f;
  unit.check();
  scaled.check();
  auto a = cpg::NetworkState::seeded();
  auto b = a;
  double worst = 0.0;
  double scale = max_abs(a);
  const long n = std::lround(duration / dt);
  for (long k = 0; k < n; ++k) {
    a = cpg::step_network(a, u, unit, dt);
    b = cpg::step_network(b, u, scaled, K_f * dt);
    worst = std::max(worst, max_abs_diff(a, b));
    scale = std::max(scale, max_abs(a));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace snakecpg::df
