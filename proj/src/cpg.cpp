#include "snakecpg/cpg.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <utility>

#include "snakecpg/errors.hpp"

namespace snakecpg::cpg {

namespace {

// s + h * k, element-wise over all sixteen entries.
NetworkState advance(const NetworkState& s, const NetworkState& k, double h) {
  NetworkState r;
  for (std::size_t i = 0; i < kOscillators; ++i) {
    r.x_e[i] = s.x_e[i] + h * k.x_e[i];
    r.y_e[i] = s.y_e[i] + h * k.y_e[i];
    r.x_f[i] = s.x_f[i] + h * k.x_f[i];
    r.y_f[i] = s.y_f[i] + h * k.y_f[i];
  }
  return r;
}

double rk4_combine(double s, double k1, double k2, double k3, double k4, double dt) {
  return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

const char* const kQuadNames[] = {"x_e", "x_f", "y_e", "y_f", "u_e", "u_f"};

}  // namespace

void OscillatorParams::check() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(tau_r) && tau_r > 0.0, "tau_r must be positive");
  require(std::isfinite(tau_a) && tau_a > 0.0, "tau_a must be positive");
  require(std::isfinite(a) && a >= 0.0, "a must be non-negative");
  require(std::isfinite(b) && b >= 0.0, "b must be non-negative");
  require(std::isfinite(K_f) && K_f > 0.0, "K_f must be positive");
  require(std::isfinite(c) && c >= 0.0, "c must be non-negative");
  require(std::isfinite(w_down) && std::isfinite(w_up), "coupling weights must be finite");
  require(std::isfinite(A_z), "A_z must be finite");
}

NetworkState NetworkState::seeded(double kick) {
  NetworkState s;
  s.x_e[0] = kick;
  return s;
}

bool NetworkState::finite() const {
  for (std::size_t i = 0; i < kOscillators; ++i) {
    if (!std::isfinite(x_e[i]) || !std::isfinite(y_e[i]) || !std::isfinite(x_f[i]) ||
        !std::isfinite(y_f[i])) {
      return false;
    }
  }
  return true;
}

NetworkState NetworkState::mirrored() const { return {x_f, y_f, x_e, y_e}; }

TonicInputs TonicInputs::uniform(double u_e, double u_f) {
  TonicInputs u;
  u.u_e.fill(u_e);
  u.u_f.fill(u_f);
  return u;
}

StabilityReport validate_params(const OscillatorParams& p) {
  if (!(p.tau_r > 0.0) || !(p.tau_a > 0.0)) {
    throw ConfigError("time constants tau_r and tau_a must be positive");
  }
  StabilityReport report;
  report.lhs = (p.tau_a - p.tau_r) * (p.tau_a - p.tau_r);
  report.rhs = 4.0 * p.tau_r * p.tau_a * p.b;
  report.oscillation_possible = report.lhs < report.rhs;
  return report;
}

TonicInputs decode_action(std::span<const double, kOscillators> action) {
  TonicInputs u;
  for (std::size_t i = 0; i < kOscillators; ++i) {
    u.u_e[i] = 1.0 / (1.0 + std::exp(-action[i]));
    u.u_f[i] = 1.0 - u.u_e[i];
  }
  return u;
}

NetworkState derivative(const NetworkState& s, const TonicInputs& u, const OscillatorParams& p) {
  const double rate_r = 1.0 / (p.K_f * p.tau_r);
  const double rate_a = 1.0 / (p.K_f * p.tau_a);
  NetworkState d;
  for (std::size_t i = 0; i < kOscillators; ++i) {
    // Chain coupling between neurons of the same type.
    double inhibit_e = 0.0;
    double inhibit_f = 0.0;
    if (i > 0) {
      inhibit_e += p.w_down * s.y_e[i - 1];
      inhibit_f += p.w_down * s.y_f[i - 1];
    }
    if (i + 1 < kOscillators) {
      inhibit_e += p.w_up * s.y_e[i + 1];
      inhibit_f += p.w_up * s.y_f[i + 1];
    }
    const double z_e = firing(s.x_e[i]);
    const double z_f = firing(s.x_f[i]);
    d.x_e[i] = (-s.x_e[i] - p.a * z_f - p.b * s.y_e[i] - inhibit_e + u.u_e[i] + p.c) * rate_r;
    d.y_e[i] = (z_e - s.y_e[i]) * rate_a;
    d.x_f[i] = (-s.x_f[i] - p.a * z_e - p.b * s.y_f[i] - inhibit_f + u.u_f[i] + p.c) * rate_r;
    d.y_f[i] = (z_f - s.y_f[i]) * rate_a;
  }
  return d;
}

NetworkState step_network(const NetworkState& s, const TonicInputs& u, const OscillatorParams& p,
                          double dt) {
  const NetworkState k1 = derivative(s, u, p);
  const NetworkState k2 = derivative(advance(s, k1, 0.5 * dt), u, p);
  const NetworkState k3 = derivative(advance(s, k2, 0.5 * dt), u, p);
  const NetworkState k4 = derivative(advance(s, k3, dt), u, p);
  NetworkState r;
  for (std::size_t i = 0; i < kOscillators; ++i) {
    r.x_e[i] = rk4_combine(s.x_e[i], k1.x_e[i], k2.x_e[i], k3.x_e[i], k4.x_e[i], dt);
    r.y_e[i] = rk4_combine(s.y_e[i], k1.y_e[i], k2.y_e[i], k3.y_e[i], k4.y_e[i], dt);
    r.x_f[i] = rk4_combine(s.x_f[i], k1.x_f[i], k2.x_f[i], k3.x_f[i], k4.x_f[i], dt);
    r.y_f[i] = rk4_combine(s.y_f[i], k1.y_f[i], k2.y_f[i], k3.y_f[i], k4.y_f[i], dt);
  }
  if (!r.finite()) throw DivergenceError("CPG integration diverged", 0);
  return r;
}

CpgOutput output(const NetworkState& s, const OscillatorParams& p) {
  CpgOutput out;
  for (std::size_t i = 0; i < kOscillators; ++i) {
    out.psi[i] = p.A_z * (firing(s.x_e[i]) - firing(s.x_f[i]));
  }
  return out;
}

TonicSchedule constant_schedule(const TonicInputs& u) {
  return [u](double) { return u; };
}

TonicSchedule pulse_schedule(double period, double duty, double high, double low) {
  if (!(period > 0.0)) throw ConfigError("pulse period must be positive");
  if (!(duty >= 0.0 && duty <= 1.0)) throw ConfigError("duty cycle must lie in [0, 1]");
  return [=](double t) {
    const double phase = t / period - std::floor(t / period);
    const double ue = phase < duty ? high : low;
    return TonicInputs::uniform(ue, 1.0 - ue);
  };
}

TonicSchedule held_schedule(TonicSchedule inner, double interval) {
  if (!(interval > 0.0)) throw ConfigError("control interval must be positive");
  return [inner = std::move(inner), interval](double t) {
    // Small slack so that t = k * interval computed as k * dt lands on k.
    const double k = std::floor(t / interval + 1e-9);
    return inner(k * interval);
  };
}

std::vector<double> Trajectory::psi(std::size_t oscillator) const {
  std::vector<double> out;
  out.reserve(output.size());
  for (const auto& o : output) out.push_back(o.psi.at(oscillator));
  return out;
}

std::string Trajectory::csv_header() {
  std::string h = "t";
  for (const char* name : kQuadNames) {
    for (std::size_t i = 1; i <= kOscillators; ++i) h += "," + std::string(name) + std::to_string(i);
  }
  for (std::size_t i = 1; i <= kOscillators; ++i) h += ",psi" + std::to_string(i);
  return h;
}

void Trajectory::write_csv_rows(std::ostream& out) const {
  out << csv_header() << '\n';
  for (std::size_t k = 0; k < size(); ++k) {
    const NetworkState& s = states[k];
    const TonicInputs& u = tonic[k];
    out << format_double(time[k]);
    for (const Quad* q : {&s.x_e, &s.x_f, &s.y_e, &s.y_f, &u.u_e, &u.u_f, &output[k].psi}) {
      for (double v : *q) out << ',' << format_double(v);
    }
    out << '\n';
  }
}

Trajectory simulate(const OscillatorParams& p, const TonicSchedule& schedule, double duration,
                    double dt, const NetworkState& ics) {
  p.check();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(duration >= 0.0)) throw ConfigError("duration must be non-negative");
  if (!ics.finite()) throw ConfigError("initial state must be finite");

  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  Trajectory traj;
  traj.dt = dt;
  traj.time.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.tonic.reserve(steps + 1);
  traj.output.reserve(steps + 1);

  NetworkState s = ics;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const TonicInputs u = schedule(t);
    traj.time.push_back(t);
    traj.states.push_back(s);
    traj.tonic.push_back(u);
    traj.output.push_back(output(s, p));
    if (k == steps) break;
    try {
      s = step_network(s, u, p, dt);
    } catch (const DivergenceError&) {
      throw DivergenceError("CPG integration diverged at t = " + format_double(t + dt), k + 1);
    }
  }
  return traj;
}

namespace {

const std::set<std::string>& cpg_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = {"tau_r", "tau_a", "a",  "b",  "w_down",          "w_up",
                               "K_f",   "c",     "A_z", "dt", "control_interval"};
    for (const char* name : {"x_e", "y_e", "x_f", "y_f"}) {
      for (std::size_t i = 1; i <= kOscillators; ++i) k.insert("ic." + std::string(name) + std::to_string(i));
    }
    return k;
  }();
  return keys;
}

}  // namespace

CpgConfig cpg_config_from(const KeyValueConfig& kv) {
  kv.require_known(cpg_keys());
  CpgConfig cfg;
  OscillatorParams& p = cfg.params;
  p.tau_r = kv.get_double("tau_r", p.tau_r);
  p.tau_a = kv.get_double("tau_a", p.tau_a);
  p.a = kv.get_double("a", p.a);
  p.b = kv.get_double("b", p.b);
  p.w_down = kv.get_double("w_down", p.w_down);
  p.w_up = kv.get_double("w_up", p.w_up);
  p.K_f = kv.get_double("K_f", p.K_f);
  p.c = kv.get_double("c", p.c);
  p.A_z = kv.get_double("A_z", p.A_z);
  p.check();
  cfg.integration.dt = kv.get_double("dt", cfg.integration.dt);
  cfg.integration.control_interval = kv.get_double("control_interval", cfg.integration.control_interval);
  if (!(cfg.integration.dt > 0.0) || !(cfg.integration.control_interval > 0.0)) {
    throw ConfigError("dt and control_interval must be positive");
  }
  std::pair<const char*, Quad*> fields[] = {{"x_e", &cfg.initial.x_e},
                                            {"y_e", &cfg.initial.y_e},
                                            {"x_f", &cfg.initial.x_f},
                                            {"y_f", &cfg.initial.y_f}};
  for (auto& [name, quad] : fields) {
    for (std::size_t i = 0; i < kOscillators; ++i) {
      const std::string key = "ic." + std::string(name) + std::to_string(i + 1);
      (*quad)[i] = kv.get_double(key, (*quad)[i]);
    }
  }
  return cfg;
}

KeyValueConfig to_key_values(const CpgConfig& cfg) {
  KeyValueConfig kv;
  const OscillatorParams& p = cfg.params;
  kv.set("tau_r", p.tau_r);
  kv.set("tau_a", p.tau_a);
  kv.set("a", p.a);
  kv.set("b", p.b);
  kv.set("w_down", p.w_down);
  kv.set("w_up", p.w_up);
  kv.set("K_f", p.K_f);
  kv.set("c", p.c);
  kv.set("A_z", p.A_z);
  kv.set("dt", cfg.integration.dt);
  kv.set("control_interval", cfg.integration.control_interval);
  const std::pair<const char*, const Quad*> fields[] = {{"x_e", &cfg.initial.x_e},
                                                        {"y_e", &cfg.initial.y_e},
                                                        {"x_f", &cfg.initial.x_f},
                                                        {"y_f", &cfg.initial.y_f}};
  for (const auto& [name, quad] : fields) {
    for (std::size_t i = 0; i < kOscillators; ++i) {
      kv.set("ic." + std::string(name) + std::to_string(i + 1), (*quad)[i]);
    }
  }
  return kv;
}

}  // namespace snakecpg::cpg
