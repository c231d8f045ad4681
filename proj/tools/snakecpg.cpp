#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snakecpg/describing.hpp"
#include "snakecpg/errors.hpp"
#include "snakecpg/gp.hpp"
#include "snakecpg/measure.hpp"
#include "snakecpg/plant.hpp"
#include "snakecpg/ppoc.hpp"
#include "snakecpg/rollout.hpp"
#include "snakecpg/stats.hpp"
#include "snakecpg/sweeps.hpp"

namespace {

using namespace snakecpg;

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct Common {
  std::string config;
  std::string physics;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, Common& c, bool physics) {
  cmd->add_option("--config", c.config, "key = value parameter file");
  if (physics) cmd->add_option("--physics", c.physics, "key = value physics file");
  cmd->add_option("--set", c.overrides, "key=value override, repeatable");
  cmd->add_option("--out", c.out_dir, "output directory (default $SNAKECPG_OUTPUT_DIR or .)");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--workers", c.workers, "worker threads, 0 = all cores");
}

KeyValueConfig load_kv(const std::string& path, const std::vector<std::string>& overrides) {
  KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
  for (const auto& o : overrides) kv.apply_override(o);
  return kv;
}

cpg::CpgConfig cpg_config(const Common& c) { return cpg::cpg_config_from(load_kv(c.config, c.overrides)); }

sim::PhysicsParams physics_config(const Common& c) {
  return c.physics.empty() ? sim::PhysicsParams{} : sim::physics_from(KeyValueConfig::load(c.physics));
}

std::vector<double> parse_range(const std::string& text, int default_points) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw ConfigError("bad range: " + text);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() < 2 || parts.size() > 3) throw ConfigError("range must be lo:hi[:points]: " + text);
  const int n = parts.size() == 3 ? static_cast<int>(parts[2]) : default_points;
  if (n < 2) throw ConfigError("range needs at least two points: " + text);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(parts[0] + (parts[1] - parts[0]) * i / (n - 1));
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw ConfigError("bad number list: " + text);
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

class Output {
 public:
  Output(const std::string& command, const Common& c, const KeyValueConfig& resolved) {
    dir_ = c.out_dir;
    if (dir_.empty()) {
      const char* env = std::getenv("SNAKECPG_OUTPUT_DIR");
      dir_ = env ? env : ".";
    }
    std::filesystem::create_directories(dir_);
    header_ = "# snakecpg " + command + "\n# seed = " + std::to_string(c.seed) + "\n" + resolved.dump("# ");
  }

  std::ofstream open(const std::string& name) const {
    const auto path = path_of(name);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << header_;
    std::cout << "wrote " << path << '\n';
    return out;
  }

  std::string path_of(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

 private:
  std::string dir_;
  std::string header_;
};

KeyValueConfig merged(const cpg::CpgConfig& cfg, const sim::PhysicsParams* phys = nullptr) {
  KeyValueConfig kv = cpg::to_key_values(cfg);
  if (phys) {
    const auto pk = sim::to_key_values(*phys);
    for (const auto& [k, v] : pk.entries()) kv.set("physics." + k, v);
  }
  return kv;
}

const char* yes(bool b) { return b ? "true" : "false"; }

int run_simulate(const Common& c, double duration, double ue, double uf) {
  const auto cfg = cpg_config(c);
  auto kv = merged(cfg);
  kv.set("duration", duration);
  kv.set("u_e", ue);
  kv.set("u_f", uf);
  Output out("simulate-cpg", c, kv);
  const auto traj = cpg::simulate(cfg.params, cpg::constant_schedule(cpg::TonicInputs::uniform(ue, uf)), duration,
                                  cfg.integration.dt, cfg.initial);
  auto f = out.open("cpg_trajectory.csv");
  traj.write_csv_rows(f);
  for (std::size_t i = 0; i < cpg::kOscillators; ++i) {
    const auto s = df::measure(traj, i, std::min(duration / 3.0, df::default_transient_cut(cfg.params)));
    std::cout << "psi" << i + 1 << ": bias " << s.bias << " amplitude " << s.amplitude << " frequency "
              << s.frequency << " rad/s limit_cycle " << yes(s.is_limit_cycle) << '\n';
  }
  return 0;
}

int run_validate(const Common& c) {
  const auto cfg = cpg_config(c);
  const auto& p = cfg.params;
  const auto r = cpg::validate_params(p);
  std::cout << "(tau_a - tau_r)^2 = " << r.lhs << "\n4 tau_r tau_a b = " << r.rhs
            << "\noscillation_possible = " << yes(r.oscillation_possible) << '\n';
  std::cout << "K_n = " << df::harmonic_gain(p) << '\n';
  try {
    std::cout << "omega_n = " << df::natural_frequency(p) << " rad/s\n";
  } catch (const DomainError& e) {
    std::cout << "omega_n undefined: " << e.what() << '\n';
  }
  if (p.c > 0.0) {
    try {
      std::cout << "A_n = " << df::free_amplitude(p) << '\n';
    } catch (const DomainError& e) {
      std::cout << "A_n undefined: " << e.what() << '\n';
    }
  }
  return 0;
}

df::SweepSettings sweep_settings(const Common& c, double duration, const cpg::CpgConfig& cfg) {
  df::SweepSettings s;
  s.duration = duration;
  s.dt = cfg.integration.dt;
  s.workers = c.workers;
  return s;
}

int run_bias(const Common& c, const std::string& gains_text, const std::string& u_text, double duration) {
  const auto cfg = cpg_config(c);
  const auto gains = parse_list(gains_text);
  const auto u = parse_range(u_text, 26);
  auto kv = merged(cfg);
  kv.set("gains", gains_text);
  kv.set("u_e", u_text);
  kv.set("duration", duration);
  Output out("bias-sweep", c, kv);
  const auto points = df::bias_sweep(cfg.params, gains, u, sweep_settings(c, duration, cfg));
  auto f = out.open("bias_sweep.csv");
  f << "K_n,u_e,measured,predicted,amplitude,limit_cycle,ok\n";
  for (const auto& p : points) {
    f << format_double(p.K_n) << ',' << format_double(p.u_e) << ',' << format_double(p.measured) << ','
      << format_double(p.predicted) << ',' << format_double(p.amplitude) << ',' << p.limit_cycle << ',' << p.ok
      << '\n';
  }
  auto g = out.open("bias_panels.csv");
  g << "K_n,limit_cycles,fixed_points,bifurcation_u,slope,intercept,r2\n";
  for (const auto& panel : df::summarize_bias(points)) {
    g << format_double(panel.K_n) << ',' << panel.limit_cycles << ',' << panel.fixed_points << ','
      << format_double(panel.bifurcation_u) << ',' << format_double(panel.fit.slope) << ','
      << format_double(panel.fit.intercept) << ',' << format_double(panel.fit.r2) << '\n';
    std::cout << "K_n " << panel.K_n << ": slope " << panel.fit.slope << " r2 " << panel.fit.r2
              << " bifurcation u_e " << panel.bifurcation_u << '\n';
  }
  return 0;
}

int run_duty(const Common& c, const std::string& duty_text, double duration, double period) {
  const auto cfg = cpg_config(c);
  const auto duties = parse_range(duty_text, 17);
  auto kv = merged(cfg);
  kv.set("duty", duty_text);
  kv.set("duration", duration);
  kv.set("period", period);
  Output out("duty-sweep", c, kv);
  df::DutySettings s;
  static_cast<df::SweepSettings&>(s) = sweep_settings(c, duration, cfg);
  s.period = period;
  const auto points = df::duty_sweep(cfg.params, duties, s);
  auto f = out.open("duty_sweep.csv");
  f << "duty,measured,predicted,amplitude,frequency,limit_cycle,ok\n";
  for (const auto& p : points) {
    f << format_double(p.duty) << ',' << format_double(p.measured) << ',' << format_double(p.predicted) << ','
      << format_double(p.amplitude) << ',' << format_double(p.frequency) << ',' << p.limit_cycle << ',' << p.ok
      << '\n';
  }
  const auto sum = df::summarize_duty(points, cfg.params);
  std::cout << "bias = " << sum.fit.slope << " duty + " << sum.fit.intercept << "  r2 " << sum.fit.r2
            << "  K_m " << sum.fitted.K_m << " M " << sum.fitted.M << '\n';
  return 0;
}

int run_freq(const Common& c, const std::string& kf_text, double duration) {
  const auto cfg = cpg_config(c);
  const auto grid = parse_range(kf_text, 13);
  auto kv = merged(cfg);
  kv.set("K_f", kf_text);
  kv.set("duration", duration);
  Output out("freq-sweep", c, kv);
  df::FrequencySettings s;
  static_cast<df::SweepSettings&>(s) = sweep_settings(c, duration, cfg);
  const auto points = df::frequency_sweep(cfg.params, grid, s);
  auto f = out.open("freq_sweep.csv");
  f << "K_f,measured,predicted,ok\n";
  for (const auto& p : points) {
    f << format_double(p.K_f) << ',' << format_double(p.measured) << ',' << format_double(p.predicted) << ','
      << p.ok << '\n';
  }
  const auto fit = df::frequency_exponent(points);
  const double err = df::time_rescaling_error(cfg.params, grid.front(), 20.0, cfg.integration.dt,
                                              cpg::TonicInputs::uniform(1.0, 1.0));
  std::cout << "exponent " << fit.slope << " r2 " << fit.r2 << "\nrescaling error at K_f " << grid.front() << ": "
            << err << '\n';
  return 0;
}

int run_threshold(const Common& c, double cval, const std::string& omega_text) {
  auto cfg = cpg_config(c);
  cfg.params.c = cval;
  const auto omegas = parse_range(omega_text, 101);
  auto kv = merged(cfg);
  kv.set("omega", omega_text);
  Output out("threshold", c, kv);
  auto f = out.open("threshold.csv");
  f << "omega,A0\n";
  double lo = INFINITY, hi = -INFINITY;
  for (double w : omegas) {
    double a0 = NAN;
    try {
      a0 = df::entrainment_threshold(w, cfg.params);
    } catch (const SingularityError& e) {
      a0 = e.limit();
    }
    lo = std::min(lo, a0);
    hi = std::max(hi, a0);
    f << format_double(w) << ',' << format_double(a0) << '\n';
  }
  std::cout << "A0 over [" << omegas.front() << ", " << omegas.back() << "]: min " << lo << " max " << hi << '\n';
  return 0;
}

int run_velocity(const Common& c, const std::string& c_text, const std::string& kf_text, double duration) {
  const auto cfg = cpg_config(c);
  const auto phys = physics_config(c);
  const auto cs = parse_range(c_text, 10);
  const auto kfs = parse_range(kf_text, 10);
  auto kv = merged(cfg, &phys);
  kv.set("c_grid", c_text);
  kv.set("kf_grid", kf_text);
  kv.set("duration", duration);
  Output out("velocity-sweep", c, kv);
  sim::VelocitySweepOptions opts;
  opts.duration = duration;
  opts.workers = c.workers;
  const auto cells = sim::velocity_sweep(cs, kfs, phys, cfg.params, cfg.integration, opts);
  auto f = out.open("velocity_sweep.csv");
  f << "c,K_f,speed,ok\n";
  for (const auto& cell : cells) {
    f << format_double(cell.c) << ',' << format_double(cell.K_f) << ',' << format_double(cell.speed) << ','
      << cell.ok << '\n';
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    std::vector<double> k, v;
    for (std::size_t j = 0; j < kfs.size(); ++j) {
      const auto& cell = cells[i * kfs.size() + j];
      if (cell.ok) {
        k.push_back(cell.K_f);
        v.push_back(cell.speed);
      }
    }
    if (k.size() >= 2) std::cout << "c " << cs[i] << ": spearman(K_f, speed) " << spearman(k, v) << '\n';
  }
  return 0;
}

int run_tune(const Common& c, gp::EvolveConfig ecfg, double rel) {
  const auto cfg = cpg_config(c);
  const auto phys = physics_config(c);
  ecfg.seed = c.seed;
  ecfg.workers = c.workers;
  auto kv = merged(cfg, &phys);
  kv.set("population", std::to_string(ecfg.population));
  kv.set("generations", std::to_string(ecfg.generations));
  kv.set("tournament", std::to_string(ecfg.tournament));
  kv.set("mutation", ecfg.mutation);
  kv.set("bounds", rel);
  Output out("tune-gp", c, kv);
  const auto bounds = gp::Bounds::around(cfg.params, rel);
  const auto result = gp::evolve(bounds, ecfg, {}, phys, cfg.params, cfg.integration, [](const gp::GenerationStats& s) {
    std::cout << "generation " << s.generation << " best " << s.best << " mean " << s.mean << '\n';
  });
  auto f = out.open("gp_history.csv");
  gp::write_history_csv(f, result.history);
  cpg::CpgConfig best = cfg;
  best.params = gp::decode(result.best, cfg.params);
  auto g = out.open("gp_best.cfg");
  g << cpg::to_key_values(best).dump();
  const auto gait = gp::check_gait(best.params, phys);
  std::cout << "best fitness " << result.best_fitness << " oscillates " << yes(gait.oscillates())
            << " displacement " << gait.displacement << " m\n";
  return 0;
}

int run_train(const Common& c) {
  auto kv = load_kv(c.config, c.overrides);
  if (!kv.contains("seed")) kv.set("seed", std::to_string(c.seed));
  if (!kv.contains("workers")) kv.set("workers", std::to_string(c.workers == 0 ? 1 : c.workers));
  auto cfg = rl::train_config_from(kv);
  if (!c.physics.empty()) cfg.env.physics = physics_config(c);
  Output out("train", c, rl::to_key_values(cfg));
  if (cfg.checkpoint_path.empty()) cfg.checkpoint_path = out.path_of("policy.json");
  if (cfg.metrics_path.empty()) cfg.metrics_path = out.path_of("metrics.ndjson");
  if (cfg.episodes_path.empty()) cfg.episodes_path = out.path_of("episodes.csv");
  const auto result = rl::train(cfg, [](const rl::IterationMetrics& m) {
    std::cout << "iteration " << m.iteration << " episodes " << m.episodes << " level " << m.level
              << " success " << m.success_rate << " return " << m.mean_reward << '\n';
  });
  std::cout << "level reached " << result.level_reached << " success " << result.success_rate << " target "
            << yes(result.target_reached) << "\ncheckpoint " << cfg.checkpoint_path << '\n';
  return 0;
}

struct RolloutArgs {
  std::string policy;
  std::string script = "single";
  double distance = 1.5;
  double angle = 0.0;
  double radius = 0.3;
  bool randomize = false;
  bool steering = false;
  double window = 10.0;
};

int run_rollout(const Common& c, const RolloutArgs& a) {
  if (a.policy.empty()) throw ConfigError("--policy is required");
  const auto policy = rl::Policy::load(a.policy);
  rl::RolloutOptions opts;
  opts.seed = c.seed;
  opts.randomize = a.randomize;
  opts.physics = physics_config(c);
  KeyValueConfig kv = sim::to_key_values(opts.physics);
  kv.set("policy", a.policy);
  kv.set("script", a.script);
  kv.set("distance", a.distance);
  kv.set("angle", a.angle);
  kv.set("radius", a.radius);
  kv.set("randomize", yes(a.randomize));
  Output out("rollout", c, kv);
  if (a.steering) {
    rl::SteeringSettings s;
    s.distance = a.distance;
    s.radius = a.radius;
    s.window = a.window;
    s.rollout = opts;
    s.workers = c.workers;
    const auto study = rl::steering_study(policy, s);
    auto f = out.open("steering.csv");
    f << "angle,bias_psi1,bias_u1,outcome\n";
    for (const auto& p : study.points) {
      f << format_double(p.angle) << ',' << format_double(p.bias_psi) << ',' << format_double(p.bias_u) << ','
        << rl::to_string(p.outcome) << '\n';
    }
    std::cout << "bias(psi1) on bias(u1): slope " << study.fit.slope << " r2 " << study.fit.r2 << " monotone "
              << yes(study.monotone) << '\n';
    return 0;
  }
  rl::ScriptSpec spec{rl::script_from(a.script), a.distance, a.angle, a.radius};
  const auto log = rl::rollout(policy, spec, opts);
  auto f = out.open("rollout.csv");
  log.write_csv(f);
  std::cout << "waypoints reached " << std::count(log.outcomes.begin(), log.outcomes.end(), rl::Outcome::success)
            << "/" << log.goals.size() << " mean v_g " << log.mean_v_g() << " m/s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matsuoka CPG snake laboratory"};
  app.require_subcommand(1);
  Common common;

  auto* sim_cmd = app.add_subcommand("simulate-cpg", "integrate the oscillator network and dump the trajectory");
  double sim_duration = 20.0, sim_ue = 1.0, sim_uf = 1.0;
  add_common(sim_cmd, common, false);
  sim_cmd->add_option("--duration", sim_duration, "seconds");
  sim_cmd->add_option("--ue", sim_ue, "extensor tonic input");
  sim_cmd->add_option("--uf", sim_uf, "flexor tonic input");

  auto* val_cmd = app.add_subcommand("validate-params", "oscillation condition and describing-function constants");
  add_common(val_cmd, common, false);

  auto* bias_cmd = app.add_subcommand("bias-sweep", "measured vs predicted bias under constant tonic inputs");
  std::string gains = "0.19,0.39,0.53,0.66,0.79", u_range = "0:0.5:26";
  double sweep_duration = 120.0;
  add_common(bias_cmd, common, false);
  bias_cmd->add_option("--gains", gains, "comma-separated K_n values");
  bias_cmd->add_option("--ue", u_range, "lo:hi[:points]");
  bias_cmd->add_option("--duration", sweep_duration, "seconds per run");

  auto* duty_cmd = app.add_subcommand("duty-sweep", "measured bias under pulse-train tonic inputs");
  std::string duty_range = "0.1:0.9:17";
  double duty_period = 0.0;
  add_common(duty_cmd, common, false);
  duty_cmd->add_option("--duty", duty_range, "lo:hi[:points]");
  duty_cmd->add_option("--duration", sweep_duration, "seconds per run");
  duty_cmd->add_option("--period", duty_period, "pulse period in seconds, 0 = natural period");

  auto* freq_cmd = app.add_subcommand("freq-sweep", "oscillation frequency against K_f");
  std::string kf_range = "0.45:1.05:13";
  add_common(freq_cmd, common, false);
  freq_cmd->add_option("--kf", kf_range, "lo:hi[:points]");
  freq_cmd->add_option("--duration", sweep_duration, "seconds per run");

  auto* thr_cmd = app.add_subcommand("threshold", "entrainment threshold over a frequency grid");
  double thr_c = 0.75;
  std::string omega_range = "3.77:5.02:101";
  add_common(thr_cmd, common, false);
  thr_cmd->add_option("--c", thr_c, "free-response tonic input");
  thr_cmd->add_option("--omega", omega_range, "lo:hi[:points] in rad/s");

  auto* vel_cmd = app.add_subcommand("velocity-sweep", "robot speed over a (c, K_f) grid");
  std::string c_range = "0.4:0.8:10", vel_kf = "0.45:1.05:10";
  double vel_duration = 20.0;
  add_common(vel_cmd, common, true);
  vel_cmd->add_option("--c-grid", c_range, "lo:hi[:points]");
  vel_cmd->add_option("--kf-grid", vel_kf, "lo:hi[:points]");
  vel_cmd->add_option("--duration", vel_duration, "measurement window in seconds");

  auto* gp_cmd = app.add_subcommand("tune-gp", "evolve oscillator parameters for straight locomotion");
  gp::EvolveConfig ecfg;
  double gp_rel = 0.5;
  add_common(gp_cmd, common, true);
  gp_cmd->add_option("--population", ecfg.population);
  gp_cmd->add_option("--generations", ecfg.generations);
  gp_cmd->add_option("--tournament", ecfg.tournament);
  gp_cmd->add_option("--mutation", ecfg.mutation, "sigma as a fraction of the gene range");
  gp_cmd->add_option("--bounds", gp_rel, "relative half-width of the gene bounds");

  auto* train_cmd = app.add_subcommand("train", "curriculum reinforcement learning");
  add_common(train_cmd, common, true);

  auto* roll_cmd = app.add_subcommand("rollout", "evaluate a trained policy");
  RolloutArgs ra;
  add_common(roll_cmd, common, true);
  roll_cmd->add_option("--policy", ra.policy, "checkpoint file")->required();
  roll_cmd->add_option("--script", ra.script, "single, zigzag or square");
  roll_cmd->add_option("--distance", ra.distance, "goal range or leg length (m)");
  roll_cmd->add_option("--angle", ra.angle, "single-goal bearing (deg, CCW)");
  roll_cmd->add_option("--radius", ra.radius, "acceptance radius (m)");
  roll_cmd->add_flag("--randomize", ra.randomize, "draw physics from the randomization ranges");
  roll_cmd->add_flag("--steering", ra.steering, "run the steering-bias study instead of a script");
  roll_cmd->add_option("--window", ra.window, "steering averaging window (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim_cmd) return run_simulate(common, sim_duration, sim_ue, sim_uf);
    if (*val_cmd) return run_validate(common);
    if (*bias_cmd) return run_bias(common, gains, u_range, sweep_duration);
    if (*duty_cmd) return run_duty(common, duty_range, sweep_duration, duty_period);
    if (*freq_cmd) return run_freq(common, kf_range, sweep_duration);
    if (*thr_cmd) return run_threshold(common, thr_c, omega_range);
    if (*vel_cmd) return run_velocity(common, c_range, vel_kf, vel_duration);
    if (*gp_cmd) return run_tune(common, ecfg, gp_rel);
    if (*train_cmd) return run_train(common);
    if (*roll_cmd) return run_rollout(common, ra);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
