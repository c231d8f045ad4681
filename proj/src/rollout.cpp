#include "snakecpg/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "snakecpg/errors.hpp"
#include "snakecpg/parallel.hpp"

namespace snakecpg::rl {

Script script_from(const std::string& name) {
  if (name == "single") return Script::single;
  if (name == "zigzag") return Script::zigzag;
  if (name == "square") return Script::square;
  throw ConfigError("unknown script: " + name);
}

std::string to_string(Script s) {
  switch (s) {
    case Script::single: return "single";
    case Script::zigzag: return "zigzag";
    case Script::square: return "square";
  }
  return "unknown";
}

std::vector<sim::Vec2> waypoints(const ScriptSpec& spec) {
  if (!(spec.distance > 0.0) || !(spec.radius > 0.0)) throw ConfigError("script distance and radius must be positive");
  const double d = spec.distance;
  switch (spec.kind) {
    case Script::single: {
      const double a = spec.angle * std::numbers::pi / 180.0;
      return {{d * std::cos(a), d * std::sin(a)}};
    }
    case Script::zigzag: {
      const double h = 0.5 * d;
      return {{d, h}, {2 * d, -h}, {3 * d, h}, {4 * d, -h}};
    }
    case Script::square:
      return {{d, 0.0}, {d, d}, {0.0, d}, {0.0, 0.0}};
  }
  return {};
}

bool EpisodeLog::success() const {
  return outcomes.size() == goals.size() &&
         std::all_of(outcomes.begin(), outcomes.end(), [](Outcome o) { return o == Outcome::success; });
}

double EpisodeLog::mean_v_g() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.v_g;
  return s / static_cast<double>(rows.size());
}

std::string EpisodeLog::csv_header() {
  std::string h = "t,head_x,head_y,rho_g,theta_g,v_g";
  for (const char* name : {"kappa", "psi", "u_e", "u_f"}) {
    for (int i = 1; i <= 4; ++i) h += "," + std::string(name) + std::to_string(i);
  }
  return h + ",K_f,waypoint";
}

void EpisodeLog::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.head.x()) << ',' << format_double(r.head.y()) << ','
        << format_double(r.rho) << ',' << format_double(r.theta) << ',' << format_double(r.v_g);
    for (const auto* quad : {&r.kappa, &r.psi, &r.u_e, &r.u_f}) {
      for (double v : *quad) out << ',' << format_double(v);
    }
    out << ',' << format_double(r.K_f) << ',' << r.waypoint << '\n';
  }
}

EpisodeLog rollout(const Policy& policy, const ScriptSpec& script, const RolloutOptions& opts) {
  const auto local = waypoints(script);
  EnvConfig cfg;
  cfg.variant = policy.variant;
  cfg.c = policy.c;
  cfg.physics = opts.physics;
  cfg.randomize = opts.randomize;
  GoalEnv env(cfg, opts.seed);
  Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);

  const int fallback = static_cast<int>(
      std::max_element(policy.options.begin(), policy.options.end()) - policy.options.begin());
  const std::vector<double> radii{script.radius};
  const double first_range = local.front().norm();
  const double first_angle = std::atan2(local.front().y(), local.front().x()) * 180.0 / std::numbers::pi;
  auto obs = env.reset_with_goal(first_range, first_angle, script.radius, policy.options[fallback], radii);

  const sim::Vec2 origin = env.plant().robot().head();
  const double heading = env.plant().robot().heading();
  const Eigen::Rotation2Dd rot(heading);
  EpisodeLog log;
  log.radius = script.radius;
  for (const auto& p : local) log.goals.push_back(origin + rot * p);

  auto pick = [&](const Action& prev, const sim::Observation& o) {
    if (policy.meta.options_frozen) return fallback;
    const auto in = policy.critic_input(policy.normalizer.apply(o.vector()), prev);
    return policy.choose_option(in, opts.stochastic, rng);
  };

  Action prev{};
  int option = pick(prev, obs);
  const double dt = cfg.integration.control_interval;
  double t = 0.0;
  for (std::size_t w = 0; w < log.goals.size(); ++w) {
    if (w > 0) obs = env.retarget({log.goals[w], script.radius}, radii);
    for (;;) {
      const auto norm = policy.normalizer.apply(obs.vector());
      const Decision d = policy.act(policy.actor_input(norm, prev, option), opts.stochastic, rng);
      const Action a = opts.stochastic ? d.action : d.mean;
      const double K_f = policy.options[option];
      const StepResult r = env.step(a, K_f);
      t += dt;
      LogRow row;
      row.t = t;
      row.head = env.plant().robot().head();
      row.rho = r.obs.rho;
      row.theta = r.obs.theta;
      row.v_g = r.obs.v_g;
      std::copy(r.obs.kappa.begin(), r.obs.kappa.end(), row.kappa.begin());
      row.psi = r.psi;
      row.u_e = r.tonic.u_e;
      row.u_f = r.tonic.u_f;
      row.K_f = K_f;
      row.waypoint = static_cast<int>(w);
      log.rows.push_back(row);
      prev = a;
      obs = r.obs;
      if (r.outcome != Outcome::running) {
        log.outcomes.push_back(r.outcome);
        break;
      }
      if (!policy.meta.options_frozen) {
        const auto in = policy.critic_input(policy.normalizer.apply(obs.vector()), prev);
        if (policy.termination(in, option) > opts.beta_threshold) option = pick(prev, obs);
      }
    }
    if (log.outcomes.back() != Outcome::success) break;
  }
  return log;
}

SteeringStudy steering_study(const Policy& policy, const SteeringSettings& s) {
  if (s.angles.size() < 2) throw ConfigError("steering study needs at least two goal angles");
  if (!(s.window > 0.0)) throw ConfigError("steering window must be positive");
  SteeringStudy study;
  study.points.resize(s.angles.size());
  parallel_for(s.angles.size(), [&](std::size_t i) {
    ScriptSpec spec{Script::single, s.distance, s.angles[i], s.radius};
    const EpisodeLog log = rollout(policy, spec, s.rollout);
    SteeringPoint& p = study.points[i];
    p.angle = s.angles[i];
    p.outcome = log.outcomes.empty() ? Outcome::running : log.outcomes.front();
    std::size_t n = 0;
    for (const auto& row : log.rows) {
      if (row.t > s.window + 1e-9) break;
      p.bias_psi += row.psi[0];
      p.bias_u += row.u_e[0] - row.u_f[0];
      ++n;
    }
    if (n > 0) {
      p.bias_psi /= static_cast<double>(n);
      p.bias_u /= static_cast<double>(n);
    }
  }, s.workers);
  std::sort(study.points.begin(), study.points.end(),
            [](const SteeringPoint& a, const SteeringPoint& b) { return a.angle < b.angle; });
  std::vector<double> psi, u;
  for (const auto& p : study.points) {
    psi.push_back(p.bias_psi);
    u.push_back(p.bias_u);
  }
  bool up = true, down = true;
  for (std::size_t i = 1; i < psi.size(); ++i) {
    up = up && psi[i] > psi[i - 1];
    down = down && psi[i] < psi[i - 1];
  }
  study.monotone = up || down;
  study.fit = linear_fit(u, psi);
  return study;
}

}  // namespace snakecpg::rl
