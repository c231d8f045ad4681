#include "snakecpg/task.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "snakecpg/errors.hpp"

namespace snakecpg::rl {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string field; std::getline(ss, field, sep);) out.push_back(field);
  return out;
}

double to_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used == 0 || used != s.size()) throw ConfigError(where + ": not a number: " + s);
  return v;
}

}  // namespace

std::vector<CurriculumLevel> default_curriculum() {
  struct Row {
    double dmin, dmax, amin, amax, r;
  };
  constexpr Row rows[] = {
      {1.2, 1.5, -10, 10, 0.5},  {1.2, 1.5, -10, 10, 0.4},   {1.2, 1.5, -15, 15, 0.3},
      {1.2, 1.5, -20, 20, 0.25}, {1.2, 1.5, -30, 30, 0.2},   {1.0, 1.5, -40, 40, 0.18},
      {1.0, 1.5, -45, 45, 0.15}, {1.0, 1.5, -50, 50, 0.12},  {0.9, 1.5, -60, 60, 0.09},
      {0.9, 1.5, -60, 70, 0.06}, {0.9, 1.5, -70, 70, 0.05},  {0.8, 1.5, -80, 80, 0.05},
  };
  std::vector<CurriculumLevel> levels;
  int index = 1;
  for (const auto& r : rows) {
    CurriculumLevel lvl;
    lvl.index = index++;
    lvl.distance_min = r.dmin;
    lvl.distance_max = r.dmax;
    lvl.angle_min = r.amin;
    lvl.angle_max = r.amax;
    lvl.radius = r.r;
    levels.push_back(lvl);
  }
  return levels;
}

std::vector<CurriculumLevel> parse_curriculum(const std::string& csv, const std::string& origin) {
  std::vector<CurriculumLevel> levels;
  std::stringstream in(csv);
  std::string line;
  int line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (f.size() != 6 && f.size() != 8) throw ConfigError(where + ": expected 6 or 8 columns");
    CurriculumLevel lvl;
    lvl.index = static_cast<int>(to_number(f[0], where));
    lvl.distance_min = to_number(f[1], where);
    lvl.distance_max = to_number(f[2], where);
    lvl.angle_min = to_number(f[3], where);
    lvl.angle_max = to_number(f[4], where);
    lvl.radius = to_number(f[5], where);
    if (f.size() == 8) {
      lvl.promote_rate = to_number(f[6], where);
      lvl.window = static_cast<int>(to_number(f[7], where));
    }
    if (!(lvl.distance_min > 0.0 && lvl.distance_max >= lvl.distance_min && lvl.radius > 0.0 &&
          lvl.angle_max >= lvl.angle_min && lvl.window > 0 && lvl.promote_rate > 0.0 &&
          lvl.promote_rate <= 1.0)) {
      throw ConfigError(where + ": invalid curriculum level");
    }
    levels.push_back(lvl);
  }
  if (levels.empty()) throw ConfigError(origin + ": curriculum has no levels");
  return levels;
}

std::vector<CurriculumLevel> load_curriculum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open curriculum file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_curriculum(ss.str(), path);
}

std::string curriculum_csv(std::span<const CurriculumLevel> levels) {
  std::ostringstream out;
  out << "level,distance_min,distance_max,angle_min,angle_max,radius,promote_rate,window\n";
  for (const auto& l : levels) {
    out << l.index << ',' << format_double(l.distance_min) << ',' << format_double(l.distance_max)
        << ',' << format_double(l.angle_min) << ',' << format_double(l.angle_max) << ','
        << format_double(l.radius) << ',' << format_double(l.promote_rate) << ',' << l.window
        << '\n';
  }
  return out.str();
}

std::vector<std::string> curriculum_violations(std::span<const CurriculumLevel> levels) {
  std::vector<std::string> issues;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const auto& prev = levels[i - 1];
    const auto& cur = levels[i];
    const std::string tag = "level " + std::to_string(cur.index) + ": ";
    if (cur.radius > prev.radius) issues.push_back(tag + "radius grows");
    if (cur.angle_max < prev.angle_max || cur.angle_min > prev.angle_min) {
      issues.push_back(tag + "turning-angle range shrinks");
    }
    if (cur.distance_max < prev.distance_max) issues.push_back(tag + "distance upper bound shrinks");
    if (cur.distance_min > prev.distance_min) issues.push_back(tag + "distance lower bound grows");
  }
  return issues;
}

CurriculumTracker::CurriculumTracker(std::vector<CurriculumLevel> levels, std::size_t start)
    : levels_(std::move(levels)), current_(start) {
  if (levels_.empty()) throw ConfigError("curriculum has no levels");
  if (current_ >= levels_.size()) throw ConfigError("start level outside the curriculum");
}

std::vector<double> CurriculumTracker::radii() const {
  std::vector<double> r;
  for (std::size_t i = 0; i <= current_; ++i) r.push_back(levels_[i].radius);
  return r;
}

bool CurriculumTracker::record(bool success) {
  window_.push_back(success);
  const auto n = static_cast<std::size_t>(level().window);
  while (window_.size() > n) window_.pop_front();
  if (window_full() && success_rate() >= level().promote_rate && !at_last_level()) {
    ++current_;
    window_.clear();
    return true;
  }
  return false;
}

double CurriculumTracker::success_rate() const {
  if (window_.empty()) return 0.0;
  const auto hits = std::count(window_.begin(), window_.end(), true);
  return static_cast<double>(hits) / static_cast<double>(window_.size());
}

bool CurriculumTracker::window_full() const {
  return window_.size() >= static_cast<std::size_t>(level().window);
}

sim::Goal sample_goal(const CurriculumLevel& level, const sim::Vec2& origin, double heading,
                      Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r2lo = level.distance_min * level.distance_min;
  const double r2hi = level.distance_max * level.distance_max;
  const double distance = std::sqrt(r2lo + unit(rng) * (r2hi - r2lo));
  const double angle = level.angle_min + unit(rng) * (level.angle_max - level.angle_min);
  return goal_at(origin, heading, distance, angle, level.radius);
}

sim::Goal goal_at(const sim::Vec2& origin, double heading, double distance, double angle_deg,
                  double radius) {
  const double phi = heading + angle_deg * kDeg;
  sim::Goal g;
  g.position = origin + distance * sim::Vec2(std::cos(phi), std::sin(phi));
  g.radius = radius;
  return g;
}

void RewardConfig::check() const {
  if (!(c_v > 0.0 && c_g > 0.0)) throw ConfigError("reward weights must be positive");
}

double reward(const sim::Observation& obs, const sim::Vec2& velocity, const sim::Vec2& to_goal,
              std::span<const double> radii, const RewardConfig& cfg) {
  const double dist = std::max(to_goal.norm(), 1e-6);
  const double potential = velocity.dot(to_goal) / (dist * dist);
  double bonus = 0.0;
  for (double r : radii) {
    if (obs.rho < r) bonus += 1.0 / r;
  }
  return cfg.c_v * obs.v_g + cfg.c_g * potential + cfg.c_g * std::cos(obs.theta) * bonus;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::running: return "running";
    case Outcome::success: return "success";
    case Outcome::starved: return "starved";
    case Outcome::missed_goal: return "missed-goal";
    case Outcome::timeout: return "timeout";
  }
  return "unknown";
}

void TerminationConfig::check() const {
  if (starvation_speed < 0.0 || starvation_steps <= 0 || missed_steps <= 0 || max_steps <= 0 ||
      !(starvation_time > 0.0)) {
    throw ConfigError("invalid termination settings");
  }
}

EpisodeMonitor::EpisodeMonitor(TerminationConfig cfg, double control_interval) : cfg_(cfg) {
  cfg_.check();
  starvation_window_ = cfg_.literal_starvation
                           ? std::max(1, static_cast<int>(std::ceil(cfg_.starvation_time / control_interval - 1e-9)))
                           : cfg_.starvation_steps;
}

Outcome EpisodeMonitor::update(const sim::Observation& obs, double goal_radius) {
  ++steps_;
  slow_ = obs.speed < cfg_.starvation_speed ? slow_ + 1 : 0;
  receding_ = obs.v_g < 0.0 ? receding_ + 1 : 0;
  if (obs.rho < goal_radius) return Outcome::success;
  if (slow_ > starvation_window_) return Outcome::starved;
  if (receding_ > cfg_.missed_steps) return Outcome::missed_goal;
  if (steps_ >= cfg_.max_steps) return Outcome::timeout;
  return Outcome::running;
}

sim::PhysicsParams randomize_domain(Rng& rng, bool enabled, const DomainRanges& ranges,
                                    const sim::PhysicsParams& base) {
  sim::PhysicsParams p = base;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const RandomizationRange& r) {
    return enabled ? r.lo + unit(rng) * (r.hi - r.lo) : r.mid();
  };
  p.ground_friction = draw(ranges.ground_friction);
  p.wheel_friction = draw(ranges.wheel_friction);
  p.rigid_body_mass = draw(ranges.rigid_body_mass);
  p.tail_mass = draw(ranges.tail_mass);
  p.head_mass = draw(ranges.head_mass);
  p.max_link_pressure = draw(ranges.max_link_pressure);
  p.gravity_angle = draw(ranges.gravity_angle);
  return p;
}

}  // namespace snakecpg::rl
