#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "snakecpg/config.hpp"
#include "snakecpg/snake.hpp"

// Goal-reaching task: curriculum, goal sampling, reward, termination and
// physics randomization.
namespace snakecpg::rl {

using Rng = std::mt19937_64;

struct CurriculumLevel {
  int index = 1;
  double distance_min = 1.2;  // m
  double distance_max = 1.5;  // m
  double angle_min = -10.0;   // deg, measured CCW from the heading
  double angle_max = 10.0;    // deg
  double radius = 0.5;        // m
  double promote_rate = 0.9;  // sigma_i
  int window = 100;           // n, trials
};

// The twelve-level goal-reaching curriculum.
std::vector<CurriculumLevel> default_curriculum();
// CSV with header: level,distance_min,distance_max,angle_min,angle_max,radius[,promote_rate,window]
std::vector<CurriculumLevel> load_curriculum(const std::string& path);
std::vector<CurriculumLevel> parse_curriculum(const std::string& csv, const std::string& origin);
std::string curriculum_csv(std::span<const CurriculumLevel> levels);

// Empty when the table is valid; otherwise one message per violated
// invariant. Harder levels: radius non-increasing, angle bounds widening,
// distance ranges nested (lower bound non-increasing, upper non-decreasing).
std::vector<std::string> curriculum_violations(std::span<const CurriculumLevel> levels);

// Success window with promotion at sigma over n trials of the current level.
class CurriculumTracker {
 public:
  explicit CurriculumTracker(std::vector<CurriculumLevel> levels, std::size_t start = 0);

  const CurriculumLevel& level() const { return levels_[current_]; }
  std::size_t level_index() const { return current_; }
  std::size_t level_count() const { return levels_.size(); }
  const std::vector<CurriculumLevel>& levels() const { return levels_; }
  // Radii of levels 1..current, for the reward's indicator sum.
  std::vector<double> radii() const;

  // Records a finished trial at the current level; returns true on promotion.
  bool record(bool success);
  double success_rate() const;  // over the current window, 0 when empty
  std::size_t trials_in_window() const { return window_.size(); }
  bool window_full() const;
  bool at_last_level() const { return current_ + 1 == levels_.size(); }

 private:
  std::vector<CurriculumLevel> levels_;
  std::size_t current_ = 0;
  std::deque<bool> window_;
};

// Goal uniform in area over the fan spanned by the level's distance and angle
// ranges, anchored at `origin` and rotated by `heading`.
sim::Goal sample_goal(const CurriculumLevel& level, const sim::Vec2& origin, double heading, Rng& rng);
// Goal at polar offset (distance, angle in degrees) from the pose.
sim::Goal goal_at(const sim::Vec2& origin, double heading, double distance, double angle_deg,
                  double radius);

struct RewardConfig {
  double c_v = 1.0;
  double c_g = 0.5;
  void check() const;
};

// c_v v_g + c_g U + c_g cos(theta_g) sum_k I(rho_g < r_k) / r_k with
// U = (v . e_g) / |e_g|^2.
double reward(const sim::Observation& obs, const sim::Vec2& velocity, const sim::Vec2& to_goal,
              std::span<const double> radii, const RewardConfig& cfg);

enum class Outcome { running, success, starved, missed_goal, timeout };
std::string to_string(Outcome o);

struct TerminationConfig {
  double starvation_speed = 0.005;  // m/s
  int starvation_steps = 60;        // control steps
  bool literal_starvation = false;  // use starvation_time instead of steps
  double starvation_time = 0.06;    // s
  int missed_steps = 60;            // v_g < 0 for more than this many steps
  int max_steps = 2000;
  void check() const;
};

class EpisodeMonitor {
 public:
  EpisodeMonitor(TerminationConfig cfg, double control_interval);
  Outcome update(const sim::Observation& obs, double goal_radius);
  int steps() const { return steps_; }

 private:
  TerminationConfig cfg_;
  int starvation_window_;
  int steps_ = 0;
  int slow_ = 0;
  int receding_ = 0;
};

struct RandomizationRange {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
};

struct DomainRanges {
  RandomizationRange ground_friction{0.1, 1.5};
  RandomizationRange wheel_friction{0.05, 0.10};
  RandomizationRange rigid_body_mass{0.035, 0.075};
  RandomizationRange tail_mass{0.065, 0.085};
  RandomizationRange head_mass{0.075, 0.125};
  RandomizationRange max_link_pressure{5.0, 12.0};
  RandomizationRange gravity_angle{-0.001, 0.001};
};

// Each randomized field uniform in its range; midpoints when disabled.
// Surrogate constants come from `base`.
sim::PhysicsParams randomize_domain(Rng& rng, bool enabled = true, const DomainRanges& ranges = {},
                                    const sim::PhysicsParams& base = {});

}  // namespace snakecpg::rl
