#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "snakecpg/plant.hpp"
#include "snakecpg/task.hpp"

namespace snakecpg::rl {

enum class Variant { ppoc, foc, vanilla };
std::string to_string(Variant v);
Variant variant_from(const std::string& name);  // "ppoc-cpg", "foc-ppoc-cpg", "vanilla-ppo"
// Free-response tonic input used by the variant (0, 0.75, unused).
double default_c(Variant v);

using Action = std::array<double, 4>;

struct EnvConfig {
  Variant variant = Variant::foc;
  double c = 0.75;
  cpg::OscillatorParams cpg;
  cpg::IntegrationSettings integration;
  sim::PhysicsParams physics;
  bool randomize = true;
  DomainRanges ranges;
  RewardConfig reward;
  TerminationConfig termination;
  double warmup = 10.0;  // s of network-only run before each reset trial, scaled by K_f
};

struct StepResult {
  sim::Observation obs;
  double reward = 0.0;
  Outcome outcome = Outcome::running;
  cpg::TonicInputs tonic;  // decoded inputs (zero for the direct variant)
  cpg::Quad psi{};
};

// One snake robot and one goal at a time.
class GoalEnv {
 public:
  GoalEnv(EnvConfig cfg, std::uint64_t seed);

  // Fresh robot at the origin, new physics draw, network warmed up at K_f,
  // goal from the level's fan.
  sim::Observation reset(const CurriculumLevel& level, std::span<const double> radii, double K_f);
  // Fresh robot with an explicit goal given relative to the initial pose.
  sim::Observation reset_with_goal(double distance, double angle_deg, double radius, double K_f,
                                   std::span<const double> radii);
  // Keeps the robot where it is and switches to a new goal.
  sim::Observation retarget(const sim::Goal& goal, std::span<const double> radii);

  StepResult step(const Action& action, double K_f);

  const sim::Goal& goal() const { return goal_; }
  const sim::CpgSnake& plant() const { return *plant_; }
  const sim::Observation& last_observation() const { return obs_; }
  const EnvConfig& config() const { return cfg_; }
  Rng& rng() { return rng_; }

 private:
  sim::Observation start(const sim::Goal& goal, std::span<const double> radii);
  void fresh_robot(double K_f);

  EnvConfig cfg_;
  Rng rng_;
  std::optional<sim::CpgSnake> plant_;
  sim::Goal goal_;
  sim::Vec2 origin_ = sim::Vec2::Zero();
  sim::Observation obs_;
  std::vector<double> radii_;
  std::optional<EpisodeMonitor> monitor_;
};

}  // namespace snakecpg::rl
