#include "snakecpg/env.hpp"

#include <cmath>

#include "snakecpg/errors.hpp"

namespace snakecpg::rl {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ppoc: return "ppoc-cpg";
    case Variant::foc: return "foc-ppoc-cpg";
    case Variant::vanilla: return "vanilla-ppo";
  }
  return "unknown";
}

Variant variant_from(const std::string& name) {
  if (name == "ppoc-cpg" || name == "ppoc") return Variant::ppoc;
  if (name == "foc-ppoc-cpg" || name == "foc") return Variant::foc;
  if (name == "vanilla-ppo" || name == "vanilla") return Variant::vanilla;
  throw ConfigError("unknown variant: " + name);
}

double default_c(Variant v) { return v == Variant::foc ? 0.75 : 0.0; }

GoalEnv::GoalEnv(EnvConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {
  cfg_.reward.check();
  cfg_.termination.check();
  cfg_.cpg.c = cfg_.c;
  cfg_.cpg.check();
}

void GoalEnv::fresh_robot(double K_f) {
  const auto phys = randomize_domain(rng_, cfg_.randomize, cfg_.ranges, cfg_.physics);
  auto params = cfg_.cpg;
  params.K_f = K_f;
  plant_.emplace(params, cfg_.integration, phys);
  if (cfg_.variant != Variant::vanilla && cfg_.warmup > 0.0) {
    plant_->warm_up(cpg::TonicInputs::uniform(0.5, 0.5), K_f, cfg_.warmup * K_f);
  }
}

sim::Observation GoalEnv::start(const sim::Goal& goal, std::span<const double> radii) {
  goal_ = goal;
  origin_ = plant_->robot().head();
  radii_.assign(radii.begin(), radii.end());
  monitor_.emplace(cfg_.termination, cfg_.integration.control_interval);
  obs_ = sim::observe(plant_->robot(), goal_, origin_);
  return obs_;
}

sim::Observation GoalEnv::reset(const CurriculumLevel& level, std::span<const double> radii,
                                double K_f) {
  fresh_robot(K_f);
  const auto& robot = plant_->robot();
  return start(sample_goal(level, robot.head(), robot.heading(), rng_), radii);
}

sim::Observation GoalEnv::reset_with_goal(double distance, double angle_deg, double radius,
                                          double K_f, std::span<const double> radii) {
  fresh_robot(K_f);
  const auto& robot = plant_->robot();
  return start(goal_at(robot.head(), robot.heading(), distance, angle_deg, radius), radii);
}

sim::Observation GoalEnv::retarget(const sim::Goal& goal, std::span<const double> radii) {
  if (!plant_) throw ConfigError("retarget before reset");
  return start(goal, radii);
}

StepResult GoalEnv::step(const Action& action, double K_f) {
  if (!plant_ || !monitor_) throw ConfigError("step before reset");
  StepResult out;
  if (cfg_.variant == Variant::vanilla) {
    sim::LinkArray psi;
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::tanh(action[i]);
    plant_->advance_direct(psi);
  } else {
    out.tonic = cpg::decode_action(action);
    plant_->advance(out.tonic, K_f);
  }
  out.psi = plant_->psi();
  const auto& robot = plant_->robot();
  out.obs = sim::observe(robot, goal_, origin_, obs_, cfg_.integration.control_interval);
  out.reward = reward(out.obs, robot.com_velocity, goal_.position - robot.head(), radii_, cfg_.reward);
  out.outcome = monitor_->update(out.obs, goal_.radius);
  obs_ = out.obs;
  return out;
}

}  // namespace snakecpg::rl
