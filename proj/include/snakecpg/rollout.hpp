#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "snakecpg/ppoc.hpp"
#include "snakecpg/stats.hpp"

// Deterministic evaluation of a trained policy on way-point scripts.
namespace snakecpg::rl {

enum class Script { single, zigzag, square };
Script script_from(const std::string& name);
std::string to_string(Script s);

// Way-points in the robot's initial frame (x forward, y to the left), metres.
struct ScriptSpec {
  Script kind = Script::single;
  double distance = 1.5;  // single: goal range; zigzag/square: leg length
  double angle = 0.0;     // single: goal bearing, deg CCW
  double radius = 0.3;
};
std::vector<sim::Vec2> waypoints(const ScriptSpec& spec);

struct RolloutOptions {
  std::uint64_t seed = 0;
  bool randomize = false;  // physics draw from the randomization ranges instead of midpoints
  sim::PhysicsParams physics;
  double beta_threshold = 0.5;  // option switches when termination exceeds this
  bool stochastic = false;
};

struct LogRow {
  double t = 0.0;
  sim::Vec2 head = sim::Vec2::Zero();
  double rho = 0.0, theta = 0.0, v_g = 0.0;
  cpg::Quad kappa{}, psi{}, u_e{}, u_f{};
  double K_f = 1.0;
  int waypoint = 0;
};

struct EpisodeLog {
  std::vector<sim::Vec2> goals;  // world frame
  double radius = 0.0;
  std::vector<LogRow> rows;
  std::vector<Outcome> outcomes;  // one per way-point attempted

  bool success() const;
  double mean_v_g() const;
  static std::string csv_header();
  void write_csv(std::ostream& out) const;
};

EpisodeLog rollout(const Policy& policy, const ScriptSpec& script, const RolloutOptions& opts = {});

struct SteeringPoint {
  double angle = 0.0;      // deg
  double bias_psi = 0.0;   // time average of psi_1 over the turning window
  double bias_u = 0.0;     // time average of u_e1 - u_f1 over the same window
  Outcome outcome = Outcome::running;
};

struct SteeringStudy {
  std::vector<SteeringPoint> points;  // sorted by angle
  LinearFit fit;                      // bias_psi on bias_u
  bool monotone = false;              // bias_psi strictly monotone in angle
};

struct SteeringSettings {
  std::vector<double> angles = {-90, -60, -30, 30, 60, 90};
  double distance = 1.5;
  double radius = 0.3;
  double window = 10.0;  // s from the start of the trial
  RolloutOptions rollout;
  unsigned workers = 0;
};

SteeringStudy steering_study(const Policy& policy, const SteeringSettings& s = {});

}  // namespace snakecpg::rl
