#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "snakecpg/plant.hpp"

// Real-valued evolutionary tuning of the oscillator parameters for straight
// locomotion under unit tonic inputs.
namespace snakecpg::gp {

inline constexpr std::size_t kGenes = 7;
using Genome = std::array<double, kGenes>;
// Gene order.
inline constexpr std::array<const char*, kGenes> kGeneNames = {"b", "tau_r", "tau_a", "a", "w_down", "w_up", "A_z"};

Genome encode(const cpg::OscillatorParams& p);
cpg::OscillatorParams decode(const Genome& g, cpg::OscillatorParams base = {});

struct Bounds {
  Genome lo{}, hi{};

  // Each gene within [1 - rel, 1 + rel] times its value in `center`.
  static Bounds around(const cpg::OscillatorParams& center = {}, double rel = 0.5);
  bool contains(const Genome& g) const;
  void check() const;
};

struct FitnessConfig {
  double a1 = 40.0;
  double a2 = 100.0;
  double a3 = 50.0;
  double horizon = 6.4;         // s
  double tonic = 1.0;           // every u_e and u_f
  double goal_distance = 10.0;  // m ahead on the initial heading
  double warmup = 20.0;         // s of network-only run before the robot is released
  void check() const;
};

struct Evaluation {
  double fitness = 0.0;
  bool feasible = false;
  double v_g = 0.0, theta_g = 0.0, d_g = 0.0;
};

// a1 |v_g| - a2 |theta_g| + a3 |d_g| at the horizon; -inf when the decoded
// parameters cannot oscillate or the simulation diverges.
Evaluation evaluate(const Genome& g, const FitnessConfig& cfg = {}, const sim::PhysicsParams& phys = {},
                    const cpg::OscillatorParams& base = {}, const cpg::IntegrationSettings& integration = {});

struct EvolveConfig {
  int population = 32;
  int generations = 30;
  int tournament = 3;
  double mutation = 0.05;     // sigma as a fraction of each gene's range
  double crossover_rate = 0.9;
  double blend_alpha = 0.5;
  int elitism = 1;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  void check() const;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;  // best so far
  double mean = 0.0;  // over feasible individuals of this generation
  double std = 0.0;
  Genome best_genome{};
};

struct EvolveResult {
  Genome best{};
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;
};

using GenerationCallback = std::function<void(const GenerationStats&)>;

EvolveResult evolve(const Bounds& bounds, const EvolveConfig& cfg, const FitnessConfig& fitness = {},
                    const sim::PhysicsParams& phys = {}, const cpg::OscillatorParams& base = {},
                    const cpg::IntegrationSettings& integration = {}, const GenerationCallback& progress = {});

void write_history_csv(std::ostream& out, const std::vector<GenerationStats>& history);

struct GaitCheck {
  std::array<bool, 4> limit_cycle{};
  double displacement = 0.0;  // head travel along the initial heading (m)
  bool oscillates() const;
};

// Longer unit-tonic run used to confirm that a tuned genome is a gait.
GaitCheck check_gait(const cpg::OscillatorParams& p, const sim::PhysicsParams& phys = {},
                     double duration = 30.0, const FitnessConfig& cfg = {},
                     const cpg::IntegrationSettings& integration = {});

}  // namespace snakecpg::gp
