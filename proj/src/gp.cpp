#include "snakecpg/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "snakecpg/errors.hpp"
#include "snakecpg/measure.hpp"
#include "snakecpg/parallel.hpp"

namespace snakecpg::gp {

namespace {

constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

using Members = std::array<double cpg::OscillatorParams::*, kGenes>;
constexpr Members kMembers = {&cpg::OscillatorParams::b,      &cpg::OscillatorParams::tau_r,
                              &cpg::OscillatorParams::tau_a,  &cpg::OscillatorParams::a,
                              &cpg::OscillatorParams::w_down, &cpg::OscillatorParams::w_up,
                              &cpg::OscillatorParams::A_z};

struct UnitRun {
  sim::CpgSnake plant;
  sim::Goal goal;
  sim::Vec2 origin;
  sim::Vec2 heading;
};

UnitRun start_run(const cpg::OscillatorParams& p, const FitnessConfig& cfg, const sim::PhysicsParams& phys,
                  const cpg::IntegrationSettings& integration) {
  sim::CpgSnake plant(p, integration, phys);
  if (cfg.warmup > 0.0) plant.warm_up(cpg::TonicInputs::uniform(cfg.tonic, cfg.tonic), 1.0, cfg.warmup);
  const sim::Vec2 origin = plant.robot().head();
  const double h = plant.robot().heading();
  const sim::Vec2 dir(std::cos(h), std::sin(h));
  return {std::move(plant), {origin + cfg.goal_distance * dir, 0.1}, origin, dir};
}

}  // namespace

Genome encode(const cpg::OscillatorParams& p) {
  Genome g{};
  for (std::size_t i = 0; i < kGenes; ++i) g[i] = p.*kMembers[i];
  return g;
}

cpg::OscillatorParams decode(const Genome& g, cpg::OscillatorParams base) {
  for (std::size_t i = 0; i < kGenes; ++i) base.*kMembers[i] = g[i];
  return base;
}

Bounds Bounds::around(const cpg::OscillatorParams& center, double rel) {
  if (!(rel > 0.0 && rel < 1.0)) throw ConfigError("relative gene bound must be in (0, 1)");
  Bounds b;
  const Genome c = encode(center);
  for (std::size_t i = 0; i < kGenes; ++i) {
    b.lo[i] = std::min(c[i] * (1.0 - rel), c[i] * (1.0 + rel));
    b.hi[i] = std::max(c[i] * (1.0 - rel), c[i] * (1.0 + rel));
  }
  return b;
}

bool Bounds::contains(const Genome& g) const {
  for (std::size_t i = 0; i < kGenes; ++i) {
    if (!(g[i] >= lo[i] && g[i] <= hi[i])) return false;
  }
  return true;
}

void Bounds::check() const {
  for (std::size_t i = 0; i < kGenes; ++i) {
    if (!(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i])) {
      throw ConfigError(std::string("bad bounds for gene ") + kGeneNames[i]);
    }
  }
}

void FitnessConfig::check() const {
  if (!(a1 > 0.0 && a2 > 0.0 && a3 > 0.0)) throw ConfigError("fitness weights must be positive");
  if (!(horizon > 0.0)) throw ConfigError("fitness horizon must be positive");
  if (!(goal_distance > 0.0)) throw ConfigError("goal distance must be positive");
  if (!(warmup >= 0.0)) throw ConfigError("warmup must be non-negative");
}

void EvolveConfig::check() const {
  if (population < 4) throw ConfigError("population must be at least 4");
  if (generations < 1) throw ConfigError("generations must be positive");
  if (tournament < 1 || tournament > population) throw ConfigError("tournament size out of range");
  if (!(mutation >= 0.0)) throw ConfigError("mutation must be non-negative");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ConfigError("crossover_rate must be in [0, 1]");
  if (!(blend_alpha >= 0.0)) throw ConfigError("blend_alpha must be non-negative");
  if (elitism < 1 || elitism >= population) throw ConfigError("elitism must be in [1, population)");
}

Evaluation evaluate(const Genome& g, const FitnessConfig& cfg, const sim::PhysicsParams& phys,
                    const cpg::OscillatorParams& base, const cpg::IntegrationSettings& integration) {
  cfg.check();
  Evaluation e;
  e.fitness = kInfeasible;
  auto p = decode(g, base);
  p.K_f = 1.0;
  p.c = 0.0;
  try {
    p.check();
  } catch (const ConfigError&) {
    return e;
  }
  if (!cpg::validate_params(p).oscillation_possible) return e;
  try {
    auto run = start_run(p, cfg, phys, integration);
    const auto u = cpg::TonicInputs::uniform(cfg.tonic, cfg.tonic);
    const int steps = static_cast<int>(std::lround(cfg.horizon / integration.control_interval));
    std::optional<sim::Observation> previous;
    sim::Observation obs;
    for (int k = 0; k < steps; ++k) {
      run.plant.advance(u, 1.0);
      obs = sim::observe(run.plant.robot(), run.goal, run.origin, previous, integration.control_interval);
      previous = obs;
    }
    e.v_g = obs.v_g;
    e.theta_g = obs.theta;
    e.d_g = obs.d_g;
    e.feasible = true;
    e.fitness = cfg.a1 * std::abs(e.v_g) - cfg.a2 * std::abs(e.theta_g) + cfg.a3 * std::abs(e.d_g);
    if (!std::isfinite(e.fitness)) {
      e.fitness = kInfeasible;
      e.feasible = false;
    }
  } catch (const DivergenceError&) {
    e.feasible = false;
  }
  return e;
}

EvolveResult evolve(const Bounds& bounds, const EvolveConfig& cfg, const FitnessConfig& fitness,
                    const sim::PhysicsParams& phys, const cpg::OscillatorParams& base,
                    const cpg::IntegrationSettings& integration, const GenerationCallback& progress) {
  bounds.check();
  cfg.check();
  fitness.check();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<std::size_t>(cfg.population);

  auto clamp = [&](Genome g) {
    for (std::size_t i = 0; i < kGenes; ++i) g[i] = std::clamp(g[i], bounds.lo[i], bounds.hi[i]);
    return g;
  };

  std::vector<Genome> pop(n);
  for (auto& g : pop) {
    for (std::size_t i = 0; i < kGenes; ++i) g[i] = bounds.lo[i] + unit(rng) * (bounds.hi[i] - bounds.lo[i]);
  }
  std::vector<double> fit(n, kInfeasible);
  auto score = [&](std::size_t from) {
    parallel_for(n - from, [&](std::size_t k) {
      fit[from + k] = evaluate(pop[from + k], fitness, phys, base, integration).fitness;
    }, cfg.workers);
  };
  score(0);

  EvolveResult result;
  result.best_fitness = kInfeasible;
  for (int gen = 0;; ++gen) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    if (fit[order[0]] > result.best_fitness || gen == 0) {
      result.best_fitness = fit[order[0]];
      result.best = pop[order[0]];
    }
    GenerationStats s;
    s.generation = gen;
    s.best = result.best_fitness;
    s.best_genome = result.best;
    double sum = 0.0, sq = 0.0;
    int feasible = 0;
    for (double f : fit) {
      if (std::isfinite(f)) {
        sum += f;
        ++feasible;
      }
    }
    s.mean = feasible ? sum / feasible : kInfeasible;
    for (double f : fit) {
      if (std::isfinite(f)) sq += (f - s.mean) * (f - s.mean);
    }
    s.std = feasible ? std::sqrt(sq / feasible) : 0.0;
    result.history.push_back(s);
    if (progress) progress(s);
    if (gen == cfg.generations) break;

    auto tournament = [&]() -> const Genome& {
      std::size_t best = static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n;
      for (int k = 1; k < cfg.tournament; ++k) {
        const std::size_t c = static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n;
        if (fit[c] > fit[best]) best = c;
      }
      return pop[best];
    };

    std::vector<Genome> next;
    std::vector<double> next_fit;
    for (int e = 0; e < cfg.elitism; ++e) {
      next.push_back(pop[order[static_cast<std::size_t>(e)]]);
      next_fit.push_back(fit[order[static_cast<std::size_t>(e)]]);
    }
    while (next.size() < n) {
      Genome child = tournament();
      if (unit(rng) < cfg.crossover_rate) {
        const Genome& other = tournament();
        for (std::size_t i = 0; i < kGenes; ++i) {
          const double lo = std::min(child[i], other[i]);
          const double hi = std::max(child[i], other[i]);
          const double span = hi - lo;
          child[i] = lo - cfg.blend_alpha * span + unit(rng) * (1.0 + 2.0 * cfg.blend_alpha) * span;
        }
      }
      for (std::size_t i = 0; i < kGenes; ++i) child[i] += cfg.mutation * (bounds.hi[i] - bounds.lo[i]) * normal(rng);
      next.push_back(clamp(child));
      next_fit.push_back(kInfeasible);
    }
    pop = std::move(next);
    fit = std::move(next_fit);
    score(static_cast<std::size_t>(cfg.elitism));
  }
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<GenerationStats>& history) {
  out << "generation,best,mean,std";
  for (const char* name : kGeneNames) out << ",best_" << name;
  out << '\n';
  for (const auto& s : history) {
    out << s.generation << ',' << format_double(s.best) << ',' << format_double(s.mean) << ','
        << format_double(s.std);
    for (double v : s.best_genome) out << ',' << format_double(v);
    out << '\n';
  }
}

bool GaitCheck::oscillates() const {
  return std::all_of(limit_cycle.begin(), limit_cycle.end(), [](bool b) { return b; });
}

GaitCheck check_gait(const cpg::OscillatorParams& params, const sim::PhysicsParams& phys, double duration,
                     const FitnessConfig& cfg, const cpg::IntegrationSettings& integration) {
  if (!(duration > 0.0)) throw ConfigError("gait check duration must be positive");
  auto p = params;
  p.K_f = 1.0;
  p.c = 0.0;
  auto run = start_run(p, cfg, phys, integration);
  const auto u = cpg::TonicInputs::uniform(cfg.tonic, cfg.tonic);
  const double dt = integration.control_interval;
  const int steps = static_cast<int>(std::lround(duration / dt));
  std::array<std::vector<double>, 4> psi;
  for (int k = 0; k < steps; ++k) {
    run.plant.advance(u, 1.0);
    for (std::size_t i = 0; i < 4; ++i) psi[i].push_back(run.plant.psi()[i]);
  }
  GaitCheck out;
  for (std::size_t i = 0; i < 4; ++i) {
    out.limit_cycle[i] = df::measure_signal(psi[i], dt, duration / 3.0).is_limit_cycle;
  }
  out.displacement = (run.plant.robot().head() - run.origin).dot(run.heading);
  return out;
}

}  // namespace snakecpg::gp
