#include <doctest.h>

#include <cmath>
#include <sstream>

#include "snakecpg/errors.hpp"
#include "snakecpg/gp.hpp"

using namespace snakecpg;
using namespace snakecpg::gp;

namespace {

FitnessConfig quick_fitness() {
  FitnessConfig f;
  f.warmup = 5.0;
  f.horizon = 2.0;
  return f;
}

EvolveConfig quick_evolve() {
  EvolveConfig e;
  e.population = 6;
  e.generations = 3;
  e.tournament = 2;
  e.seed = 9;
  e.workers = 1;
  return e;
}

}  // namespace

TEST_SUITE("gp") {
  TEST_CASE("encode and decode") {
    cpg::OscillatorParams p;
    p.b = 2.9;
    p.A_z = 3.0;
    p.K_f = 0.6;
    const auto g = encode(p);
    CHECK(g[0] == 2.9);
    CHECK(g[6] == 3.0);
    const auto q = decode(g);
    CHECK(q.b == 2.9);
    CHECK(q.K_f == 1.0);
  }

  TEST_CASE("bounds around a centre") {
    const auto b = Bounds::around({}, 0.5);
    CHECK(b.contains(encode({})));
    auto g = encode({});
    g[1] = b.hi[1] * 1.01;
    CHECK_FALSE(b.contains(g));
    CHECK_THROWS_AS(Bounds::around({}, 1.5), ConfigError);
  }

  TEST_CASE("non-oscillating genome is infeasible") {
    cpg::OscillatorParams p;
    p.b = 0.1;
    const auto e = evaluate(encode(p), quick_fitness());
    CHECK(std::isinf(e.fitness));
    CHECK(e.fitness < 0.0);
    CHECK_FALSE(e.feasible);
  }

  TEST_CASE("fitness combines the terminal observation") {
    const FitnessConfig f = quick_fitness();
    const auto e = evaluate(encode({}), f);
    REQUIRE(e.feasible);
    CHECK(e.fitness == doctest::Approx(f.a1 * std::abs(e.v_g) - f.a2 * std::abs(e.theta_g) + f.a3 * std::abs(e.d_g)));
  }

  TEST_CASE("a robot that never moves cannot score") {
    FitnessConfig f = quick_fitness();
    f.tonic = 0.0;
    f.warmup = 0.0;
    const auto e = evaluate(encode({}), f);
    REQUIRE(e.feasible);
    CHECK(std::abs(e.d_g) < 1e-3);
    CHECK(e.fitness <= f.a1 * std::abs(e.v_g) + f.a3 * std::abs(e.d_g));
  }

  TEST_CASE("evolution keeps its elite and is reproducible") {
    const auto bounds = Bounds::around({}, 0.3);
    const auto a = evolve(bounds, quick_evolve(), quick_fitness());
    const auto b = evolve(bounds, quick_evolve(), quick_fitness());
    REQUIRE(a.history.size() == 4);
    for (std::size_t i = 1; i < a.history.size(); ++i) CHECK(a.history[i].best >= a.history[i - 1].best);
    CHECK(a.best == b.best);
    CHECK(a.best_fitness == b.best_fitness);
    CHECK(bounds.contains(a.best));
    CHECK(evaluate(a.best, quick_fitness()).fitness == doctest::Approx(a.best_fitness));
    std::ostringstream csv;
    write_history_csv(csv, a.history);
    CHECK(csv.str().rfind("generation,best,mean,std,best_b,", 0) == 0);
  }

  TEST_CASE("evolve rejects bad settings") {
    auto e = quick_evolve();
    e.elitism = e.population;
    CHECK_THROWS_AS(evolve(Bounds::around(), e, quick_fitness()), ConfigError);
  }
}
