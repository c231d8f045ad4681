#include <doctest.h>

#include <cmath>
#include <numbers>

#include "snakecpg/errors.hpp"
#include "snakecpg/task.hpp"

using namespace snakecpg;
using namespace snakecpg::rl;

TEST_SUITE("task") {
  TEST_CASE("default curriculum") {
    const auto levels = default_curriculum();
    REQUIRE(levels.size() == 12);
    CHECK(levels.front().radius == 0.5);
    CHECK(levels.back().radius == 0.05);
    CHECK(levels.back().angle_min == -80.0);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      CHECK(levels[i].index == static_cast<int>(i) + 1);
      CHECK(levels[i].promote_rate == 0.9);
      CHECK(levels[i].window == 100);
    }
    CHECK(curriculum_violations(levels).empty());
  }

  TEST_CASE("curriculum violations are reported") {
    auto levels = default_curriculum();
    levels[3].radius = 0.6;
    levels[5].angle_max = 5.0;
    levels[7].distance_max = 1.0;
    CHECK(curriculum_violations(levels).size() >= 3);
  }

  TEST_CASE("curriculum CSV round-trip") {
    const auto levels = default_curriculum();
    const auto back = parse_curriculum(curriculum_csv(levels), "<test>");
    REQUIRE(back.size() == levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      CHECK(back[i].distance_min == levels[i].distance_min);
      CHECK(back[i].angle_max == levels[i].angle_max);
      CHECK(back[i].radius == levels[i].radius);
      CHECK(back[i].window == levels[i].window);
    }
    CHECK_THROWS_AS(parse_curriculum("level,distance_min\n1,2\n", "<bad>"), ConfigError);
  }

  TEST_CASE("tracker promotes on a full window") {
    auto levels = default_curriculum();
    levels.resize(2);
    levels[0].window = 10;
    CurriculumTracker t(levels);
    CHECK(t.radii() == std::vector<double>{0.5});
    for (int i = 0; i < 9; ++i) CHECK_FALSE(t.record(true));
    CHECK(t.record(true));
    CHECK(t.level_index() == 1);
    CHECK(t.trials_in_window() == 0);
    CHECK(t.radii() == std::vector<double>{0.5, 0.4});
    CHECK(t.at_last_level());
  }

  TEST_CASE("tracker window slides and holds below the rate") {
    auto levels = default_curriculum();
    levels[0].window = 10;
    CurriculumTracker t(levels);
    for (int i = 0; i < 20; ++i) CHECK_FALSE(t.record(i % 2 == 0));
    CHECK(t.trials_in_window() == 10);
    CHECK(t.success_rate() == doctest::Approx(0.5));
    CHECK(t.level_index() == 0);
  }

  TEST_CASE("goals stay in the fan") {
    CurriculumLevel lvl;
    lvl.distance_min = 1.0;
    lvl.distance_max = 1.5;
    lvl.angle_min = -40;
    lvl.angle_max = 40;
    Rng rng(5);
    const sim::Vec2 origin(0.3, -0.2);
    const double heading = 0.7;
    int inner = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto g = sample_goal(lvl, origin, heading, rng);
      const sim::Vec2 d = g.position - origin;
      const double r = d.norm();
      const double a = sim::wrap_angle(std::atan2(d.y(), d.x()) - heading) * 180.0 / std::numbers::pi;
      REQUIRE(r >= 1.0 - 1e-12);
      REQUIRE(r <= 1.5 + 1e-12);
      REQUIRE(a >= -40.0 - 1e-9);
      REQUIRE(a <= 40.0 + 1e-9);
      if (r < 1.25) ++inner;
    }
    // uniform in area: P(r < 1.25) = (1.25^2 - 1) / (1.5^2 - 1)
    CHECK(static_cast<double>(inner) / n == doctest::Approx(0.45).epsilon(0.05));
  }

  TEST_CASE("reward terms") {
    RewardConfig cfg{2.0, 0.5};
    sim::Observation o;
    o.v_g = 0.1;
    o.theta = 0.0;
    o.rho = 2.0;
    const sim::Vec2 v(0.1, 0.0), e(2.0, 0.0);
    const std::vector<double> radii{0.5, 0.4};
    CHECK(reward(o, v, e, radii, cfg) == doctest::Approx(2.0 * 0.1 + 0.5 * 0.2 / 4.0));
    o.rho = 0.45;
    o.theta = std::numbers::pi / 3.0;
    const sim::Vec2 e2(0.45, 0.0);
    CHECK(reward(o, v, e2, radii, cfg) ==
          doctest::Approx(0.2 + 0.5 * 0.045 / (0.45 * 0.45) + 0.5 * 0.5 * (1.0 / 0.5)));
    o.rho = 0.3;
    const sim::Vec2 e3(0.3, 0.0);
    CHECK(reward(o, v, e3, radii, cfg) ==
          doctest::Approx(0.2 + 0.5 * 0.03 / 0.09 + 0.5 * 0.5 * (2.0 + 2.5)));
  }

  TEST_CASE("stationary robot outside every radius earns nothing") {
    sim::Observation o;
    o.rho = 1.0;
    o.theta = 0.3;
    const std::vector<double> radii{0.5, 0.4};
    CHECK(reward(o, sim::Vec2::Zero(), {1.0, 0.0}, radii, {}) == 0.0);
  }

  TEST_CASE("termination") {
    TerminationConfig cfg;
    cfg.starvation_steps = 3;
    cfg.missed_steps = 2;
    cfg.max_steps = 10;
    sim::Observation o;
    o.rho = 1.0;
    o.speed = 0.1;
    o.v_g = 0.05;
    SUBCASE("success") {
      EpisodeMonitor m(cfg, 0.05);
      o.rho = 0.2;
      CHECK(m.update(o, 0.3) == Outcome::success);
    }
    SUBCASE("starved after the window") {
      EpisodeMonitor m(cfg, 0.05);
      o.speed = 0.0;
      for (int i = 0; i < 3; ++i) CHECK(m.update(o, 0.3) == Outcome::running);
      CHECK(m.update(o, 0.3) == Outcome::starved);
    }
    SUBCASE("missed goal") {
      EpisodeMonitor m(cfg, 0.05);
      o.v_g = -0.01;
      CHECK(m.update(o, 0.3) == Outcome::running);
      CHECK(m.update(o, 0.3) == Outcome::running);
      CHECK(m.update(o, 0.3) == Outcome::missed_goal);
    }
    SUBCASE("timeout") {
      EpisodeMonitor m(cfg, 0.05);
      for (int i = 0; i < 9; ++i) CHECK(m.update(o, 0.3) == Outcome::running);
      CHECK(m.update(o, 0.3) == Outcome::timeout);
    }
    SUBCASE("literal starvation time rounds up to control steps") {
      cfg.literal_starvation = true;
      cfg.starvation_time = 0.06;
      EpisodeMonitor m(cfg, 0.05);
      o.speed = 0.0;
      CHECK(m.update(o, 0.3) == Outcome::running);
      CHECK(m.update(o, 0.3) == Outcome::running);
      CHECK(m.update(o, 0.3) == Outcome::starved);
    }
  }

  TEST_CASE("domain randomization") {
    Rng rng(11);
    const DomainRanges r;
    for (int i = 0; i < 10000; ++i) {
      const auto p = randomize_domain(rng);
      REQUIRE(p.ground_friction >= r.ground_friction.lo);
      REQUIRE(p.ground_friction <= r.ground_friction.hi);
      REQUIRE(p.wheel_friction >= r.wheel_friction.lo);
      REQUIRE(p.wheel_friction <= r.wheel_friction.hi);
      REQUIRE(p.rigid_body_mass >= r.rigid_body_mass.lo);
      REQUIRE(p.rigid_body_mass <= r.rigid_body_mass.hi);
      REQUIRE(p.tail_mass >= r.tail_mass.lo);
      REQUIRE(p.tail_mass <= r.tail_mass.hi);
      REQUIRE(p.head_mass >= r.head_mass.lo);
      REQUIRE(p.head_mass <= r.head_mass.hi);
      REQUIRE(p.max_link_pressure >= r.max_link_pressure.lo);
      REQUIRE(p.max_link_pressure <= r.max_link_pressure.hi);
      REQUIRE(std::abs(p.gravity_angle) <= 0.001);
    }
    const auto mid = randomize_domain(rng, false);
    const sim::PhysicsParams defaults;
    CHECK(mid.ground_friction == doctest::Approx(defaults.ground_friction));
    CHECK(mid.head_mass == doctest::Approx(defaults.head_mass));
    CHECK(mid.max_link_pressure == doctest::Approx(defaults.max_link_pressure));
  }
}

TEST_SUITE("task") {
  TEST_CASE("shipped table matches the built-in curriculum") {
    const auto shipped = load_curriculum(SNAKECPG_DATA_DIR "/curriculum.csv");
    const auto builtin = default_curriculum();
    REQUIRE(shipped.size() == builtin.size());
    for (std::size_t i = 0; i < shipped.size(); ++i) {
      CHECK(shipped[i].distance_min == builtin[i].distance_min);
      CHECK(shipped[i].distance_max == builtin[i].distance_max);
      CHECK(shipped[i].angle_min == builtin[i].angle_min);
      CHECK(shipped[i].angle_max == builtin[i].angle_max);
      CHECK(shipped[i].radius == builtin[i].radius);
    }
    CHECK(curriculum_violations(load_curriculum(SNAKECPG_DATA_DIR "/steering_curriculum.csv")).empty());
  }
}
