#include <doctest.h>

#include <limits>

#include "snakecpg/config.hpp"
#include "snakecpg/cpg.hpp"
#include "snakecpg/errors.hpp"
#include "snakecpg/snake.hpp"

using namespace snakecpg;

TEST_SUITE("config") {
  TEST_CASE("parses keys, comments and overrides") {
    auto kv = KeyValueConfig::parse("# comment\n tau_r = 0.5\nb=3 # trailing\n\n");
    CHECK(kv.get_double("tau_r", 0) == 0.5);
    CHECK(kv.get_double("b", 0) == 3.0);
    kv.apply_override("b=4.5");
    CHECK(kv.get_double("b", 0) == 4.5);
    CHECK(kv.get_double("missing", 7.0) == 7.0);
    CHECK_THROWS_AS(kv.apply_override("novalue"), ConfigError);
  }

  TEST_CASE("rejects malformed values and unknown keys") {
    auto kv = KeyValueConfig::parse("a = abc");
    CHECK_THROWS_AS(kv.get_double("a", 0), ConfigError);
    CHECK_THROWS_AS(cpg::cpg_config_from(KeyValueConfig::parse("tau_q = 1")), ConfigError);
    CHECK_THROWS_AS(cpg::cpg_config_from(KeyValueConfig::parse("tau_r = -1")), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("just a line"), ConfigError);
  }

  TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 4.6062, -1e-300, 12345678.9, std::numeric_limits<double>::max()}) {
      CHECK(std::stod(format_double(v)) == v);
    }
  }

  TEST_CASE("cpg config survives dump and parse") {
    cpg::CpgConfig cfg;
    cfg.params.tau_r = 0.123456789;
    cfg.params.K_f = 0.7;
    cfg.initial.x_f[2] = -0.25;
    const auto back = cpg::cpg_config_from(KeyValueConfig::parse(cpg::to_key_values(cfg).dump()));
    CHECK(back.params.tau_r == cfg.params.tau_r);
    CHECK(back.params.K_f == cfg.params.K_f);
    CHECK(back.initial == cfg.initial);
  }

  TEST_CASE("physics config survives dump and parse") {
    sim::PhysicsParams p;
    p.ground_friction = 1.234;
    p.head_mass = 0.09;
    const auto back = sim::physics_from(KeyValueConfig::parse(sim::to_key_values(p).dump()));
    CHECK(back.ground_friction == p.ground_friction);
    CHECK(back.head_mass == p.head_mass);
    CHECK_THROWS_AS(sim::physics_from(KeyValueConfig::parse("ground_friction = -1")), ConfigError);
  }
}
