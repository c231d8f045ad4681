#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snakecpg/errors.hpp"
#include "snakecpg/rollout.hpp"

using namespace snakecpg;
using namespace snakecpg::rl;

TEST_SUITE("rollout") {
  TEST_CASE("scripts") {
    CHECK(script_from("zigzag") == Script::zigzag);
    CHECK(to_string(Script::square) == "square");
    CHECK_THROWS_AS(script_from("circle"), ConfigError);
    const auto single = waypoints({Script::single, 2.0, 90.0, 0.3});
    REQUIRE(single.size() == 1);
    CHECK(single[0].x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(single[0].y() == doctest::Approx(2.0));
    const auto square = waypoints({Script::square, 1.0, 0.0, 0.3});
    REQUIRE(square.size() == 4);
    CHECK(square.back().norm() == doctest::Approx(0.0));
    const auto zig = waypoints({Script::zigzag, 1.0, 0.0, 0.3});
    REQUIRE(zig.size() == 4);
    CHECK(zig[1].y() == doctest::Approx(-zig[0].y()));
    CHECK_THROWS_AS(waypoints({Script::single, -1.0, 0.0, 0.3}), ConfigError);
  }

  TEST_CASE("rollout log of an untrained policy") {
    std::mt19937_64 rng(8);
    Policy p(Variant::foc, 0.75, {1.0}, {8}, {4}, -0.5, rng);
    const auto log = rollout(p, {Script::single, 1.5, 30.0, 0.3});
    REQUIRE_FALSE(log.rows.empty());
    REQUIRE(log.outcomes.size() == 1);
    CHECK(log.outcomes.front() != Outcome::running);
    CHECK(log.rows.front().t == doctest::Approx(0.05));
    CHECK(std::all_of(log.rows.begin(), log.rows.end(), [](const LogRow& r) { return r.K_f == 1.0; }));
    const sim::Vec2 expected = 1.5 * sim::Vec2(std::cos(M_PI / 6), std::sin(M_PI / 6));
    CHECK((log.goals.front() - expected).norm() < 0.5);

    std::ostringstream out;
    log.write_csv(out);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
    CHECK(std::count(header.begin(), header.end(), ',') == 23);

    const auto again = rollout(p, {Script::single, 1.5, 30.0, 0.3});
    CHECK(again.rows.size() == log.rows.size());
    CHECK(again.rows.back().head == log.rows.back().head);
  }

  TEST_CASE("steering study needs two angles") {
    std::mt19937_64 rng(8);
    Policy p(Variant::foc, 0.75, {1.0}, {8}, {4}, -0.5, rng);
    SteeringSettings s;
    s.angles = {30.0};
    CHECK_THROWS_AS(steering_study(p, s), ConfigError);
  }
}
