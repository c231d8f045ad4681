#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "snakecpg/cpg.hpp"
#include "snakecpg/errors.hpp"

using namespace snakecpg;
using namespace snakecpg::cpg;

namespace {

double max_abs_psi(const Trajectory& t) {
  double m = 0.0;
  for (const auto& o : t.output) {
    for (double v : o.psi) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace

TEST_SUITE("cpg") {
  TEST_CASE("decoded actions are exclusive") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
      std::array<double, 4> a{n(rng), n(rng), n(rng), n(rng)};
      const auto u = decode_action(a);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(u.u_e[i] + u.u_f[i] == 1.0);
        CHECK(u.u_e[i] >= 0.0);
        CHECK(u.u_e[i] <= 1.0);
      }
    }
    std::array<double, 4> zero{};
    CHECK(decode_action(zero).u_e[0] == 0.5);
  }

  TEST_CASE("firing rate is non-negative") {
    for (double x : {-3.0, -1e-12, 0.0, 1e-12, 2.5}) CHECK(firing(x) >= 0.0);
    CHECK(firing(2.5) == 2.5);
    CHECK(firing(-2.5) == 0.0);
  }

  TEST_CASE("origin is a fixed point without input") {
    OscillatorParams p;
    NetworkState s;
    for (int k = 0; k < 5000; ++k) s = step_network(s, TonicInputs{}, p, 1e-3);
    CHECK(s == NetworkState{});
    const auto d = derivative(NetworkState{}, TonicInputs{}, p);
    CHECK(d == NetworkState{});
  }

  TEST_CASE("oscillation condition arithmetic") {
    OscillatorParams p;
    const auto r = validate_params(p);
    CHECK(r.lhs == doctest::Approx((p.tau_a - p.tau_r) * (p.tau_a - p.tau_r)).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(4.0 * p.tau_r * p.tau_a * p.b).epsilon(1e-15));
    CHECK(r.oscillation_possible);
    p.b = 0.0;
    CHECK_FALSE(validate_params(p).oscillation_possible);
    p = OscillatorParams{};
    p.tau_r = 1.0;
    p.tau_a = 3.0;
    p.b = 1.0 / 3.0;  // lhs == rhs: strict inequality fails
    CHECK_FALSE(validate_params(p).oscillation_possible);
    p.b = 0.34;
    CHECK(validate_params(p).oscillation_possible);
  }

  TEST_CASE("extensor/flexor mirror flips psi") {
    OscillatorParams p;
    TonicInputs u;
    u.u_e = {0.9, 0.2, 0.6, 0.4};
    u.u_f = {0.1, 0.8, 0.4, 0.6};
    NetworkState s0 = NetworkState::seeded();
    s0.y_f[2] = 0.05;
    const auto a = simulate(p, constant_schedule(u), 20.0, 1e-3, s0);
    const auto b = simulate(p, constant_schedule(u.swapped()), 20.0, 1e-3, s0.mirrored());
    REQUIRE(a.size() == b.size());
    double dev = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (std::size_t i = 0; i < 4; ++i) dev = std::max(dev, std::abs(a.output[k].psi[i] + b.output[k].psi[i]));
    }
    CHECK(dev < 1e-9);
  }

  TEST_CASE("psi stays within [-1, 1] under balanced tonic inputs") {
    OscillatorParams p;
    for (double u : {0.0, 0.3, 0.5, 1.0}) {
      const auto t = simulate(p, constant_schedule(TonicInputs::uniform(u, u)), 60.0, 1e-3, NetworkState::seeded());
      CHECK(max_abs_psi(t) <= 1.0);
    }
  }

  TEST_CASE("psi never exceeds A_z times the largest tonic input") {
    OscillatorParams p;
    for (double ue : {0.0, 0.3, 1.0}) {
      for (double uf : {0.0, 0.7, 1.0}) {
        const auto t = simulate(p, constant_schedule(TonicInputs::uniform(ue, uf)), 60.0, 1e-3,
                                NetworkState::seeded());
        CHECK(max_abs_psi(t) <= p.A_z * std::max({ue, uf, 0.01}));
      }
    }
    const auto pulse = simulate(p, pulse_schedule(2.0, 0.3), 60.0, 1e-3, NetworkState::seeded());
    CHECK(max_abs_psi(pulse) <= p.A_z);
  }

  TEST_CASE("K_f is an exact time rescaling") {
    OscillatorParams p;
    p.K_f = 0.6;
    OscillatorParams ref;
    const auto u = TonicInputs::uniform(1.0, 1.0);
    NetworkState a = NetworkState::seeded(), b = NetworkState::seeded();
    for (int k = 0; k < 10000; ++k) {
      a = step_network(a, u, p, 0.6e-3);
      b = step_network(b, u, ref, 1e-3);
    }
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(a.x_e[i] == doctest::Approx(b.x_e[i]).epsilon(1e-9));
      CHECK(a.y_f[i] == doctest::Approx(b.y_f[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("RK4 step converges to a fine reference") {
    OscillatorParams p;
    const auto u = TonicInputs::uniform(1.0, 1.0);
    auto run = [&](double dt) {
      NetworkState s = NetworkState::seeded();
      const int n = static_cast<int>(std::lround(5.0 / dt));
      for (int k = 0; k < n; ++k) s = step_network(s, u, p, dt);
      return s;
    };
    const auto fine = run(1.25e-4);
    auto err = [&](const NetworkState& s) {
      double e = 0.0;
      for (std::size_t i = 0; i < 4; ++i) e = std::max({e, std::abs(s.x_e[i] - fine.x_e[i]), std::abs(s.x_f[i] - fine.x_f[i])});
      return e;
    };
    const double e1 = err(run(2e-3));
    const double e2 = err(run(1e-3));
    CHECK(e2 < 1e-6);
    CHECK(e2 < e1);
  }

  TEST_CASE("simulation is deterministic") {
    OscillatorParams p;
    const auto a = simulate(p, pulse_schedule(1.7, 0.4), 10.0, 1e-3, NetworkState::seeded());
    const auto b = simulate(p, pulse_schedule(1.7, 0.4), 10.0, 1e-3, NetworkState::seeded());
    CHECK(a.states == b.states);
  }

  TEST_CASE("held schedule samples once per interval") {
    auto inner = [](double t) {
        return TonicInputs::uniform(t, 1.0 - t);
    };
    auto held = held_schedule(inner, 0.05);
    CHECK(held(0.0).u_e[0] == 0.0);
    CHECK(held(0.049).u_e[0] == 0.0);
    CHECK(held(0.051).u_e[0] == doctest::Approx(0.05));
  }

  TEST_CASE("invalid parameters are rejected") {
    OscillatorParams p;
    p.K_f = 0.0;
    CHECK_THROWS_AS(p.check(), ConfigError);
    p = OscillatorParams{};
    p.c = -0.1;
    CHECK_THROWS_AS(p.check(), ConfigError);
  }

  TEST_CASE("divergence is reported") {
    OscillatorParams p;
    NetworkState s;
    s.x_e[0] = std::nan("");
    CHECK_THROWS_AS(step_network(s, TonicInputs{}, p, 1e-3), DivergenceError);
  }
}
