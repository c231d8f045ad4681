#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "snakecpg/errors.hpp"
#include "snakecpg/measure.hpp"
#include "snakecpg/stats.hpp"

using namespace snakecpg;

namespace {

template <class F>
std::vector<double> sample(F f, double duration, double dt) {
  std::vector<double> x;
  for (std::size_t k = 0; k * dt < duration; ++k) x.push_back(f(static_cast<double>(k) * dt));
  return x;
}

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("sine wave") {
    const double w = 3.0;
    const auto x = sample([w](double t) { return 0.2 + 0.7 * std::sin(w * t); }, 60.0, 1e-3);
    const auto s = df::measure_signal(x, 1e-3, 10.0);
    CHECK(s.is_limit_cycle);
    CHECK(s.bias == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(s.amplitude == doctest::Approx(0.7).epsilon(1e-3));
    CHECK(s.frequency == doctest::Approx(w).epsilon(1e-3));
    CHECK(s.duty == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(s.periods >= 20);
  }

  TEST_CASE("square wave duty") {
    const double period = 2.0;
    const auto x = sample([&](double t) { return std::fmod(t, period) < 0.3 * period ? 1.0 : -1.0; }, 60.0, 1e-3);
    const auto s = df::measure_signal(x, 1e-3, 5.0);
    CHECK(s.is_limit_cycle);
    CHECK(s.duty == doctest::Approx(0.3).epsilon(1e-2));
    CHECK(s.bias == doctest::Approx(-0.4).epsilon(1e-2));
    CHECK(s.frequency == doctest::Approx(std::numbers::pi).epsilon(1e-3));
  }

  TEST_CASE("decaying oscillation is not a limit cycle") {
    const auto x = sample([](double t) { return std::exp(-0.2 * t) * std::sin(4.0 * t); }, 60.0, 1e-3);
    CHECK_FALSE(df::measure_signal(x, 1e-3, 0.0).is_limit_cycle);
  }

  TEST_CASE("constant signal") {
    const std::vector<double> x(1000, 0.3);
    const auto s = df::measure_signal(x, 1e-2, 1.0);
    CHECK_FALSE(s.is_limit_cycle);
    CHECK(s.bias == doctest::Approx(0.3));
    CHECK(s.frequency == 0.0);
  }

  TEST_CASE("transient longer than the record") {
    const std::vector<double> x(100, 0.0);
    CHECK_THROWS_AS(df::measure_signal(x, 1e-2, 5.0), DomainError);
  }
}

TEST_SUITE("stats") {
  TEST_CASE("exact line") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(f.n == 4);
  }

  TEST_CASE("noisy line matches hand computation") {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{2.1, 3.9, 6.2, 7.8, 10.1};
    // slope = Sxy / Sxx = 19.9 / 10, intercept = 6.02 - 1.99 * 3
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(1.99));
    CHECK(f.intercept == doctest::Approx(0.05));
    const double sst = 39.708;
    const double sse = sst - 1.99 * 19.9;
    CHECK(f.r2 == doctest::Approx(1.0 - sse / sst));
  }

  TEST_CASE("degenerate fits throw") {
    const std::vector<double> one{1.0}, flat{2, 2, 2}, y{1, 2, 3};
    CHECK_THROWS_AS(linear_fit(one, one), DomainError);
    CHECK_THROWS_AS(linear_fit(flat, y), DomainError);
  }

  TEST_CASE("ranks share ties") {
    const std::vector<double> x{10, 30, 20, 20};
    const auto r = ranks(x);
    CHECK(r == std::vector<double>{1.0, 4.0, 2.5, 2.5});
  }

  TEST_CASE("spearman") {
    const std::vector<double> x{1, 2, 3, 4, 5}, up{1, 4, 9, 16, 25}, down{5, 4, 3, 2, 1};
    CHECK(spearman(x, up) == doctest::Approx(1.0));
    CHECK(spearman(x, down) == doctest::Approx(-1.0));
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 1, 4, 3, 5};
    // 1 - 6 sum d^2 / (n (n^2 - 1)) with sum d^2 = 4
    CHECK(spearman(a, b) == doctest::Approx(0.8));
  }
}
