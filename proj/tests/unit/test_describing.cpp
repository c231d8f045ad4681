#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "snakecpg/describing.hpp"
#include "snakecpg/errors.hpp"

using namespace snakecpg;
using namespace snakecpg::df;

namespace {

constexpr double kPi = std::numbers::pi;

// Integrates over the arc where cos t + r > 0 so the integrand is smooth.
template <class F>
double over_active_arc(double r, F f) {
  if (r <= -1.0) return 0.0;
  const double half = r >= 1.0 ? kPi : std::acos(-r);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -half, half, 15, 1e-14);
}

double K_quadrature(double r) {
  return over_active_arc(r, [r](double t) { return (std::cos(t) + r) * std::cos(t); }) / kPi;
}

double L_quadrature(double r) {
  return over_active_arc(r, [r](double t) { return std::cos(t) + r; }) / (2.0 * kPi);
}

}  // namespace

TEST_SUITE("describing") {
  TEST_CASE("K and L agree with quadrature on [-1, 1]") {
    double worst_k = 0.0, worst_l = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double r = -1.0 + 0.02 * i;
      worst_k = std::max(worst_k, std::abs(gate_fourier_K(r) - K_quadrature(r)));
      worst_l = std::max(worst_l, std::abs(gate_fourier_L(r) - L_quadrature(r)));
    }
    CHECK(worst_k < 1e-9);
    CHECK(worst_l < 1e-9);
  }

  TEST_CASE("K and L limits") {
    CHECK(gate_fourier_K(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gate_fourier_K(-1.0) == doctest::Approx(0.0));
    CHECK(gate_fourier_K(1.0) == doctest::Approx(1.0));
    CHECK(gate_fourier_L(0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
    CHECK(gate_fourier_L(-2.0) == 0.0);
    CHECK(gate_fourier_L(2.0) == 2.0);
  }

  TEST_CASE("inverse K round-trips") {
    for (double r : {-0.95, -0.5, 0.0, 0.29, 0.8, 0.99}) {
      CHECK(inverse_K(gate_fourier_K(r)) == doctest::Approx(r).epsilon(1e-10));
    }
    CHECK_THROWS_AS(inverse_K(0.0), DomainError);
    CHECK_THROWS_AS(inverse_K(1.2), DomainError);
  }

  TEST_CASE("closed-form constants for the table parameters") {
    cpg::OscillatorParams p;
    const double Kn = (p.tau_r + p.tau_a) / (p.tau_a * p.a);
    CHECK(harmonic_gain(p) == doctest::Approx(Kn).epsilon(1e-15));
    CHECK(harmonic_gain(p) == doctest::Approx(0.685032).epsilon(1e-6));
    CHECK(natural_frequency(p) == doctest::Approx(std::sqrt(Kn * p.b - 1.0) / p.tau_r).epsilon(1e-15));
    CHECK(natural_frequency(p) == doctest::Approx(3.149385).epsilon(1e-6));
    p.K_f = 0.5;
    CHECK(natural_frequency(p) == doctest::Approx(2.0 * 3.149385).epsilon(1e-6));
  }

  TEST_CASE("free amplitude matches its definition") {
    cpg::OscillatorParams p;
    p.c = 0.75;
    const double r = inverse_K(harmonic_gain(p));
    CHECK(free_amplitude(p) == doctest::Approx(0.75 / (r + (p.a + p.b) * gate_fourier_L(r))).epsilon(1e-14));
    p.c = 0.0;
    CHECK(free_amplitude(p) == 0.0);
  }

  TEST_CASE("entrainment threshold") {
    cpg::OscillatorParams p;
    p.c = 0.75;
    CHECK(entrainment_threshold(3.77, p) == doctest::Approx(0.390717).epsilon(1e-5));
    CHECK(entrainment_threshold(5.02, p) == doctest::Approx(0.830174).epsilon(1e-5));
    double prev = 0.0;
    for (int i = 0; i <= 50; ++i) {
      const double a0 = entrainment_threshold(3.77 + (5.02 - 3.77) * i / 50.0, p);
      CHECK(a0 >= prev);
      prev = a0;
    }
    CHECK_THROWS_AS(entrainment_threshold(natural_frequency(p), p), SingularityError);
    try {
      entrainment_threshold(natural_frequency(p), p);
    } catch (const SingularityError& e) {
      CHECK(e.limit() == 0.0);
    }
    p.c = 0.0;
    for (double w : {0.5, 3.0, natural_frequency(p), 10.0}) CHECK(entrainment_threshold(w, p) == 0.0);
  }

  TEST_CASE("duty-law inversion") {
    cpg::OscillatorParams p;
    DutyFit fit{0.4, 0.01};
    const double s = fit.slope(p);
    const double intercept = predict_bias_duty(0.0, fit, p);
    const auto back = duty_fit_from_line(s, intercept, p);
    CHECK(back.K_m == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(back.M == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(predict_bias_duty(0.7, fit, p) == doctest::Approx(s * 0.7 + intercept).epsilon(1e-12));
    CHECK_THROWS_AS((DutyFit{1.5, 0.0}.check()), DomainError);
  }

  TEST_CASE("constant-input bias prediction is odd about u_e = 1/2") {
    cpg::OscillatorParams p;
    CHECK(predict_bias_constant(0.5, p) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(predict_bias_constant(0.2, p) == doctest::Approx(-predict_bias_constant(0.8, p)).epsilon(1e-12));
  }
}
