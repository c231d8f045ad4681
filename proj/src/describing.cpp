#include "snakecpg/describing.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "snakecpg/errors.hpp"

namespace snakecpg::df {

namespace {

constexpr double kPi = std::numbers::pi;

double denominator_or_throw(double d, const char* what) {
  if (d == 0.0 || !std::isfinite(d)) throw DomainError(what);
  return d;
}

}  // namespace

double gate_fourier_K(double r) {
  if (r < -1.0) return 0.0;
  if (r > 1.0) return 1.0;
  return (r * std::sqrt(1.0 - r * r) - std::acos(r)) / kPi + 1.0;
}

double gate_fourier_L(double r) {
  if (r < -1.0) return 0.0;
  if (r > 1.0) return r;
  return (std::sqrt(1.0 - r * r) - r * std::acos(r)) / kPi + r;
}

double inverse_K(double k) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError("K^-1 has no root for gain outside (0, 1)");
  std::uintmax_t iterations = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      [k](double r) { return gate_fourier_K(r) - k; }, -1.0, 1.0,
      boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.5 * (lo + hi);
}

double harmonic_gain(const cpg::OscillatorParams& p) {
  if (p.a == 0.0) throw DomainError("harmonic gain undefined for a = 0");
  return (p.tau_r + p.tau_a) / (p.tau_a * p.a);
}

double natural_frequency(const cpg::OscillatorParams& p) {
  const double radicand = harmonic_gain(p) * p.b - 1.0;
  if (!(radicand > 0.0)) throw DomainError("natural frequency radicand is not positive");
  return std::sqrt(radicand) / (p.tau_r * p.K_f);
}

double natural_frequency_swapped(const cpg::OscillatorParams& p) {
  if (p.a == 0.0) throw DomainError("natural frequency undefined for a = 0");
  const double radicand = (p.tau_a + p.tau_r) * p.b / (p.tau_r * p.a) - 1.0;
  if (!(radicand > 0.0)) throw DomainError("natural frequency radicand is not positive");
  return std::sqrt(radicand) / (p.tau_a * p.K_f);
}

double free_amplitude(const cpg::OscillatorParams& p) {
  const double r = inverse_K(harmonic_gain(p));
  const double d = denominator_or_throw(r + (p.a + p.b) * gate_fourier_L(r),
                                        "free amplitude denominator vanishes");
  return p.c / d;
}

double entrainment_threshold(double omega, const cpg::OscillatorParams& p) {
  if (p.c < 0.0) throw DomainError("entrainment threshold needs c >= 0");
  if (p.c == 0.0) return 0.0;
  const double wn = natural_frequency(p);
  const double gap = std::abs(omega * omega - wn * wn);
  if (gap <= 1e-12 * wn * wn) {
    throw SingularityError("entrainment threshold is singular at the natural frequency", 0.0);
  }
  const double tr = p.K_f * p.tau_r;
  const double ta = p.K_f * p.tau_a;
  const double An = free_amplitude(p);
  const double lead = 0.5 * std::sqrt(tr * tr * omega * omega + 1.0) / (tr * ta * gap);
  return p.c / (lead * p.c / An + 1.0 / kPi);
}

double predict_bias_constant(double u_e, const cpg::OscillatorParams& p) {
  const double kn = harmonic_gain(p);
  const double d = denominator_or_throw((p.b - p.a) * kn + 1.0, "bias prediction is singular");
  return kn * (2.0 * u_e - 1.0) / d;
}

void DutyFit::check() const {
  if (!(K_m > 0.0 && K_m < 1.0)) throw DomainError("K_m must lie in (0, 1)");
}

double DutyFit::slope(const cpg::OscillatorParams& p) const {
  const double d = denominator_or_throw(K_m * (p.b - p.a) + 1.0, "duty prediction is singular");
  return 2.0 * K_m / d;
}

double predict_bias_duty(double duty, const DutyFit& fit, const cpg::OscillatorParams& p) {
  const double ba = p.b - p.a;
  const double d = denominator_or_throw(fit.K_m * ba + 1.0, "duty prediction is singular");
  return fit.K_m * (2.0 * duty - 1.0 - fit.M * ba) / d + fit.M;
}

DutyFit duty_fit_from_line(double slope, double intercept, const cpg::OscillatorParams& p) {
  const double ba = p.b - p.a;
  DutyFit fit;
  fit.K_m = slope / denominator_or_throw(2.0 - slope * ba, "duty slope cannot be inverted");
  fit.M = intercept * (fit.K_m * ba + 1.0) + fit.K_m;
  return fit;
}

}  // namespace snakecpg::df
