#pragma once

#include "snakecpg/cpg.hpp"

// Describing-function approximations of a single Matsuoka oscillator.
// Time constants enter as K_f * tau throughout.
namespace snakecpg::df {

// Gain and offset of the rectifier max(0, x) driven by cos(t) + r.
double gate_fourier_K(double r);
double gate_fourier_L(double r);
// r in [-1, 1] with K(r) = k. Throws DomainError unless 0 < k < 1.
double inverse_K(double k);

// K_n = (tau_r + tau_a) / (tau_a a).
double harmonic_gain(const cpg::OscillatorParams& p);

// (1 / (K_f tau_r)) sqrt((tau_r + tau_a) b / (tau_a a) - 1). Throws DomainError
// when the radicand is not positive.
double natural_frequency(const cpg::OscillatorParams& p);
// Alternative form with the roles of tau_r and tau_a exchanged:
// (1 / (K_f tau_a)) sqrt((tau_a + tau_r) b / (tau_r a) - 1).
double natural_frequency_swapped(const cpg::OscillatorParams& p);

// Free-response amplitude A_n = c / (K^-1(K_n) + (a + b) L(K^-1(K_n))).
double free_amplitude(const cpg::OscillatorParams& p);

// Minimum forced-input amplitude A_0(omega) that entrains the oscillator.
// Identically zero for c = 0; throws SingularityError (limit 0) at omega_n.
double entrainment_threshold(double omega, const cpg::OscillatorParams& p);

// Bias of psi / A_z under constant exclusive tonic inputs (u_e, 1 - u_e).
double predict_bias_constant(double u_e, const cpg::OscillatorParams& p);

struct DutyFit {
  double K_m = 0.5;
  double M = 0.0;

  void check() const;  // K_m in (0, 1)
  double slope(const cpg::OscillatorParams& p) const;
};

// Bias of psi / A_z under exclusive pulse-train tonic inputs.
double predict_bias_duty(double duty, const DutyFit& fit, const cpg::OscillatorParams& p);
// Inverts the affine law bias = slope * duty + intercept into (K_m, M).
DutyFit duty_fit_from_line(double slope, double intercept, const cpg::OscillatorParams& p);

}  // namespace snakecpg::df
