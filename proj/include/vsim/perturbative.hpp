// First-order closed forms for the excited-state block under each light
// source, plus a brute-force 2D-quadrature oracle for the underlying double
// time integral. Pair indices (i, j) pick excited levels: 0 -> |2>, 1 -> |3>.
// All CW expressions take t as time elapsed since turn-on (the sudden
// turn-on convention with t_0 = 0).
#pragma once

#include "vsim/fieldgen.hpp"
#include "vsim/model.hpp"

namespace vsim {

// Per-pair decomposition of the CW response integral into the long-time
// term and the three transient-carrying terms. The sum eta_lt + eta_1 +
// eta_2 + eta_3 equals
//   int_0^t dt' int_0^t dt'' e^{+i d_i t'} e^{-i d_j t''} e^{-|t'-t''|/tau_d}
// exactly, where d_k is the detuning of level k from the carrier (it
// vanishes at t = 0). With this phase pairing the lab-frame coherence is
// e^{-i w_ij t} times the sum, matching the rotating-frame amplitudes
// c_i c_j^* built from the analytic-signal coupling.
struct EtaBreakdown {
  Complex eta_lt{};
  Complex eta_1{};
  Complex eta_2{};
  Complex eta_3{};
  double delta_i = 0.0;      // omega_ig - omega_0, rad/fs
  double delta_j = 0.0;      // omega_jg - omega_0, rad/fs
  double lorentzian_r = 0.0; // R(delta_j), fs

  Complex sum() const { return eta_lt + eta_1 + eta_2 + eta_3; }
};

// Turn-on-averaged long-time coherence F, |F|^2 and its large-tau_d
// saturation 16/omega_ji^4 for the (|2>, |3>) pair.
struct StationaryCoherence {
  Complex f_value{};
  double f_squared = 0.0;  // fs^4 units (|F|^2)
  double saturation = 0.0; // 16/omega_ji^4
};

// Refinement-controlled tensor-product Gauss-Legendre quadrature for the
// oracle. Panel widths start at min(tau_d, tau_p, 2*pi/max|detuning|) and
// the panel count doubles until successive results agree to rel_tol.
struct QuadratureConfig {
  double rel_tol = 1e-8;
  int max_doublings = 3;
  double skip_exponent = 50.0;  // drop panel squares whose lag factor < e^-skip
};

// Spectral weight U(omega) = 2*tau_d / (1 + tau_d^2 (omega - omega_0)^2), fs.
double lorentzian_u(double omega, const FieldSpec& spec);

// Evaluate the four-term decomposition for pair (i, j) at time t since
// turn-on. i == j uses the analytic degenerate limit (eta_lt -> U t).
EtaBreakdown eta_breakdown(const VSystem& sys, const FieldSpec& spec, double t,
                           int i = 0, int j = 1);

// Assemble the 2x2 excited block from the closed forms. Entry (i, j) is
// rate_i * rate_j * amplitude^2 * e^{-i omega_ij t} * (eta sum).
ExcitedBlock excited_block_cw(const VSystem& sys, const FieldSpec& spec, double t);

// Direct numerical double integral of the response expression with the
// analytic kernel (CW or Pulse). Ground truth for everything closed-form.
// Throws if the refinement loop fails to converge.
ExcitedBlock excited_block_oracle(const VSystem& sys, const FieldSpec& spec,
                                  double t0, double t,
                                  const QuadratureConfig& quad = {});

// Post-pulse asymptotic eta_p^{ij} = tau_p T e^{i t_m omega_ij}
// e^{-tau_p^2 omega_ij^2 / 8} e^{-T^2 (delta_i + delta_j)^2 / 8} with
// T = tau_p tau_d / sqrt(tau_p^2 + tau_d^2).
Complex pulse_eta(const VSystem& sys, const FieldSpec& spec, int i, int j);

// Post-pulse coherence measure from the eta_p ratio (exact at first order,
// any dipole ratio). Reduces to the familiar centered closed form when
// omega_0 sits midway between the levels.
double c_pulse(const VSystem& sys, const FieldSpec& spec);

// Long-pulse (tau_p >> tau_d) approximation (1/2) e^{(tau_d^2 - tau_p^2)
// omega_ij^2 / 8}, reported alongside the exact value.
double c_pulse_longpulse(const VSystem& sys, const FieldSpec& spec);

// Excited block for t well past the pulse: populations constant, coherence
// constant in magnitude with phase e^{-i omega_ij t}. The overall constant
// is pi * eta_p (the closed 2D Gaussian integral carries the factor pi).
// Requires t - t_m >= 4 tau_p; earlier times are inside the pulse where the
// asymptotic form is invalid.
ExcitedBlock excited_block_pulse_longtime(const VSystem& sys, const FieldSpec& spec,
                                          double t);

// Block after uniform averaging of the turn-on time over one splitting
// period: populations as in excited_block_cw, coherence equal to the
// stationary value prefactor * F, reported in the frame corotating at the
// level splitting (where it is time independent). Valid for t >= 10 tau_d.
ExcitedBlock turnon_averaged_block(const VSystem& sys, const FieldSpec& spec, double t);

// F, |F|^2 and the saturation constant. Only reads carrier_freq and
// coherence_time from the spec (tau_d = 0 is allowed and gives F = 0).
StationaryCoherence stationary_coherence(const VSystem& sys, const FieldSpec& spec);

// White-noise closed forms: pop_i = (rate_i)^2 R t, coherence
// rate_i rate_j R (1 - e^{-i omega_ij t}) / (i omega_ij).
ExcitedBlock white_noise_block(const VSystem& sys, double pump_power, double t);

// C(t) = |1 - e^{-i omega_ij t}| / (2 |omega_ij| t), equal-dipole case;
// pump-power independent. t -> 0+ limit is 1/2. Throws for t <= 0.
double c_white(double omega_ij, double t);
double c_white(const VSystem& sys, double t);

}  // namespace vsim
