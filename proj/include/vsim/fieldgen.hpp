// Stochastic light sources and their two-time correlation kernels.
// Three source kinds: collisionally broadened CW (constant modulus, phase
// jumps at random times), noisy Gaussian pulse (Gaussian envelope with
// frequency jitter), and white noise (analytic construct, never sampled).
// All sampling is a pure function of (spec, noise, grid, seed).
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vsim/model.hpp"

namespace vsim {

enum class SourceKind { CW, Pulse, WhiteNoise };

struct FieldSpec {
  SourceKind kind = SourceKind::CW;
  double carrier_freq = 0.0;    // omega_0, rad/fs
  double amplitude = 1.0;       // dimensionless multiplier on the dipole rates
  double coherence_time = 0.0;  // tau_d, fs (CW and Pulse)
  double pulse_duration = 0.0;  // tau_p, fs (Pulse)
  double pulse_center = 0.0;    // t_m, fs (Pulse)
  double turn_on = 0.0;         // t_0, fs (CW)
  double pump_power = 0.0;      // R, rad^2/fs (WhiteNoise)

  static FieldSpec cw(double omega0, double amplitude, double tau_d, double t0 = 0.0);
  static FieldSpec pulse(double omega0, double amplitude, double tau_d, double tau_p, double t_m);
  static FieldSpec white_noise(double omega0, double amplitude, double pump_power);

  void validate() const;
};

enum class JumpModel { PoissonRate, WienerPaper };

// How CW phase-interruption times are drawn. The default Poisson model with
// rate 1/tau_d reproduces the exponential correlation exactly in
// expectation. The WienerPaper variant draws a collision count b uniformly
// from [collision_count_min, collision_count_max] and spaces collisions by
// half-normal gaps scaled by drift_coefficient; its calibration against the
// target kernel is the user's problem, as it was in the original recipe.
struct NoiseModelConfig {
  JumpModel jump_model = JumpModel::PoissonRate;
  double drift_coefficient = 0.0;  // D, fs (WienerPaper)
  int collision_count_min = 10;
  int collision_count_max = 12;

  void validate() const;
};

// One sampled complex field on a uniform time grid.
struct FieldRealization {
  std::vector<double> grid;      // fs, uniform
  std::vector<Complex> values;   // analytic-signal amplitude per sample
  std::vector<double> jump_times;  // phase interruption times, strictly increasing
  std::vector<double> phases;      // phase after each segment start (CW); {phi_0} for pulses
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of K(t', t'') over a grid, with per-entry standard
// errors. Hermitian by construction: the lower triangle mirrors the upper.
struct CorrelationEstimate {
  std::vector<double> grid;
  Eigen::MatrixXcd kernel;
  int n_realizations = 0;
  Eigen::MatrixXd std_error;
};

// Inclusive uniform grid [t0, t1] with the given step (last point clipped to
// the largest t0 + k*step <= t1 + step*1e-9).
std::vector<double> make_grid(double t0, double t1, double step);

// Closed-form kernel <eps(t1) eps*(t2)>. CW: amp^2 e^{-i w0 (t1-t2)}
// e^{-|t1-t2|/tau_d} for both times past turn-on, else 0. Pulse: the full
// envelope * lag-Gaussian product. WhiteNoise has no pointwise value and
// throws; use the overload with a grid step for the discretized delta.
Complex analytic_kernel(const FieldSpec& spec, double t1, double t2);

// WhiteNoise convention on a discrete grid: R/dt on the diagonal, 0 off it.
Complex analytic_kernel(const FieldSpec& spec, double t1, double t2, double grid_step);

FieldRealization sample_cw(const FieldSpec& spec, const NoiseModelConfig& noise,
                           const std::vector<double>& grid, std::uint64_t seed);

FieldRealization sample_pulse(const FieldSpec& spec, const NoiseModelConfig& noise,
                              const std::vector<double>& grid, std::uint64_t seed);

// Dispatch on spec.kind (WhiteNoise throws: it is analytic-only).
FieldRealization sample_field(const FieldSpec& spec, const NoiseModelConfig& noise,
                              const std::vector<double>& grid, std::uint64_t seed);

// K_hat(t',t'') = (1/n) sum_k eps_k(t') conj(eps_k(t'')), realization k
// seeded by derive_seed(master_seed, k). Summation over k is pairwise on a
// fixed tree, so the result is bit-identical for any worker count.
CorrelationEstimate estimate_kernel(const FieldSpec& spec, const NoiseModelConfig& noise,
                                    int n, const std::vector<double>& grid,
                                    std::uint64_t master_seed, int workers = 0);

}  // namespace vsim
