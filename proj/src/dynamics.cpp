#include "vsim/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vsim/reduction.hpp"
#include "vsim/rng.hpp"

namespace vsim {

namespace {

inline Matrix3c lvn_rhs(const VSystem& sys, Complex field_value, const Matrix3c& rho) {
  const Matrix3c h = build_hamiltonian(sys, field_value);
  return Complex(0.0, 1.0) * (rho * h - h * rho);
}

// Largest angular rate present in the driven problem; bounds the RK4 phase
// step. The diagonal dominates at weak coupling but the drive term is
// included so strong fields are still resolved.
double max_rate(const VSystem& sys, const FieldRealization& field) {
  double vmax = 0.0;
  for (const Complex& v : field.values) vmax = std::max(vmax, std::abs(v));
  const double levels = std::max({std::abs(sys.ground_freq),
                                  std::abs(sys.excited_freqs[0]),
                                  std::abs(sys.excited_freqs[1])});
  return levels + (sys.dipole_rates[0] + sys.dipole_rates[1]) * vmax;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (carrier_divisor < 40)
    throw std::invalid_argument(
        "IntegratorConfig: carrier_divisor must be >= 40 (phase per step <= 2 pi/40)");
}

Trajectory propagate(const VSystem& sys, const FieldRealization& field,
                     const IntegratorConfig& integ) {
  sys.validate();
  integ.validate();
  if (field.grid.size() < 2 || field.values.size() != field.grid.size())
    throw std::invalid_argument("propagate: field needs >= 2 samples with matching grid");

  const double wmax = max_rate(sys, field);
  const double h_max =
      wmax > 0.0 ? 2.0 * std::numbers::pi / (wmax * integ.carrier_divisor)
                 : std::numeric_limits<double>::infinity();

  Trajectory traj;
  traj.grid = field.grid;
  traj.seed = field.seed;
  traj.states.reserve(field.grid.size());

  Matrix3c rho = ground_state();
  traj.states.push_back(rho);

  for (size_t k = 0; k + 1 < field.grid.size(); ++k) {
    const double t0 = field.grid[k];
    const double dt = field.grid[k + 1] - t0;
    if (!(dt > 0.0)) throw std::invalid_argument("propagate: grid must increase");
    const Complex v0 = field.values[k];
    const Complex dv = field.values[k + 1] - v0;
    const int m = std::max(1, static_cast<int>(std::ceil(dt / h_max)));
    const double h = dt / m;

    auto field_at = [&](double t) {
      const double frac = std::clamp((t - t0) / dt, 0.0, 1.0);
      return v0 + frac * dv;
    };

    for (int s = 0; s < m; ++s) {
      const double ta = t0 + s * h;
      const Complex ea = field_at(ta);
      const Complex eb = field_at(ta + 0.5 * h);
      const Complex ec = field_at(ta + h);
      const Matrix3c k1 = lvn_rhs(sys, ea, rho);
      const Matrix3c k2 = lvn_rhs(sys, eb, rho + (0.5 * h) * k1);
      const Matrix3c k3 = lvn_rhs(sys, eb, rho + (0.5 * h) * k2);
      const Matrix3c k4 = lvn_rhs(sys, ec, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    if (!rho.cwiseAbs().allFinite())
      throw std::runtime_error("propagate: non-finite state after grid node " +
                               std::to_string(k + 1));
    traj.states.push_back(rho);
  }
  return traj;
}

namespace {

// Per-node running sums for the mean state and the four monitored
// observables' squares. Addition is associative up to floating roundoff;
// the fixed reduction tree makes the roundoff identical for any worker
// count.
struct EnsembleAccum {
  std::vector<Matrix3c> sum;
  std::vector<std::array<double, 4>> sum_sq;

  EnsembleAccum& operator+=(const EnsembleAccum& o) {
    for (size_t g = 0; g < sum.size(); ++g) {
      sum[g] += o.sum[g];
      for (int c = 0; c < 4; ++c) sum_sq[g][c] += o.sum_sq[g][c];
    }
    return *this;
  }
};

}  // namespace

EnsembleResult ensemble_run(const VSystem& sys, const FieldSpec& spec,
                            const NoiseModelConfig& noise,
                            const std::vector<double>& grid, int n,
                            std::uint64_t master_seed, int workers,
                            const IntegratorConfig& integ) {
  if (n < 2) throw std::invalid_argument("ensemble_run: need n >= 2 realizations");

  const size_t g_count = grid.size();
  auto leaf = [&](std::uint64_t k) {
    const FieldRealization field =
        sample_field(spec, noise, grid, derive_seed(master_seed, k));
    const Trajectory traj = propagate(sys, field, integ);
    EnsembleAccum acc;
    acc.sum.resize(g_count);
    acc.sum_sq.resize(g_count);
    for (size_t g = 0; g < g_count; ++g) {
      const Matrix3c& rho = traj.states[g];
      acc.sum[g] = rho;
      const double p2 = rho(1, 1).real();
      const double p3 = rho(2, 2).real();
      const Complex c23 = rho(1, 2);
      acc.sum_sq[g] = {p2 * p2, p3 * p3, c23.real() * c23.real(),
                       c23.imag() * c23.imag()};
    }
    return acc;
  };

  const EnsembleAccum total =
      chunked_reduce<EnsembleAccum>(static_cast<std::uint64_t>(n), workers, leaf);

  EnsembleResult out;
  out.grid = grid;
  out.n_realizations = n;
  out.mean_states.resize(g_count);
  out.se_rho22.resize(g_count);
  out.se_rho33.resize(g_count);
  out.se_re23.resize(g_count);
  out.se_im23.resize(g_count);
  const double dn = static_cast<double>(n);
  for (size_t g = 0; g < g_count; ++g) {
    out.mean_states[g] = total.sum[g] / dn;
    const Matrix3c& mean = out.mean_states[g];
    const std::array<double, 4> means = {mean(1, 1).real(), mean(2, 2).real(),
                                         mean(1, 2).real(), mean(1, 2).imag()};
    std::array<double*, 4> dest = {&out.se_rho22[g], &out.se_rho33[g],
                                   &out.se_re23[g], &out.se_im23[g]};
    for (int c = 0; c < 4; ++c) {
      const double var_sum = std::max(0.0, total.sum_sq[g][c] - dn * means[c] * means[c]);
      *dest[c] = std::sqrt(var_sum / ((dn - 1.0) * dn));
    }
  }
  return out;
}

}  // namespace vsim
