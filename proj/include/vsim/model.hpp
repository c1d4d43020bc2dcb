// Three-level V system: level structure, unit conventions and the driven
// Hamiltonian. Units: hbar = 1, time in fs, every frequency an angular rate
// in rad/fs. Basis order is (|g>, |2>, |3>) everywhere.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace vsim {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

// Full 3x3 state in the (g, 2, 3) basis.
using DensityMatrix = Eigen::Matrix3cd;

// Ordinary frequency in THz -> angular rate in rad/fs.
inline double angular(double nu_thz) { return 2.0 * std::numbers::pi * nu_thz * 1e-3; }

// One ground state dipole-coupled to two non-degenerate excited states that
// are not coupled to each other. dipole_rates holds mu_k*eps0/hbar at unit
// field amplitude; the dimensionless amplitude itself lives in FieldSpec.
struct VSystem {
  double ground_freq = 0.0;                    // rad/fs
  std::array<double, 2> excited_freqs{0.0, 0.0};  // rad/fs, ascending
  std::array<double, 2> dipole_rates{0.0, 0.0};   // rad/fs at unit amplitude

  // Transition frequency omega_kg of level k (0 -> |2>, 1 -> |3>).
  double omega_kg(int k) const { return excited_freqs[static_cast<size_t>(k)] - ground_freq; }

  // Excited-state splitting omega_32 > 0.
  double splitting() const { return excited_freqs[1] - excited_freqs[0]; }

  void validate() const {
    if (!(excited_freqs[0] < excited_freqs[1]))
      throw std::invalid_argument("VSystem: excited_freqs must be strictly ascending");
    if (!(excited_freqs[0] > ground_freq))
      throw std::invalid_argument("VSystem: excited levels must lie above the ground level");
    if (!(dipole_rates[0] > 0.0) || !(dipole_rates[1] > 0.0))
      throw std::invalid_argument("VSystem: dipole_rates must be strictly positive");
  }
};

// H = diag(w_g, w_2, w_3) with zero excited-excited coupling. The upward
// transition element <k|H|g> carries the analytic-signal field itself,
// <k|H|g> = -mu_k*eps(t), and <g|H|k> its conjugate: eps ~ e^{-i w0 t}, so
// this pairing makes absorption resonant at w_kg ~ w0, which is what the
// first-order response (Lorentzian centered on the carrier) requires.
// Hermitian by construction.
inline Matrix3c build_hamiltonian(const VSystem& sys, Complex field_value) {
  Matrix3c h = Matrix3c::Zero();
  h(0, 0) = sys.ground_freq;
  h(1, 1) = sys.excited_freqs[0];
  h(2, 2) = sys.excited_freqs[1];
  h(1, 0) = -sys.dipole_rates[0] * field_value;
  h(2, 0) = -sys.dipole_rates[1] * field_value;
  h(0, 1) = std::conj(h(1, 0));
  h(0, 2) = std::conj(h(2, 0));
  return h;
}

// Characteristic excited-state timescale tau_c = 2*pi/omega_32.
inline double characteristic_time(const VSystem& sys) {
  const double w32 = sys.splitting();
  if (w32 == 0.0)
    throw std::domain_error("characteristic_time: degenerate excited levels (tau_c infinite)");
  return 2.0 * std::numbers::pi / w32;
}

// 2x2 excited-manifold sub-block: (pop_i, coh; conj(coh), pop_j) with
// i = |2>, j = |3>. Physical blocks are positive semidefinite.
struct ExcitedBlock {
  double pop_i = 0.0;
  double pop_j = 0.0;
  Complex coh_ij{0.0, 0.0};

  double trace() const { return pop_i + pop_j; }

  // det >= -tol test with tol = 1e-10*max(pop)^2; roundoff-level negativity
  // is expected for blocks assembled from quadrature or ensembles.
  bool is_psd(double tol_scale = 1e-10) const {
    const double m = std::max(pop_i, pop_j);
    const double tol = tol_scale * m * m;
    return pop_i >= -tol && pop_j >= -tol &&
           pop_i * pop_j - std::norm(coh_ij) >= -tol;
  }
};

inline DensityMatrix ground_state() {
  DensityMatrix rho = DensityMatrix::Zero();
  rho(0, 0) = 1.0;
  return rho;
}

inline ExcitedBlock excited_block_of(const DensityMatrix& rho) {
  return ExcitedBlock{rho(1, 1).real(), rho(2, 2).real(), rho(1, 2)};
}

// Largest entrywise |rho_ij - conj(rho_ji)|.
inline double hermiticity_defect(const DensityMatrix& rho) {
  return (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
}

}  // namespace vsim
