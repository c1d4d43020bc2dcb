// Unitary propagation of the V-system density matrix along sampled field
// realizations, and deterministic ensemble averaging over many realizations.
#pragma once

#include <cstdint>
#include <vector>

#include "vsim/fieldgen.hpp"
#include "vsim/model.hpp"

namespace vsim {

// Fixed-step classical RK4 on d rho/dt = i [rho, H(t)]. Each field-grid
// interval is subdivided so that the fastest Hamiltonian phase advances at
// most 2*pi/carrier_divisor per substep; field values between grid samples
// are linearly interpolated. Substep boundaries always land on grid nodes,
// so the piecewise-linear field's derivative kinks never fall inside a step.
struct IntegratorConfig {
  int carrier_divisor = 160;

  void validate() const;
};

// States are reported exactly at the field grid nodes; states[0] is the
// pure ground state.
struct Trajectory {
  std::vector<double> grid;
  std::vector<DensityMatrix> states;
  std::uint64_t seed = 0;
};

Trajectory propagate(const VSystem& sys, const FieldRealization& field,
                     const IntegratorConfig& integ = {});

// Sample mean of the full density matrix per node plus standard errors of
// the four monitored observables (rho_22, rho_33, Re rho_23, Im rho_23).
// Realization k always uses derive_seed(master_seed, k) and the reduction
// tree is fixed, so results are bit-identical for any worker count.
struct EnsembleResult {
  std::vector<double> grid;
  std::vector<DensityMatrix> mean_states;
  int n_realizations = 0;
  std::vector<double> se_rho22, se_rho33, se_re23, se_im23;
};

EnsembleResult ensemble_run(const VSystem& sys, const FieldSpec& spec,
                            const NoiseModelConfig& noise,
                            const std::vector<double>& grid, int n,
                            std::uint64_t master_seed, int workers = 0,
                            const IntegratorConfig& integ = {});

}  // namespace vsim
