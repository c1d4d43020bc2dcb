#include <cmath>
#include <complex>
#include <stdexcept>

#include "doctest.h"
#include "test_support.hpp"
#include "vsim/model.hpp"
#include "vsim/rng.hpp"

using namespace vsim;
using test::detuned_system;

TEST_SUITE("model") {

TEST_CASE("angular converts ordinary THz frequencies to rad/fs") {
  CHECK(angular(19.0) == doctest::Approx(0.119380520836412).epsilon(1e-13));
  CHECK(angular(529.0) == doctest::Approx(3.323805027498).epsilon(1e-12));
  CHECK(angular(0.0) == 0.0);
  CHECK(angular(-2.0) == -angular(2.0));
}

TEST_CASE("system validation rejects malformed level structures") {
  VSystem ok = detuned_system(2.0, -0.4, 0.7, 1.0, 0.5);
  CHECK_NOTHROW(ok.validate());

  VSystem swapped = ok;
  std::swap(swapped.excited_freqs[0], swapped.excited_freqs[1]);
  CHECK_THROWS_AS(swapped.validate(), std::invalid_argument);

  VSystem degenerate = ok;
  degenerate.excited_freqs[1] = degenerate.excited_freqs[0];
  CHECK_THROWS_AS(degenerate.validate(), std::invalid_argument);

  VSystem below = ok;
  below.ground_freq = 10.0;
  CHECK_THROWS_AS(below.validate(), std::invalid_argument);

  VSystem zero_rate = ok;
  zero_rate.dipole_rates[1] = 0.0;
  CHECK_THROWS_AS(zero_rate.validate(), std::invalid_argument);
}

TEST_CASE("free Hamiltonian is the bare diagonal") {
  const VSystem sys = detuned_system(2.0, -0.4, 0.7, 1.0, 0.5);
  const Matrix3c h = build_hamiltonian(sys, Complex(0.0, 0.0));
  CHECK(h(0, 0) == Complex(0.0, 0.0));
  CHECK(h(1, 1) == Complex(1.6, 0.0));
  CHECK(h(2, 2) == Complex(2.7, 0.0));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r != c) CHECK(h(r, c) == Complex(0.0, 0.0));
}

TEST_CASE("drive enters on the upward transition with conjugate partner") {
  // The analytic signal eps ~ e^{-i w0 t} must sit on <k|H|g> so that
  // absorption accumulates at the slow phase w_kg - w0; the conjugate goes
  // to <g|H|k>. The excited-excited element stays exactly zero.
  const VSystem sys = detuned_system(2.0, -0.4, 0.7, 1.0, 0.5);
  const Matrix3c h = build_hamiltonian(sys, Complex(0.0, 1.0));
  CHECK(h(1, 0) == Complex(0.0, -1.0));  // -1.0 * i
  CHECK(h(0, 1) == Complex(0.0, 1.0));
  CHECK(h(2, 0) == Complex(0.0, -0.5));  // -0.5 * i
  CHECK(h(0, 2) == Complex(0.0, 0.5));
  CHECK(h(1, 2) == Complex(0.0, 0.0));
  CHECK(h(2, 1) == Complex(0.0, 0.0));
}

TEST_CASE("Hamiltonian is exactly Hermitian for random drives") {
  const VSystem sys = detuned_system(1.0, -0.2, 0.3, 0.7, 1.3);
  Rng rng(321);
  for (int k = 0; k < 200; ++k) {
    const Complex v(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    const Matrix3c h = build_hamiltonian(sys, v);
    CHECK(hermiticity_defect(h) == 0.0);
  }
}

TEST_CASE("characteristic time is the splitting period") {
  const VSystem sys = test::pc645_system();
  CHECK(sys.splitting() == doctest::Approx(angular(19.0)).epsilon(1e-14));
  // 2 pi / (2 pi 19e-3) = 1000/19 fs
  CHECK(characteristic_time(sys) == doctest::Approx(1000.0 / 19.0).epsilon(1e-13));

  VSystem degenerate = sys;
  degenerate.excited_freqs[1] = degenerate.excited_freqs[0];
  CHECK_THROWS_AS(characteristic_time(degenerate), std::domain_error);
}

TEST_CASE("excited block extraction reads the (2,3) corner") {
  DensityMatrix rho = DensityMatrix::Zero();
  rho(0, 0) = 0.4;
  rho(1, 1) = 0.25;
  rho(2, 2) = 0.35;
  rho(1, 2) = Complex(0.1, -0.05);
  rho(2, 1) = std::conj(rho(1, 2));
  const ExcitedBlock b = excited_block_of(rho);
  CHECK(b.pop_i == 0.25);
  CHECK(b.pop_j == 0.35);
  CHECK(b.coh_ij == Complex(0.1, -0.05));
  CHECK(b.trace() == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("block positivity test accepts the pure boundary, rejects beyond") {
  // |coh| = sqrt(p2 p3) is the pure-block boundary.
  ExcitedBlock boundary{0.25, 0.75, Complex(std::sqrt(3.0) / 4.0, 0.0)};
  CHECK(boundary.is_psd());

  ExcitedBlock beyond{0.25, 0.75, Complex(0.44, 0.0)};  // > sqrt(3)/4 = 0.433
  CHECK_FALSE(beyond.is_psd());

  ExcitedBlock negative{-1e-3, 0.5, Complex(0.0, 0.0)};
  CHECK_FALSE(negative.is_psd());

  // Roundoff-level negativity must pass: that is what the tolerance is for.
  ExcitedBlock fuzzy{0.25, 0.75, Complex(std::sqrt(3.0) / 4.0 + 1e-14, 0.0)};
  CHECK(fuzzy.is_psd());
}

TEST_CASE("ground state is pure with unit trace") {
  const DensityMatrix rho = ground_state();
  CHECK(rho(0, 0) == Complex(1.0, 0.0));
  CHECK(std::abs(rho.trace() - Complex(1.0, 0.0)) == 0.0);
  CHECK(std::abs((rho * rho - rho).cwiseAbs().maxCoeff()) == 0.0);
}

TEST_CASE("hermiticity defect measures the asymmetry introduced") {
  DensityMatrix rho = ground_state();
  CHECK(hermiticity_defect(rho) == 0.0);
  rho(1, 2) = Complex(0.0, 2e-3);
  rho(2, 1) = Complex(0.0, 2e-3);  // should be -2e-3 i
  CHECK(hermiticity_defect(rho) == doctest::Approx(4e-3).epsilon(1e-12));
}

}  // TEST_SUITE
