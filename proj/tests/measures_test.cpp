#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "vsim/measures.hpp"
#include "vsim/model.hpp"

using namespace vsim;
using test::rel_diff;

TEST_SUITE("measures") {

TEST_CASE("coherence fraction: reference points and its 1/2 ceiling") {
  // equal populations with a maximal real coherence saturate C = 1/2
  CHECK(c_measure(ExcitedBlock{0.25, 0.25, {0.25, 0.0}}) == 0.5);
  // positive semidefinite boundary at unequal populations
  const double c = std::sqrt(3.0) / 4.0;
  const ExcitedBlock skew{0.25, 0.75, {0.0, c}};
  CHECK(skew.is_psd());
  CHECK(rel_diff(c_measure(skew), c) < 1e-15);
  CHECK(c_measure(skew) < 0.5);
  // the fraction only sees the magnitude of the coherence
  CHECK(rel_diff(c_measure(ExcitedBlock{0.1, 0.3, {0.06, -0.08}}),
                 c_measure(ExcitedBlock{0.1, 0.3, {0.1, 0.0}})) < 1e-15);

  CHECK_THROWS_AS(c_measure(ExcitedBlock{}), std::invalid_argument);
  CHECK_THROWS_AS(c_measure(ExcitedBlock{-0.2, 0.2, {0.0, 0.0}}),
                  std::invalid_argument);
}

TEST_CASE("purity: pure, mixed, and block-level variants") {
  CHECK(purity(ground_state()) == 1.0);
  DensityMatrix mixed = DensityMatrix::Zero();
  mixed(0, 0) = mixed(1, 1) = mixed(2, 2) = 1.0 / 3.0;
  CHECK(rel_diff(purity(mixed), 1.0 / 3.0) < 1e-15);

  // renormalized excited-block purity: 1/2 for an incoherent equal mix,
  // 1 for a one-level block and for any pure block
  CHECK(excited_purity(ExcitedBlock{0.2, 0.2, {0.0, 0.0}}) == 0.5);
  CHECK(excited_purity(ExcitedBlock{0.37, 0.0, {0.0, 0.0}}) == 1.0);
  CHECK(rel_diff(excited_purity(ExcitedBlock{0.25, 0.25, {0.0, 0.25}}), 1.0) <
        1e-15);
  CHECK_THROWS_AS(excited_purity(ExcitedBlock{}), std::invalid_argument);
}

TEST_CASE("state record reports missing measures before any excitation") {
  const MeasureRecord empty = measure_state(ground_state());
  CHECK(empty.purity == 1.0);
  CHECK(std::isnan(empty.c));
  CHECK(std::isnan(empty.excited_purity));

  DensityMatrix rho = ground_state();
  rho(0, 0) = 0.5;
  rho(1, 1) = 0.3;
  rho(2, 2) = 0.2;
  rho(1, 2) = Complex(0.1, 0.05);
  rho(2, 1) = std::conj(rho(1, 2));
  const MeasureRecord rec = measure_state(rho);
  CHECK(rel_diff(rec.c, std::abs(Complex(0.1, 0.05)) / 0.5) < 1e-15);
  CHECK(rec.purity > 0.0);
  CHECK(!std::isnan(rec.excited_purity));
}

TEST_CASE("least-squares slope recovers an exact line") {
  std::vector<double> grid, y;
  for (int k = 0; k <= 40; ++k) {
    grid.push_back(0.5 * k);
    y.push_back(3.25 - 0.75 * grid.back());
  }
  CHECK(std::abs(series_slope(grid, y, 0.0) + 0.75) < 1e-13);

  // the window start excludes early samples: make them deliberately wrong
  std::vector<double> bent = y;
  for (int k = 0; k < 10; ++k) bent[k] = 100.0;
  CHECK(std::abs(series_slope(grid, bent, 5.0) + 0.75) < 1e-13);

  CHECK_THROWS_AS(series_slope(grid, y, 19.9), std::invalid_argument);
  CHECK_THROWS_AS(series_slope(grid, std::vector<double>(3, 0.0), 0.0),
                  std::invalid_argument);
}

TEST_CASE("series comparison: identity, scaling, and rejection") {
  std::vector<double> grid;
  std::vector<ExcitedBlock> ref;
  for (int k = 0; k <= 30; ++k) {
    const double t = 2.0 * k;
    grid.push_back(t);
    ref.push_back(ExcitedBlock{1e-4 * t, 2e-4 * t, {5e-5 * t, -3e-5 * t}});
  }

  const SeriesComparison same = compare_series(grid, ref, ref, 10.0);
  CHECK(same.rms_rel_pop2 == 0.0);
  CHECK(same.rms_rel_pop3 == 0.0);
  CHECK(same.rms_rel_coh == 0.0);
  CHECK(same.max_rel_coh == 0.0);
  CHECK(same.slope_ratio_pop2 == 1.0);
  CHECK(same.slope_ratio_pop3 == 1.0);

  // a uniformly scaled test series shows up directly in every ratio
  std::vector<ExcitedBlock> scaled = ref;
  for (ExcitedBlock& b : scaled) {
    b.pop_i *= 1.25;
    b.pop_j *= 1.25;
    b.coh_ij *= 1.25;
  }
  const SeriesComparison rat = compare_series(grid, scaled, ref, 10.0);
  CHECK(rel_diff(rat.rms_rel_pop2, 0.25) < 1e-12);
  CHECK(rel_diff(rat.max_rel_pop3, 0.25) < 1e-12);
  CHECK(rel_diff(rat.slope_ratio_pop2, 1.25) < 1e-12);
  CHECK(rel_diff(rat.slope_ratio_pop3, 1.25) < 1e-12);

  std::vector<ExcitedBlock> shorter(ref.begin(), ref.end() - 1);
  CHECK_THROWS_AS(compare_series(grid, shorter, ref, 10.0), std::invalid_argument);
  const std::vector<ExcitedBlock> zeros(grid.size(), ExcitedBlock{});
  CHECK_THROWS_AS(compare_series(grid, ref, zeros, 10.0), std::invalid_argument);
}

}  // TEST_SUITE
