// Scalar diagnostics on states and series comparison helpers.
#pragma once

#include <vector>

#include "vsim/model.hpp"

namespace vsim {

// C = |rho_23| / (rho_22 + rho_33); bounded by 1/2 for positive
// semidefinite blocks. Throws when the excited trace is not positive.
double c_measure(const ExcitedBlock& block);

// Tr(rho^2) of the full state.
double purity(const DensityMatrix& rho);

// Purity of the excited block renormalized to unit trace; ranges over
// [1/2, 1] for physical blocks. Throws when the trace is not positive.
double excited_purity(const ExcitedBlock& block);

// Row-level diagnostics: C and excited_purity become NaN (reported as
// missing downstream) when the excited trace has underflowed to < 1e-300,
// e.g. before any light has arrived.
struct MeasureRecord {
  double c = 0.0;
  double purity = 0.0;
  double excited_purity = 0.0;
};

MeasureRecord measure_state(const DensityMatrix& rho);

// Least-squares slope of y(t) over the samples with t >= t_min; needs at
// least two such samples.
double series_slope(const std::vector<double>& grid, const std::vector<double>& y,
                    double t_min);

// Aggregate agreement between a test series and a reference series of
// excited blocks on a shared grid.
//   rms_rel_*   = ||test - ref||_2 / ||ref||_2 over the whole series
//   max_rel_*   = max_t |test - ref| / max_t |ref|
//   slope_ratio = (least-squares population slope of test over
//                  [fit_window_start, end]) / (same for ref)
struct SeriesComparison {
  double rms_rel_pop2 = 0.0;
  double rms_rel_pop3 = 0.0;
  double rms_rel_coh = 0.0;
  double max_rel_pop2 = 0.0;
  double max_rel_pop3 = 0.0;
  double max_rel_coh = 0.0;
  double slope_ratio_pop2 = 0.0;
  double slope_ratio_pop3 = 0.0;
};

SeriesComparison compare_series(const std::vector<double>& grid,
                                const std::vector<ExcitedBlock>& test,
                                const std::vector<ExcitedBlock>& ref,
                                double fit_window_start);

}  // namespace vsim
