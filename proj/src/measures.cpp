#include "vsim/measures.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vsim {

double series_slope(const std::vector<double>& grid, const std::vector<double>& y,
                    double t_min) {
  if (y.size() != grid.size())
    throw std::invalid_argument("series_slope: grid/value size mismatch");
  double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < t_min) continue;
    n += 1.0;
    st += grid[k];
    sy += y[k];
    stt += grid[k] * grid[k];
    sty += grid[k] * y[k];
  }
  if (n < 2.0)
    throw std::invalid_argument("series_slope: fit window holds fewer than 2 samples");
  const double det = n * stt - st * st;
  if (det == 0.0) throw std::invalid_argument("series_slope: degenerate fit window");
  return (n * sty - st * sy) / det;
}

double c_measure(const ExcitedBlock& block) {
  const double tr = block.trace();
  if (!(tr > 0.0))
    throw std::invalid_argument("c_measure: excited trace must be positive");
  return std::abs(block.coh_ij) / tr;
}

double purity(const DensityMatrix& rho) { return (rho * rho).trace().real(); }

double excited_purity(const ExcitedBlock& block) {
  const double tr = block.trace();
  if (!(tr > 0.0))
    throw std::invalid_argument("excited_purity: excited trace must be positive");
  const double p2 = block.pop_i / tr;
  const double p3 = block.pop_j / tr;
  const double c2 = std::norm(block.coh_ij) / (tr * tr);
  return p2 * p2 + p3 * p3 + 2.0 * c2;
}

MeasureRecord measure_state(const DensityMatrix& rho) {
  MeasureRecord rec;
  rec.purity = purity(rho);
  const ExcitedBlock blk = excited_block_of(rho);
  if (blk.trace() < 1e-300) {
    rec.c = std::numeric_limits<double>::quiet_NaN();
    rec.excited_purity = std::numeric_limits<double>::quiet_NaN();
  } else {
    rec.c = c_measure(blk);
    rec.excited_purity = excited_purity(blk);
  }
  return rec;
}

SeriesComparison compare_series(const std::vector<double>& grid,
                                const std::vector<ExcitedBlock>& test,
                                const std::vector<ExcitedBlock>& ref,
                                double fit_window_start) {
  const size_t n = grid.size();
  if (n < 2 || test.size() != n || ref.size() != n)
    throw std::invalid_argument("compare_series: series must share a grid with >= 2 samples");

  double ss_d2 = 0.0, ss_d3 = 0.0, ss_dc = 0.0;
  double ss_r2 = 0.0, ss_r3 = 0.0, ss_rc = 0.0;
  double mx_d2 = 0.0, mx_d3 = 0.0, mx_dc = 0.0;
  double mx_r2 = 0.0, mx_r3 = 0.0, mx_rc = 0.0;
  std::vector<double> t2(n), t3(n), r2(n), r3(n);
  for (size_t k = 0; k < n; ++k) {
    const double d2 = test[k].pop_i - ref[k].pop_i;
    const double d3 = test[k].pop_j - ref[k].pop_j;
    const double dc = std::abs(test[k].coh_ij - ref[k].coh_ij);
    ss_d2 += d2 * d2;
    ss_d3 += d3 * d3;
    ss_dc += dc * dc;
    ss_r2 += ref[k].pop_i * ref[k].pop_i;
    ss_r3 += ref[k].pop_j * ref[k].pop_j;
    ss_rc += std::norm(ref[k].coh_ij);
    mx_d2 = std::max(mx_d2, std::abs(d2));
    mx_d3 = std::max(mx_d3, std::abs(d3));
    mx_dc = std::max(mx_dc, dc);
    mx_r2 = std::max(mx_r2, std::abs(ref[k].pop_i));
    mx_r3 = std::max(mx_r3, std::abs(ref[k].pop_j));
    mx_rc = std::max(mx_rc, std::abs(ref[k].coh_ij));
    t2[k] = test[k].pop_i;
    t3[k] = test[k].pop_j;
    r2[k] = ref[k].pop_i;
    r3[k] = ref[k].pop_j;
  }
  if (!(ss_r2 > 0.0) || !(ss_r3 > 0.0) || !(ss_rc > 0.0))
    throw std::invalid_argument("compare_series: reference series is identically zero");

  SeriesComparison cmp;
  cmp.rms_rel_pop2 = std::sqrt(ss_d2 / ss_r2);
  cmp.rms_rel_pop3 = std::sqrt(ss_d3 / ss_r3);
  cmp.rms_rel_coh = std::sqrt(ss_dc / ss_rc);
  cmp.max_rel_pop2 = mx_d2 / mx_r2;
  cmp.max_rel_pop3 = mx_d3 / mx_r3;
  cmp.max_rel_coh = mx_dc / mx_rc;
  const double ref_slope2 = series_slope(grid, r2, fit_window_start);
  const double ref_slope3 = series_slope(grid, r3, fit_window_start);
  if (ref_slope2 == 0.0 || ref_slope3 == 0.0)
    throw std::invalid_argument("compare_series: reference population slope is zero");
  cmp.slope_ratio_pop2 = series_slope(grid, t2, fit_window_start) / ref_slope2;
  cmp.slope_ratio_pop3 = series_slope(grid, t3, fit_window_start) / ref_slope3;
  return cmp;
}

}  // namespace vsim
