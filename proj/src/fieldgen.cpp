#include "vsim/fieldgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vsim/reduction.hpp"
#include "vsim/rng.hpp"

namespace vsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Uniform-grid sanity shared by the samplers. Returns the step.
double checked_step(const std::vector<double>& grid, double tau_d) {
  if (grid.size() < 2) throw std::invalid_argument("field grid needs at least two samples");
  const double step = grid[1] - grid[0];
  if (!(step > 0.0)) throw std::invalid_argument("field grid must be strictly increasing");
  for (size_t i = 1; i + 1 < grid.size(); ++i) {
    if (std::abs(grid[i + 1] - grid[i] - step) > 1e-9 * std::max(1.0, step))
      throw std::invalid_argument("field grid must be uniform");
  }
  if (step > tau_d / 20.0 * (1.0 + 1e-12))
    throw std::invalid_argument("field grid step " + std::to_string(step) +
                                " fs exceeds tau_d/20 = " + std::to_string(tau_d / 20.0) + " fs");
  return step;
}

double pulse_envelope(const FieldSpec& spec, double t) {
  const double u = (t - spec.pulse_center) / spec.pulse_duration;
  return std::exp(-u * u);
}

// Phase interruption times and the phase value of each constant segment.
// Draw order is part of the reproducibility contract: initial phase first,
// then alternating (gap, new phase) in time order.
void draw_phase_history(const FieldSpec& spec, const NoiseModelConfig& noise, Rng& rng,
                        double t_begin, double t_end, std::vector<double>& jump_times,
                        std::vector<double>& phases) {
  phases.push_back(rng.uniform(0.0, kTwoPi));
  if (noise.jump_model == JumpModel::PoissonRate) {
    double t = t_begin + rng.exponential(spec.coherence_time);
    while (t < t_end) {
      jump_times.push_back(t);
      phases.push_back(rng.uniform(0.0, kTwoPi));
      t += rng.exponential(spec.coherence_time);
    }
  } else {
    const auto b = rng.uniform_int(static_cast<std::uint64_t>(noise.collision_count_min),
                                   static_cast<std::uint64_t>(noise.collision_count_max));
    double t = t_begin;
    for (std::uint64_t k = 0; k < b; ++k) {
      t += noise.drift_coefficient * std::abs(rng.normal());
      if (t >= t_end) break;
      jump_times.push_back(t);
      phases.push_back(rng.uniform(0.0, kTwoPi));
    }
  }
}

}  // namespace

FieldSpec FieldSpec::cw(double omega0, double amplitude, double tau_d, double t0) {
  FieldSpec s;
  s.kind = SourceKind::CW;
  s.carrier_freq = omega0;
  s.amplitude = amplitude;
  s.coherence_time = tau_d;
  s.turn_on = t0;
  return s;
}

FieldSpec FieldSpec::pulse(double omega0, double amplitude, double tau_d, double tau_p,
                           double t_m) {
  FieldSpec s;
  s.kind = SourceKind::Pulse;
  s.carrier_freq = omega0;
  s.amplitude = amplitude;
  s.coherence_time = tau_d;
  s.pulse_duration = tau_p;
  s.pulse_center = t_m;
  return s;
}

FieldSpec FieldSpec::white_noise(double omega0, double amplitude, double pump_power) {
  FieldSpec s;
  s.kind = SourceKind::WhiteNoise;
  s.carrier_freq = omega0;
  s.amplitude = amplitude;
  s.pump_power = pump_power;
  return s;
}

void FieldSpec::validate() const {
  if (!std::isfinite(carrier_freq)) throw std::invalid_argument("FieldSpec: carrier_freq not finite");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("FieldSpec: amplitude must be >= 0");
  switch (kind) {
    case SourceKind::CW:
      if (!(coherence_time > 0.0)) throw std::invalid_argument("FieldSpec: CW needs tau_d > 0");
      break;
    case SourceKind::Pulse:
      if (!(coherence_time > 0.0)) throw std::invalid_argument("FieldSpec: pulse needs tau_d > 0");
      if (!(pulse_duration > 0.0)) throw std::invalid_argument("FieldSpec: pulse needs tau_p > 0");
      break;
    case SourceKind::WhiteNoise:
      if (!(pump_power >= 0.0)) throw std::invalid_argument("FieldSpec: pump_power must be >= 0");
      break;
  }
}

void NoiseModelConfig::validate() const {
  if (collision_count_min < 0 || collision_count_min > collision_count_max)
    throw std::invalid_argument("NoiseModelConfig: bad collision count range");
  if (jump_model == JumpModel::WienerPaper && !(drift_coefficient > 0.0))
    throw std::invalid_argument("NoiseModelConfig: WienerPaper needs drift_coefficient > 0");
}

std::vector<double> make_grid(double t0, double t1, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("make_grid: step must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("make_grid: empty span");
  std::vector<double> grid;
  const auto count = static_cast<size_t>(std::floor((t1 - t0) / step * (1.0 + 1e-12))) + 1;
  grid.reserve(count);
  for (size_t k = 0; k < count; ++k) grid.push_back(t0 + static_cast<double>(k) * step);
  return grid;
}

Complex analytic_kernel(const FieldSpec& spec, double t1, double t2) {
  spec.validate();
  const double a2 = spec.amplitude * spec.amplitude;
  const double lag = t1 - t2;
  switch (spec.kind) {
    case SourceKind::CW: {
      if (t1 < spec.turn_on || t2 < spec.turn_on) return {0.0, 0.0};
      return a2 * std::exp(Complex(0.0, -spec.carrier_freq * lag)) *
             std::exp(-std::abs(lag) / spec.coherence_time);
    }
    case SourceKind::Pulse: {
      const double td = spec.coherence_time;
      return a2 * pulse_envelope(spec, t1) * pulse_envelope(spec, t2) *
             std::exp(Complex(0.0, -spec.carrier_freq * lag)) *
             std::exp(-lag * lag / (2.0 * td * td));
    }
    case SourceKind::WhiteNoise:
      throw std::invalid_argument(
          "analytic_kernel: white noise is a delta; supply a grid step for the "
          "discretized convention");
  }
  throw std::logic_error("analytic_kernel: unreachable");
}

Complex analytic_kernel(const FieldSpec& spec, double t1, double t2, double grid_step) {
  if (spec.kind != SourceKind::WhiteNoise) return analytic_kernel(spec, t1, t2);
  spec.validate();
  if (!(grid_step > 0.0)) throw std::invalid_argument("analytic_kernel: grid step must be > 0");
  const double a2 = spec.amplitude * spec.amplitude;
  return (t1 == t2) ? Complex(a2 * spec.pump_power / grid_step, 0.0) : Complex(0.0, 0.0);
}

FieldRealization sample_cw(const FieldSpec& spec, const NoiseModelConfig& noise,
                           const std::vector<double>& grid, std::uint64_t seed) {
  spec.validate();
  noise.validate();
  if (spec.kind != SourceKind::CW) throw std::invalid_argument("sample_cw: spec is not CW");
  checked_step(grid, spec.coherence_time);

  FieldRealization out;
  out.grid = grid;
  out.seed = seed;
  out.values.resize(grid.size());

  Rng rng(seed);
  draw_phase_history(spec, noise, rng, spec.turn_on, grid.back(), out.jump_times, out.phases);

  size_t seg = 0;  // index into phases; advances past jumps already passed
  for (size_t n = 0; n < grid.size(); ++n) {
    const double t = grid[n];
    if (t < spec.turn_on) {
      out.values[n] = Complex(0.0, 0.0);
      continue;
    }
    while (seg < out.jump_times.size() && out.jump_times[seg] <= t) ++seg;
    const double theta = spec.carrier_freq * t + out.phases[seg];
    out.values[n] = spec.amplitude * Complex(std::cos(theta), -std::sin(theta));
  }
  return out;
}

FieldRealization sample_pulse(const FieldSpec& spec, const NoiseModelConfig& noise,
                              const std::vector<double>& grid, std::uint64_t seed) {
  spec.validate();
  noise.validate();
  if (spec.kind != SourceKind::Pulse) throw std::invalid_argument("sample_pulse: spec is not a pulse");
  const double step = checked_step(grid, spec.coherence_time);
  const double lo = spec.pulse_center - 4.0 * spec.pulse_duration;
  const double hi = spec.pulse_center + 4.0 * spec.pulse_duration;
  if (grid.front() > lo + 0.5 * step || grid.back() < hi - 0.5 * step)
    throw std::invalid_argument("sample_pulse: grid must cover [t_m - 4 tau_p, t_m + 4 tau_p]");

  FieldRealization out;
  out.grid = grid;
  out.seed = seed;
  out.values.resize(grid.size());

  // A CW-style phase-jump carrier decorrelates as e^{-|lag|/tau_d}, which is
  // not the Gaussian lag factor of the pulse kernel. A frequency offset
  // frozen per realization, Z/tau_d with Z ~ N(0,1), has exactly the right
  // characteristic function: E[e^{-i (Z/tau_d) lag}] = e^{-lag^2/(2 tau_d^2)}.
  Rng rng(seed);
  const double phi0 = rng.uniform(0.0, kTwoPi);
  const double freq_offset = rng.normal() / spec.coherence_time;
  out.phases.push_back(phi0);

  for (size_t n = 0; n < grid.size(); ++n) {
    const double t = grid[n];
    const double theta = spec.carrier_freq * t + freq_offset * (t - spec.pulse_center) + phi0;
    out.values[n] =
        spec.amplitude * pulse_envelope(spec, t) * Complex(std::cos(theta), -std::sin(theta));
  }
  return out;
}

FieldRealization sample_field(const FieldSpec& spec, const NoiseModelConfig& noise,
                              const std::vector<double>& grid, std::uint64_t seed) {
  switch (spec.kind) {
    case SourceKind::CW:
      return sample_cw(spec, noise, grid, seed);
    case SourceKind::Pulse:
      return sample_pulse(spec, noise, grid, seed);
    case SourceKind::WhiteNoise:
      throw std::invalid_argument("sample_field: white noise is analytic-only and never sampled");
  }
  throw std::logic_error("sample_field: unreachable");
}

CorrelationEstimate estimate_kernel(const FieldSpec& spec, const NoiseModelConfig& noise,
                                    int n, const std::vector<double>& grid,
                                    std::uint64_t master_seed, int workers) {
  if (n < 2) throw std::invalid_argument("estimate_kernel: need at least two realizations");
  const auto g = static_cast<Eigen::Index>(grid.size());

  // Realizations are cheap; keep them all (n x g values) and parallelize the
  // entry sums instead, each of which runs over k on a fixed pairwise tree.
  Eigen::MatrixXcd v(n, g);
  for (int k = 0; k < n; ++k) {
    const FieldRealization r = sample_field(spec, noise, grid, derive_seed(master_seed, k));
    for (Eigen::Index p = 0; p < g; ++p) v(k, p) = r.values[static_cast<size_t>(p)];
  }

  CorrelationEstimate est;
  est.grid = grid;
  est.n_realizations = n;
  est.kernel.resize(g, g);
  est.std_error.resize(g, g);

  struct EntrySum {
    Complex sum{0.0, 0.0};
    double sum_sq = 0.0;
    EntrySum& operator+=(const EntrySum& o) {
      sum += o.sum;
      sum_sq += o.sum_sq;
      return *this;
    }
  };

  // Upper triangle (p <= q); the lower is the exact conjugate mirror.
  auto fill_row = [&](Eigen::Index p) {
    for (Eigen::Index q = p; q < g; ++q) {
      EntrySum total = chunked_reduce<EntrySum>(
          static_cast<std::uint64_t>(n), 1, [&](std::uint64_t k) {
            const Complex x = v(static_cast<Eigen::Index>(k), p) *
                              std::conj(v(static_cast<Eigen::Index>(k), q));
            return EntrySum{x, std::norm(x)};
          });
      const Complex mean = total.sum / static_cast<double>(n);
      const double var_num = std::max(0.0, total.sum_sq - static_cast<double>(n) * std::norm(mean));
      est.kernel(p, q) = mean;
      est.std_error(p, q) = std::sqrt(var_num / (static_cast<double>(n - 1) * n));
      if (q != p) {
        est.kernel(q, p) = std::conj(mean);
        est.std_error(q, p) = est.std_error(p, q);
      }
    }
  };

  const int nw = std::min<int>(resolve_workers(workers), static_cast<int>(g));
  std::atomic<Eigen::Index> next{0};
  auto run = [&] {
    for (;;) {
      const Eigen::Index p = next.fetch_add(1);
      if (p >= g) return;
      fill_row(p);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();

  return est;
}

}  // namespace vsim
