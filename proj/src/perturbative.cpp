#include "vsim/perturbative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vsim {

namespace {

inline Complex cis(double x) { return Complex(std::cos(x), std::sin(x)); }

// phi(z) = (e^z - 1)/z, entire; series keeps full precision near z = 0
// (truncation ~ |z|^4/120 < 1e-18 relative below the switch point).
Complex phi1(Complex z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return (std::exp(z) - 1.0) / z;
}

void check_pair(int i, int j) {
  if (i < 0 || i > 1 || j < 0 || j > 1)
    throw std::invalid_argument("pair indices must be 0 (|2>) or 1 (|3>)");
}

double detuning(const VSystem& sys, const FieldSpec& spec, int k) {
  return sys.omega_kg(k) - spec.carrier_freq;
}

// ---------------------------------------------------------------------------
// Quadrature oracle internals
// ---------------------------------------------------------------------------

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr int kGlN = 8;
constexpr double kGlNode[kGlN] = {
    -0.9602898564975362, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975362};
constexpr double kGlWeight[kGlN] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

// Raw double time integrals over [lo, hi]^2 for the three independent pairs;
// populations come out real by the Hermitian half-plane fold.
struct WindowIntegrals {
  double i22 = 0.0;
  double i33 = 0.0;
  Complex i23{};
};

// Integrate f_i(t') f_j*(t'') K(t', t'') over the square [lo, hi]^2 split
// into pn x pn panels, where f_k(x) = e^{i omega_kg x} and K is the source
// kernel. Only the lower half t' >= t'' is walked; the upper half is its
// Hermitian mirror: I_ij = L_ij + conj(L_ji). Diagonal panels use the
// substitution t'' = a + (t' - a) u to keep nodes off the |t'-t''| crease of
// the CW kernel. Panel squares farther than lag_cut off the diagonal are
// skipped (kernel magnitude < e^{-skip_exponent}).
WindowIntegrals fold_window(const VSystem& sys, const FieldSpec& spec,
                            double lo, double hi, int pn, double lag_cut) {
  const double w2 = sys.omega_kg(0);
  const double w3 = sys.omega_kg(1);
  const double h = (hi - lo) / pn;
  const double halfh = 0.5 * h;

  std::vector<double> pos(static_cast<size_t>(pn) * kGlN);
  std::vector<Complex> f2(pos.size()), f3(pos.size());
  for (int p = 0; p < pn; ++p) {
    for (int n = 0; n < kGlN; ++n) {
      const double x = lo + (p + 0.5 + 0.5 * kGlNode[n]) * h;
      const size_t id = static_cast<size_t>(p) * kGlN + n;
      pos[id] = x;
      f2[id] = cis(w2 * x);
      f3[id] = cis(w3 * x);
    }
  }

  Complex l22{}, l33{}, l23{}, l32{};
  const int band = static_cast<int>(std::ceil(lag_cut / h)) + 1;

  // Full squares strictly below the diagonal.
  for (int p = 1; p < pn; ++p) {
    for (int q = std::max(0, p - band); q < p; ++q) {
      Complex a22{}, a33{}, a23{}, a32{};
      for (int n = 0; n < kGlN; ++n) {
        const size_t in = static_cast<size_t>(p) * kGlN + n;
        for (int m = 0; m < kGlN; ++m) {
          const size_t im = static_cast<size_t>(q) * kGlN + m;
          const Complex kw = (kGlWeight[n] * kGlWeight[m]) *
                             analytic_kernel(spec, pos[in], pos[im]);
          const Complex c2p = f2[in], c3p = f3[in];
          const Complex c2q = std::conj(f2[im]), c3q = std::conj(f3[im]);
          a22 += kw * c2p * c2q;
          a33 += kw * c3p * c3q;
          a23 += kw * c2p * c3q;
          a32 += kw * c3p * c2q;
        }
      }
      const double jac = halfh * halfh;
      l22 += jac * a22;
      l33 += jac * a33;
      l23 += jac * a23;
      l32 += jac * a32;
    }
  }

  // Diagonal panels: the lower-triangle half of each [a, a+h]^2 square.
  for (int p = 0; p < pn; ++p) {
    const double a = lo + p * h;
    Complex a22{}, a33{}, a23{}, a32{};
    for (int n = 0; n < kGlN; ++n) {
      const double x = a + (0.5 + 0.5 * kGlNode[n]) * h;  // t'
      const double len = x - a;
      const Complex c2p = cis(w2 * x), c3p = cis(w3 * x);
      for (int m = 0; m < kGlN; ++m) {
        const double u = 0.5 + 0.5 * kGlNode[m];
        const double y = a + len * u;  // t'' <= t'
        const Complex kw = (kGlWeight[n] * kGlWeight[m] * len) *
                           analytic_kernel(spec, x, y);
        const Complex c2q = std::conj(cis(w2 * y)), c3q = std::conj(cis(w3 * y));
        a22 += kw * c2p * c2q;
        a33 += kw * c3p * c3q;
        a23 += kw * c2p * c3q;
        a32 += kw * c3p * c2q;
      }
    }
    const double jac = halfh * 0.5;  // dt'/2 * du/2 with du spanning [0, 1]
    l22 += jac * a22;
    l33 += jac * a33;
    l23 += jac * a23;
    l32 += jac * a32;
  }

  WindowIntegrals w;
  w.i22 = 2.0 * l22.real();
  w.i33 = 2.0 * l33.real();
  w.i23 = l23 + std::conj(l32);
  return w;
}

}  // namespace

double lorentzian_u(double omega, const FieldSpec& spec) {
  const double td = spec.coherence_time;
  const double x = td * (omega - spec.carrier_freq);
  return 2.0 * td / (1.0 + x * x);
}

EtaBreakdown eta_breakdown(const VSystem& sys, const FieldSpec& spec, double t,
                           int i, int j) {
  sys.validate();
  spec.validate();
  check_pair(i, j);
  if (spec.kind != SourceKind::CW)
    throw std::invalid_argument("eta_breakdown: CW source required");
  if (!(t >= 0.0))
    throw std::invalid_argument("eta_breakdown: t must be >= 0 (time since turn-on)");

  const double td = spec.coherence_time;
  const double di = detuning(sys, spec, i);
  const double dj = detuning(sys, spec, j);
  const double wij = di - dj;
  const double uj = lorentzian_u(sys.omega_kg(j), spec);
  const double rj = td * td * dj / (1.0 + td * td * dj * dj);

  const Complex b(-1.0 / td, -di);  // -i*delta_i - 1/tau_d
  const Complex c(1.0 / td, -di);   // 1/tau_d - i*delta_i
  const double decay = std::exp(-t / td);
  const Complex e_t = decay * cis(-dj * t);  // e^{-(i delta_j + 1/tau_d) t}
  const Complex e_2 = decay * cis(di * t);   // e^{i delta_i t} e^{-t/tau_d}
  const Complex e_p = cis(wij * t);

  EtaBreakdown out;
  out.delta_i = di;
  out.delta_j = dj;
  out.lorentzian_r = rj;
  out.eta_lt = uj * t * phi1(Complex(0.0, wij * t));
  out.eta_1 = -(uj / 2.0) * (e_t - e_p) / b;
  out.eta_2 = -(uj / 2.0) * (1.0 - e_2) / c;
  out.eta_3 = Complex(0.0, -1.0) * rj * ((1.0 - e_2) / c - (e_t - e_p) / b);
  return out;
}

ExcitedBlock excited_block_cw(const VSystem& sys, const FieldSpec& spec, double t) {
  const EtaBreakdown e22 = eta_breakdown(sys, spec, t, 0, 0);
  const EtaBreakdown e33 = eta_breakdown(sys, spec, t, 1, 1);
  const EtaBreakdown e23 = eta_breakdown(sys, spec, t, 0, 1);
  const double amp2 = spec.amplitude * spec.amplitude;
  const double r2 = sys.dipole_rates[0];
  const double r3 = sys.dipole_rates[1];
  const double wij = e23.delta_i - e23.delta_j;  // omega_2 - omega_3 < 0

  ExcitedBlock blk;
  blk.pop_i = r2 * r2 * amp2 * e22.sum().real();
  blk.pop_j = r3 * r3 * amp2 * e33.sum().real();
  blk.coh_ij = r2 * r3 * amp2 * cis(-wij * t) * e23.sum();
  return blk;
}

ExcitedBlock excited_block_oracle(const VSystem& sys, const FieldSpec& spec,
                                  double t0, double t, const QuadratureConfig& quad) {
  sys.validate();
  spec.validate();
  if (spec.kind == SourceKind::WhiteNoise)
    throw std::invalid_argument(
        "excited_block_oracle: white noise has no pointwise kernel to integrate");
  if (!(t >= t0))
    throw std::invalid_argument("excited_block_oracle: t must be >= t0");
  if (!(quad.rel_tol > 0.0) || quad.max_doublings < 1)
    throw std::invalid_argument("excited_block_oracle: bad quadrature config");

  // Clip the window to the kernel's support.
  double lo = t0, hi = t, lag_cut = 0.0, extra_scale = 0.0;
  const double td = spec.coherence_time;
  if (spec.kind == SourceKind::CW) {
    lo = std::max(lo, spec.turn_on);
    lag_cut = quad.skip_exponent * td;
  } else {
    const double reach = std::sqrt(quad.skip_exponent) * spec.pulse_duration;
    lo = std::max(lo, spec.pulse_center - reach);
    hi = std::min(hi, spec.pulse_center + reach);
    lag_cut = td * std::sqrt(2.0 * quad.skip_exponent);
    extra_scale = spec.pulse_duration;
  }

  ExcitedBlock blk;
  if (!(hi > lo)) return blk;  // field never on inside [t0, t]

  const double maxdet =
      std::max(std::abs(detuning(sys, spec, 0)), std::abs(detuning(sys, spec, 1)));
  double target = td;
  if (extra_scale > 0.0) target = std::min(target, extra_scale);
  if (maxdet > 0.0) target = std::min(target, 2.0 * std::numbers::pi / maxdet);
  const int pn0 = std::clamp(static_cast<int>(std::ceil((hi - lo) / target)), 1, 16384);

  WindowIntegrals prev = fold_window(sys, spec, lo, hi, pn0, lag_cut);
  double worst = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= quad.max_doublings; ++d) {
    const WindowIntegrals cur = fold_window(sys, spec, lo, hi, pn0 << d, lag_cut);
    const double scale =
        std::max({std::abs(cur.i22), std::abs(cur.i33), std::abs(cur.i23)});
    auto rel = [&](double diff, double mag) {
      return diff / std::max(mag, 1e-5 * scale);
    };
    worst = std::max({rel(std::abs(cur.i22 - prev.i22), std::abs(cur.i22)),
                      rel(std::abs(cur.i33 - prev.i33), std::abs(cur.i33)),
                      rel(std::abs(cur.i23 - prev.i23), std::abs(cur.i23))});
    if (worst <= quad.rel_tol) {
      const double amp2 = spec.amplitude * spec.amplitude;
      const double r2 = sys.dipole_rates[0];
      const double r3 = sys.dipole_rates[1];
      const double w23 = sys.omega_kg(0) - sys.omega_kg(1);
      blk.pop_i = r2 * r2 * amp2 * cur.i22;
      blk.pop_j = r3 * r3 * amp2 * cur.i33;
      blk.coh_ij = r2 * r3 * amp2 * cis(-w23 * t) * cur.i23;
      return blk;
    }
    prev = cur;
  }

  std::ostringstream msg;
  msg << "excited_block_oracle: quadrature not converged (relative change "
      << worst << " after " << quad.max_doublings << " doublings from " << pn0
      << " panels)";
  throw std::runtime_error(msg.str());
}

Complex pulse_eta(const VSystem& sys, const FieldSpec& spec, int i, int j) {
  sys.validate();
  spec.validate();
  check_pair(i, j);
  if (spec.kind != SourceKind::Pulse)
    throw std::invalid_argument("pulse_eta: pulse source required");
  const double tp = spec.pulse_duration;
  const double td = spec.coherence_time;
  const double di = detuning(sys, spec, i);
  const double dj = detuning(sys, spec, j);
  const double wij = di - dj;
  const double tt = tp * td / std::sqrt(tp * tp + td * td);
  return tp * tt * cis(spec.pulse_center * wij) *
         std::exp(-tp * tp * wij * wij / 8.0) *
         std::exp(-tt * tt * (di + dj) * (di + dj) / 8.0);
}

double c_pulse(const VSystem& sys, const FieldSpec& spec) {
  const double n23 = std::abs(pulse_eta(sys, spec, 0, 1));
  const double n22 = pulse_eta(sys, spec, 0, 0).real();
  const double n33 = pulse_eta(sys, spec, 1, 1).real();
  const double r2 = sys.dipole_rates[0];
  const double r3 = sys.dipole_rates[1];
  return r2 * r3 * n23 / (r2 * r2 * n22 + r3 * r3 * n33);
}

double c_pulse_longpulse(const VSystem& sys, const FieldSpec& spec) {
  sys.validate();
  spec.validate();
  if (spec.kind != SourceKind::Pulse)
    throw std::invalid_argument("c_pulse_longpulse: pulse source required");
  const double tp = spec.pulse_duration;
  const double td = spec.coherence_time;
  const double w = sys.splitting();
  return 0.5 * std::exp((td * td - tp * tp) * w * w / 8.0);
}

ExcitedBlock excited_block_pulse_longtime(const VSystem& sys, const FieldSpec& spec,
                                          double t) {
  sys.validate();
  spec.validate();
  if (spec.kind != SourceKind::Pulse)
    throw std::invalid_argument("excited_block_pulse_longtime: pulse source required");
  if (!(t - spec.pulse_center >= 4.0 * spec.pulse_duration))
    throw std::invalid_argument(
        "excited_block_pulse_longtime: t must be >= t_m + 4 tau_p (post-pulse regime)");
  const double amp2 = spec.amplitude * spec.amplitude;
  const double r2 = sys.dipole_rates[0];
  const double r3 = sys.dipole_rates[1];
  const double w23 = -sys.splitting();
  const double pi = std::numbers::pi;

  ExcitedBlock blk;
  blk.pop_i = pi * r2 * r2 * amp2 * pulse_eta(sys, spec, 0, 0).real();
  blk.pop_j = pi * r3 * r3 * amp2 * pulse_eta(sys, spec, 1, 1).real();
  blk.coh_ij = pi * r2 * r3 * amp2 * cis(-w23 * t) * pulse_eta(sys, spec, 0, 1);
  return blk;
}

StationaryCoherence stationary_coherence(const VSystem& sys, const FieldSpec& spec) {
  sys.validate();
  const double w32 = sys.splitting();
  if (w32 == 0.0)
    throw std::domain_error("stationary_coherence: degenerate excited levels");

  StationaryCoherence out;
  out.saturation = 16.0 / (w32 * w32 * w32 * w32);
  const double td = spec.coherence_time;
  if (td == 0.0) return out;  // F -> 0 as the source decoheres instantly

  const double d2 = detuning(sys, spec, 0);
  const double d3 = detuning(sys, spec, 1);
  const double w23 = -w32;  // omega_ij for the (|2>, |3>) entry
  const double u3 = lorentzian_u(sys.omega_kg(1), spec);
  const Complex c2(1.0 / td, d2);
  const Complex d3c(1.0 / td, d3);
  out.f_value = u3 / Complex(0.0, w23) - 1.0 / (c2 * d3c);
  out.f_squared = std::norm(out.f_value);
  return out;
}

ExcitedBlock turnon_averaged_block(const VSystem& sys, const FieldSpec& spec, double t) {
  if (spec.kind != SourceKind::CW)
    throw std::invalid_argument("turnon_averaged_block: CW source required");
  if (!(t >= 10.0 * spec.coherence_time))
    throw std::invalid_argument(
        "turnon_averaged_block: needs t >= 10 tau_d (transients not yet negligible)");
  ExcitedBlock blk = excited_block_cw(sys, spec, t);
  const StationaryCoherence st = stationary_coherence(sys, spec);
  const double amp2 = spec.amplitude * spec.amplitude;
  blk.coh_ij = sys.dipole_rates[0] * sys.dipole_rates[1] * amp2 * st.f_value;
  return blk;
}

ExcitedBlock white_noise_block(const VSystem& sys, double pump_power, double t) {
  sys.validate();
  if (!(pump_power >= 0.0))
    throw std::invalid_argument("white_noise_block: pump power must be >= 0");
  if (!(t >= 0.0)) throw std::invalid_argument("white_noise_block: t must be >= 0");
  const double r2 = sys.dipole_rates[0];
  const double r3 = sys.dipole_rates[1];
  const double w23 = -sys.splitting();
  // (1 - e^{-i w t}) / (i w) = t * phi(-i w t)
  const Complex ramp = t * phi1(Complex(0.0, -w23 * t));

  ExcitedBlock blk;
  blk.pop_i = r2 * r2 * pump_power * t;
  blk.pop_j = r3 * r3 * pump_power * t;
  blk.coh_ij = r2 * r3 * pump_power * ramp;
  return blk;
}

double c_white(double omega_ij, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("c_white: t must be > 0");
  const double theta = 0.5 * omega_ij * t;
  if (std::abs(theta) < 1e-8) return 0.5 * (1.0 - theta * theta / 6.0);
  return std::abs(std::sin(theta)) / (2.0 * std::abs(theta));
}

double c_white(const VSystem& sys, double t) {
  const double r2 = sys.dipole_rates[0];
  const double r3 = sys.dipole_rates[1];
  const double q = 2.0 * r2 * r3 / (r2 * r2 + r3 * r3);
  return q * c_white(-sys.splitting(), t);
}

}  // namespace vsim
