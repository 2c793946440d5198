#pragma once

// Closed-form frequency-domain Green functions for continuous-wave pumps and
// the observables derived from them.

#include "fwmbs/filter.hpp"
#include "fwmbs/raman.hpp"

#include <functional>
#include <numeric>
#include <optional>

namespace fwmbs {

/// Physical parameters of one fiber run.
struct FiberScenario {
  double gamma = 1.0;  // 1/(W m)
  double f_R = 0.0;
  double P0 = 0.0;      // W per pump
  double length = 1.0;  // m
  double dbeta = 0.0;   // rad/m
  std::function<double(double)> dbeta_of_omega;  // optional override of dbeta
  double beta1i = 0.0, beta1s = 0.0;  // ps/m
  double beta2i = 0.0, beta2s = 0.0;  // ps^2/m
  double T = 300.0;                   // K
  double Omega = 0.0;                 // rad/ps
  Polarization config = Polarization::Copolarized;

  void validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("FiberScenario: length must be > 0");
    if (!(P0 >= 0.0) || !std::isfinite(P0)) throw std::invalid_argument("FiberScenario: P0 must be >= 0");
    if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("FiberScenario: T must be >= 0");
    if (f_R < 0.0 || f_R > 1.0) throw std::invalid_argument("FiberScenario: f_R must lie in [0, 1]");
    for (double v : {gamma, dbeta, beta1i, beta1s, beta2i, beta2s, Omega})
      if (!std::isfinite(v)) throw std::invalid_argument("FiberScenario: non-finite parameter");
  }

  double mismatch(double omega) const { return dbeta_of_omega ? dbeta_of_omega(omega) : dbeta; }
  double beta_i(double omega) const { return beta1i * omega + 0.5 * beta2i * omega * omega; }
  double beta_s(double omega) const { return beta1s * omega + 0.5 * beta2s * omega * omega; }

  RamanResponse response(const OscillatorTable& parallel, const OscillatorTable& anisotropic) const {
    return {parallel, anisotropic, config, gamma, f_R, Omega};
  }
  RamanResponse silica_response() const { return RamanResponse::silica(config, gamma, f_R, Omega); }
};

inline void check_consistent(const FiberScenario& scn, const RamanResponse& resp) {
  scn.validate();
  if (scn.gamma != resp.gamma() || scn.f_R != resp.f_R() || scn.Omega != resp.Omega() || scn.config != resp.config())
    throw std::invalid_argument("scenario and Raman response disagree on gamma, f_R, Omega or polarization");
}

/// Coupling functions at one frequency.
struct CouplingValues {
  cdouble kappa_i, kappa_s, g_is, g_si;
};

inline CouplingValues coupling_at(const FiberScenario& scn, const RamanResponse& r, double omega) {
  const double P0 = scn.P0;
  const double db = scn.mismatch(omega);
  CouplingValues c;
  c.kappa_i = scn.beta_i(omega) + P0 * r.kernel(Coupling::IQQI, omega) + 0.5 * db;
  c.kappa_s = scn.beta_s(omega) + P0 * r.kernel(Coupling::SPPS, omega) - 0.5 * db;
  c.g_is = 2.0 * P0 * r.electronic(Coupling::IQPS) + P0 * r.kernel(Coupling::IQPS, omega);
  c.g_si = 2.0 * P0 * r.electronic(Coupling::SPQI) + P0 * r.kernel(Coupling::SPQI, omega);
  return c;
}

struct CouplingFunctions {
  RealVector omega;
  ComplexVector kappa_i, kappa_s, g_is, g_si;
};

inline CouplingFunctions coupling_functions(const FiberScenario& scn, const RamanResponse& r, const RealVector& omega) {
  check_consistent(scn, r);
  const auto n = omega.size();
  CouplingFunctions out{omega, ComplexVector(n), ComplexVector(n), ComplexVector(n), ComplexVector(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto c = coupling_at(scn, r, omega[k]);
    out.kappa_i[k] = c.kappa_i;
    out.kappa_s[k] = c.kappa_s;
    out.g_is[k] = c.g_is;
    out.g_si[k] = c.g_si;
  }
  return out;
}

/// 2x2 transfer matrix at a single frequency and length.
struct CWTransfer {
  cdouble G_ii, G_is, G_si, G_ss, k;
};

/// exp(i M z) for M = [[kappa_i, g_is], [g_si, kappa_s]].
inline CWTransfer cw_transfer(const CouplingValues& c, double z) {
  const cdouble sigma = 0.5 * (c.kappa_i + c.kappa_s);
  const cdouble delta = c.kappa_i - c.kappa_s;
  const cdouble k = 0.5 * std::sqrt(4.0 * c.g_is * c.g_si + delta * delta);
  const cdouble cosk = std::cos(k * z);
  const cdouble sinc = std::abs(k) * z < 1e-6 ? cdouble(z) : std::sin(k * z) / k;
  const cdouble ph = std::exp(kI * sigma * z);
  return {ph * (cosk + kI * 0.5 * delta * sinc), ph * kI * c.g_is * sinc, ph * kI * c.g_si * sinc,
          ph * (cosk - kI * 0.5 * delta * sinc), k};
}

struct CWGreens {
  RealVector omega;
  double z = 0.0;
  ComplexVector kappa_i, kappa_s, g, g_si, k;
  ComplexVector G_ii, G_is, G_si, G_ss;
};

/// Principal-branch k with the sign chosen to follow its neighbours along omega.
inline void unwrap_branch(ComplexVector& k) {
  for (Eigen::Index n = 1; n < k.size(); ++n)
    if (std::abs(k[n] + k[n - 1]) < std::abs(k[n] - k[n - 1])) k[n] = -k[n];
}

inline CWGreens cw_greens(const FiberScenario& scn, const RamanResponse& r, const RealVector& omega,
                          std::optional<double> z = std::nullopt) {
  const auto cf = coupling_functions(scn, r, omega);
  const double zz = z.value_or(scn.length);
  const auto n = omega.size();
  CWGreens out;
  out.omega = omega;
  out.z = zz;
  out.kappa_i = cf.kappa_i;
  out.kappa_s = cf.kappa_s;
  out.g = cf.g_is;
  out.g_si = cf.g_si;
  out.k.resize(n);
  out.G_ii.resize(n);
  out.G_is.resize(n);
  out.G_si.resize(n);
  out.G_ss.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto t = cw_transfer({cf.kappa_i[j], cf.kappa_s[j], cf.g_is[j], cf.g_si[j]}, zz);
    out.k[j] = t.k;
    out.G_ii[j] = t.G_ii;
    out.G_is[j] = t.G_is;
    out.G_si[j] = t.G_si;
    out.G_ss[j] = t.G_ss;
  }
  // The Green functions are even in k; only the reported k is unwrapped.
  if (n > 1) {
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return omega[a] < omega[b]; });
    ComplexVector sorted(n);
    for (Eigen::Index j = 0; j < n; ++j) sorted[j] = out.k[order[j]];
    unwrap_branch(sorted);
    for (Eigen::Index j = 0; j < n; ++j) out.k[order[j]] = sorted[j];
  }
  return out;
}

/// |G_is|^2 from the closed form exp(-2 Im kappa l)(cosh(2 Im g l) - cos(2 Re g l)) / 2.
/// Valid for dbeta = 0 and balanced, symmetric couplings.
inline double cross_flux_identity(cdouble kappa, cdouble g, double length) {
  return 0.5 * std::exp(-2.0 * kappa.imag() * length) *
         (std::cosh(2.0 * g.imag() * length) - std::cos(2.0 * g.real() * length));
}

/// psi_out = inverse FFT of H G_is(l) psi(w).
inline SampledField filtered_psi_out(const FiberScenario& scn, const RamanResponse& r, const SampledField& psi_in,
                                     const SpectralFilter& filter) {
  const TimeGrid& g = psi_in.grid;
  const RealVector H = filter.samples(g);
  const auto greens = cw_greens(scn, r, g.omegas());
  Spectrum s = forward_fft(psi_in);
  for (int k = 0; k < g.size(); ++k) s.values[k] *= H[k] * greens.G_is[k];
  return inverse_fft(s);
}

/// Composite Simpson weights on n (odd) equally spaced nodes over [a, b].
inline std::vector<double> simpson_weights(int n, double a, double b) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson_weights: node count must be odd and >= 3");
  const double h = (b - a) / (n - 1);
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = h / 3.0 * ((j == 0 || j == n - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0));
  return w;
}

/// Integral over z in [0, l] of |G_ii(z, w) + G_is(z, w)|^2 for each frequency.
inline RealVector z_integrated_noise_gain(const FiberScenario& scn, const RamanResponse& r, const RealVector& omega,
                                          int z_intervals = 64) {
  if (z_intervals < 2 || z_intervals % 2) throw std::invalid_argument("z_intervals must be even and >= 2");
  const int nodes = z_intervals + 1;
  const auto w = simpson_weights(nodes, 0.0, scn.length);
  RealVector out = RealVector::Zero(omega.size());
  for (Eigen::Index j = 0; j < omega.size(); ++j) {
    const auto c = coupling_at(scn, r, omega[j]);
    double s = 0.0;
    for (int m = 0; m < nodes; ++m) {
      const double z = scn.length * m / (nodes - 1);
      const auto t = cw_transfer(c, z);
      s += w[m] * std::norm(t.G_ii + t.G_is);
    }
    out[j] = s;
  }
  return out;
}

/// Spectral density S(w) = (P0 / sqrt(2 pi)) |H|^2 F(w) Integral dz |G_ii + G_is|^2.
/// The stationary phonon expectation is e(tau) = Integral dw S(w) exp(i w tau).
inline RealVector noise_density(const FiberScenario& scn, const RamanResponse& r, const RealVector& omega,
                                const SpectralFilter& filter, int z_intervals = 64) {
  check_consistent(scn, r);
  RealVector S = RealVector::Zero(omega.size());
  if (scn.f_R == 0.0 || scn.P0 == 0.0) return S;
  const RealVector zint = z_integrated_noise_gain(scn, r, omega, z_intervals);
  for (Eigen::Index j = 0; j < omega.size(); ++j) {
    const double H = filter.transmission(omega[j]);
    if (H == 0.0) continue;
    S[j] = scn.P0 / kSqrt2Pi * H * H * r.noise_spectrum(Coupling::IQQI, omega[j], scn.T) * zint[j];
  }
  return S;
}

/// Stationary phonon correlation e(tau) = <M^dag(t + tau) M(t)> sampled at the given lags.
/// The omega integral runs over the filter band by composite Simpson.
inline ComplexVector cw_phonon_correlation(const FiberScenario& scn, const RamanResponse& r,
                                           const SpectralFilter& filter, const RealVector& lags,
                                           int omega_intervals = 2000, int z_intervals = 64) {
  if (filter.is_all_pass()) throw std::invalid_argument("cw_phonon_correlation: a finite filter is required");
  const int nodes = omega_intervals + 1;
  const double a = filter.center - 0.5 * filter.width;
  const double b = filter.center + 0.5 * filter.width;
  RealVector omega(nodes);
  for (int j = 0; j < nodes; ++j) omega[j] = a + (b - a) * j / (nodes - 1);
  // Interior nodes only see the rectangular filter as 1.
  const auto w = simpson_weights(nodes, a, b);
  RealVector S = noise_density(scn, r, omega, SpectralFilter::all_pass(), z_intervals);
  ComplexVector out = ComplexVector::Zero(lags.size());
  for (Eigen::Index m = 0; m < lags.size(); ++m) {
    cdouble s = 0.0;
    for (int j = 0; j < nodes; ++j) s += w[j] * S[j] * std::polar(1.0, omega[j] * lags[m]);
    out[m] = s;
  }
  return out;
}

/// E(t1, t2) on the grid, stationary: E(t1, t2) = e(t1 - t2).
inline ComplexMatrix phonon_expectation_cw(const FiberScenario& scn, const RamanResponse& r, const SpectralFilter& filter,
                                           const TimeGrid& grid, int omega_intervals = 2000, int z_intervals = 64) {
  const int n = grid.size();
  RealVector lags(2 * n - 1);
  for (int m = 0; m < 2 * n - 1; ++m) lags[m] = (m - (n - 1)) * grid.dt();
  const ComplexVector e = cw_phonon_correlation(scn, r, filter, lags, omega_intervals, z_intervals);
  ComplexMatrix E(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) E(j, k) = e[j - k + n - 1];
  return E;
}

/// First-order-in-bandwidth output flux.
inline double output_flux(const FiberScenario& scn, const RamanResponse& r, double domega, double I_in) {
  check_consistent(scn, r);
  const auto t = cw_transfer(coupling_at(scn, r, 0.0), scn.length);
  double noise = 0.0;
  if (scn.f_R > 0.0 && scn.P0 > 0.0) {
    const double R0 = r.R(Coupling::IQQI, 0.0);
    const double nth = scn.Omega == 0.0 ? 0.0 : thermal_population(scn.Omega, scn.T);
    noise = domega / (4.0 * kSqrt2Pi) * (-std::expm1(-8.0 * kPi * scn.f_R * R0 * scn.gamma * scn.P0 * scn.length)) * nth;
  }
  return std::norm(t.G_is) * I_in + noise;
}

/// Output flux with the noise term integrated over the filter band.
inline double output_flux_exact(const FiberScenario& scn, const RamanResponse& r, double domega, double I_in,
                                int omega_intervals = 2000, int z_intervals = 64) {
  check_consistent(scn, r);
  const auto t = cw_transfer(coupling_at(scn, r, 0.0), scn.length);
  double noise = 0.0;
  if (scn.f_R > 0.0 && scn.P0 > 0.0) {
    const RealVector lag = RealVector::Zero(1);
    noise = cw_phonon_correlation(scn, r, SpectralFilter::rectangular(domega), lag, omega_intervals, z_intervals)[0].real();
  }
  return std::norm(t.G_is) * I_in + noise;
}

struct G2Approximation {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// (T dw + 2 pi) sqrt(2 pi) R(0) n_th(Omega) f_R gamma P0 l, with regime warnings.
inline G2Approximation g2_click_approx(const FiberScenario& scn, const RamanResponse& r, double T_window, double domega,
                                       bool laurent = false) {
  check_consistent(scn, r);
  G2Approximation out;
  if (scn.f_R == 0.0 || scn.P0 == 0.0) return out;
  const double R0 = laurent ? r.R_laurent(Coupling::IQQI) : r.R(Coupling::IQQI, 0.0);
  const double nth = thermal_population(scn.Omega, scn.T);
  out.value = (T_window * domega + 2.0 * kPi) * kSqrt2Pi * R0 * nth * scn.f_R * scn.gamma * scn.P0 * scn.length;
  double dmin = std::numeric_limits<double>::infinity();
  for (double d : r.parallel_table().d) dmin = std::min(dmin, d);
  if (!(T_window * domega > 10.0)) out.warnings.push_back("T * domega is not much larger than 1");
  if (!(domega < 0.1 * dmin)) out.warnings.push_back("filter width is not small against the Raman linewidths");
  const double weak = std::abs(T_window * domega * scn.f_R * scn.gamma * scn.P0 * scn.length * R0);
  if (!(weak < 0.1)) out.warnings.push_back("spontaneous Raman term is not weak against conversion");
  return out;
}

/// The length at which Re g(0) * l = pi / 2.
inline double optimal_length(const FiberScenario& scn, const RamanResponse& r) {
  const double g0 = coupling_at(scn, r, 0.0).g_is.real();
  if (!(g0 > 0.0)) throw std::invalid_argument("optimal_length: coupling g(0) must be positive");
  return 0.5 * kPi / g0;
}

}  // namespace fwmbs
