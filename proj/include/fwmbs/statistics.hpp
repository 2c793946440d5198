#pragma once

// Output photon amplitude, phonon expectation values and second-order
// correlation functions for a single-photon input.

#include "fwmbs/filter.hpp"
#include "fwmbs/grid.hpp"

#include <optional>

namespace fwmbs {

/// E is stored as E(t1, t2) = <M^dag(t1) M(t2)>.
struct CorrelationResult {
  TimeGrid grid;
  RealVector I_out;  // 1/ps
  ComplexMatrix E;
  RealMatrix g2;     // NaN where masked
  double g2_click = 0.0;
  double window = 0.0;         // ps, requested
  double window_center = 0.0;  // ps
  double window_used = 0.0;    // ps, after clipping to the grid
};

inline RealVector output_flux_profile(const SampledField& psi_out, const ComplexMatrix& E) {
  return psi_out.values.cwiseAbs2() + E.diagonal().real();
}

/// g2(t1, t2) with the Appendix-B pairing psi*(t1) psi(t2) E(t2, t1).
inline RealMatrix g2_matrix(const SampledField& psi_out, const ComplexMatrix& E, double floor_fraction = 1e-12) {
  const int n = psi_out.grid.size();
  if (E.rows() != n || E.cols() != n) throw std::invalid_argument("g2_matrix: E does not match the grid");
  const RealVector I = output_flux_profile(psi_out, E);
  const double Imax = I.maxCoeff();
  if (!(Imax > 0.0)) throw std::invalid_argument("g2_matrix: output flux is zero everywhere");
  const double floor = floor_fraction * Imax;
  const ComplexVector& p = psi_out.values;
  RealMatrix g(n, n);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      if (I[a] < floor || I[b] < floor) {
        g(a, b) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double Eaa = E(a, a).real(), Ebb = E(b, b).real();
      const double num = std::norm(p[a]) * Ebb + std::norm(p[b]) * Eaa + Eaa * Ebb +
                         2.0 * (std::conj(p[a]) * p[b] * E(b, a)).real() + std::norm(E(a, b));
      g(a, b) = num / (I[a] * I[b]);
    }
  return g;
}

/// Index range [first, last] of samples inside [center - T/2, center + T/2], clipped to the grid.
inline std::pair<int, int> window_indices(const TimeGrid& grid, double T_window, double center) {
  if (!(T_window > 0.0)) throw std::invalid_argument("window must be > 0");
  const double lo = center - 0.5 * T_window, hi = center + 0.5 * T_window;
  int first = static_cast<int>(std::ceil((lo - grid.t0()) / grid.dt() - 1e-9));
  int last = static_cast<int>(std::floor((hi - grid.t0()) / grid.dt() + 1e-9));
  first = std::max(first, 0);
  last = std::min(last, grid.size() - 1);
  if (last < first) throw std::invalid_argument("window does not overlap the grid");
  return {first, last};
}

struct WindowedMoments {
  double photon = 0.0;  // Integral |psi|^2 over the window
  double noise = 0.0;   // Integral E(t, t) over the window
  double numerator = 0.0;
  double width = 0.0;
  double flux() const { return photon + noise; }
};

inline WindowedMoments windowed_moments(const SampledField& psi_out, const ComplexMatrix& E, double T_window,
                                        double center = 0.0) {
  const TimeGrid& g = psi_out.grid;
  const auto [a, b] = window_indices(g, T_window, center);
  const int m = b - a + 1;
  const double dt = g.dt();
  const ComplexVector p = psi_out.values.segment(a, m);
  const ComplexMatrix Ew = E.block(a, a, m, m);
  WindowedMoments out;
  out.width = m * dt;
  out.photon = p.squaredNorm() * dt;
  out.noise = Ew.diagonal().real().sum() * dt;
  // Sum over t1, t2 of psi*(t1) psi(t2) E(t2, t1) = psi^H E^T psi.
  const cdouble cross = (p.adjoint() * Ew.transpose() * p)(0, 0) * dt * dt;
  out.numerator = 2.0 * out.photon * out.noise + out.noise * out.noise + 2.0 * cross.real() +
                  Ew.squaredNorm() * dt * dt;
  return out;
}

/// Window-integrated g2 over [center - T/2, center + T/2].
inline double g2_click(const SampledField& psi_out, const ComplexMatrix& E, double T_window, double center = 0.0) {
  const auto w = windowed_moments(psi_out, E, T_window, center);
  if (!(w.flux() > 0.0)) throw std::invalid_argument("g2_click: windowed flux is zero");
  return w.numerator / (w.flux() * w.flux());
}

inline CorrelationResult correlate(const SampledField& psi_out, const ComplexMatrix& E, double T_window,
                                   double center = 0.0) {
  CorrelationResult out;
  out.grid = psi_out.grid;
  out.I_out = output_flux_profile(psi_out, E);
  out.E = E;
  out.g2 = g2_matrix(psi_out, E);
  const auto w = windowed_moments(psi_out, E, T_window, center);
  out.g2_click = w.numerator / (w.flux() * w.flux());
  out.window = T_window;
  out.window_center = center;
  out.window_used = w.width;
  return out;
}

/// Normalised Gaussian amplitude with |psi|^2 of standard deviation tau.
inline SampledField gaussian_photon(const TimeGrid& grid, double tau, double center = 0.0) {
  if (!(tau > 0.0)) throw std::invalid_argument("gaussian_photon: tau must be > 0");
  SampledField f = SampledField::zeros(grid);
  const double norm = 1.0 / (std::sqrt(tau) * std::pow(2.0 * kPi, 0.25));
  for (int k = 0; k < grid.size(); ++k) {
    const double t = grid.t(k) - center;
    f.values[k] = norm * std::exp(-t * t / (4.0 * tau * tau));
  }
  return f;
}

}  // namespace fwmbs
