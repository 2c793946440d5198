#pragma once

// Photon amplitude and phonon expectation values for pulsed pumps.

#include "fwmbs/green.hpp"
#include "fwmbs/statistics.hpp"

namespace fwmbs {

/// psi_out(t) = H [ Integral G_is(t, t') psi_in(t') dt' ].
inline SampledField pulsed_psi_out(const ComplexMatrix& G_is, const SampledField& psi_in,
                                   const SpectralFilter& filter = SpectralFilter::all_pass()) {
  const TimeGrid& g = psi_in.grid;
  if (G_is.rows() != g.size() || G_is.cols() != g.size())
    throw std::invalid_argument("pulsed_psi_out: Green block does not match the grid");
  SampledField out{g, G_is * psi_in.values * g.dt()};
  return apply_filter(out, filter);
}

struct PulsedNoiseOptions {
  int z_stride = 1;                   // use every z_stride-th Green node as a source plane
  double max_pump_change = 0.25;      // relative L2 change of a pump between used source planes
};

namespace detail {

/// Output basis of the filtered idler: rows Fb(b, t) and columns V(t, b) with V Fb = filter projection.
struct OutputBasis {
  ComplexMatrix Fb;  // m x n
  ComplexMatrix V;   // n x m
};

inline OutputBasis output_basis(const TimeGrid& g, const SpectralFilter& filter) {
  const int n = g.size();
  if (filter.is_all_pass()) {
    const ComplexMatrix I = ComplexMatrix::Identity(n, n);
    return {I, I};
  }
  const RealVector H = filter.samples(g);
  std::vector<int> band;
  for (int k = 0; k < n; ++k)
    if (H[k] > 0.0) band.push_back(k);
  if (band.empty()) throw std::invalid_argument("output_basis: filter passes no grid frequency");
  const int m = static_cast<int>(band.size());
  OutputBasis b{ComplexMatrix(m, n), ComplexMatrix(n, m)};
  for (int c = 0; c < m; ++c)
    for (int t = 0; t < n; ++t) {
      const double w = g.omega(band[c]), tt = g.t(t);
      b.Fb(c, t) = std::polar(g.dt() / kSqrt2Pi, w * tt);
      b.V(t, c) = std::polar(g.domega() / kSqrt2Pi, -w * tt);
    }
  return b;
}

/// Integration weights over the used source planes: Simpson for an even number
/// of intervals, otherwise Simpson with one trapezoid at the end.
inline std::vector<double> source_weights(int intervals, double dz) {
  std::vector<double> w(intervals + 1, 0.0);
  if (intervals == 1) {
    w[0] = w[1] = 0.5 * dz;
    return w;
  }
  const int simpson = intervals % 2 == 0 ? intervals : intervals - 1;
  for (int j = 0; j <= simpson; ++j) w[j] = dz / 3.0 * ((j == 0 || j == simpson) ? 1.0 : (j % 2 ? 4.0 : 2.0));
  if (simpson < intervals) {
    w[simpson] += 0.5 * dz;
    w[intervals] += 0.5 * dz;
  }
  return w;
}

/// Largest stride for which no pump changes by more than max_change between used planes.
inline int max_source_stride(const PumpHistory& h, double max_change) {
  const int steps = static_cast<int>(h.z.size()) - 1;
  for (int stride = steps; stride > 1; --stride) {
    if (steps % stride) continue;
    bool ok = true;
    for (int j = 0; j + stride <= steps && ok; j += stride)
      for (const auto* A : {&h.A_p, &h.A_q}) {
        const double ref = std::max((*A)[j].norm(), 1e-300);
        if (((*A)[j + stride] - (*A)[j]).norm() > max_change * ref) ok = false;
      }
    if (ok) return stride;
  }
  return 1;
}

}  // namespace detail

/// Phonon expectation E(t1, t2) = <M^dag(t1) M(t2)> of the filtered idler output.
///
/// A noise source at plane z' enters the idler as A_q(z', t') m and the signal as
/// A_p(z', t') m and is carried to the output by P(z' -> l). One adjoint sweep from
/// the output basis yields the output rows of P(z_j -> l) at every Green node:
///   Q(b, t') = Y_ii(b, t') A_q(z_j, t') + Y_is(b, t') A_p(z_j, t'),
///   E_B = Integral dz' (1/sqrt(2 pi)) Sum_k dw F(w_k) q^*(b, w_k) q(b', w_k),
/// with q(b, w) = Integral dt' Q(b, t') exp(-i w t').
inline ComplexMatrix pulsed_phonon_expectation(const GreenPropagator& prop, const RamanResponse& r, double T,
                                               const SpectralFilter& filter = SpectralFilter::all_pass(),
                                               PulsedNoiseOptions opt = {}) {
  const TimeGrid& g = prop.grid();
  const int n = g.size();
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("pulsed_phonon_expectation: T must be >= 0");
  const int steps = prop.steps();
  if (opt.z_stride < 1 || steps % opt.z_stride)
    throw ConfigError("pulsed_phonon_expectation: z_stride must divide the step count " + std::to_string(steps));
  const int allowed = detail::max_source_stride(prop.pumps(), opt.max_pump_change);
  if (opt.z_stride > allowed)
    throw ConfigError("pulsed_phonon_expectation: z-history stride " + std::to_string(opt.z_stride) +
                      " does not resolve the pump evolution; required stride <= " + std::to_string(allowed));
  if (r.f_R() == 0.0) return ComplexMatrix::Zero(n, n);

  const RealVector omega = g.omegas();
  RealVector F = r.noise_spectrum(Coupling::IQQI, omega, T);
  if (F.minCoeff() < 0.0) throw NumericalError("photon-statistics", "negative noise spectrum");
  if (F.maxCoeff() == 0.0) return ComplexMatrix::Zero(n, n);

  const auto basis = detail::output_basis(g, filter);
  const int m = static_cast<int>(basis.Fb.rows());
  const int intervals = steps / opt.z_stride;
  const auto wz = detail::source_weights(intervals, prop.step() * opt.z_stride);
  // The sweep returns rows of the operator dt * P, so the dt of the t' integral is
  // already in place. Row k of q carries sqrt(dw F_k / sqrt(2 pi)); the sign -1 DFT
  // puts exp(-i w_k t') at index k up to exp(-i w_k t0), which drops out of q^H q.
  RealVector row_scale(n);
  for (int k = 0; k < n; ++k) row_scale[k] = std::sqrt(g.domega() * F[k] / kSqrt2Pi);
  ComplexMatrix EB = ComplexMatrix::Zero(m, m);
  const auto& pumps = prop.pumps();
  prop.adjoint_sweep(basis.Fb.transpose(), ComplexMatrix::Zero(n, m),
                     [&](int j, const ComplexMatrix& Zi, const ComplexMatrix& Zs) {
                       if (j % opt.z_stride) return;
                       const double w = wz[static_cast<std::size_t>(j / opt.z_stride)];
                       if (w == 0.0) return;
                       ComplexMatrix q = pumps.A_q[j].asDiagonal() * Zi + pumps.A_p[j].asDiagonal() * Zs;
                       detail::dft_columns(q.data(), n, m, -1);
                       q = row_scale.cast<cdouble>().asDiagonal() * q;
                       EB.noalias() += w * (q.adjoint() * q);
                     });
  ComplexMatrix E = basis.V.conjugate() * EB * basis.V.transpose();
  // Hermitian by construction; remove round-off asymmetry.
  return 0.5 * (E + E.adjoint()).eval();
}

}  // namespace fwmbs
