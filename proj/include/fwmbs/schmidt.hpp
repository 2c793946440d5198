#pragma once

// Schmidt (singular-value) decomposition of the cross Green function.
//
// With the dt-weighted inner product the decomposition reads
//   G_is(t, t') = sum_n lambda_n v_n(t) conj(u_n(t')),
// so feeding the input mode u_n produces lambda_n v_n at the output.

#include "fwmbs/filter.hpp"
#include "fwmbs/grid.hpp"

#include <Eigen/SVD>

#include <cstdio>
#include <fstream>
#include <numeric>

namespace fwmbs {

struct SchmidtDecomposition {
  TimeGrid grid;
  RealVector coefficients;      // descending
  ComplexMatrix output_modes;   // columns v_n(t), sqrt(1/ps)
  ComplexMatrix input_modes;    // columns u_n(t'), sqrt(1/ps)

  int rank() const { return static_cast<int>(coefficients.size()); }
  SampledField output_mode(int n) const { return {grid, output_modes.col(check(n))}; }
  SampledField input_mode(int n) const { return {grid, input_modes.col(check(n))}; }

  /// Relative Frobenius error of sum_n lambda_n v_n u_n^dagger against `block`.
  double reconstruction_error(const ComplexMatrix& block) const {
    const ComplexMatrix rec = output_modes * coefficients.cast<cdouble>().asDiagonal() * input_modes.adjoint();
    return (block - rec).norm() / block.norm();
  }

 private:
  int check(int n) const {
    if (n < 0 || n >= rank()) throw std::out_of_range("Schmidt mode index out of range");
    return n;
  }
};

namespace detail {

inline double center_of_mass(const TimeGrid& g, const ComplexVector& v) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    num += g.t(k) * std::norm(v[k]);
    den += std::norm(v[k]);
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Common phase fix (input mode peak real positive) and tie ordering by input centre of mass.
inline SchmidtDecomposition finish_decomposition(const TimeGrid& grid, RealVector s, ComplexMatrix U, ComplexMatrix V) {
  const int r = static_cast<int>(s.size());
  const double inv = 1.0 / std::sqrt(grid.dt());
  U *= inv;
  V *= inv;
  for (int n = 0; n < r; ++n) {
    Eigen::Index peak;
    V.col(n).cwiseAbs().maxCoeff(&peak);
    if (std::abs(V(peak, n)) == 0.0) continue;
    const cdouble ph = std::conj(V(peak, n)) / std::abs(V(peak, n));
    V.col(n) *= ph;
    U.col(n) *= ph;
  }
  // SVD values arrive descending; runs within tol of the run start are ties.
  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  const double tol = 1e-10 * (r > 0 ? s[0] : 0.0);
  std::vector<double> com(r);
  for (int n = 0; n < r; ++n) com[n] = center_of_mass(grid, V.col(n));
  for (int first = 0; first < r;) {
    int last = first + 1;
    while (last < r && s[first] - s[last] <= tol) ++last;
    std::stable_sort(order.begin() + first, order.begin() + last, [&](int a, int b) { return com[a] < com[b]; });
    first = last;
  }
  SchmidtDecomposition out{grid, RealVector(r), ComplexMatrix(U.rows(), r), ComplexMatrix(V.rows(), r)};
  for (int n = 0; n < r; ++n) {
    // Within a tie group only the modes move, so the coefficients stay descending.
    out.coefficients[n] = s[n];
    out.output_modes.col(n) = U.col(order[n]);
    out.input_modes.col(n) = V.col(order[n]);
  }
  return out;
}

}  // namespace detail

/// Measure-weighted SVD: lambda_n are the singular values of dt * block.
inline SchmidtDecomposition decompose(const ComplexMatrix& block, const TimeGrid& grid) {
  if (block.rows() != grid.size() || block.cols() != grid.size())
    throw std::invalid_argument("decompose: block does not match the grid");
  if (!block.allFinite()) throw std::invalid_argument("decompose: non-finite Green function");
  Eigen::BDCSVD<ComplexMatrix> svd(block * grid.dt(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return detail::finish_decomposition(grid, svd.singularValues(), svd.matrixU(), svd.matrixV());
}

namespace detail {

/// Orthonormal plane waves exp(-i w_k t) / sqrt(n) for the listed grid frequencies.
inline ComplexMatrix plane_waves(const TimeGrid& grid, const std::vector<int>& band) {
  const int n = grid.size(), m = static_cast<int>(band.size());
  ComplexMatrix E(n, m);
  for (int c = 0; c < m; ++c)
    for (int t = 0; t < n; ++t) E(t, c) = std::polar(1.0 / std::sqrt(n), -grid.omega(band[c]) * grid.t(t));
  return E;
}

inline std::vector<int> band_indices(const TimeGrid& grid, double omega_cut) {
  std::vector<int> band;
  for (int k = 0; k < grid.size(); ++k)
    if (std::abs(grid.omega(k)) <= omega_cut) band.push_back(k);
  return band;
}

/// SVD of Eo^H (dt block) Ei with orthonormal bases Eo (output) and Ei (input).
inline SchmidtDecomposition decompose_projected(const ComplexMatrix& block, const TimeGrid& grid,
                                                const ComplexMatrix& Eo, const ComplexMatrix& Ei) {
  if (block.rows() != grid.size() || block.cols() != grid.size())
    throw std::invalid_argument("decompose: block does not match the grid");
  if (!block.allFinite()) throw std::invalid_argument("decompose: non-finite Green function");
  const ComplexMatrix M = Eo.adjoint() * (block * grid.dt()) * Ei;
  Eigen::BDCSVD<ComplexMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return finish_decomposition(grid, svd.singularValues(), Eo * svd.matrixU(), Ei * svd.matrixV());
}

}  // namespace detail

/// Default analysis band: half the grid Nyquist frequency.
inline double default_schmidt_cut(const TimeGrid& grid) { return 0.5 * grid.nyquist(); }

/// Decomposition of the block restricted to |w|, |w'| <= omega_cut on both sides.
/// Grid frequencies near Nyquist wrap around in the pointwise pump products and
/// convert phase matched; restricting the band removes those modes.
inline SchmidtDecomposition decompose_band(const ComplexMatrix& block, const TimeGrid& grid, double omega_cut) {
  if (!(omega_cut > 0.0)) throw std::invalid_argument("decompose_band: omega_cut must be > 0");
  const auto band = detail::band_indices(grid, omega_cut);
  const ComplexMatrix E = detail::plane_waves(grid, band);
  return detail::decompose_projected(block, grid, E, E);
}

/// Decomposition of H * G_is: the input modes maximise the filtered output.
/// Inputs are restricted to |w'| <= omega_cut when omega_cut > 0.
inline SchmidtDecomposition decompose_filtered(const ComplexMatrix& block, const TimeGrid& grid,
                                               const SpectralFilter& filter, double omega_cut = 0.0) {
  std::vector<int> out_band;
  if (filter.is_all_pass()) {
    if (omega_cut > 0.0) return decompose_band(block, grid, omega_cut);
    return decompose(block, grid);
  }
  const RealVector H = filter.samples(grid);
  for (int k = 0; k < grid.size(); ++k)
    if (H[k] > 0.0) out_band.push_back(k);
  if (out_band.empty()) throw std::invalid_argument("decompose_filtered: filter passes no grid frequency");
  const ComplexMatrix Eo = detail::plane_waves(grid, out_band);
  if (omega_cut > 0.0) return detail::decompose_projected(block, grid, Eo, detail::plane_waves(grid, detail::band_indices(grid, omega_cut)));
  return detail::decompose_projected(block, grid, Eo, ComplexMatrix::Identity(grid.size(), grid.size()));
}

inline double conversion_efficiency(const SchmidtDecomposition& d, int n) {
  if (n < 0 || n >= d.rank()) throw std::out_of_range("conversion_efficiency: index out of range");
  return d.coefficients[n] * d.coefficients[n];
}

/// RMS width of |f|^2 about its centre of mass.
inline double rms_duration(const SampledField& f) {
  const auto& g = f.grid;
  const double c = detail::center_of_mass(g, f.values);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const double w = std::norm(f.values[k]);
    num += (g.t(k) - c) * (g.t(k) - c) * w;
    den += w;
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// CSV with t and the first `modes` input/output modes (real and imaginary parts).
inline void write_schmidt_csv(const std::string& path, const SchmidtDecomposition& d, int modes = 2) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  modes = std::min(modes, d.rank());
  out << "# lambda:";
  for (int n = 0; n < modes; ++n) out << ' ' << d.coefficients[n];
  out << "\nt (ps)";
  for (int n = 0; n < modes; ++n)
    for (const char* part : {"u%d_re", "u%d_im", "v%d_re", "v%d_im"}) {
      char name[16];
      std::snprintf(name, sizeof name, part, n + 1);
      out << ',' << name << " (ps^-1/2)";
    }
  out << '\n';
  out.precision(17);
  for (int k = 0; k < d.grid.size(); ++k) {
    out << d.grid.t(k);
    for (int n = 0; n < modes; ++n)
      out << ',' << d.input_modes(k, n).real() << ',' << d.input_modes(k, n).imag() << ','
          << d.output_modes(k, n).real() << ',' << d.output_modes(k, n).imag();
    out << '\n';
  }
}

}  // namespace fwmbs
