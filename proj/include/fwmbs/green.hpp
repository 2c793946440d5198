#pragma once

// Split-step solution of the Green-function equation for pulsed pumps.
//
// The state is the pair of row blocks X_i = [G_ii G_is] and X_s = [G_si G_ss];
// every operator acts on the first (row) time index. One step is
// D(h/2) E(h/2) R(h) E(h/2) D(h/2) with exact dispersion and electronic
// steps and an iterated trapezoidal Raman step. The transposed step is
// available for adjoint sweeps that build output-referenced propagators.

#include "fwmbs/cw.hpp"
#include "fwmbs/errors.hpp"
#include "fwmbs/pump.hpp"

#include <cstdint>
#include <fstream>
#include <functional>

namespace fwmbs {

inline constexpr double kSpeedOfLight = 2.99792458e-4;  // m/ps

/// Walk-off and fiber length for two pumps that start `delay` apart and
/// collide at the fiber midpoint.
struct CollisionGeometry {
  double walkoff = 0.0;  // beta1s - beta1i, ps/m
  double length = 0.0;   // m
};

inline CollisionGeometry collision_geometry(double delay, double dn_eff = 1e-3) {
  if (!(delay > 0.0) || !(dn_eff > 0.0)) throw ConfigError("collision_geometry: delay and dn_eff must be > 0");
  const double walkoff = dn_eff / kSpeedOfLight;
  return {walkoff, 2.0 * delay / walkoff};
}

/// Pulsed-pump run: fiber parameters plus the pump pulse shape.
/// Pump p travels with the idler (beta1i) and q with the signal (beta1s).
struct PulsedScenario {
  FiberScenario fiber;  // fiber.P0 is the peak power per pump
  double tau = 0.1;     // ps
  double delay = 0.6;   // ps
  double beta2p = 0.0, beta2q = 0.0;
  bool flat_pumps = false;

  PumpPair initial_pumps(const TimeGrid& grid) const {
    const PumpDispersion dp{fiber.beta1i, beta2p}, dq{fiber.beta1s, beta2q};
    if (flat_pumps) return fwmbs::flat_pumps(grid, fiber.P0, dp, dq);
    return init_gaussian_pumps(grid, fiber.P0, tau, delay, dp, dq);
  }
};

/// Symmetric pump collision: pumps of duration tau separated by delay meet at
/// the fiber midpoint, l = 2 delay c / dn_eff, with peak power set by gamma P l.
inline PulsedScenario collision_scenario(double gamma_P_l, double f_R, double Omega, double tau = 0.1,
                                         double delay = 0.6, double gamma = 1.0, double dn_eff = 1e-3) {
  if (!(gamma > 0.0)) throw ConfigError("collision_scenario: gamma must be > 0");
  const auto geo = collision_geometry(delay, dn_eff);
  PulsedScenario s;
  s.fiber.gamma = gamma;
  s.fiber.f_R = f_R;
  s.fiber.length = geo.length;
  s.fiber.P0 = gamma_P_l / (gamma * geo.length);
  s.fiber.beta1i = -0.5 * geo.walkoff;
  s.fiber.beta1s = 0.5 * geo.walkoff;
  s.fiber.Omega = Omega;
  s.tau = tau;
  s.delay = delay;
  return s;
}

struct PropagationConfig {
  int steps = 60;
  int raman_iterations = 3;
  bool far_pump_xpm = false;  // true: each quantum field is phase modulated by both pumps
  double pump_phase_per_step = 0.05;

  void validate() const {
    if (steps < 1) throw ConfigError("PropagationConfig: steps must be >= 1");
    if (raman_iterations < 1) throw ConfigError("PropagationConfig: raman_iterations must be >= 1");
  }
};

namespace detail {

/// Per-sample 2x2 matrices [[u11, u12], [u21, u22]].
struct RowMatrices {
  ComplexVector u11, u12, u21, u22;
};

inline void apply_rows(const RowMatrices& u, ComplexMatrix& Xi, ComplexMatrix& Xs, bool transpose) {
  const ComplexVector& a = u.u11;
  const ComplexVector& b = transpose ? u.u21 : u.u12;
  const ComplexVector& c = transpose ? u.u12 : u.u21;
  const ComplexVector& d = u.u22;
  const Eigen::Index n = Xi.rows();
  for (Eigen::Index col = 0; col < Xi.cols(); ++col) {
    cdouble* xi = Xi.col(col).data();
    cdouble* xs = Xs.col(col).data();
    for (Eigen::Index t = 0; t < n; ++t) {
      const cdouble vi = xi[t], vs = xs[t];
      xi[t] = a[t] * vi + b[t] * vs;
      xs[t] = c[t] * vi + d[t] * vs;
    }
  }
}

/// Four spectral multipliers m_ab (a = output row block, b = input row block).
struct KernelSet {
  ComplexVector ii, is, si, ss;
  bool balanced = false;

  KernelSet transposed() const {
    KernelSet t{reversed_frequency(ii), reversed_frequency(si), reversed_frequency(is), reversed_frequency(ss), balanced};
    return t;
  }
};

/// Y_a = phi_a * IFFT[ sum_b m_ab FFT(psi_b * X_b) ] on every column.
inline void mix_columns(const ComplexMatrix& Xi, const ComplexMatrix& Xs, ComplexMatrix& Yi, ComplexMatrix& Ys,
                        const ComplexVector& psi_i, const ComplexVector& psi_s, const ComplexVector& phi_i,
                        const ComplexVector& phi_s, const KernelSet& m) {
  const int n = static_cast<int>(Xi.rows());
  const int cols = static_cast<int>(Xi.cols());
  Yi.resize(n, cols);
  Ys.resize(n, cols);
  const double inv_n = 1.0 / n;
  for_column_chunks(cols, [&](int first, int count) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(first) * n;
    if (m.balanced) {
      ComplexMatrix buf(n, count);
      for (int c = 0; c < count; ++c) {
        const cdouble* xi = Xi.data() + off + static_cast<std::ptrdiff_t>(c) * n;
        const cdouble* xs = Xs.data() + off + static_cast<std::ptrdiff_t>(c) * n;
        cdouble* b = buf.col(c).data();
        for (int t = 0; t < n; ++t) b[t] = psi_i[t] * xi[t] + psi_s[t] * xs[t];
      }
      dft_columns(buf.data(), n, count, +1);
      for (int c = 0; c < count; ++c) {
        cdouble* b = buf.col(c).data();
        for (int k = 0; k < n; ++k) b[k] *= m.ii[k] * inv_n;
      }
      dft_columns(buf.data(), n, count, -1);
      for (int c = 0; c < count; ++c) {
        const cdouble* b = buf.col(c).data();
        cdouble* yi = Yi.data() + off + static_cast<std::ptrdiff_t>(c) * n;
        cdouble* ys = Ys.data() + off + static_cast<std::ptrdiff_t>(c) * n;
        for (int t = 0; t < n; ++t) {
          yi[t] = phi_i[t] * b[t];
          ys[t] = phi_s[t] * b[t];
        }
      }
      return;
    }
    ComplexMatrix bi(n, count), bs(n, count);
    for (int c = 0; c < count; ++c) {
      const cdouble* xi = Xi.data() + off + static_cast<std::ptrdiff_t>(c) * n;
      const cdouble* xs = Xs.data() + off + static_cast<std::ptrdiff_t>(c) * n;
      for (int t = 0; t < n; ++t) {
        bi(t, c) = psi_i[t] * xi[t];
        bs(t, c) = psi_s[t] * xs[t];
      }
    }
    dft_columns(bi.data(), n, count, +1);
    dft_columns(bs.data(), n, count, +1);
    for (int c = 0; c < count; ++c)
      for (int k = 0; k < n; ++k) {
        const cdouble ui = bi(k, c), us = bs(k, c);
        bi(k, c) = (m.ii[k] * ui + m.is[k] * us) * inv_n;
        bs(k, c) = (m.si[k] * ui + m.ss[k] * us) * inv_n;
      }
    dft_columns(bi.data(), n, count, -1);
    dft_columns(bs.data(), n, count, -1);
    for (int c = 0; c < count; ++c) {
      cdouble* yi = Yi.data() + off + static_cast<std::ptrdiff_t>(c) * n;
      cdouble* ys = Ys.data() + off + static_cast<std::ptrdiff_t>(c) * n;
      for (int t = 0; t < n; ++t) {
        yi[t] = phi_i[t] * bi(t, c);
        ys[t] = phi_s[t] * bs(t, c);
      }
    }
  });
}

inline double pair_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  return std::sqrt(a.squaredNorm() + b.squaredNorm());
}

}  // namespace detail

/// Propagates Green functions through one pulsed-pump fiber.
class GreenPropagator {
 public:
  GreenPropagator(const FiberScenario& scn, const RamanResponse& response, const PumpPair& pumps,
                  PropagationConfig cfg = {})
      : grid_(pumps.A_p.grid), cfg_(cfg) {
    check_consistent(scn, response);
    cfg_.validate();
    if (!(pumps.A_q.grid == grid_)) throw ConfigError("GreenPropagator: pump grids differ");
    length_ = scn.length;
    h_ = length_ / cfg_.steps;
    dbeta0_ = scn.dbeta;

    const auto f = field_polarizations(scn.config);
    const double g = scn.gamma, fR = scn.f_R;
    gamma_iqqi_ = gamma_tensor(g, fR, f.i, f.q, f.q, f.i);
    gamma_spps_ = gamma_tensor(g, fR, f.s, f.p, f.p, f.s);
    gamma_iipp_ = gamma_tensor(g, fR, f.i, f.i, f.p, f.p);
    gamma_sspp_ = gamma_tensor(g, fR, f.s, f.s, f.p, f.p);
    gamma_iiqq_ = gamma_tensor(g, fR, f.i, f.i, f.q, f.q);
    gamma_ssqq_ = gamma_tensor(g, fR, f.s, f.s, f.q, f.q);
    gamma_iqps_ = gamma_tensor(g, fR, f.i, f.q, f.p, f.s);
    gamma_spqi_ = gamma_tensor(g, fR, f.s, f.p, f.q, f.i);

    // The omega-dependent part of dbeta (if any) goes into the dispersion step.
    const int n = grid_.size();
    disp_i_.resize(n);
    disp_s_.resize(n);
    for (int k = 0; k < n; ++k) {
      const double w = grid_.omega(k);
      const double extra = scn.dbeta_of_omega ? 0.5 * (scn.dbeta_of_omega(w) - scn.dbeta) : 0.0;
      disp_i_[k] = scn.beta_i(w) + extra;
      disp_s_[k] = scn.beta_s(w) - extra;
    }

    raman_ = fR > 0.0 && g != 0.0;
    if (raman_) {
      const RealVector w = grid_.omegas();
      kernels_ = {response.kernel(Coupling::IQQI, w), response.kernel(Coupling::IQPS, w),
                  response.kernel(Coupling::SPQI, w), response.kernel(Coupling::SPPS, w), false};
      const double scale = kernels_.ii.cwiseAbs().maxCoeff() + 1e-300;
      kernels_.balanced = (kernels_.ii - kernels_.is).cwiseAbs().maxCoeff() <= 1e-14 * scale &&
                          (kernels_.ii - kernels_.si).cwiseAbs().maxCoeff() <= 1e-14 * scale &&
                          (kernels_.ii - kernels_.ss).cwiseAbs().maxCoeff() <= 1e-14 * scale;
      kernels_t_ = kernels_.transposed();
    }

    const PumpPropagator pp(response, grid_);
    const double peak = std::max(pumps.A_p.values.cwiseAbs2().maxCoeff(), pumps.A_q.values.cwiseAbs2().maxCoeff());
    const int sub = pp.substeps_for(h_, peak, {cfg_.pump_phase_per_step});
    pumps_ = pp.propagate(pumps, length_, cfg_.steps, sub, {cfg_.pump_phase_per_step});
  }

  const TimeGrid& grid() const { return grid_; }
  const PumpHistory& pumps() const { return pumps_; }
  const PropagationConfig& config() const { return cfg_; }
  double step() const { return h_; }
  int steps() const { return cfg_.steps; }
  double length() const { return length_; }
  double node(int j) const { return pumps_.z[static_cast<std::size_t>(j)]; }

  /// Green matrix from node `first` (z = first * h) to the fiber end.
  GreenMatrix propagate(int first = 0) const {
    if (first < 0 || first > cfg_.steps) throw ConfigError("propagate: start node out of range");
    const int n = grid_.size();
    ComplexMatrix Xi = ComplexMatrix::Zero(n, 2 * n), Xs = ComplexMatrix::Zero(n, 2 * n);
    Xi.leftCols(n).diagonal().setConstant(1.0 / grid_.dt());
    Xs.rightCols(n).diagonal().setConstant(1.0 / grid_.dt());
    forward(Xi, Xs, first);
    GreenMatrix G;
    G.grid = grid_;
    G.z = length_ - node(first);
    G.ii = Xi.leftCols(n);
    G.is = Xi.rightCols(n);
    G.si = Xs.leftCols(n);
    G.ss = Xs.rightCols(n);
    return G;
  }

  /// Only the signal-input columns: returns {G_is, G_ss} at the fiber end.
  std::pair<ComplexMatrix, ComplexMatrix> propagate_signal_inputs() const {
    const int n = grid_.size();
    ComplexMatrix Xi = ComplexMatrix::Zero(n, n), Xs = ComplexMatrix::Zero(n, n);
    Xs.diagonal().setConstant(1.0 / grid_.dt());
    forward(Xi, Xs);
    return {std::move(Xi), std::move(Xs)};
  }

  /// Propagates arbitrary row-operator columns forward from node `first` to the end.
  void forward(ComplexMatrix& Xi, ComplexMatrix& Xs, int first = 0) const {
    check_shape(Xi, Xs);
    if (first == cfg_.steps) return;
    const ComplexVector dh_i = dispersion(disp_i_, 0.5 * h_), dh_s = dispersion(disp_s_, 0.5 * h_);
    const ComplexVector df_i = dispersion(disp_i_, h_), df_s = dispersion(disp_s_, h_);
    apply_multiplier(Xi, dh_i);
    apply_multiplier(Xs, dh_s);
    for (int j = first; j < cfg_.steps; ++j) {
      if (raman_) {
        const auto U = electronic(j, 0.5 * h_);
        detail::apply_rows(U, Xi, Xs, false);
        raman_step(Xi, Xs, j);
        detail::apply_rows(U, Xi, Xs, false);
      } else {
        detail::apply_rows(electronic(j, h_), Xi, Xs, false);
      }
      const bool last = j + 1 == cfg_.steps;
      apply_multiplier(Xi, last ? dh_i : df_i);
      apply_multiplier(Xs, last ? dh_s : df_s);
      check_finite(Xi, Xs, j);
    }
  }

  /// Adjoint sweep: starting from Z at the fiber end, applies transposed steps
  /// back to z = 0. visit(j, Zi, Zs) sees Z_j = P(z_j -> l)^T Z_end at every node.
  void adjoint_sweep(ComplexMatrix Zi, ComplexMatrix Zs,
                     const std::function<void(int, const ComplexMatrix&, const ComplexMatrix&)>& visit) const {
    check_shape(Zi, Zs);
    const ComplexVector dh_i = reversed_frequency(dispersion(disp_i_, 0.5 * h_));
    const ComplexVector dh_s = reversed_frequency(dispersion(disp_s_, 0.5 * h_));
    visit(cfg_.steps, Zi, Zs);
    for (int j = cfg_.steps - 1; j >= 0; --j) {
      apply_multiplier(Zi, dh_i);
      apply_multiplier(Zs, dh_s);
      if (raman_) {
        const auto U = electronic(j, 0.5 * h_);
        detail::apply_rows(U, Zi, Zs, true);
        raman_step_transpose(Zi, Zs, j);
        detail::apply_rows(U, Zi, Zs, true);
      } else {
        detail::apply_rows(electronic(j, h_), Zi, Zs, true);
      }
      apply_multiplier(Zi, dh_i);
      apply_multiplier(Zs, dh_s);
      check_finite(Zi, Zs, j);
      visit(j, Zi, Zs);
    }
  }

 private:
  ComplexVector dispersion(const RealVector& beta, double dz) const {
    ComplexVector m(beta.size());
    for (Eigen::Index k = 0; k < beta.size(); ++k) m[k] = std::polar(1.0, beta[k] * dz);
    return m;
  }

  void check_shape(const ComplexMatrix& a, const ComplexMatrix& b) const {
    if (a.rows() != grid_.size() || b.rows() != grid_.size() || a.cols() != b.cols())
      throw std::invalid_argument("GreenPropagator: state shape mismatch");
  }

  void check_finite(const ComplexMatrix& a, const ComplexMatrix& b, int j) const {
    if (!a.allFinite() || !b.allFinite())
      throw NumericalError("green-propagator", "non-finite Green function after step " + std::to_string(j) +
                                                   " (z = " + std::to_string(node(j + 1)) + " m)");
  }

  /// exp(i dz M(t)) with M = [[a + dbeta/2, c], [c', b - dbeta/2]] averaged over the step ends.
  detail::RowMatrices electronic(int j, double dz) const {
    const int n = grid_.size();
    const auto& Ap0 = pumps_.A_p[j];
    const auto& Aq0 = pumps_.A_q[j];
    const auto& Ap1 = pumps_.A_p[j + 1];
    const auto& Aq1 = pumps_.A_q[j + 1];
    detail::RowMatrices U{ComplexVector(n), ComplexVector(n), ComplexVector(n), ComplexVector(n)};
    for (int t = 0; t < n; ++t) {
      const double Ip = 0.5 * (std::norm(Ap0[t]) + std::norm(Ap1[t]));
      const double Iq = 0.5 * (std::norm(Aq0[t]) + std::norm(Aq1[t]));
      const cdouble pq = 0.5 * (std::conj(Ap0[t]) * Aq0[t] + std::conj(Ap1[t]) * Aq1[t]);
      double a = 2.0 * gamma_iqqi_ * Iq, b = 2.0 * gamma_spps_ * Ip;
      if (cfg_.far_pump_xpm) {
        // Both pumps modulate each field: 2 (gamma_iipp |A_p|^2 + gamma_iiqq |A_q|^2).
        a = 2.0 * (gamma_iipp_ * Ip + gamma_iiqq_ * Iq);
        b = 2.0 * (gamma_sspp_ * Ip + gamma_ssqq_ * Iq);
      }
      const cdouble m11 = a + 0.5 * dbeta0_, m22 = b - 0.5 * dbeta0_;
      const cdouble m12 = 2.0 * gamma_iqps_ * pq, m21 = 2.0 * gamma_spqi_ * std::conj(pq);
      const cdouble sigma = 0.5 * (m11 + m22), delta = m11 - m22;
      const cdouble k = 0.5 * std::sqrt(4.0 * m12 * m21 + delta * delta);
      const cdouble sinc = std::abs(k) * dz < 1e-6 ? cdouble(dz) : std::sin(k * dz) / k;
      const cdouble cosk = std::cos(k * dz);
      const cdouble ph = std::exp(kI * sigma * dz);
      U.u11[t] = ph * (cosk + kI * 0.5 * delta * sinc);
      U.u22[t] = ph * (cosk - kI * 0.5 * delta * sinc);
      U.u12[t] = ph * kI * m12 * sinc;
      U.u21[t] = ph * kI * m21 * sinc;
    }
    return U;
  }

  /// Y = K(node) X for the Raman coupling at a pump snapshot.
  void apply_K(const ComplexMatrix& Xi, const ComplexMatrix& Xs, ComplexMatrix& Yi, ComplexMatrix& Ys, int node,
               bool transpose) const {
    const auto& Ap = pumps_.A_p[node];
    const auto& Aq = pumps_.A_q[node];
    const ComplexVector Aqc = Aq.conjugate(), Apc = Ap.conjugate();
    if (!transpose)
      detail::mix_columns(Xi, Xs, Yi, Ys, Aqc, Apc, Aq, Ap, kernels_);
    else
      detail::mix_columns(Xi, Xs, Yi, Ys, Aq, Ap, Aqc, Apc, kernels_t_);
  }

  void raman_step(ComplexMatrix& Xi, ComplexMatrix& Xs, int j) const {
    const cdouble a = kI * (0.5 * h_);
    ComplexMatrix Yi, Ys;
    apply_K(Xi, Xs, Yi, Ys, j, false);
    const ComplexMatrix base_i = Xi + a * Yi, base_s = Xs + a * Ys;
    double prev = std::numeric_limits<double>::infinity();
    const double scale = detail::pair_norm(Xi, Xs);
    for (int it = 0; it < cfg_.raman_iterations; ++it) {
      apply_K(Xi, Xs, Yi, Ys, j + 1, false);
      Yi = base_i + a * Yi;
      Ys = base_s + a * Ys;
      const double update = detail::pair_norm(Yi - Xi, Ys - Xs);
      if (it > 0 && update > prev && update > 1e-10 * scale)
        throw NumericalError("green-propagator", "Raman iteration diverges at z = " + std::to_string(node(j)) +
                                                     " m; reduce the step size (h = " + std::to_string(h_) + " m)");
      prev = update;
      Xi.swap(Yi);
      Xs.swap(Ys);
    }
  }

  /// Transpose of the iterated Raman map: (I + X0^T) sum_{m<n} (X1^T)^m Z + (X1^T)^n Z.
  void raman_step_transpose(ComplexMatrix& Zi, ComplexMatrix& Zs, int j) const {
    const cdouble a = kI * (0.5 * h_);
    ComplexMatrix Si = Zi, Ss = Zs, Vi = Zi, Vs = Zs, Yi, Ys;
    for (int m = 1; m <= cfg_.raman_iterations; ++m) {
      apply_K(Vi, Vs, Yi, Ys, j + 1, true);
      Vi = a * Yi;
      Vs = a * Ys;
      if (m < cfg_.raman_iterations) {
        Si += Vi;
        Ss += Vs;
      }
    }
    apply_K(Si, Ss, Yi, Ys, j, true);
    Zi = Si + a * Yi + Vi;
    Zs = Ss + a * Ys + Vs;
  }

  TimeGrid grid_;
  PropagationConfig cfg_;
  double length_ = 0.0, h_ = 0.0, dbeta0_ = 0.0;
  double gamma_iqqi_ = 0.0, gamma_spps_ = 0.0, gamma_iipp_ = 0.0, gamma_sspp_ = 0.0, gamma_iiqq_ = 0.0,
         gamma_ssqq_ = 0.0, gamma_iqps_ = 0.0, gamma_spqi_ = 0.0;
  RealVector disp_i_, disp_s_;
  bool raman_ = false;
  detail::KernelSet kernels_, kernels_t_;
  PumpHistory pumps_;
};

inline GreenMatrix propagate_green(const PulsedScenario& scn, const RamanResponse& response, const TimeGrid& grid,
                                   PropagationConfig cfg = {}) {
  return GreenPropagator(scn.fiber, response, scn.initial_pumps(grid), cfg).propagate();
}

/// The propagator restricted to plane waves with |w| <= omega_cut on both the
/// input and output side, in the orthonormal basis exp(-i w t) / sqrt(n dt).
/// Rows and columns are ordered [idler band, signal band].
inline ComplexMatrix band_limited_operator(const GreenPropagator& prop, double omega_cut) {
  const TimeGrid& g = prop.grid();
  const int n = g.size();
  std::vector<int> band;
  for (int k = 0; k < n; ++k)
    if (std::abs(g.omega(k)) <= omega_cut) band.push_back(k);
  const int m = static_cast<int>(band.size());
  if (m == 0) throw ConfigError("band_limited_operator: empty band");
  const double norm = 1.0 / std::sqrt(n * g.dt());
  ComplexMatrix basis(n, m);
  for (int c = 0; c < m; ++c)
    for (int t = 0; t < n; ++t) basis(t, c) = norm * std::polar(1.0, -g.omega(band[c]) * g.t(t));
  ComplexMatrix Xi = ComplexMatrix::Zero(n, 2 * m), Xs = ComplexMatrix::Zero(n, 2 * m);
  Xi.leftCols(m) = basis;
  Xs.rightCols(m) = basis;
  prop.forward(Xi, Xs);
  ComplexMatrix out(2 * m, 2 * m);
  out.topRows(m) = basis.adjoint() * Xi * g.dt();
  out.bottomRows(m) = basis.adjoint() * Xs * g.dt();
  return out;
}

/// Diagonal of a block in the frequency basis: G(w_k) for a translation-invariant kernel.
inline ComplexVector frequency_diagonal(const ComplexMatrix& block, const TimeGrid& grid) {
  const int n = grid.size();
  ComplexMatrix work = block;
  detail::dft_columns(work.data(), n, n, +1);
  ComplexMatrix rows = work.transpose();
  detail::dft_columns(rows.data(), n, n, -1);
  return rows.diagonal() * (grid.dt() / n);
}

/// Binary dump: magic, n, dt, t0, z, config hash, then ii, is, si, ss row-major.
inline void write_green(const std::string& path, const GreenMatrix& G, std::uint64_t hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const char magic[8] = {'F', 'W', 'M', 'B', 'S', 'G', '1', '\0'};
  out.write(magic, 8);
  const std::int64_t n = G.grid.size();
  const double header[3] = {G.grid.dt(), G.grid.t0(), G.z};
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
  for (const ComplexMatrix* b : {&G.ii, &G.is, &G.si, &G.ss}) {
    const Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = *b;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(cdouble)));
  }
}

inline GreenMatrix read_green(const std::string& path, std::uint64_t* hash = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::string(magic, 7) != "FWMBSG1") throw std::runtime_error(path + ": not a Green-matrix dump");
  std::int64_t n = 0;
  double header[3];
  std::uint64_t h = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(header), sizeof header);
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  if (hash) *hash = h;
  GreenMatrix G;
  G.grid = TimeGrid(static_cast<int>(n), header[0], header[1]);
  G.z = header[2];
  for (ComplexMatrix* b : {&G.ii, &G.is, &G.si, &G.ss}) {
    Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(n, n);
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(cdouble)));
    *b = rm;
  }
  if (!in) throw std::runtime_error(path + ": truncated Green-matrix dump");
  return G;
}

}  // namespace fwmbs
