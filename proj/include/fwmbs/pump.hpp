#pragma once

// Classical pump pulses: Gaussian initial conditions and split-step
// propagation with dispersion, Kerr phase modulation and the delayed Raman
// intensity response.

#include "fwmbs/errors.hpp"
#include "fwmbs/grid.hpp"
#include "fwmbs/raman.hpp"

#include <optional>

namespace fwmbs {

/// Dispersion of one pump: beta(w) = beta1 w + beta2 w^2 / 2.
struct PumpDispersion {
  double beta1 = 0.0;  // ps/m
  double beta2 = 0.0;  // ps^2/m
};

struct PumpPair {
  SampledField A_p, A_q;  // sqrt(W)
  PumpDispersion disp_p, disp_q;
};

/// Pump q centred at -delay/2 and p at +delay/2 with |A|^2 = P exp(-(t -+ delay/2)^2 / (2 tau^2)).
inline PumpPair init_gaussian_pumps(const TimeGrid& grid, double P, double tau, double delay, PumpDispersion disp_p,
                                    PumpDispersion disp_q) {
  if (!(P >= 0.0) || !std::isfinite(P)) throw ConfigError("init_gaussian_pumps: peak power must be >= 0");
  if (!(tau > 0.0)) throw ConfigError("init_gaussian_pumps: tau must be > 0");
  if (!(delay >= 0.0)) throw ConfigError("init_gaussian_pumps: delay must be >= 0");
  if (grid.span() < 4.0 * (delay + 6.0 * tau))
    throw ConfigError("init_gaussian_pumps: grid span " + std::to_string(grid.span()) +
                      " ps is shorter than 4 (delay + 6 tau) = " + std::to_string(4.0 * (delay + 6.0 * tau)) + " ps");
  PumpPair out{SampledField::zeros(grid), SampledField::zeros(grid), disp_p, disp_q};
  const double amp = std::sqrt(P);
  for (int k = 0; k < grid.size(); ++k) {
    const double tq = grid.t(k) + 0.5 * delay, tp = grid.t(k) - 0.5 * delay;
    out.A_q.values[k] = amp * std::exp(-tq * tq / (4.0 * tau * tau));
    out.A_p.values[k] = amp * std::exp(-tp * tp / (4.0 * tau * tau));
  }
  return out;
}

/// Constant pumps of power P across the whole (periodic) grid.
inline PumpPair flat_pumps(const TimeGrid& grid, double P, PumpDispersion disp_p = {}, PumpDispersion disp_q = {}) {
  if (!(P >= 0.0) || !std::isfinite(P)) throw ConfigError("flat_pumps: power must be >= 0");
  const ComplexVector v = ComplexVector::Constant(grid.size(), std::sqrt(P));
  return {{grid, v}, {grid, v}, disp_p, disp_q};
}

/// Pump envelopes at a sequence of z positions.
struct PumpHistory {
  std::vector<double> z;
  std::vector<ComplexVector> A_p, A_q;
  TimeGrid grid;

  /// Linear interpolation between stored positions.
  std::pair<ComplexVector, ComplexVector> at(double zz) const {
    if (z.empty()) throw std::logic_error("PumpHistory: empty");
    if (zz <= z.front()) return {A_p.front(), A_q.front()};
    if (zz >= z.back()) return {A_p.back(), A_q.back()};
    const auto it = std::upper_bound(z.begin(), z.end(), zz);
    const auto j = static_cast<std::size_t>(it - z.begin());
    const double w = (zz - z[j - 1]) / (z[j] - z[j - 1]);
    return {(1.0 - w) * A_p[j - 1] + w * A_p[j], (1.0 - w) * A_q[j - 1] + w * A_q[j]};
  }
};

struct PumpPropagationOptions {
  double max_phase_per_step = 0.05;  // h * gamma * P_peak must stay below this
};

namespace detail {

inline ComplexVector dispersion_multiplier(const TimeGrid& grid, const PumpDispersion& d, double h) {
  ComplexVector m(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const double w = grid.omega(k);
    m[k] = std::polar(1.0, (d.beta1 * w + 0.5 * d.beta2 * w * w) * h);
  }
  return m;
}

/// sqrt(2 pi) f(w) for an intensity (baseband) Raman term with the given labels.
inline ComplexVector intensity_kernel(const RamanResponse& r, const TimeGrid& grid, char a, char b, char c, char d) {
  const auto w = raman_weights(a, b, c, d);
  ComplexVector m(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const double nu = grid.omega(k);
    m[k] = r.f_R() == 0.0 ? cdouble(0.0) : r.gamma() * r.f_R() * (w[0] * r.h_a(nu) + w[1] * r.h_b(nu));
  }
  return m;
}

inline void check_finite(const ComplexVector& v, const char* what) {
  if (!v.allFinite()) throw NumericalError("pump-propagator", std::string("non-finite ") + what);
}

}  // namespace detail

/// Symmetric split-step D(h/2) N(h) D(h/2). The nonlinear step is an exact
/// phase rotation because |A_p|^2 and |A_q|^2 are invariant under it.
class PumpPropagator {
 public:
  PumpPropagator(const RamanResponse& response, const TimeGrid& grid) : grid_(grid) {
    const auto f = field_polarizations(response.config());
    const double g = response.gamma(), fR = response.f_R();
    gamma_pp_ = gamma_tensor(g, fR, f.p, f.p, f.p, f.p);
    gamma_qq_ = gamma_tensor(g, fR, f.q, f.q, f.q, f.q);
    gamma_pq_ = gamma_tensor(g, fR, f.p, f.p, f.q, f.q);
    gamma_qp_ = gamma_tensor(g, fR, f.q, f.q, f.p, f.p);
    raman_ = fR > 0.0;
    if (raman_) {
      k_pp_ = detail::intensity_kernel(response, grid, f.p, f.p, f.p, f.p);
      k_pq_ = detail::intensity_kernel(response, grid, f.p, f.p, f.q, f.q);
      k_qq_ = detail::intensity_kernel(response, grid, f.q, f.q, f.q, f.q);
      k_qp_ = detail::intensity_kernel(response, grid, f.q, f.q, f.p, f.p);
    }
    gamma_scale_ = g;
  }

  /// Propagates over `length` with `steps` equal steps; snapshots after every step.
  PumpHistory propagate(const PumpPair& in, double length, int steps, int substeps = 1,
                        PumpPropagationOptions opt = {}) const {
    if (!(in.A_p.grid == grid_) || !(in.A_q.grid == grid_)) throw ConfigError("pump grid mismatch");
    if (!(length >= 0.0)) throw ConfigError("propagate_pumps: length must be >= 0");
    if (steps < 1 || substeps < 1) throw ConfigError("propagate_pumps: steps must be >= 1");
    const double h = length / (static_cast<double>(steps) * substeps);
    const double peak = std::max(in.A_p.values.cwiseAbs2().maxCoeff(), in.A_q.values.cwiseAbs2().maxCoeff());
    if (h * gamma_scale_ * peak >= opt.max_phase_per_step)
      throw ConfigError("propagate_pumps: step " + std::to_string(h) + " m does not resolve the nonlinear length (h gamma P = " +
                        std::to_string(h * gamma_scale_ * peak) + ")");
    const ComplexVector Dp = detail::dispersion_multiplier(grid_, in.disp_p, 0.5 * h);
    const ComplexVector Dq = detail::dispersion_multiplier(grid_, in.disp_q, 0.5 * h);
    ComplexVector Ap = in.A_p.values, Aq = in.A_q.values;
    PumpHistory hist;
    hist.grid = grid_;
    hist.z.push_back(0.0);
    hist.A_p.push_back(Ap);
    hist.A_q.push_back(Aq);
    for (int s = 0; s < steps; ++s) {
      for (int u = 0; u < substeps; ++u) {
        apply_multiplier(Ap, Dp);
        apply_multiplier(Aq, Dq);
        nonlinear(Ap, Aq, h);
        apply_multiplier(Ap, Dp);
        apply_multiplier(Aq, Dq);
      }
      detail::check_finite(Ap, "pump p");
      detail::check_finite(Aq, "pump q");
      hist.z.push_back(length * (s + 1) / steps);
      hist.A_p.push_back(Ap);
      hist.A_q.push_back(Aq);
    }
    return hist;
  }

  /// Smallest number of substeps per step of size h that satisfies the step criterion.
  int substeps_for(double h, double peak_power, PumpPropagationOptions opt = {}) const {
    const double phase = h * gamma_scale_ * peak_power;
    return std::max(1, static_cast<int>(std::ceil(phase / (0.999 * opt.max_phase_per_step))));
  }

 private:
  void nonlinear(ComplexVector& Ap, ComplexVector& Aq, double h) const {
    const RealVector Ip = Ap.cwiseAbs2(), Iq = Aq.cwiseAbs2();
    RealVector phi_p = gamma_pp_ * Ip + 2.0 * gamma_pq_ * Iq;
    RealVector phi_q = gamma_qq_ * Iq + 2.0 * gamma_qp_ * Ip;
    if (raman_) {
      ComplexMatrix I(grid_.size(), 2);
      I.col(0) = Ip.cast<cdouble>();
      I.col(1) = Iq.cast<cdouble>();
      ComplexMatrix spec = I;
      detail::dft_columns(spec.data(), grid_.size(), 2, +1);
      const double inv_n = 1.0 / grid_.size();
      ComplexVector rp = (k_pp_.array() * spec.col(0).array() + k_pq_.array() * spec.col(1).array()) * inv_n;
      ComplexVector rq = (k_qq_.array() * spec.col(1).array() + k_qp_.array() * spec.col(0).array()) * inv_n;
      detail::dft_columns(rp.data(), grid_.size(), 1, -1);
      detail::dft_columns(rq.data(), grid_.size(), 1, -1);
      // The convolution of a real intensity with a real kernel is real.
      phi_p += rp.real();
      phi_q += rq.real();
    }
    for (int k = 0; k < grid_.size(); ++k) {
      Ap[k] *= std::polar(1.0, phi_p[k] * h);
      Aq[k] *= std::polar(1.0, phi_q[k] * h);
    }
  }

  TimeGrid grid_;
  double gamma_pp_ = 0.0, gamma_qq_ = 0.0, gamma_pq_ = 0.0, gamma_qp_ = 0.0, gamma_scale_ = 0.0;
  bool raman_ = false;
  ComplexVector k_pp_, k_pq_, k_qq_, k_qp_;
};

/// Convenience wrapper returning only the pumps at z = length.
inline PumpPair propagate_pumps(const PumpPair& in, const RamanResponse& response, double length, double h,
                                PumpPropagationOptions opt = {}) {
  if (!(h > 0.0) || h > length) throw ConfigError("propagate_pumps: need 0 < h <= length");
  const int steps = static_cast<int>(std::ceil(length / h - 1e-9));
  const auto hist = PumpPropagator(response, in.A_p.grid).propagate(in, length, steps, 1, opt);
  PumpPair out = in;
  out.A_p.values = hist.A_p.back();
  out.A_q.values = hist.A_q.back();
  return out;
}

}  // namespace fwmbs
