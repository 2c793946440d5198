#pragma once

// Composite studies built on the solvers: CW figure quantities, the CW
// oracle for flat pumps, step convergence, causality and unitarity checks,
// and the comparison of single-photon input shapes for pulsed pumps.

#include "fwmbs/pulsed_statistics.hpp"
#include "fwmbs/schmidt.hpp"

#include <Eigen/SVD>

namespace fwmbs {

// ---------------------------------------------------------------- CW studies

/// Relative output flux I_out / I_in at filter width / I_in = 1.
struct RelativeFlux {
  double conversion = 0.0;   // |G_is(0)|^2
  double first_order = 0.0;  // with the first-order noise term
  double exact = 0.0;        // noise integrated over the filter band
};

inline RelativeFlux cw_relative_flux(const FiberScenario& s, const RamanResponse& r, double width_over_I_in = 1.0) {
  RelativeFlux out;
  out.conversion = std::norm(cw_transfer(coupling_at(s, r, 0.0), s.length).G_is);
  out.first_order = output_flux(s, r, width_over_I_in, 1.0);
  out.exact = output_flux_exact(s, r, width_over_I_in, 1.0);
  return out;
}

/// Photon and phonon quantities of one CW run with a given input photon.
struct CwCorrelation {
  SampledField psi_out;
  CorrelationResult result;
  double conversion = 0.0;  // windowed Integral |psi_out|^2
  int peak = 0;             // index of max |psi_out|
};

inline CwCorrelation cw_correlation(const FiberScenario& s, const RamanResponse& r, const SampledField& photon,
                                    const SpectralFilter& filter, double window, int omega_intervals = 2000,
                                    int z_intervals = 64) {
  CwCorrelation out{filtered_psi_out(s, r, photon, filter), {}, 0.0, 0};
  const ComplexMatrix E = phonon_expectation_cw(s, r, filter, photon.grid, omega_intervals, z_intervals);
  out.result = correlate(out.psi_out, E, window);
  out.conversion = windowed_moments(out.psi_out, E, window).photon;
  out.psi_out.values.cwiseAbs().maxCoeff(&out.peak);
  return out;
}

/// g2(t, t) at the photon peak and its thermal limit far from the photon.
struct G2Limits {
  double at_peak = 0.0;
  double far_min = 0.0, far_max = 0.0;  // over |t - t_peak| >= far_distance
};

inline G2Limits g2_limits(const CorrelationResult& c, int peak, double far_distance) {
  G2Limits out;
  out.at_peak = c.g2(peak, peak);
  out.far_min = std::numeric_limits<double>::infinity();
  out.far_max = -out.far_min;
  const double tp = c.grid.t(peak);
  for (int k = 0; k < c.grid.size(); ++k) {
    if (std::abs(c.grid.t(k) - tp) < far_distance || std::isnan(c.g2(k, k))) continue;
    out.far_min = std::min(out.far_min, c.g2(k, k));
    out.far_max = std::max(out.far_max, c.g2(k, k));
  }
  return out;
}

// ------------------------------------------------------------ pulsed checks

/// Largest deviation of the frequency diagonals of a flat-pump run from the CW
/// Green functions, relative to the largest CW value. The CW couplings omit the
/// electronic phase modulation of the quantum fields, which for flat pumps is the
/// common phase exp(i a l) removed here.
struct OracleReport {
  double deviation = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline OracleReport cw_oracle(PulsedScenario s, const TimeGrid& grid, const PropagationConfig& cfg) {
  s.flat_pumps = true;
  const auto r = s.fiber.silica_response();
  const auto G = propagate_green(s, r, grid, cfg);
  const auto cw = cw_greens(s.fiber, r, grid.omegas());
  const auto f = field_polarizations(s.fiber.config);
  const double g = s.fiber.gamma, fR = s.fiber.f_R, P = s.fiber.P0;
  double a = 2.0 * gamma_tensor(g, fR, f.i, f.q, f.q, f.i) * P;
  double b = 2.0 * gamma_tensor(g, fR, f.s, f.p, f.p, f.s) * P;
  if (cfg.far_pump_xpm) {
    a = 2.0 * (gamma_tensor(g, fR, f.i, f.i, f.p, f.p) + gamma_tensor(g, fR, f.i, f.i, f.q, f.q)) * P;
    b = 2.0 * (gamma_tensor(g, fR, f.s, f.s, f.p, f.p) + gamma_tensor(g, fR, f.s, f.s, f.q, f.q)) * P;
  }
  if (std::abs(a - b) > 1e-12 * (std::abs(a) + std::abs(b)))
    throw ConfigError("cw_oracle: idler and signal phase modulation differ, no common phase to remove");
  const cdouble ph = std::polar(1.0, a * s.fiber.length);
  const ComplexVector d[4] = {frequency_diagonal(G.ii, grid), frequency_diagonal(G.is, grid),
                              frequency_diagonal(G.si, grid), frequency_diagonal(G.ss, grid)};
  const ComplexVector* c[4] = {&cw.G_ii, &cw.G_is, &cw.G_si, &cw.G_ss};
  double err = 0.0, scale = 0.0;
  for (int q = 0; q < 4; ++q) {
    err = std::max(err, (d[q] - ph * *c[q]).cwiseAbs().maxCoeff());
    scale = std::max(scale, c[q]->cwiseAbs().maxCoeff());
  }
  OracleReport out;
  out.deviation = err / scale;
  out.threshold = fR == 0.0 ? 1e-3 : 5e-3;
  out.pass = out.deviation <= out.threshold;
  return out;
}

/// Richardson study of the band-limited operator under step halving.
struct ConvergenceReport {
  std::vector<int> steps;
  std::vector<double> differences;  // ||B(h) - B(h/2)||
  std::vector<double> orders;       // log2 of successive difference ratios
  bool monotone = true;
  double min_order = 0.0;
  bool pass = false;
  // Single Raman iteration at the same levels (empty when f_R = 0).
  std::vector<double> single_iteration_orders;
  // Grid refinement at the coarsest step: N doubled with dt halved (same span, same band).
  double grid_change = 0.0;
  bool grid_resolved = false;
};

inline ComplexMatrix band_operator_for(const PulsedScenario& s, const RamanResponse& r, const TimeGrid& grid,
                                       const PropagationConfig& cfg, double cut) {
  return band_limited_operator(GreenPropagator(s.fiber, r, s.initial_pumps(grid), cfg), cut);
}

inline ConvergenceReport convergence_study(const PulsedScenario& s, const TimeGrid& grid, PropagationConfig cfg,
                                           int levels, double band_cut = 40.0, double required_order = 1.8) {
  if (levels < 2) throw ConfigError("convergence_study: at least 2 refinement levels are needed for an order");
  const auto r = s.fiber.silica_response();
  const int base = cfg.steps;
  const auto run_levels = [&](int iterations) {
    std::vector<ComplexMatrix> B;
    for (int m = 0; m <= levels; ++m) {
      PropagationConfig c = cfg;
      c.steps = base << m;
      c.raman_iterations = iterations;
      B.push_back(band_operator_for(s, r, grid, c, band_cut));
    }
    std::vector<double> diff, ord;
    for (int m = 0; m < levels; ++m) diff.push_back((B[m] - B[m + 1]).norm());
    for (int m = 0; m + 1 < levels; ++m) ord.push_back(std::log2(diff[m] / diff[m + 1]));
    return std::make_pair(diff, ord);
  };
  ConvergenceReport out;
  for (int m = 0; m <= levels; ++m) out.steps.push_back(base << m);
  std::tie(out.differences, out.orders) = run_levels(cfg.raman_iterations);
  for (int m = 0; m + 1 < levels; ++m) out.monotone = out.monotone && out.differences[m + 1] < out.differences[m];
  out.min_order = *std::min_element(out.orders.begin(), out.orders.end());
  out.pass = out.monotone && out.min_order >= required_order;
  if (s.fiber.f_R > 0.0 && cfg.raman_iterations != 1) out.single_iteration_orders = run_levels(1).second;
  const TimeGrid fine(2 * grid.size(), 0.5 * grid.dt(), grid.t0());
  const ComplexMatrix coarse_B = band_operator_for(s, r, grid, cfg, band_cut);
  const ComplexMatrix fine_B = band_operator_for(s, r, fine, cfg, band_cut);
  out.grid_change = (coarse_B - fine_B).norm();
  out.grid_resolved = out.grid_change < out.differences.front();
  return out;
}

/// Fraction of |G_is|^2 outside the lines t - t' in [beta1i l, beta1s l] (widened by margin),
/// and the part beyond the slow line.
struct CausalityMass {
  double outside = 0.0;
  double beyond_slow = 0.0;
};

inline CausalityMass causality_mass(const ComplexMatrix& G_is, const TimeGrid& g, double fast_lag, double slow_lag,
                                    double margin) {
  double total = 0.0, outside = 0.0, beyond = 0.0;
  for (int c = 0; c < g.size(); ++c)
    for (int r = 0; r < g.size(); ++r) {
      const double w = std::norm(G_is(r, c));
      const double lag = g.t(r) - g.t(c);
      total += w;
      if (lag < fast_lag - margin || lag > slow_lag + margin) outside += w;
      if (lag > slow_lag + margin) beyond += w;
    }
  if (!(total > 0.0)) throw std::invalid_argument("causality_mass: zero Green function");
  return {outside / total, beyond / total};
}

/// Singular values of dt G over the full 2N x 2N operator.
inline RealVector operator_singular_values(const GreenMatrix& G) {
  return Eigen::BDCSVD<ComplexMatrix>(G.full_operator()).singularValues();
}

// --------------------------------------------------- single-photon inputs

/// Settings of the input-shape comparison at one pump collision.
struct InputComparisonSetup {
  double gamma_P_l = 4.0 * kPi;
  double f_R = 0.18;
  double T = 300.0;  // K
  double tau = 0.1;  // ps, pumps and Gaussian photon
  double delay = 0.6;
  double dn_eff = 1e-3;
  double gamma = 1.0;
  Polarization config = Polarization::Copolarized;
  TimeGrid grid{1024, 0.01};
  PropagationConfig propagation{};
  SpectralFilter filter = SpectralFilter::rectangular(20.0);
  double window = 10.0;     // ps
  double t_in = -0.3;       // ps, Gaussian centre (the co-moving pump sits at -delay / 2)
  double cw_gamma_P0 = 1e-3;  // 1/m, CW comparison at its optimal length

  PulsedScenario scenario(double f_R_run, double Omega) const {
    auto s = collision_scenario(gamma_P_l, f_R_run, Omega, tau, delay, gamma, dn_eff);
    s.fiber.T = T;
    s.fiber.config = config;
    return s;
  }
};

struct InputOutcome {
  std::string label;
  double g2_click = 0.0;
  double conversion = 0.0;  // windowed Integral |psi_out|^2 after the filter
};

/// First band Schmidt input mode of the f_R = 0 run (independent of Omega).
inline SampledField electronic_schmidt_input(const InputComparisonSetup& st) {
  const auto s = st.scenario(0.0, 0.0);
  const auto r = s.fiber.silica_response();
  GreenPropagator p(s.fiber, r, s.initial_pumps(st.grid), st.propagation);
  return decompose_band(p.propagate_signal_inputs().first, st.grid, default_schmidt_cut(st.grid)).input_mode(0);
}

/// g2_click and conversion for the Gaussian, electronic Schmidt, Raman Schmidt and
/// filter-optimised inputs with pulsed pumps, and the Gaussian with CW pumps.
/// Ordered [filter, raman, electronic, gaussian, cw].
inline std::vector<InputOutcome> compare_inputs(const InputComparisonSetup& st, double Omega,
                                                const SampledField& electronic_input) {
  const auto s = st.scenario(st.f_R, Omega);
  const auto r = s.fiber.silica_response();
  GreenPropagator p(s.fiber, r, s.initial_pumps(st.grid), st.propagation);
  const ComplexMatrix G = p.propagate_signal_inputs().first;
  const double cut = default_schmidt_cut(st.grid);
  const ComplexMatrix E = pulsed_phonon_expectation(p, r, st.T, st.filter);
  const auto pulsed = [&](const std::string& label, const SampledField& in) {
    const auto out = pulsed_psi_out(G, in, st.filter);
    const auto m = windowed_moments(out, E, st.window);
    return InputOutcome{label, m.numerator / (m.flux() * m.flux()), m.photon};
  };
  std::vector<InputOutcome> out;
  out.push_back(pulsed("filter", decompose_filtered(G, st.grid, st.filter, cut).input_mode(0)));
  out.push_back(pulsed("raman", decompose_band(G, st.grid, cut).input_mode(0)));
  out.push_back(pulsed("electronic", electronic_input));
  const auto gauss = gaussian_photon(st.grid, st.tau, st.t_in);
  out.push_back(pulsed("gaussian", gauss));

  FiberScenario c;
  c.gamma = st.cw_gamma_P0;
  c.P0 = 1.0;
  c.f_R = st.f_R;
  c.Omega = Omega;
  c.T = st.T;
  c.config = st.config;
  const auto rc = c.silica_response();
  c.length = optimal_length(c, rc);
  const auto cw = cw_correlation(c, rc, gaussian_photon(st.grid, st.tau), st.filter, st.window);
  out.push_back({"cw", cw.result.g2_click, cw.conversion});
  return out;
}

/// True when g2_click is non-decreasing along [filter, raman, electronic, gaussian, cw].
inline bool ordering_holds(const std::vector<InputOutcome>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k - 1].g2_click > v[k].g2_click) return false;
  return true;
}

}  // namespace fwmbs
