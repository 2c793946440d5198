#pragma once

// Electronic tensor, causal Raman responses, thermal population and the
// spontaneous Raman noise spectrum for linearly polarized fields.

#include "fwmbs/grid.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fwmbs {

/// hbar / k_B in K*ps.
inline constexpr double kHbarOverKb = 7.638232577;

enum class Polarization { Copolarized, Anisotropic };

inline std::string to_string(Polarization p) {
  return p == Polarization::Copolarized ? "copolarized" : "anisotropic";
}

inline Polarization polarization_from_string(const std::string& s) {
  if (s == "copolarized") return Polarization::Copolarized;
  if (s == "anisotropic" || s == "crosspolarized") return Polarization::Anisotropic;
  throw std::invalid_argument("unknown polarization configuration '" + s + "'");
}

/// Field labels in polarization order: idler, signal, pump p, pump q.
struct FieldPolarizations {
  char i, s, p, q;
};

inline FieldPolarizations field_polarizations(Polarization config) {
  if (config == Polarization::Copolarized) return {'x', 'x', 'x', 'x'};
  return {'x', 'x', 'y', 'y'};
}

inline void check_label(char c) {
  if (c != 'x' && c != 'y') throw std::invalid_argument(std::string("invalid polarization label '") + c + "'");
}

/// gamma_ijkl = gamma (1 - f_R) (d_ij d_kl + d_ik d_jl + d_il d_jk) / 2.
inline double gamma_tensor(double gamma, double f_R, char i, char j, char k, char l) {
  check_label(i); check_label(j); check_label(k); check_label(l);
  if (f_R < 0.0 || f_R > 1.0) throw std::invalid_argument("gamma_tensor: f_R must lie in [0, 1]");
  const int deltas = (i == j && k == l) + (i == k && j == l) + (i == l && j == k);
  return 0.5 * gamma * (1.0 - f_R) * deltas;
}

/// Weights (c_a, c_b) multiplying h_a and h_b in f_ijkl.
inline std::array<double, 2> raman_weights(char i, char j, char k, char l) {
  check_label(i); check_label(j); check_label(k); check_label(l);
  const double ca = (i == j && k == l) ? 1.0 : 0.0;
  const double cb = 0.5 * ((i == k && j == l) + (i == l && j == k));
  return {ca, cb};
}

/// Damped oscillators h(t) = sum F_i d_i sin(w_i t) exp(-d_i t), t >= 0.
struct OscillatorTable {
  std::vector<double> F;
  std::vector<double> omega;  // rad/ps
  std::vector<double> d;      // 1/ps

  std::size_t size() const { return F.size(); }

  void validate() const {
    if (F.empty()) throw std::invalid_argument("oscillator table is empty");
    if (F.size() != omega.size() || F.size() != d.size())
      throw std::invalid_argument("oscillator table columns differ in length");
    for (std::size_t n = 0; n < F.size(); ++n) {
      if (!(omega[n] > 0.0) || !(d[n] > 0.0))
        throw std::invalid_argument("oscillator table row " + std::to_string(n) + ": omega and d must be > 0");
      if (!std::isfinite(F[n])) throw std::invalid_argument("oscillator table row " + std::to_string(n) + ": F not finite");
    }
  }

  double max_omega() const { return *std::max_element(omega.begin(), omega.end()); }

  /// Reads columns F,omega_THz,d_THz; both rate columns are scaled by 2 pi.
  static OscillatorTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open oscillator table '" + path + "'");
    OscillatorTable table;
    std::string line;
    bool header = true;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      if (header) {
        header = false;
        if (line.rfind("F,omega_THz,d_THz", 0) != 0)
          throw std::invalid_argument(path + ": expected header 'F,omega_THz,d_THz'");
        continue;
      }
      std::stringstream ss(line);
      std::string cell;
      std::array<double, 3> v{};
      for (int c = 0; c < 3; ++c) {
        if (!std::getline(ss, cell, ','))
          throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 3 columns");
        v[c] = std::stod(cell);
      }
      table.F.push_back(v[0]);
      table.omega.push_back(2.0 * kPi * v[1]);
      table.d.push_back(2.0 * kPi * v[2]);
    }
    table.validate();
    return table;
  }

  /// Integral of the unscaled h(t) over t, equal to the transform at 0.
  double integral() const {
    double s = 0.0;
    for (std::size_t n = 0; n < size(); ++n) s += F[n] * d[n] * omega[n] / (d[n] * d[n] + omega[n] * omega[n]);
    return s;
  }

  /// Integral h(t) exp(i nu t) dt of the unscaled sum.
  cdouble transform(double nu) const {
    cdouble s = 0.0;
    for (std::size_t n = 0; n < size(); ++n) {
      const cdouble a{d[n], -nu};
      s += F[n] * d[n] * omega[n] / (a * a + omega[n] * omega[n]);
    }
    return s;
  }

  double time_value(double t) const {
    if (t < 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t n = 0; n < size(); ++n) s += F[n] * d[n] * std::sin(omega[n] * t) * std::exp(-d[n] * t);
    return s;
  }

  /// Im of the transform differentiated at nu = 0.
  double im_transform_slope_at_zero() const {
    double s = 0.0;
    for (std::size_t n = 0; n < size(); ++n) {
      const double q = d[n] * d[n] + omega[n] * omega[n];
      s += 2.0 * F[n] * d[n] * d[n] * omega[n] / (q * q);
    }
    return s;
  }
};

inline std::string data_path(const std::string& name) { return std::string(FWMBS_DATA_DIR) + "/" + name; }

inline OscillatorTable silica_parallel_table() { return OscillatorTable::load_csv(data_path("raman_silica.csv")); }
inline OscillatorTable silica_anisotropic_table() { return OscillatorTable::load_csv(data_path("raman_silica_hb.csv")); }

/// Samples of h(t) scaled to unit area on the grid; zero for t < 0.
inline RealVector build_h_parallel(const OscillatorTable& table, const TimeGrid& grid) {
  table.validate();
  if (grid.dt() * table.max_omega() >= kPi / 4.0)
    throw std::invalid_argument("build_h_parallel: grid under-resolves the fastest oscillator (dt * max omega >= pi/4)");
  const double scale = 1.0 / table.integral();
  RealVector h(grid.size());
  for (int k = 0; k < grid.size(); ++k) h[k] = scale * table.time_value(grid.t(k));
  return h;
}

/// Bose-Einstein occupation at angular frequency omega (rad/ps) and temperature T (K).
inline double thermal_population(double omega, double T) {
  if (!(T >= 0.0)) throw std::invalid_argument("thermal_population: T must be >= 0");
  if (omega == 0.0) throw std::invalid_argument("thermal_population: pole at omega = 0");
  if (T == 0.0) return omega > 0.0 ? 0.0 : -1.0;
  const double x = kHbarOverKb * omega / T;
  return 1.0 / std::expm1(x);
}

/// The four Raman/electronic couplings that enter the idler and signal equations.
enum class Coupling { IQQI, IQPS, SPPS, SPQI };

/// Raman response for one polarization configuration, including gamma and f_R.
/// Frequency arguments are baseband offsets w; the kernels are evaluated at w + Omega.
class RamanResponse {
 public:
  RamanResponse(OscillatorTable parallel, OscillatorTable anisotropic, Polarization config, double gamma,
                double f_R, double Omega)
      : par_(std::move(parallel)), b_(std::move(anisotropic)), config_(config), gamma_(gamma), f_R_(f_R), Omega_(Omega) {
    par_.validate();
    b_.validate();
    if (f_R < 0.0 || f_R > 1.0) throw std::invalid_argument("RamanResponse: f_R must lie in [0, 1]");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("RamanResponse: gamma must be >= 0");
    if (!std::isfinite(Omega)) throw std::invalid_argument("RamanResponse: Omega must be finite");
    scale_ = 1.0 / par_.integral();
  }

  static RamanResponse silica(Polarization config, double gamma, double f_R, double Omega) {
    return {silica_parallel_table(), silica_anisotropic_table(), config, gamma, f_R, Omega};
  }

  Polarization config() const { return config_; }
  double gamma() const { return gamma_; }
  double f_R() const { return f_R_; }
  double Omega() const { return Omega_; }
  double scale() const { return scale_; }
  const OscillatorTable& parallel_table() const { return par_; }
  const OscillatorTable& anisotropic_table() const { return b_; }

  RamanResponse with(double gamma, double f_R, double Omega) const {
    return {par_, b_, config_, gamma, f_R, Omega};
  }

  // Unit-area transforms H(nu) = Integral h(t) exp(i nu t) dt.
  cdouble h_par(double nu) const { return scale_ * par_.transform(nu); }
  cdouble h_b(double nu) const { return scale_ * b_.transform(nu); }
  cdouble h_a(double nu) const { return h_par(nu) - h_b(nu); }

  double h_par_time(double t) const { return scale_ * par_.time_value(t); }
  double h_b_time(double t) const { return scale_ * b_.time_value(t); }
  double h_a_time(double t) const { return h_par_time(t) - h_b_time(t); }

  std::array<char, 4> labels(Coupling c) const {
    const auto f = field_polarizations(config_);
    switch (c) {
      case Coupling::IQQI: return {f.i, f.q, f.q, f.i};
      case Coupling::IQPS: return {f.i, f.q, f.p, f.s};
      case Coupling::SPPS: return {f.s, f.p, f.p, f.s};
      case Coupling::SPQI: return {f.s, f.p, f.q, f.i};
    }
    throw std::invalid_argument("unknown coupling");
  }

  double electronic(Coupling c) const {
    const auto l = labels(c);
    return gamma_tensor(gamma_, f_R_, l[0], l[1], l[2], l[3]);
  }

  /// The combination c_a h_a + c_b h_b at baseband nu (no Omega shift).
  cdouble response_combination(Coupling c, double nu) const {
    const auto l = labels(c);
    const auto w = raman_weights(l[0], l[1], l[2], l[3]);
    return w[0] * h_a(nu) + w[1] * h_b(nu);
  }

  double response_combination_time(Coupling c, double t) const {
    const auto l = labels(c);
    const auto w = raman_weights(l[0], l[1], l[2], l[3]);
    return w[0] * h_a_time(t) + w[1] * h_b_time(t);
  }

  /// sqrt(2 pi) f(w): the spectral multiplier of the Raman convolution.
  cdouble kernel(Coupling c, double omega) const {
    if (f_R_ == 0.0) return 0.0;
    return gamma_ * f_R_ * response_combination(c, omega + Omega_);
  }

  ComplexVector kernel(Coupling c, const RealVector& omega) const {
    ComplexVector out(omega.size());
    for (Eigen::Index k = 0; k < omega.size(); ++k) out[k] = kernel(c, omega[k]);
    return out;
  }

  /// f(w) itself, the forward transform of the Omega-modulated causal kernel.
  ComplexVector response_spectrum(Coupling c, const RealVector& omega) const { return kernel(c, omega) / kSqrt2Pi; }

  /// R(w) defined by Im f(w) = sqrt(2 pi) gamma f_R R(w).
  double R(Coupling c, double omega) const { return response_combination(c, omega + Omega_).imag() / (2.0 * kPi); }

  /// F(w) = sqrt(2 pi) Im f(w) n_th(w + Omega); finite at w + Omega = 0.
  double noise_spectrum(Coupling c, double omega, double T) const {
    if (f_R_ == 0.0) return 0.0;
    const double nu = omega + Omega_;
    if (std::abs(nu) < 1e-9) {
      if (T == 0.0) return 0.0;
      const auto l = labels(c);
      const auto w = raman_weights(l[0], l[1], l[2], l[3]);
      const double slope_par = scale_ * par_.im_transform_slope_at_zero();
      const double slope_b = scale_ * b_.im_transform_slope_at_zero();
      const double slope = w[0] * (slope_par - slope_b) + w[1] * slope_b;
      return gamma_ * f_R_ * slope * T / kHbarOverKb;
    }
    return gamma_ * f_R_ * response_combination(c, nu).imag() * thermal_population(nu, T);
  }

  RealVector noise_spectrum(Coupling c, const RealVector& omega, double T) const {
    RealVector out(omega.size());
    for (Eigen::Index k = 0; k < omega.size(); ++k) out[k] = noise_spectrum(c, omega[k], T);
    return out;
  }

  /// Far-detuned Laurent limit of R(0) for the given coupling.
  double R_laurent(Coupling c) const {
    const auto l = labels(c);
    const auto w = raman_weights(l[0], l[1], l[2], l[3]);
    auto moment = [&](const OscillatorTable& t) {
      double s = 0.0;
      for (std::size_t n = 0; n < t.size(); ++n) s += t.F[n] * t.omega[n] * t.d[n] * t.d[n];
      return scale_ * s;
    };
    const double m_par = moment(par_), m_b = moment(b_);
    const double m = w[0] * (m_par - m_b) + w[1] * m_b;
    return m / (kPi * Omega_ * Omega_ * Omega_);
  }

 private:
  OscillatorTable par_;
  OscillatorTable b_;
  Polarization config_;
  double gamma_;
  double f_R_;
  double Omega_;
  double scale_ = 1.0;
};

}  // namespace fwmbs
