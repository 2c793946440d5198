#include "fwmbs/cw.hpp"
#include "fwmbs/statistics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fwmbs;

namespace {

FiberScenario electronic_only(double gl, double dbeta = 0.0) {
  FiberScenario s;
  s.gamma = 1.0;
  s.f_R = 0.0;
  s.P0 = 1.0;
  s.length = gl / (2.0 * 1.5);  // g = 2 gamma_iqps P0 = 3 for the copolarized tensor
  s.dbeta = dbeta;
  return s;
}

FiberScenario silica(double Omega_THz, double T = 300.0, Polarization cfg = Polarization::Copolarized) {
  FiberScenario s;
  s.gamma = 1e-3;
  s.P0 = 1.0;
  s.f_R = 0.18;
  s.Omega = 2 * kPi * Omega_THz;
  s.T = T;
  s.config = cfg;
  s.length = 1.0;
  s.length = optimal_length(s, s.silica_response());
  return s;
}

}  // namespace

TEST(CouplingFunctions, ElectronicOnly) {
  auto s = electronic_only(1.0);
  auto r = s.silica_response();
  TimeGrid g(64, 0.1);
  const auto c = coupling_functions(s, r, g.omegas());
  EXPECT_EQ(c.kappa_i.norm(), 0.0);
  EXPECT_EQ(c.kappa_s.norm(), 0.0);
  for (int k = 0; k < g.size(); ++k) EXPECT_EQ(c.g_is[k], cdouble(3.0));
}

TEST(CouplingFunctions, LinearPropagation) {
  FiberScenario s;
  s.f_R = 0.18;
  s.P0 = 0.0;
  s.beta1i = 0.3;
  s.beta2i = -0.02;
  s.dbeta = 0.7;
  s.Omega = 2 * kPi * 13;
  auto r = s.silica_response();
  TimeGrid g(64, 0.1);
  const auto c = coupling_functions(s, r, g.omegas());
  EXPECT_EQ(c.g_is.norm(), 0.0);
  for (int k = 0; k < g.size(); ++k) {
    const double w = g.omega(k);
    EXPECT_NEAR(std::abs(c.kappa_i[k] - (0.3 * w - 0.01 * w * w + 0.35)), 0.0, 1e-14);
  }
}

TEST(CouplingFunctions, StokesGainSign) {
  auto s = silica(-17.0);
  auto r = s.silica_response();
  // Independent sign of Im H at -17 THz straight from the oscillator table.
  EXPECT_LT(r.parallel_table().transform(-2 * kPi * 17).imag(), 0.0);
  EXPECT_LT(coupling_at(s, r, 0.0).kappa_i.imag(), 0.0);
  auto a = silica(17.0);
  EXPECT_GT(coupling_at(a, a.silica_response(), 0.0).kappa_i.imag(), 0.0);
}

TEST(CWGreens, FullAndBackConversion) {
  TimeGrid g(64, 0.1);
  for (double gl : {kPi / 2, kPi}) {
    auto s = electronic_only(gl);
    const auto G = cw_greens(s, s.silica_response(), g.omegas());
    const double expected = gl == kPi / 2 ? 1.0 : 0.0;
    for (int k = 0; k < g.size(); ++k) {
      EXPECT_NEAR(std::norm(G.G_is[k]), expected, 1e-12);
      EXPECT_NEAR(std::norm(G.G_ii[k]), 1.0 - expected, 1e-12);
    }
  }
}

TEST(CWGreens, UnitarityWithoutRaman) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TimeGrid g(256, 0.02);
  for (int n = 0; n < 50; ++n) {
    auto s = electronic_only(10.0 * u(rng), 20.0 * (u(rng) - 0.5));
    s.beta1i = u(rng) - 0.5;
    s.beta2s = 0.02 * (u(rng) - 0.5);
    s.dbeta_of_omega = [db = s.dbeta](double w) { return db + 0.01 * w; };
    const auto G = cw_greens(s, s.silica_response(), g.omegas());
    for (int k = 0; k < g.size(); ++k) {
      EXPECT_NEAR(std::norm(G.G_ii[k]) + std::norm(G.G_is[k]), 1.0, 1e-12);
      EXPECT_NEAR(std::norm(G.G_ss[k]) + std::norm(G.G_si[k]), 1.0, 1e-12);
    }
  }
}

TEST(CWGreens, KMatchesDefinition) {
  auto s = silica(13.0);
  s.dbeta = 0.3;
  auto r = s.silica_response();
  TimeGrid g(128, 0.05);
  const auto G = cw_greens(s, r, g.omegas());
  for (int k = 0; k < g.size(); ++k) {
    const cdouble delta = G.kappa_i[k] - G.kappa_s[k];
    const cdouble ksq = 0.25 * (4.0 * G.g[k] * G.g_si[k] + delta * delta);
    EXPECT_LT(std::abs(G.k[k] * G.k[k] - ksq), 1e-12 * std::abs(ksq) + 1e-15);
  }
  // Balanced response and equal dispersion: delta reduces to dbeta.
  EXPECT_LT(std::abs(G.kappa_i[3] - G.kappa_s[3] - 0.3), 1e-14);
}

TEST(CWGreens, KBranchIsContinuous) {
  auto s = silica(13.0);
  s.dbeta = 1e-3;
  auto r = s.silica_response();
  RealVector w = RealVector::LinSpaced(2001, -200.0, 200.0);
  const auto G = cw_greens(s, r, w);
  double jump = 0.0, scale = 0.0;
  for (int k = 1; k < w.size(); ++k) {
    jump = std::max(jump, std::abs(G.k[k] - G.k[k - 1]));
    scale = std::max(scale, std::abs(G.k[k]));
  }
  EXPECT_LT(jump, 0.05 * scale);
}

TEST(CWGreens, ZeroCouplingLimit) {
  FiberScenario s;
  s.P0 = 0.0;
  s.length = 2.0;
  const auto t = cw_transfer(coupling_at(s, s.silica_response(), 0.0), s.length);
  EXPECT_EQ(t.G_ii, cdouble(1.0));
  EXPECT_EQ(t.G_is, cdouble(0.0));
}

TEST(CWGreens, CrossFluxIdentityAcrossSilicaSweep) {
  RealVector w = RealVector::LinSpaced(401, -40.0, 40.0);
  for (double nu : {-25.0, -17.0, -13.0, -5.0, 5.0, 13.0, 17.0, 25.0})
    for (auto cfg : {Polarization::Copolarized, Polarization::Anisotropic})
      for (double scale : {0.3, 1.0, 2.5}) {
        auto s = silica(nu, 300.0, cfg);
        s.length *= scale;
        auto r = s.silica_response();
        const auto G = cw_greens(s, r, w);
        for (int k = 0; k < w.size(); ++k) {
          const double direct = std::norm(G.G_is[k]);
          const double identity = cross_flux_identity(G.kappa_i[k], G.g[k], s.length);
          EXPECT_NEAR(direct, identity, 1e-12 * std::max(1.0, direct));
        }
      }
}

TEST(CWGreens, StokesGainAntiStokesDepletion) {
  RealVector w = RealVector::LinSpaced(201, -30.0, 30.0);
  for (double scale : {0.5, 1.0, 3.0}) {
    auto st = silica(-17.0);
    st.length *= scale;
    auto as = silica(17.0);
    as.length *= scale;
    const auto Gs = cw_greens(st, st.silica_response(), w);
    const auto Ga = cw_greens(as, as.silica_response(), w);
    for (int k = 0; k < w.size(); ++k) {
      EXPECT_GE(std::norm(Gs.G_ii[k]) + std::norm(Gs.G_is[k]), 1.0);
      EXPECT_LE(std::norm(Ga.G_ii[k]) + std::norm(Ga.G_is[k]), 1.0);
    }
  }
}

TEST(CWGreens, ExchangeSymmetry) {
  auto s = silica(13.0);
  s.dbeta = 0.4;
  s.beta1i = 0.1;
  s.beta1s = -0.2;
  s.beta2i = 0.01;
  s.beta2s = -0.03;
  auto x = s;
  std::swap(x.beta1i, x.beta1s);
  std::swap(x.beta2i, x.beta2s);
  x.dbeta = -s.dbeta;
  RealVector w = RealVector::LinSpaced(101, -20.0, 20.0);
  const auto G = cw_greens(s, s.silica_response(), w);
  const auto X = cw_greens(x, x.silica_response(), w);
  for (int k = 0; k < w.size(); ++k) {
    EXPECT_LT(std::abs(G.G_ss[k] - X.G_ii[k]), 1e-13);
    EXPECT_LT(std::abs(G.G_si[k] - X.G_is[k]), 1e-13);
  }
}

TEST(PsiOut, FlatFullConversion) {
  auto s = electronic_only(kPi / 2);
  TimeGrid g(512, 0.01);
  const auto psi = gaussian_photon(g, 0.1);
  const auto out = filtered_psi_out(s, s.silica_response(), psi, SpectralFilter::all_pass());
  EXPECT_LT((out.values - kI * psi.values).norm(), 1e-12 * psi.values.norm());
}

TEST(PsiOut, NoPumpNoConversion) {
  FiberScenario s;
  s.P0 = 0.0;
  TimeGrid g(256, 0.01);
  const auto out = filtered_psi_out(s, s.silica_response(), gaussian_photon(g, 0.1), SpectralFilter::rectangular(20.0));
  EXPECT_EQ(out.values.norm(), 0.0);
}

TEST(PsiOut, FilteredGaussianCapture) {
  auto s = electronic_only(kPi / 2);
  TimeGrid g(2048, 0.01);
  const auto out = filtered_psi_out(s, s.silica_response(), gaussian_photon(g, 0.1), SpectralFilter::rectangular(20.0));
  // Brute-force quadrature of the normalised spectrum 2 tau^2/sqrt(2 pi)... over |w| <= 10.
  const double tau = 0.1;
  double q = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double w = -10.0 + 20.0 * (k + 0.5) / n;
    q += std::sqrt(2.0 / kPi) * tau * std::exp(-2.0 * w * w * tau * tau) * 20.0 / n;
  }
  EXPECT_NEAR(q, 0.954, 1e-3);
  EXPECT_NEAR(out.energy(), q, 2e-3);
}

TEST(PhononExpectation, ZeroCases) {
  TimeGrid g(64, 0.05);
  auto f = SpectralFilter::rectangular(20.0);
  auto cold = silica(17.0, 0.0);
  EXPECT_EQ(phonon_expectation_cw(cold, cold.silica_response(), f, g, 200, 16).norm(), 0.0);
  auto er = silica(17.0);
  er.f_R = 0.0;
  EXPECT_EQ(phonon_expectation_cw(er, er.silica_response(), f, g, 200, 16).norm(), 0.0);
}

TEST(PhononExpectation, StationaryHermitianPsd) {
  TimeGrid g(128, 0.05);
  auto s = silica(-17.0);
  const auto E = phonon_expectation_cw(s, s.silica_response(), SpectralFilter::rectangular(20.0), g, 400, 16);
  const double scale = E.cwiseAbs().maxCoeff();
  for (int a = 1; a < g.size(); ++a)
    for (int b = 1; b < g.size(); ++b) EXPECT_LT(std::abs(E(a, b) - E(a - 1, b - 1)), 1e-10 * scale);
  EXPECT_LT((E - E.adjoint()).norm(), 1e-12 * E.norm());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(E);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * E.trace().real());
}

TEST(PhononExpectation, SimpsonConvergesByDoubling) {
  auto s = silica(-17.0);
  auto r = s.silica_response();
  RealVector w = RealVector::LinSpaced(11, -10.0, 10.0);
  const RealVector a = z_integrated_noise_gain(s, r, w, 64);
  const RealVector b = z_integrated_noise_gain(s, r, w, 128);
  EXPECT_LT((a - b).norm(), 1e-8 * b.norm());
}

TEST(OutputFlux, ElectronicFullConversion) {
  auto s = electronic_only(kPi / 2);
  EXPECT_NEAR(output_flux(s, s.silica_response(), 1.0, 1.0), 1.0, 1e-12);
}

TEST(OutputFlux, StokesGainAntiStokesDepletion) {
  double peak_st = 0.0, peak_as = 0.0;
  for (double gl = 0.05; gl < 3.0; gl += 0.01) {
    auto st = silica(-17.0);
    auto as = silica(17.0);
    st.length *= gl / (kPi / 2);
    as.length *= gl / (kPi / 2);
    peak_st = std::max(peak_st, output_flux(st, st.silica_response(), 1.0, 1.0));
    peak_as = std::max(peak_as, output_flux(as, as.silica_response(), 1.0, 1.0));
  }
  EXPECT_GT(peak_st, 1.0);
  EXPECT_LT(peak_as, 1.0);
}

TEST(OutputFlux, FirstOrderInBandwidth) {
  auto s = silica(-17.0);
  auto r = s.silica_response();
  double prev_ratio = 0.0;
  for (double dw : {0.4, 0.2, 0.1}) {
    const double approx = output_flux(s, r, dw, 0.0);
    const double exact = output_flux_exact(s, r, dw, 0.0, 400, 64);
    const double rel = std::abs(approx - exact) / exact;
    EXPECT_LT(rel, 0.05 * dw);
    if (prev_ratio > 0.0) EXPECT_LT(rel, prev_ratio);
    prev_ratio = rel;
  }
}

TEST(G2Approx, Limits) {
  auto s = silica(17.0, 300.0);
  auto r0 = s;
  r0.f_R = 0.0;
  EXPECT_EQ(g2_click_approx(r0, r0.silica_response(), 10.0, 20.0).value, 0.0);
  auto cold = silica(17.0, 4.0);
  const auto a = g2_click_approx(cold, cold.silica_response(), 10.0, 20.0);
  EXPECT_GT(a.value, 0.0);
  EXPECT_FALSE(a.warnings.empty());
}

TEST(G2Approx, OrderOfMagnitudeAt300K) {
  auto s = silica(17.0, 300.0);
  auto r = s.silica_response();
  TimeGrid g(1024, 0.02);
  auto f = SpectralFilter::rectangular(20.0);
  const auto out = filtered_psi_out(s, r, gaussian_photon(g, 0.1), f);
  const auto E = phonon_expectation_cw(s, r, f, g, 400, 32);
  const double exact = g2_click(out, E, 10.0);
  const double approx = g2_click_approx(s, r, 10.0, 20.0).value;
  EXPECT_GT(approx, 0.1 * exact);
  EXPECT_LT(approx, 10.0 * exact);
}

TEST(Scenario, Validation) {
  FiberScenario s;
  s.length = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.length = 1.0;
  s.P0 = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.P0 = 1.0;
  auto r = s.silica_response();
  s.gamma = 2.0;
  EXPECT_THROW(coupling_functions(s, r, RealVector::Zero(3)), std::invalid_argument);
}
