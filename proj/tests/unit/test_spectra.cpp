#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "sqzom/error.hpp"
#include "sqzom/noise_budget.hpp"
#include "sqzom/spectra.hpp"

using namespace sqzom;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGammaHz = 200.0;

std::vector<double> line_grid(double half_widths = 20.0, std::size_t points = 4001) {
  return offset_grid(2.0 * half_widths * kGammaHz, points);
}

double max_rel_asymmetry(const Spectrum& s) {
  double worst = 0.0;
  const std::size_t n = s.psd.size();
  for (std::size_t k = 0; k < n / 2; ++k) {
    worst = std::max(worst, std::abs(s.psd[k] - s.psd[n - 1 - k]) / s.psd[k]);
  }
  return worst;
}

}  // namespace

TEST(Spectra, SusceptibilityValues) {
  const SystemParams p;
  EXPECT_NEAR(std::abs(susceptibilities(p, 0.0).cavity), 2.0 / p.cavity_linewidth, 1e-20);
  EXPECT_NEAR(std::abs(susceptibilities(p, p.mech_freq).mechanical), 2.0 / p.total_mech_linewidth, 1e-12);
  const double c2 = std::norm(susceptibilities(p, p.mech_freq).cavity);
  const double expected = std::pow(2.0 / p.cavity_linewidth, 2) / sideband_weight(p);
  EXPECT_NEAR(c2 / expected, 1.0, 1e-12);
  EXPECT_NEAR(std::norm(susceptibilities(p, -p.mech_freq).cavity) / expected, 1.0, 1e-12);
}

TEST(Spectra, OffsetGrid) {
  const auto g = offset_grid();
  ASSERT_EQ(g.size(), 6000u);
  EXPECT_DOUBLE_EQ(g.front(), -150e3);
  EXPECT_DOUBLE_EQ(g.back(), 150e3);
  EXPECT_THROW(offset_grid(0.0, 10), DomainError);
}

TEST(Spectra, ShotNoiseNormalization) {
  SystemParams p;
  p.eta_det = 1.0;
  p.eta_in = 1.0;
  p.n_c = 0.0;
  const std::vector<double> far{-1e7, 1e7};
  const Spectrum s = output_psd(DriveState::coherent(0.01), p, far);
  EXPECT_NEAR(s.floor, 1.0, 1e-12);
  EXPECT_NEAR(s.psd[0], 1.0, 1e-9);
  EXPECT_NEAR(s.psd[1], 1.0, 1e-9);
}

TEST(Spectra, DecoupledLimitIsFlat) {
  const SystemParams p;
  const Spectrum s = output_psd(DriveState(1.0, 0.5, 1e-14), p, line_grid());
  for (double v : s.psd) EXPECT_NEAR(v / s.floor, 1.0, 1e-9);
}

TEST(Spectra, SymmetricAtAxisPhases) {
  const SystemParams p;
  for (double theta : {0.0, kPi}) {
    const Spectrum s = output_psd(DriveState(1.0, theta, 220.0), p, line_grid());
    EXPECT_LT(max_rel_asymmetry(s), 1e-9);
    EXPECT_LT(std::abs(asymmetry_metric(s)), 1e-9);
  }
  const Spectrum fano = output_psd(DriveState(1.0, kPi / 2, 220.0), p, line_grid());
  EXPECT_GT(std::abs(asymmetry_metric(fano)), 1e-3);
  const Spectrum mirror = output_psd(DriveState(1.0, 3 * kPi / 2, 220.0), p, line_grid());
  EXPECT_NEAR(asymmetry_metric(mirror), -asymmetry_metric(fano), 1e-9);
}

TEST(Spectra, SqueezingMovesPeakAndFloor) {
  const SystemParams p;
  const auto grid = line_grid();
  const Spectrum coh = output_psd(DriveState::coherent(70.0), p, grid);
  const Spectrum amp = output_psd(DriveState::amplitude_squeezed(1.0, 70.0), p, grid);
  const Spectrum pha = output_psd(DriveState::phase_squeezed(1.0, 70.0), p, grid);
  const double band = 10.0 * kGammaHz;
  auto area = [&](const Spectrum& s) { return integrated_power(s, band) - 2.0 * band * s.floor; };
  EXPECT_LT(area(amp), area(coh));
  EXPECT_GT(amp.floor, coh.floor);
  EXPECT_LT(pha.floor, coh.floor);
  EXPECT_GT(area(pha), area(coh));
}

TEST(Spectra, AmplitudeQuadratureIsFlat) {
  const SystemParams p;
  for (double c : {10.0, 50.0, 220.0}) {
    for (double r : {0.0, 1.0}) {
      const Spectrum s = amplitude_quadrature_qnd_check(DriveState(r, 0.3, c), p, line_grid());
      for (double v : s.psd) EXPECT_LT(std::abs(v - s.floor) / s.floor, 1e-8);
    }
  }
  const Spectrum phase = output_psd(DriveState::coherent(50.0), p, line_grid());
  EXPECT_GT(*std::max_element(phase.psd.begin(), phase.psd.end()) / phase.floor, 10.0);
}

TEST(Spectra, EfficiencyScaling) {
  SystemParams p;
  const auto grid = line_grid(5.0, 201);
  std::vector<double> excess;
  for (double eta : {0.01, 0.02, 0.04}) {
    p.eta_det = eta;
    const Spectrum s = output_psd(DriveState::coherent(20.0), p, grid);
    excess.push_back(s.floor - (1.0 - eta));
  }
  EXPECT_NEAR(excess[1] / excess[0], 2.0, 1e-12);
  EXPECT_NEAR(excess[2] / excess[0], 4.0, 1e-12);
}

TEST(Spectra, HeterodyneGrowsLinearlyWithOccupancy) {
  SystemParams p;
  const auto grid = line_grid(2.5, 2001);
  std::vector<double> x, y;
  for (double n : {2.0, 5.0, 10.0, 20.0, 40.0}) {
    p.n_th = n;
    x.push_back(n);
    y.push_back(integrated_power(heterodyne_upper_sideband(DriveState::coherent(50.0), p, grid), 2.5 * kGammaHz));
  }
  // Least-squares line and R².
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  EXPECT_GT(cov * cov / (vx * vy), 0.999);
}

TEST(Spectra, HeterodyneIsPeriodicInSqueezePhase) {
  const SystemParams p;
  const auto grid = line_grid(2.5, 501);
  for (double theta : {0.2, 1.3, 2.9}) {
    const double a = integrated_power(heterodyne_upper_sideband(DriveState(0.8, theta, 100.0), p, grid), 500.0);
    const double b =
        integrated_power(heterodyne_upper_sideband(DriveState(0.8, theta + kTwoPi, 100.0), p, grid), 500.0);
    EXPECT_NEAR(a / b, 1.0, 1e-12);
  }
}

TEST(Spectra, FitRecoversOccupancyAndFloor) {
  const SystemParams p;
  const DriveState d = DriveState::phase_squeezed(1.0, 70.0);
  const Spectrum s = output_psd(d, p, line_grid());
  const LineshapeFit fit = fit_lineshape(s, {.linewidth_hint_hz = kGammaHz});
  const NoiseBudget b = budget(d, p);
  EXPECT_NEAR(occupancy_from_area(fit.lorentzian_area, s, p) / (p.n_th + b.n_ba), 1.0, 5e-3);
  EXPECT_NEAR(floor_in_phonons(fit.floor.value, s, p) / b.n_imp, 1.0, 1e-2);
  EXPECT_NEAR(fit.linewidth_hz.value, kGammaHz, 1.0);
  EXPECT_LT(std::abs(fit.fano_coefficient), 1e-6);
}

TEST(Spectra, FitSeesFanoTerm) {
  const SystemParams p;
  const Spectrum s = output_psd(DriveState(1.0, kPi / 2, 220.0), p, line_grid());
  const LineshapeFit fit = fit_lineshape(s, {.linewidth_hint_hz = kGammaHz});
  EXPECT_GT(std::abs(fit.dispersive.value), 10.0 * fit.dispersive.ci68);
}

TEST(Spectra, FitOfFlatFloorHasNoResolvableArea) {
  const SystemParams p;
  Spectrum s = output_psd(DriveState::coherent(1e-14), p, line_grid());
  s.cooperativity = 70.0;
  const LineshapeFit fit = fit_lineshape(s, {.linewidth_hint_hz = kGammaHz});
  EXPECT_LE(std::abs(fit.lorentzian_area), std::max(3.0 * fit.lorentzian_area_ci68, 1e-9));
}

TEST(Spectra, FitRejectsNarrowSpan) {
  const SystemParams p;
  const Spectrum s = output_psd(DriveState::coherent(70.0), p, line_grid(2.0, 401));
  EXPECT_THROW(fit_lineshape(s, {.linewidth_hint_hz = kGammaHz}), DomainError);
}
