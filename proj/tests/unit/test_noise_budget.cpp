#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "expected.hpp"
#include "sqzom/error.hpp"
#include "sqzom/noise_budget.hpp"

using namespace sqzom;
namespace oracle = sqzom::oracle;

namespace {

SystemParams ideal_coherent(double eta_det) {
  SystemParams p;
  p.eta_in = 1.0;
  p.n_c = 0.0;
  p.eta_det = eta_det;
  return p;
}

}  // namespace

TEST(NoiseBudget, IdealDetectionImprecision) {
  const SystemParams p = ideal_coherent(1.0);
  for (double c : {0.3, 1.0, 70.0}) {
    EXPECT_NEAR(imprecision(DriveState::coherent(c), p), 1.0 / (4.0 * weighted_cooperativity(c, p)), 1e-15);
  }
}

TEST(NoiseBudget, BundledCoherentAt70) {
  const NoiseBudget b = budget(DriveState::coherent(70.0), ideal_coherent(0.03));
  EXPECT_NEAR(b.n_imp, oracle::kNImp70, 1e-15);
  EXPECT_NEAR(b.n_ba, oracle::kNBa70, 1e-12);
  EXPECT_NEAR(b.n_total, oracle::kNTotal70, 1e-12);
  EXPECT_DOUBLE_EQ(b.n_add, b.n_imp + b.n_ba);
  EXPECT_DOUBLE_EQ(b.cooperativity, 70.0);
}

TEST(NoiseBudget, BundledAmplitudeSqueezedAt70) {
  const NoiseBudget b = budget(DriveState::amplitude_squeezed(1.0, 70.0), SystemParams{});
  EXPECT_NEAR(b.n_ba, oracle::kNBa70SqueezedS1, 1e-12);
  EXPECT_NEAR(b.heisenberg_product, oracle::kHeisenbergS1R1, 1e-12);
  EXPECT_GT(b.heisenberg_product, kHeisenbergBound);
}

TEST(NoiseBudget, PhaseSqueezingLowersImprecision) {
  const SystemParams p;
  for (double r : {0.1, 0.5, 1.0}) {
    EXPECT_LT(imprecision(DriveState::phase_squeezed(r, 70.0), p), imprecision(DriveState::coherent(70.0), p));
    EXPECT_GT(imprecision(DriveState::amplitude_squeezed(r, 70.0), p), imprecision(DriveState::coherent(70.0), p));
    EXPECT_LT(backaction(DriveState::amplitude_squeezed(r, 70.0), p), backaction(DriveState::coherent(70.0), p));
    EXPECT_GT(backaction(DriveState::phase_squeezed(r, 70.0), p), backaction(DriveState::coherent(70.0), p));
  }
}

TEST(NoiseBudget, BackactionVanishesWithCooperativity) {
  EXPECT_LT(backaction(DriveState::coherent(1e-12), SystemParams{}), 1e-11);
}

TEST(NoiseBudget, PureDriveSaturatesHeisenberg) {
  const SystemParams p = ideal_coherent(1.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double theta = (k % 2) ? std::numbers::pi : 0.0;
    const DriveState d(1.15 * u(rng), theta, std::pow(10.0, -2.0 + 5.0 * u(rng)));
    EXPECT_NEAR(budget(d, p).heisenberg_product, kHeisenbergBound, 1e-12);
  }
}

TEST(NoiseBudget, ImpureDriveExceedsHeisenberg) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    SystemParams p;
    p.eta_in = u(rng);
    p.n_c = 0.3 * u(rng);
    p.eta_det = 0.01 + 0.99 * u(rng);
    const DriveState d(1.15 * u(rng), kTwoPi * u(rng), std::pow(10.0, -2.0 + 5.0 * u(rng)));
    EXPECT_GE(budget(d, p).heisenberg_product, kHeisenbergBound - 1e-12);
  }
}

TEST(NoiseBudget, SweepShapes) {
  const SystemParams p;
  const auto grid = log_grid(1.0, 1000.0, 61);
  ASSERT_EQ(grid.size(), 61u);
  EXPECT_DOUBLE_EQ(grid.front(), 1.0);
  EXPECT_DOUBLE_EQ(grid.back(), 1000.0);
  const auto rows = sweep_cooperativity(1.0, p, grid);
  ASSERT_EQ(rows.size(), 3 * grid.size());
  for (std::size_t f = 0; f < 3; ++f) {
    const double ref = rows[f * grid.size()].n_imp_times_c;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& row = rows[f * grid.size() + i];
      EXPECT_NEAR(row.n_imp_times_c / ref, 1.0, 1e-12);
      EXPECT_DOUBLE_EQ(row.occupancy, p.n_th + row.budget.n_ba);
      if (i > 0) {
        const auto& prev = rows[f * grid.size() + i - 1];
        EXPECT_LT(row.budget.n_imp, prev.budget.n_imp);
        EXPECT_GT(row.budget.n_ba, prev.budget.n_ba);
      }
    }
  }
}

TEST(NoiseBudget, SqueezedCurvesCrossTheCoherentOne) {
  const SystemParams p;
  const double small = 0.01, large = 1000.0;
  auto n_add = [&](DriveFamily f, double c) { return budget(family_member(f, 1.0, c), p).n_add; };
  EXPECT_GT(n_add(DriveFamily::amplitude_squeezed, small), n_add(DriveFamily::unsqueezed, small));
  EXPECT_LT(n_add(DriveFamily::amplitude_squeezed, large), n_add(DriveFamily::unsqueezed, large));
  EXPECT_LT(n_add(DriveFamily::phase_squeezed, small), n_add(DriveFamily::unsqueezed, small));
  EXPECT_GT(n_add(DriveFamily::phase_squeezed, large), n_add(DriveFamily::unsqueezed, large));
}

TEST(NoiseBudget, IdealMinimumIsOneHalf) {
  SystemParams p = ideal_coherent(1.0);
  p.n_th = 0.0;
  const double c_star = 1.0 / weighted_cooperativity(1.0, p);
  EXPECT_NEAR(budget(DriveState::coherent(c_star), p).n_add, 0.5, 1e-12);
  for (double f : {0.9, 0.99, 1.01, 1.1}) {
    EXPECT_GT(budget(DriveState::coherent(c_star * f), p).n_add, 0.5);
  }
}

TEST(NoiseBudget, ZeroDetectionEfficiencyIsRejected) {
  SystemParams p;
  p.eta_det = 0.0;
  EXPECT_THROW(imprecision(DriveState::coherent(1.0), p), DomainError);
}

TEST(Cooling, NoScatteringLeavesBath) {
  const SystemParams p;
  EXPECT_DOUBLE_EQ(cooled_occupancy(p.intrinsic_mech_linewidth, p.n_bath, 0.17, {}), p.n_bath);
}

TEST(Cooling, PureAntiStokesDamping) {
  const double n_f = cooled_occupancy(kTwoPi * 22.0, 95.0, 0.0, CoolingDrive{0.0, kTwoPi * 178.0});
  EXPECT_NEAR(n_f, oracle::kCooledOccupancy, 1e-12);
}

TEST(Cooling, ThermalCavityRaisesFloor) {
  const CoolingDrive cool{kTwoPi * 20.0, kTwoPi * 198.0};
  EXPECT_GT(cooled_occupancy(kTwoPi * 22.0, 95.0, 0.17, cool), cooled_occupancy(kTwoPi * 22.0, 95.0, 0.0, cool));
}

TEST(Cooling, ScatteringRatesFavourAntiStokesOnRedSide) {
  const SystemParams p;
  const CoolingDrive rates = sideband_scattering_rates(p, -p.mech_freq, kTwoPi * 1e3);
  EXPECT_GT(rates.anti_stokes_rate, rates.stokes_rate);
}

TEST(Cooling, ToneConditionMargin) {
  const SystemParams p;
  const double r = std::asinh(std::sqrt(1.5));
  const auto res = cooling_tone_condition(DriveState(r, 0.0, 1.0), p, CoolingDrive{0.0, kTwoPi * 230.0});
  EXPECT_NEAR(res.ratio, oracle::kCoolingConditionRatio, 1e-12);
  EXPECT_FALSE(res.satisfied);
  EXPECT_DOUBLE_EQ(res.threshold, 0.2);

  EXPECT_EQ(cooling_tone_condition(DriveState::coherent(1.0), p, CoolingDrive{0.0, kTwoPi * 230.0}).ratio, 0.0);
  EXPECT_TRUE(cooling_tone_condition(DriveState(r, 0.0, 1.0), p, CoolingDrive{}).satisfied);
}
