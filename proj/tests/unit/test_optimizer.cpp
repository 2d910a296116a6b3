#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sqzom/error.hpp"
#include "sqzom/noise_budget.hpp"
#include "sqzom/optimizer.hpp"

using namespace sqzom;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams ideal_params() {
  SystemParams p;
  p.eta_in = 1.0;
  p.n_c = 0.0;
  p.eta_det = 1.0;
  return p;
}

struct GridPoint {
  double r, theta, u, value;
};

// Brute-force oracle: a full 201³ grid over (r, θ, log C), then 101³ grids
// on the box of ±4 cells around the incumbent until the cells are tiny. The
// box may drift, which matters because the (r, log C) valley is narrow.
GridPoint grid_oracle(const OptProblem& p) {
  double r_lo = p.r_min, r_hi = p.r_max, t_lo = 0.0, t_hi = 2.0 * kPi;
  double u_lo = std::log(p.c_min), u_hi = std::log(p.c_max);
  GridPoint best{0, 0, 0, std::numeric_limits<double>::infinity()};
  for (int pass = 0; pass < 10; ++pass) {
    const int n = pass == 0 ? 201 : 101;
    const double dr = (r_hi - r_lo) / (n - 1), dt = (t_hi - t_lo) / (n - 1), du = (u_hi - u_lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double r = r_lo + i * dr, t = t_lo + j * dt, u = u_lo + k * du;
          const double v = evaluate_objective(p, r, t, std::exp(u));
          if (v < best.value) best = {r, t, u, v};
        }
      }
    }
    r_lo = std::max(p.r_min, best.r - 4.0 * dr);
    r_hi = std::min(p.r_max, best.r + 4.0 * dr);
    t_lo = best.theta - 4.0 * dt;
    t_hi = best.theta + 4.0 * dt;
    u_lo = std::max(std::log(p.c_min), best.u - 4.0 * du);
    u_hi = std::min(std::log(p.c_max), best.u + 4.0 * du);
  }
  return best;
}

}  // namespace

TEST(Optimizer, IdealQuantumLimit) {
  OptProblem p;
  p.params = ideal_params();
  p.params.n_th = 0.0;
  p.fixed_theta = 0.0;
  p.r_max = 0.0;
  const OptResult res = minimize_added_noise(p);
  EXPECT_NEAR(res.value, 0.5, 1e-6);
  EXPECT_NEAR(weighted_cooperativity(res.cooperativity, p.params), 1.0, 1e-3);
  EXPECT_TRUE(res.audit_passed);
}

TEST(Optimizer, IdealLimitHoldsForAnyPureSqueezing) {
  OptProblem p;
  p.params = ideal_params();
  const OptResult res = minimize_added_noise(p);
  EXPECT_NEAR(res.value, 0.5, 1e-6);
}

TEST(Optimizer, PureAmplitudeSqueezingHelpsInefficientDetection) {
  OptProblem p;
  p.params = ideal_params();
  p.params.eta_det = 0.03;
  p.fixed_theta = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (double r : {0.0, 0.4, 0.8, 1.15}) {
    p.r_min = p.r_max = r;
    const double v = minimize_added_noise(p).value;
    EXPECT_LT(v, previous) << r;
    previous = v;
  }
}

TEST(Optimizer, MatchesBruteForceGridOnBundledParams) {
  OptProblem p;
  p.params = SystemParams{};
  const OptResult res = minimize_added_noise(p);
  const GridPoint oracle = grid_oracle(p);
  EXPECT_NEAR(res.value, oracle.value, 1e-6);
  EXPECT_LE(res.value, oracle.value + 1e-9);
  EXPECT_TRUE(res.audit_passed);
  EXPECT_EQ(res.audit_evaluations, 101u * 101u * 101u);
}

TEST(Optimizer, AddedNoisePhaseIsOnAxis) {
  for (double eta : {0.03, 0.5, 1.0}) {
    OptProblem p;
    p.params.eta_det = eta;
    const OptResult res = minimize_added_noise(p);
    const double dist = std::min(std::abs(res.theta), std::abs(res.theta - kPi));
    EXPECT_LT(dist, 1e-9) << eta;
    for (double t : {0.3, kPi / 2, 2.5}) {
      const double v = evaluate_objective(p, res.r, t, res.cooperativity);
      if (res.r > 1e-3) {
        EXPECT_GT(v, res.value);
      } else {
        EXPECT_NEAR(v, res.value, 1e-9);
        EXPECT_TRUE(res.r_lower_active);
      }
    }
  }
}

TEST(Optimizer, EnlargingBoundsNeverHurts) {
  OptProblem narrow;
  narrow.r_max = 0.5;
  narrow.c_min = 1.0;
  narrow.c_max = 100.0;
  OptProblem wide = narrow;
  wide.r_max = 1.15;
  wide.c_min = 1e-2;
  wide.c_max = 1e4;
  for (Objective obj : {Objective::n_add, Objective::n_total}) {
    narrow.objective = wide.objective = obj;
    EXPECT_LE(minimize_added_noise(wide).value, minimize_added_noise(narrow).value);
  }
}

TEST(Optimizer, Deterministic) {
  OptProblem p;
  const OptResult a = minimize_added_noise(p);
  const OptResult b = minimize_added_noise(p);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.r, b.r);
  EXPECT_EQ(a.cooperativity, b.cooperativity);
  EXPECT_EQ(a.trace.size(), b.trace.size());
}

TEST(Optimizer, BoundFlags) {
  OptProblem p;
  p.c_min = 100.0;
  p.c_max = 200.0;
  const OptResult res = minimize_added_noise(p);
  EXPECT_TRUE(res.c_lower_active);
  EXPECT_FALSE(res.c_upper_active);
}

TEST(Optimizer, Validation) {
  OptProblem p;
  p.r_min = 1.0;
  p.r_max = 0.5;
  EXPECT_THROW(minimize_added_noise(p), DomainError);
  p = OptProblem{};
  p.c_min = 0.0;
  EXPECT_THROW(minimize_added_noise(p), DomainError);
  p = OptProblem{};
  p.objective = Objective::floor_at_offset;
  EXPECT_THROW(optimal_floor_at_offset(p, 1e5), DomainError);
  EXPECT_THROW(objective_from_string("speed"), DomainError);
  EXPECT_EQ(objective_from_string("floor"), Objective::floor_at_offset);
}

TEST(FloorOptimizer, FarOffsetPrefersPhaseSqueezing) {
  OptProblem p;
  p.objective = Objective::floor_at_offset;
  p.c_min = p.c_max = 220.0;
  double previous = std::numeric_limits<double>::infinity();
  for (double offset : {1e5, 1e6, 1e7}) {
    const OptResult res = optimal_floor_at_offset(p, offset);
    const double dist = std::abs(res.theta - kPi);
    EXPECT_LT(dist, previous) << offset;
    previous = dist;
    EXPECT_TRUE(res.audit_passed);
  }
  EXPECT_LT(previous, 0.02);
}

TEST(FloorOptimizer, NearResonancePrefersAmplitudeSqueezing) {
  OptProblem p;
  p.objective = Objective::floor_at_offset;
  p.c_min = p.c_max = 220.0;
  const OptResult res = optimal_floor_at_offset(p, 1.0);
  EXPECT_LT(std::min(res.theta, 2.0 * kPi - res.theta), 1e-6);
  EXPECT_TRUE(res.r_upper_active);
}

TEST(FloorOptimizer, ZeroSqueezingBound) {
  OptProblem p;
  p.objective = Objective::floor_at_offset;
  p.c_min = p.c_max = 220.0;
  p.r_max = 0.0;
  p.offset_hz = 5e4;
  const OptResult res = optimal_floor_at_offset(p, 5e4);
  EXPECT_EQ(res.r, 0.0);
  EXPECT_TRUE(res.r_upper_active);
  EXPECT_DOUBLE_EQ(res.value, evaluate_objective(p, 0.0, 0.0, 220.0));
  EXPECT_THROW(optimal_floor_at_offset(p, 0.0), DomainError);
}
