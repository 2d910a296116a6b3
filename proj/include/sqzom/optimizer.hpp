#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqzom/core_model.hpp"

namespace sqzom {

enum class Objective { n_add, n_total, floor_at_offset };

std::string_view to_string(Objective objective);
Objective objective_from_string(std::string_view name);  // "n_add" | "n_total" | "floor"

struct OptProblem {
  SystemParams params;
  double r_min = 0.0;
  double r_max = 1.15;  // sinh²r <= 1.5
  double c_min = 1e-2;
  double c_max = 1e4;
  std::optional<double> fixed_theta;  // θ free when empty
  Objective objective = Objective::n_add;
  double offset_hz = 0.0;  // floor objective only
  std::size_t coarse_points = 41;
  std::size_t audit_points = 101;

  // Throws DomainError for empty bounds or a floor problem without a fixed C.
  void validate() const;
};

struct TraceEntry {
  std::string stage;
  double r = 0.0;
  double theta = 0.0;
  double cooperativity = 0.0;
  double value = 0.0;
};

struct OptResult {
  double r = 0.0;
  double theta = 0.0;
  double cooperativity = 0.0;
  double value = 0.0;
  bool r_lower_active = false;
  bool r_upper_active = false;
  bool c_lower_active = false;
  bool c_upper_active = false;
  std::vector<TraceEntry> trace;
  double audit_min = 0.0;
  std::size_t audit_evaluations = 0;
  bool audit_passed = false;
};

// Objective value at one point. n_add and n_total come from the noise budget;
// the floor objective is the phase-quadrature output PSD at Ω_m + offset_hz.
double evaluate_objective(const OptProblem& problem, double r, double theta, double cooperativity);

// Minimizes n_add or n_total over (r, θ, C). n_add is affine in cos θ, so the
// optimum lies on θ ∈ {0, π}; both branches are searched by a coarse grid
// followed by nested golden-section refinement in r and log C. Deterministic.
// The result is audited against an audit_points³ grid.
OptResult minimize_added_noise(const OptProblem& problem);

// Minimizes the output PSD at Ω_m + offset_hz over (r, θ) at the fixed
// cooperativity c_min == c_max.
OptResult optimal_floor_at_offset(const OptProblem& problem, double offset_hz);

}  // namespace sqzom
