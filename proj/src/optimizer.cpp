#include "sqzom/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "sqzom/error.hpp"
#include "sqzom/noise_budget.hpp"
#include "sqzom/spectra.hpp"

namespace sqzom {

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::n_add: return "n_add";
    case Objective::n_total: return "n_total";
    case Objective::floor_at_offset: return "floor";
  }
  return "unknown";
}

Objective objective_from_string(std::string_view name) {
  if (name == "n_add") return Objective::n_add;
  if (name == "n_total") return Objective::n_total;
  if (name == "floor") return Objective::floor_at_offset;
  throw DomainError("unknown objective '" + std::string(name) + "'");
}

void OptProblem::validate() const {
  params.validate();
  if (!(r_min >= 0.0) || !(r_max >= r_min) || !std::isfinite(r_max)) {
    throw DomainError("squeezing bounds must satisfy 0 <= r_min <= r_max");
  }
  if (!(c_min > 0.0) || !(c_max >= c_min) || !std::isfinite(c_max)) {
    throw DomainError("cooperativity bounds must satisfy 0 < c_min <= c_max");
  }
  if (coarse_points < 3 || audit_points < 2) throw DomainError("grid sizes too small");
  if (fixed_theta && !std::isfinite(*fixed_theta)) throw DomainError("fixed squeeze phase must be finite");
  if (objective == Objective::floor_at_offset && c_min != c_max) {
    throw DomainError("floor objective is evaluated at a fixed cooperativity (c_min == c_max)");
  }
}

double evaluate_objective(const OptProblem& problem, double r, double theta, double cooperativity) {
  const DriveState drive(r, theta, cooperativity);
  switch (problem.objective) {
    case Objective::n_add: {
      return imprecision(drive, problem.params) + backaction(drive, problem.params);
    }
    case Objective::n_total: {
      return imprecision(drive, problem.params) + backaction(drive, problem.params) + problem.params.n_th + 0.5;
    }
    case Objective::floor_at_offset: {
      const double offset[1] = {problem.offset_hz};
      return output_psd(drive, problem.params, offset).psd[0];
    }
  }
  throw DomainError("unknown objective");
}

namespace {

struct Point {
  double x = 0.0;
  double f = std::numeric_limits<double>::infinity();
};

// Golden-section search on [a, b]; the endpoints are evaluated too so that an
// optimum on the boundary is returned exactly.
Point golden(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return {a, f(a)};
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  const double tol = 1e-11 * std::max(1.0, std::abs(a) + std::abs(b));
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  Point best = fc <= fd ? Point{c, fc} : Point{d, fd};
  const Point lo{a, f(a)};
  const Point hi{b, f(b)};
  if (lo.f < best.f) best = lo;
  if (hi.f < best.f) best = hi;
  return best;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  v.back() = hi;
  return v;
}

// Coarse scan followed by golden-section refinement within one grid step of
// the best sample.
Point scan_and_refine(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
  if (!(hi > lo)) return {lo, f(lo)};
  const auto grid = linspace(lo, hi, points);
  std::size_t best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k]);
    if (v < best_f) {
      best_f = v;
      best = k;
    }
  }
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  Point p = golden(f, a, b);
  if (best_f < p.f) p = {grid[best], best_f};
  return p;
}

// Local refinement around a start point: golden sections within ±step.
Point refine_local(const std::function<double(double)>& f, double x, double step, double lo, double hi) {
  return golden(f, std::max(lo, x - step), std::min(hi, x + step));
}

// Golden sections resolve a smooth minimum only to ~sqrt(eps) of the span.
bool near(double x, double bound, double span) { return std::abs(x - bound) <= 1e-6 * std::max(1.0, span); }

void set_flags(OptResult& res, const OptProblem& p) {
  res.r_lower_active = near(res.r, p.r_min, p.r_max - p.r_min);
  res.r_upper_active = near(res.r, p.r_max, p.r_max - p.r_min);
  res.c_lower_active = near(std::log(res.cooperativity), std::log(p.c_min), std::log(p.c_max / p.c_min));
  res.c_upper_active = near(std::log(res.cooperativity), std::log(p.c_max), std::log(p.c_max / p.c_min));
}

struct Candidate {
  double r, theta, c, value;
};

std::vector<double> theta_candidates(const OptProblem& problem) {
  if (problem.fixed_theta) return {*problem.fixed_theta};
  return {0.0, std::numbers::pi};
}

// Nested search at fixed θ: outer r, inner log C.
Candidate nested_search(const OptProblem& problem, double theta, std::size_t points, double r_lo, double r_hi,
                        double u_lo, double u_hi) {
  auto inner = [&](double r) {
    return scan_and_refine([&](double u) { return evaluate_objective(problem, r, theta, std::exp(u)); }, u_lo,
                           u_hi, points);
  };
  const Point outer = scan_and_refine([&](double r) { return inner(r).f; }, r_lo, r_hi, points);
  const Point c = inner(outer.x);
  return {outer.x, theta, std::exp(c.x), c.f};
}

}  // namespace

OptResult minimize_added_noise(const OptProblem& problem) {
  problem.validate();
  if (problem.objective == Objective::floor_at_offset) {
    return optimal_floor_at_offset(problem, problem.offset_hz);
  }
  const double u_lo = std::log(problem.c_min);
  const double u_hi = std::log(problem.c_max);

  OptResult res;
  Candidate best{0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (double theta : theta_candidates(problem)) {
    const Candidate cand =
        nested_search(problem, theta, problem.coarse_points, problem.r_min, problem.r_max, u_lo, u_hi);
    res.trace.push_back({"branch", cand.r, cand.theta, cand.c, cand.value});
    if (cand.value < best.value) best = cand;
  }

  // n_add is affine in cos θ: intermediate phases cannot do better.
  if (!problem.fixed_theta && best.r > 0.0) {
    const double mid = evaluate_objective(problem, best.r, 0.5 * std::numbers::pi, best.c);
    if (!(mid >= best.value)) {
      throw InvariantViolation("added-noise objective is lower at an intermediate squeeze phase");
    }
  }

  // Audit on the full (r, θ, log C) grid.
  const auto r_grid = linspace(problem.r_min, problem.r_max, problem.r_max > problem.r_min ? problem.audit_points : 1);
  const auto t_grid = problem.fixed_theta ? std::vector<double>{*problem.fixed_theta}
                                          : linspace(0.0, kTwoPi, problem.audit_points);
  const auto u_grid = linspace(u_lo, u_hi, u_hi > u_lo ? problem.audit_points : 1);
  Candidate audit{0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
  std::size_t evaluations = 0;
  for (double r : r_grid) {
    for (double t : t_grid) {
      for (double u : u_grid) {
        const double v = evaluate_objective(problem, r, t, std::exp(u));
        ++evaluations;
        if (v < audit.value) audit = {r, t, std::exp(u), v};
      }
    }
  }
  res.audit_min = audit.value;
  res.audit_evaluations = evaluations;

  const double tol = 1e-9 * std::max(1.0, std::abs(audit.value));
  if (best.value > audit.value + tol) {
    // Refinement landed in the wrong basin: restart from the audit minimum.
    const double dr = r_grid.size() > 1 ? r_grid[1] - r_grid[0] : 0.0;
    const double du = u_grid.size() > 1 ? u_grid[1] - u_grid[0] : 0.0;
    const double theta = std::cos(audit.theta) >= 0.0 || problem.fixed_theta ? audit.theta : std::numbers::pi;
    const Candidate again = nested_search(problem, theta, problem.coarse_points, std::max(problem.r_min, audit.r - dr),
                                          std::min(problem.r_max, audit.r + dr),
                                          std::max(u_lo, std::log(audit.c) - du), std::min(u_hi, std::log(audit.c) + du));
    res.trace.push_back({"audit_restart", again.r, again.theta, again.c, again.value});
    if (again.value < best.value) best = again;
    if (audit.value < best.value) best = audit;
  }

  res.r = best.r;
  res.theta = best.theta;
  res.cooperativity = best.c;
  res.value = best.value;
  res.audit_passed = res.value <= audit.value + tol;
  res.trace.push_back({"final", res.r, res.theta, res.cooperativity, res.value});
  set_flags(res, problem);
  return res;
}

OptResult optimal_floor_at_offset(const OptProblem& problem_in, double offset_hz) {
  if (offset_hz == 0.0 || !std::isfinite(offset_hz)) throw DomainError("floor offset must be nonzero and finite");
  OptProblem problem = problem_in;
  problem.objective = Objective::floor_at_offset;
  problem.offset_hz = offset_hz;
  problem.validate();
  const double c = problem.c_min;

  // Outer r, inner θ (periodic: scan a full period, then refine).
  auto theta_profile = [&](double r) {
    if (problem.fixed_theta) return Point{*problem.fixed_theta, evaluate_objective(problem, r, *problem.fixed_theta, c)};
    return scan_and_refine([&](double t) { return evaluate_objective(problem, r, t, c); }, 0.0, kTwoPi,
                           problem.coarse_points);
  };
  const Point outer = scan_and_refine([&](double r) { return theta_profile(r).f; }, problem.r_min, problem.r_max,
                                      problem.coarse_points);
  const Point inner = theta_profile(outer.x);
  Candidate best{outer.x, inner.x, c, inner.f};

  OptResult res;
  res.trace.push_back({"nested", best.r, best.theta, c, best.value});

  const auto r_grid = linspace(problem.r_min, problem.r_max, problem.r_max > problem.r_min ? problem.audit_points : 1);
  const auto t_grid = problem.fixed_theta ? std::vector<double>{*problem.fixed_theta}
                                          : linspace(0.0, kTwoPi, problem.audit_points);
  Candidate audit{0.0, 0.0, c, std::numeric_limits<double>::infinity()};
  std::size_t evaluations = 0;
  for (double r : r_grid) {
    for (double t : t_grid) {
      const double v = evaluate_objective(problem, r, t, c);
      ++evaluations;
      if (v < audit.value) audit = {r, t, c, v};
    }
  }
  res.audit_min = audit.value;
  res.audit_evaluations = evaluations;
  const double tol = 1e-9 * std::max(1.0, std::abs(audit.value));
  if (best.value > audit.value + tol) {
    const double dr = r_grid.size() > 1 ? r_grid[1] - r_grid[0] : 0.0;
    const double dt = t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 0.0;
    Candidate again = audit;
    for (int sweep = 0; sweep < 20; ++sweep) {
      const Point pr = refine_local([&](double r) { return evaluate_objective(problem, r, again.theta, c); },
                                    again.r, dr, problem.r_min, problem.r_max);
      again.r = pr.x;
      again.value = pr.f;
      if (!problem.fixed_theta) {
        const Point pt = refine_local([&](double t) { return evaluate_objective(problem, again.r, t, c); },
                                      again.theta, dt, again.theta - dt, again.theta + dt);
        again.theta = pt.x;
        again.value = pt.f;
      }
    }
    res.trace.push_back({"audit_restart", again.r, again.theta, c, again.value});
    if (again.value < best.value) best = again;
    if (audit.value < best.value) best = audit;
  }

  res.r = best.r;
  res.theta = reduce_phase(best.theta);
  res.cooperativity = c;
  res.value = best.value;
  res.audit_passed = res.value <= audit.value + tol;
  res.trace.push_back({"final", res.r, res.theta, c, res.value});
  set_flags(res, problem);
  return res;
}

}  // namespace sqzom
