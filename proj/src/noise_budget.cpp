#include "sqzom/noise_budget.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sqzom/error.hpp"

namespace sqzom {

double imprecision(const DriveState& drive, const SystemParams& params) {
  const double eta = params.eta_det;
  if (!(eta > 0.0)) throw DomainError("imprecision undefined with eta_det = 0 (no detection)");
  const QuadCovariance cov = drive_covariance(drive, params);
  const double c_tilde = weighted_cooperativity(drive.cooperativity(), params);
  return (1.0 - eta + 4.0 * eta * cov.vyy) / (4.0 * eta * c_tilde);
}

double backaction(const DriveState& drive, const SystemParams& params) {
  const QuadCovariance cov = drive_covariance(drive, params);
  return weighted_cooperativity(drive.cooperativity(), params) * cov.vxx;
}

NoiseBudget budget(const DriveState& drive, const SystemParams& params) {
  NoiseBudget b;
  b.cooperativity = drive.cooperativity();
  b.n_imp = imprecision(drive, params);
  b.n_ba = backaction(drive, params);
  b.n_add = b.n_imp + b.n_ba;
  b.n_total = b.n_add + params.n_th + 0.5;
  b.heisenberg_product = b.n_imp * b.n_ba;
  return b;
}

std::string_view to_string(DriveFamily family) {
  switch (family) {
    case DriveFamily::unsqueezed: return "unsqueezed";
    case DriveFamily::amplitude_squeezed: return "amplitude_squeezed";
    case DriveFamily::phase_squeezed: return "phase_squeezed";
  }
  return "unknown";
}

DriveState family_member(DriveFamily family, double r, double cooperativity) {
  switch (family) {
    case DriveFamily::unsqueezed: return DriveState::coherent(cooperativity);
    case DriveFamily::amplitude_squeezed: return DriveState::amplitude_squeezed(r, cooperativity);
    case DriveFamily::phase_squeezed: return DriveState::phase_squeezed(r, cooperativity);
  }
  throw DomainError("unknown drive family");
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("cooperativity grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw DomainError("cooperativity grid values must be positive and finite");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw DomainError("cooperativity grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<NoiseBudget> sweep_drive(const DriveState& drive, const SystemParams& params,
                                     std::span<const double> cooperativity_grid) {
  check_grid(cooperativity_grid);
  std::vector<NoiseBudget> out;
  out.reserve(cooperativity_grid.size());
  for (double c : cooperativity_grid) out.push_back(budget(drive.with_cooperativity(c), params));
  return out;
}

std::vector<SweepRow> sweep_cooperativity(double r, const SystemParams& params,
                                          std::span<const double> cooperativity_grid) {
  check_grid(cooperativity_grid);
  std::vector<SweepRow> rows;
  rows.reserve(3 * cooperativity_grid.size());
  for (auto family : {DriveFamily::unsqueezed, DriveFamily::amplitude_squeezed,
                      DriveFamily::phase_squeezed}) {
    for (double c : cooperativity_grid) {
      SweepRow row;
      row.family = family;
      row.budget = budget(family_member(family, r, c), params);
      row.n_imp_times_c = row.budget.n_imp * c;
      row.occupancy = params.n_th + row.budget.n_ba;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw DomainError("log_grid needs 0 < lo < hi and at least two points");
  }
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

double cooled_occupancy(double linewidth, double occupancy, double n_c, const CoolingDrive& cool) {
  if (!(cool.stokes_rate >= 0.0) || !(cool.anti_stokes_rate >= 0.0)) {
    throw DomainError("scattering rates must be non-negative");
  }
  const double damping = linewidth - cool.stokes_rate + cool.anti_stokes_rate;
  if (!(damping > 0.0)) {
    throw InstabilityError("total mechanical damping " + std::to_string(damping) +
                           " rad/s is not positive (parametric instability)");
  }
  return (linewidth * occupancy + cool.stokes_rate * (1.0 + n_c) + cool.anti_stokes_rate * n_c) /
         damping;
}

double cooled_occupancy(const SystemParams& params, const CoolingDrive& cool) {
  return cooled_occupancy(params.intrinsic_mech_linewidth, params.n_bath, params.n_c, cool);
}

CoolingDrive sideband_scattering_rates(const SystemParams& params, double detuning, double coupling) {
  const double half_kappa = 0.5 * params.cavity_linewidth;
  const double omega = params.mech_freq;
  const double scale = coupling * coupling * params.cavity_linewidth;
  CoolingDrive rates;
  rates.anti_stokes_rate = scale / (half_kappa * half_kappa + (detuning + omega) * (detuning + omega));
  rates.stokes_rate = scale / (half_kappa * half_kappa + (detuning - omega) * (detuning - omega));
  return rates;
}

CoolingCondition cooling_tone_condition(const DriveState& drive, const SystemParams& params,
                                        const CoolingDrive& cool, double threshold) {
  CoolingCondition result;
  result.threshold = threshold;
  const double sh = std::sinh(drive.squeeze_r());
  const double decoherence = params.n_th * params.intrinsic_mech_linewidth;
  const double excess = sh * sh * cool.anti_stokes_rate;
  if (decoherence > 0.0) {
    result.ratio = excess / decoherence;
  } else {
    result.ratio = excess > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  result.satisfied = result.ratio < threshold;
  return result;
}

}  // namespace sqzom
