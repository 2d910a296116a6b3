#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "sqzom/core_model.hpp"

namespace sqzom {

// Measurement noise at one operating point, in equivalent thermal phonons.
struct NoiseBudget {
  double cooperativity = 0.0;
  double n_imp = 0.0;
  double n_ba = 0.0;
  double n_add = 0.0;    // n_imp + n_ba
  double n_total = 0.0;  // n_imp + n_ba + n_th + 1/2
  double heisenberg_product = 0.0;  // n_imp * n_ba
};

// Scattering rates of an auxiliary cooling tone (rad/s).
struct CoolingDrive {
  double stokes_rate = 0.0;       // Γ₋, heating
  double anti_stokes_rate = 0.0;  // Γ₊, cooling
};

// n_imp = (1 − η_det + 4η_det⟨ΔY_a²⟩) / (4η_det C̃). Throws DomainError when
// η_det = 0.
double imprecision(const DriveState& drive, const SystemParams& params);

// n_ba = C̃⟨ΔX_a²⟩.
double backaction(const DriveState& drive, const SystemParams& params);

NoiseBudget budget(const DriveState& drive, const SystemParams& params);

enum class DriveFamily { unsqueezed, amplitude_squeezed, phase_squeezed };

std::string_view to_string(DriveFamily family);
DriveState family_member(DriveFamily family, double r, double cooperativity);

struct SweepRow {
  DriveFamily family = DriveFamily::unsqueezed;
  NoiseBudget budget;
  double n_imp_times_c = 0.0;  // constant across C for a fixed drive
  double occupancy = 0.0;      // n_th + n_ba
};

// One budget per grid point for a single drive; the drive's cooperativity is
// replaced by each grid value. Grid must be non-empty, positive, strictly
// increasing.
std::vector<NoiseBudget> sweep_drive(const DriveState& drive, const SystemParams& params,
                                     std::span<const double> cooperativity_grid);

// Unsqueezed, amplitude-squeezed and phase-squeezed curves at squeezing r,
// ordered by family then cooperativity.
std::vector<SweepRow> sweep_cooperativity(double r, const SystemParams& params,
                                          std::span<const double> cooperativity_grid);

// Log-spaced cooperativity grid, inclusive endpoints.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

// Equilibrium phonon number of a sideband-cooled, perfectly overcoupled
// device whose cavity carries n_c thermal quanta:
//   n_f = (Γ_m n_bath + Γ₋(1+n_c) + Γ₊ n_c) / (Γ_m − Γ₋ + Γ₊).
// Throws InstabilityError unless the denominator is positive.
double cooled_occupancy(const SystemParams& params, const CoolingDrive& cool);

// Same formula against an explicit starting linewidth and occupancy. Used for
// a second cooling tone applied on top of an already-damped mode.
double cooled_occupancy(double linewidth, double occupancy, double n_c, const CoolingDrive& cool);

// Stokes / anti-Stokes rates of a tone at the given detuning from the cavity
// (negative = red) and enhanced coupling g, both rad/s:
//   Γ± = g²κ / (κ²/4 + (Δ ± Ω_m)²).
CoolingDrive sideband_scattering_rates(const SystemParams& params, double detuning, double coupling);

struct CoolingCondition {
  double ratio = 0.0;  // sinh²r·Γ₊ / (n_th·Γ_m)
  double threshold = 0.2;
  bool satisfied = true;
};

// Checks that squeezing-induced excess noise seen by the cooling tone is
// negligible against the thermal decoherence rate, in which case the cooling
// tone acts as an ideal sideband-cooling damper.
CoolingCondition cooling_tone_condition(const DriveState& drive, const SystemParams& params,
                                        const CoolingDrive& cool, double threshold = 0.2);

}  // namespace sqzom
