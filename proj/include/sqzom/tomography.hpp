#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqzom/core_model.hpp"

namespace sqzom {

enum class BandModel {
  // Occupancy-based model: n_f = n_th + n_imp + C̃⟨ΔX_a²⟩ with n_imp fixed at
  // its unsqueezed value.
  ideal,
  // Integrates the heterodyne sideband PSD (floor, zero-point and Lorentzian
  // tails included) over the finite integration band.
  finite_band,
};

struct SweepOptions {
  double integration_linewidths = 5.0;  // full band width in units of Γ
  BandModel band_model = BandModel::ideal;
  // Averages per point for the radiometer noise (χ² with 2·averages degrees
  // of freedom). 0 disables statistical noise.
  int averages = 0;
  std::uint64_t seed = 1;
};

// Integrated upper-sideband power versus squeeze phase, normalized to the
// coherent-drive (r = 0) level at the same cooperativity.
struct PhaseSweep {
  std::vector<double> theta_grid;  // squeeze phase θ (rad)
  std::vector<double> integrated_power;
  double integration_band_hz = 0.0;
  int samples_per_point = 0;
  double cooperativity = 0.0;
  double eta_in = 0.0;  // transmittance used to refer η_eff to the mechanics

  void validate() const;
};

// Evenly spaced squeeze phases covering one full period [0, 2π).
std::vector<double> phase_grid(std::size_t points = 200);

PhaseSweep simulate_phase_sweep(double squeeze_r, const SystemParams& params, double cooperativity,
                                std::span<const double> theta_grid, const SweepOptions& options = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SqueezeEstimate {
  double r_hat = 0.0;
  double eta_eff = 0.0;
  double eta_det_om = 0.0;    // eta_eff / η_in
  double phase_offset = 0.0;  // fitted φ, wrapped to [−2π, 2π]
  Interval r_ci;              // 68%
  Interval eta_eff_ci;
  Interval phase_ci;
  bool degenerate = false;  // contrast not resolved above the noise
};

// Sweep model fitted by fit_squeezing,
//   1 − η_eff + η_eff·(cosh 2r − cos((φ + θ_p)/2)·sinh 2r),
// with the pump-referenced phase θ_p = 2θ of the internal squeeze phase θ.
double sweep_model(double r, double eta_eff, double phase_offset, double theta);

// Nonlinear least-squares fit of (r, η_eff, φ). A sweep without resolvable
// contrast returns r_hat = 0, degenerate = true and a wide interval on r.
SqueezeEstimate fit_squeezing(const PhaseSweep& sweep);

struct OptomechanicalEfficiency {
  double full = 0.0;        // (1 + (n_th + n_imp)/n_ba^coh)^-1
  double high_drive = 0.0;  // (1 + n_th Γ/Γ_scatter)^-1
  double n_imp = 0.0;
  double n_ba_coherent = 0.0;
};

// Effective homodyne efficiency of the mechanical detector. n_imp is that of a
// coherent drive at the same cooperativity. Throws InvariantViolation if the
// two forms disagree by more than 1% while n_imp < n_th/100.
OptomechanicalEfficiency eta_det_om_predicted(const SystemParams& params, double cooperativity);

}  // namespace sqzom
