#pragma once

#include <numbers>

namespace sqzom {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Quadrature variance of vacuum / a coherent state (shot-noise level).
inline constexpr double kShotNoiseVariance = 0.25;

// Heisenberg bound on det of a quadrature covariance, ⟨ΔX²⟩⟨ΔY²⟩ ≥ 1/16.
inline constexpr double kHeisenbergBound = 1.0 / 16.0;

// Physical parameters of the circuit and detection chain. Frequencies and
// rates are angular (rad/s); the default values are the published table.
struct SystemParams {
  double cavity_freq = kTwoPi * 6.89e9;
  double mech_freq = kTwoPi * 8.68e6;
  double cavity_linewidth = kTwoPi * 22.2e6;
  double intrinsic_mech_linewidth = kTwoPi * 22.0;
  double total_mech_linewidth = kTwoPi * 200.0;
  double vacuum_coupling = kTwoPi * 170.0;
  double n_th = 10.0;   // damped thermal occupancy
  double n_c = 0.17;    // cavity / drive thermal occupancy
  double eta_in = 0.47;
  double eta_det = 0.03;
  double n_bath = 95.0;  // occupancy before sideband cooling
  double base_temperature = 0.040;  // K, metadata
  double noise_temperature = 5.5;   // K, metadata

  // Throws DomainError naming the first offending field.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

// Displaced squeezed thermal drive.
//
// squeeze_phase θ is measured relative to the coherent drive phase: θ = 0
// squeezes the amplitude quadrature X_a, θ = π squeezes the phase quadrature
// Y_a. Phases are stored reduced to [0, 2π).
class DriveState {
 public:
  DriveState(double squeeze_r, double squeeze_phase, double cooperativity,
             double drive_phase = 0.0, double detuning = 0.0);

  static DriveState coherent(double cooperativity) { return {0.0, 0.0, cooperativity}; }
  static DriveState amplitude_squeezed(double r, double cooperativity) {
    return {r, 0.0, cooperativity};
  }
  static DriveState phase_squeezed(double r, double cooperativity) {
    return {r, std::numbers::pi, cooperativity};
  }

  double squeeze_r() const { return r_; }
  double squeeze_phase() const { return theta_; }
  double drive_phase() const { return phi_; }
  double cooperativity() const { return cooperativity_; }
  // Drive detuning from cavity resonance (rad/s). Only 0 is supported by the
  // spectral solver.
  double detuning() const { return detuning_; }

  DriveState with_cooperativity(double cooperativity) const;
  DriveState with_squeeze_phase(double squeeze_phase) const;
  DriveState with_squeeze_r(double r) const;

  bool operator==(const DriveState&) const = default;

 private:
  double r_;
  double theta_;
  double phi_;
  double cooperativity_;
  double detuning_;
};

// Symmetrized 2x2 covariance of the drive quadratures (X_a, Y_a), in the
// convention where vacuum has variance 1/4.
struct QuadCovariance {
  double vxx = kShotNoiseVariance;
  double vyy = kShotNoiseVariance;
  double vxy = 0.0;

  // Variance of X cos ψ + Y sin ψ.
  double variance_at(double angle) const;
  double determinant() const { return vxx * vyy - vxy * vxy; }
  // Throws InvariantViolation if not symmetric positive-definite.
  void validate() const;
};

// Reduce an angle to [0, 2π).
double reduce_phase(double angle);

// 10·log10(variance / SNL).
double variance_to_db(double variance);

// 1 + 4(Ω_m/κ)², the cavity filtering factor at the mechanical sidebands.
double sideband_weight(const SystemParams& params);

// C = 4 g0² n / (κ Γ).
double cooperativity_from_photons(const SystemParams& params, double n_photons);
double photons_from_cooperativity(const SystemParams& params, double cooperativity);

// Enhanced coupling g = sqrt(C κ Γ / 4), rad/s.
double coupling_rate(const SystemParams& params, double cooperativity);

// C̃ = 4C / (1 + 4(Ω_m/κ)²).
double weighted_cooperativity(double cooperativity, const SystemParams& params);

// Γ_scatter = 4g²κ / (κ² + 4Ω_m²), rad/s.
double scatter_rate(double cooperativity, const SystemParams& params);

// Covariance of a squeezed thermal state of occupancy n_c after a beamsplitter
// of transmittance η_in against a bath at the same temperature. The variance
// at LO angle ψ is
//   (1+2n_c)/4 · (1 − η_in + η_in(cosh 2r − cos(θ − 2ψ) sinh 2r)),
// so ψ = 0 reproduces the amplitude-quadrature expression with cos θ.
QuadCovariance drive_covariance(const DriveState& drive, const SystemParams& params);

// det(cov). Throws InvariantViolation if cov is not positive-definite.
double heisenberg_product(const QuadCovariance& cov);

}  // namespace sqzom
