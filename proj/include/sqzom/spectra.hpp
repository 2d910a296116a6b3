#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sqzom/core_model.hpp"

namespace sqzom {

enum class SpectrumKind { homodyne, heterodyne_upper };

std::string_view to_string(SpectrumKind kind);

// Output power spectral density around the upper mechanical sideband.
// offset_hz are offsets from Ω_m/2π. psd is normalized so that the floor of an
// unsqueezed drive detected with unit efficiency is 1.
struct Spectrum {
  std::vector<double> offset_hz;
  std::vector<double> psd;
  std::vector<double> psd_error;  // one-sigma per bin; empty for analytic spectra
  double quadrature_angle = std::numbers::pi / 2;  // 0 = amplitude, π/2 = phase
  SpectrumKind kind = SpectrumKind::homodyne;
  double floor = 1.0;  // analytic far-detuned floor
  double cooperativity = 0.0;
  double eta_det = 1.0;

  // Throws InvariantViolation unless the grid is strictly increasing, sizes
  // agree, and every psd value is positive.
  void validate() const;
};

struct Susceptibilities {
  std::complex<double> cavity;      // χ_c(ω) = 1 / (κ/2 − iω)
  std::complex<double> mechanical;  // χ_m(ω) = 1 / (Γ/2 − i(ω − Ω_m))
};

// Linear-response kernels in the frame rotating at the (resonant) drive. ω in
// rad/s.
Susceptibilities susceptibilities(const SystemParams& params, double omega);

// Offsets in Hz, symmetric about zero (exact mirror pairs), inclusive
// endpoints ±span/2. Default: 6000 points over 300 kHz.
std::vector<double> offset_grid(double span_hz = 300e3, std::size_t points = 6000);

// 1 − η_det + 4η_det⟨ΔQ²⟩ for the drive quadrature Q at the given angle.
double analytic_floor(const DriveState& drive, const SystemParams& params, double detect_angle);

// Homodyne PSD of the reflected drive at detect_angle (0 = amplitude, π/2 =
// phase quadrature) on the given offset grid.
//
// The linearized cavity-mechanics equations are solved in the sideband frame:
// the cavity response is evaluated at the mechanical sideband (the grid spans
// ≪ κ), the mechanics uses its resonant susceptibility χ_m. Noise inputs are
// the drive quadratures with covariance drive_covariance (white, including
// their cross-correlation), the mechanical bath at occupancy n_th, and vacuum
// admitted by the detection efficiency η_det. Output field = input − √κ·cavity.
//
// Throws UnsupportedConfiguration for a detuned drive.
Spectrum output_psd(const DriveState& drive, const SystemParams& params,
                    std::span<const double> offset_hz, double detect_angle = std::numbers::pi / 2);

// output_psd at the amplitude quadrature. The amplitude quadrature is the QND
// observable of the interaction, so the ideal model returns its flat floor.
Spectrum amplitude_quadrature_qnd_check(const DriveState& drive, const SystemParams& params,
                                        std::span<const double> offset_hz);

// Phase-insensitive detection of the upper sideband: the mean of the
// amplitude- and phase-quadrature spectra, each detected at efficiency η_det/2.
Spectrum heterodyne_upper_sideband(const DriveState& drive, const SystemParams& params,
                                   std::span<const double> offset_hz);

// ∫sign(δ)(psd − floor)dδ / ∫|psd − floor|dδ. Zero for a spectrum symmetric
// about the mechanical resonance, nonzero for Fano-like lineshapes.
double asymmetry_metric(const Spectrum& spectrum);

// Trapezoidal ∫psd dδ (Hz) over |δ| <= half_band_hz.
double integrated_power(const Spectrum& spectrum, double half_band_hz);

// Peak PSD per mechanical phonon: 4η_det C̃ sin²(angle) for homodyne,
// η_det C̃ for heterodyne.
double phonon_gain(const Spectrum& spectrum, const SystemParams& params);

struct FitParameter {
  double value = 0.0;
  double ci68 = 0.0;  // half-width of the 68% confidence interval
};

// floor + [A·(γ/2)² + B·(γ/2)(δ−δ₀)] / ((δ−δ₀)² + (γ/2)²)
struct LineshapeFit {
  FitParameter center_hz;
  FitParameter linewidth_hz;  // FWHM γ
  FitParameter peak;          // A
  FitParameter dispersive;    // B
  FitParameter floor;
  double lorentzian_area = 0.0;  // A·π·γ/2, psd·Hz
  double lorentzian_area_ci68 = 0.0;
  double fano_coefficient = 0.0;  // B / A
  double fit_residual = 0.0;      // weighted RMS residual
  int iterations = 0;

  double evaluate(double offset_hz) const;
};

struct FitOptions {
  std::optional<double> linewidth_hint_hz;  // enforces span >= 10 linewidths
  int max_iterations = 200;
};

// Weighted least-squares fit of the Lorentzian-plus-dispersive lineshape. Uses
// psd_error as weights when present, otherwise relative (psd-proportional)
// weights. Throws FitError with diagnostics when the solver does not converge.
LineshapeFit fit_lineshape(const Spectrum& spectrum, const FitOptions& options = {});

// Mechanical occupancy implied by a Lorentzian area, using the analytic
// transduction gain of the spectrum; subtracts the zero-point half quantum so
// that the result compares directly with n_th + n_ba.
double occupancy_from_area(double lorentzian_area, const Spectrum& spectrum,
                           const SystemParams& params);

// Floor expressed in phonons (imprecision noise).
double floor_in_phonons(double floor, const Spectrum& spectrum, const SystemParams& params);

}  // namespace sqzom
