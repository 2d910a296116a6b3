#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sqzom/core_model.hpp"
#include "sqzom/spectra.hpp"

namespace sqzom {

// Time-domain stochastic model of the linearized cavity-mechanics system.
//
// The full model integrates the four real quadratures (X_c, Y_c, x, p) in the
// frame of the drive:
//   dX_c = −κ/2 X_c + √κ X_in
//   dY_c = −κ/2 Y_c − √2 g x + √κ Y_in
//   dx   = Ω_m p − Γ/2 x + √Γ x_in
//   dp   = −Ω_m x − Γ/2 p − 2√2 g X_c + √Γ p_in
// with white inputs of covariance drive_covariance (X_in, Y_in) and n_th + ½
// (x_in, p_in). It resolves Ω_m and κ and is only practical for short runs.
//
// The sideband-envelope model eliminates the cavity adiabatically and keeps
// the mechanical amplitude β = b·e^{iΩ_m t} together with the envelopes of the
// output quadratures near Ω_m. Its step is exact for the linear drift; output
// samples are boxcar averages of the white inputs plus β at the sample centre.
enum class IntegrationMode { sideband_envelope, full };

struct SimConfig {
  IntegrationMode mode = IntegrationMode::sideband_envelope;
  double dt = 1.0 / 65536.0;  // output sample interval, s
  double duration = 0.0;      // per trajectory, excluding burn-in, s
  int n_trajectories = 8;
  std::uint64_t seed = 1;
  std::size_t segment_length = 8192;  // Welch segment, samples
  // Full mode records every `decimation`-th step in integrate().
  std::size_t decimation = 1;

  // Envelope run sized for `total_segments` Hann segments (50% overlap)
  // spread over the trajectories.
  static SimConfig envelope(std::size_t total_segments, std::uint64_t seed = 1, int n_trajectories = 8);

  // Full-model run with the largest step allowed by the stability rules.
  static SimConfig full_model(const SystemParams& params, double duration, std::uint64_t seed = 1);

  double burn_in(const SystemParams& params) const { return 10.0 / params.total_mech_linewidth; }
  std::size_t samples_per_trajectory() const;

  // Full: dt·κ/2 < 0.1 and dt·Ω_m < 0.3. Envelope: dt·Γ/2 < 0.1 and a
  // sampling rate well below κ. Both: duration >= 100/Γ.
  void validate(const SystemParams& params) const;

  std::uint64_t hash() const;
};

// Seeded source of the input noises of one trajectory.
class NoiseSynthesizer {
 public:
  NoiseSynthesizer(const DriveState& drive, const SystemParams& params, std::uint64_t seed,
                   std::uint64_t stream = 0);

  // (X_in, Y_in) samples with covariance drive_covariance, i.e. white noise
  // averaged over 1/unit bandwidth.
  std::array<double, 2> drive_sample();
  // (x_in, p_in) with variance n_th + ½ each, uncorrelated.
  std::array<double, 2> bath_sample();
  // Detection vacuum, variance 1/4.
  double vacuum_sample();
  // Circular complex vacuum, E|z|² = 1/4.
  std::complex<double> vacuum_envelope();

  // Complex standard normal, E|z|² = 1.
  std::complex<double> complex_normal();
  double normal() { return normal_(rng_); }

  const QuadCovariance& covariance() const { return cov_; }

 private:
  QuadCovariance cov_;
  double chol_[3];  // lower Cholesky factor of the drive covariance
  double bath_std_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

struct Trajectory {
  // Envelope mode: mechanical amplitude β (⟨|β|²⟩ = n + ½) and the output
  // quadrature envelopes. Full mode: b = (x + ip)/√2 and real outputs.
  std::vector<std::complex<double>> mechanical;
  std::vector<std::complex<double>> output_x;
  std::vector<std::complex<double>> output_y;
  std::vector<std::complex<double>> vacuum;  // detection vacuum stream
};

struct TrajectoryBatch {
  SimConfig config;
  DriveState drive{0.0, 0.0, 1.0};
  SystemParams params;
  std::uint64_t config_hash = 0;
  std::vector<Trajectory> trajectories;
};

// Throws InstabilityError if a state becomes non-finite, DomainError if the
// run would need more than ~2·10⁸ stored samples (use simulate_psd instead).
TrajectoryBatch integrate(const DriveState& drive, const SystemParams& params, const SimConfig& config);

// Mean of |β|² − ½ over all samples.
double mechanical_occupancy(const TrajectoryBatch& batch);

struct McSpectrum {
  Spectrum spectrum;  // offsets from Ω_m, normalized like output_psd
  std::size_t segments = 0;
  bool few_segments = false;  // fewer than 8 segments: error bars unreliable
};

// Hann-windowed Welch estimate (50% overlap) of the detected quadrature at
// detect_angle. Envelope batches only.
McSpectrum estimate_psd(const TrajectoryBatch& batch, double detect_angle = std::numbers::pi / 2);

// Streaming equivalent of estimate_psd(integrate(...)) that stores no time
// series. Trajectories run on separate threads; the result does not depend on
// scheduling. Also reports the sample mechanical occupancy.
struct StreamResult {
  McSpectrum psd;
  double mechanical_occupancy = 0.0;
};
StreamResult simulate_psd(const DriveState& drive, const SystemParams& params, const SimConfig& config,
                          double detect_angle = std::numbers::pi / 2);

// Stationary mechanical occupancy of the full model from its Lyapunov
// equation.
double full_model_occupancy(const DriveState& drive, const SystemParams& params);

struct ValidityCheck {
  double envelope_occupancy = 0.0;  // n_th + C̃·v_xx
  double lyapunov_occupancy = 0.0;
  double lyapunov_deviation = 0.0;  // relative
  double stochastic_occupancy = 0.0;
  double stochastic_std_error = 0.0;
  double kappa_over_gamma = 0.0;
  bool valid = false;
};

// Compares the envelope model with the full model: exact stationary
// occupancy (tolerance 1%) and a 100/Γ stochastic full-model run (within four
// standard errors).
ValidityCheck check_envelope_validity(const DriveState& drive, const SystemParams& params,
                                      std::uint64_t seed = 1);

struct McCaseResult {
  std::string name;
  double squeeze_r = 0.0;
  double squeeze_phase = 0.0;
  double cooperativity = 0.0;
  double rms_deviation = 0.0;  // over ±10Γ
  double occupancy_fit = 0.0;
  double occupancy_expected = 0.0;  // n_th + n_ba
  double occupancy_deviation = 0.0;
  double asymmetry_mc = 0.0;
  double asymmetry_analytic = 0.0;
  bool passed = false;
};

struct McVerifyOptions {
  std::string case_filter = "all";  // a case name or "all"
  std::uint64_t seed = 1;
  std::size_t segments = 4096;
  double rms_tolerance = 0.03;
  double occupancy_tolerance = 0.05;
  bool check_validity = true;
};

struct McVerifyReport {
  std::vector<McCaseResult> cases;
  bool deterministic = false;
  ValidityCheck validity;
  bool passed = false;
};

// Names of the oracle cases: r{0,1}_theta{0,90,180} at C = 70 and
// occupancy_C{10,70,220}.
std::vector<std::string> mc_case_names();

// Throws DomainError for an unknown case name.
McVerifyReport mc_verify(const SystemParams& params, const McVerifyOptions& options = {});

}  // namespace sqzom
