#include "sqzom/core_model.hpp"

#include <cmath>
#include <string>

#include "sqzom/error.hpp"

namespace sqzom {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be finite and > 0, got " + std::to_string(value));
  }
}

void require_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be finite and >= 0, got " + std::to_string(value));
  }
}

// cosh 2r − c·sinh 2r written as a sum of positive terms for |c| <= 1.
double squeeze_factor(double r, double c) {
  return 0.5 * std::exp(-2.0 * r) * (1.0 + c) + 0.5 * std::exp(2.0 * r) * (1.0 - c);
}

}  // namespace

void SystemParams::validate() const {
  require_positive(cavity_freq, "cavity_freq");
  require_positive(mech_freq, "mech_freq");
  require_positive(cavity_linewidth, "cavity_linewidth");
  require_positive(intrinsic_mech_linewidth, "intrinsic_mech_linewidth");
  require_positive(total_mech_linewidth, "total_mech_linewidth");
  require_positive(vacuum_coupling, "vacuum_coupling");
  if (total_mech_linewidth < intrinsic_mech_linewidth) {
    throw DomainError("total_mech_linewidth must be >= intrinsic_mech_linewidth");
  }
  require_unit_interval(eta_in, "eta_in");
  require_unit_interval(eta_det, "eta_det");
  require_non_negative(n_th, "n_th");
  require_non_negative(n_c, "n_c");
  require_non_negative(n_bath, "n_bath");
}

double reduce_phase(double angle) {
  if (!std::isfinite(angle)) throw DomainError("phase must be finite");
  double reduced = std::fmod(angle, kTwoPi);
  if (reduced < 0.0) reduced += kTwoPi;
  // fmod of a value just below a multiple of 2π can round up to 2π.
  if (reduced >= kTwoPi) reduced = 0.0;
  return reduced;
}

DriveState::DriveState(double squeeze_r, double squeeze_phase, double cooperativity,
                       double drive_phase, double detuning)
    : r_(squeeze_r),
      theta_(reduce_phase(squeeze_phase)),
      phi_(reduce_phase(drive_phase)),
      cooperativity_(cooperativity),
      detuning_(detuning) {
  require_non_negative(r_, "squeeze_r");
  require_positive(cooperativity_, "cooperativity");
  if (!std::isfinite(detuning_)) throw DomainError("detuning must be finite");
}

DriveState DriveState::with_cooperativity(double cooperativity) const {
  return {r_, theta_, cooperativity, phi_, detuning_};
}

DriveState DriveState::with_squeeze_phase(double squeeze_phase) const {
  return {r_, squeeze_phase, cooperativity_, phi_, detuning_};
}

DriveState DriveState::with_squeeze_r(double r) const {
  return {r, theta_, cooperativity_, phi_, detuning_};
}

double QuadCovariance::variance_at(double angle) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return vxx * c * c + vyy * s * s + 2.0 * vxy * s * c;
}

void QuadCovariance::validate() const {
  if (!(vxx > 0.0) || !(vyy > 0.0) || !std::isfinite(vxx) || !std::isfinite(vyy) ||
      !std::isfinite(vxy)) {
    throw InvariantViolation("quadrature variances must be finite and positive");
  }
  if (!(determinant() > 0.0)) {
    throw InvariantViolation("quadrature covariance is not positive-definite (det = " +
                             std::to_string(determinant()) + ")");
  }
}

double variance_to_db(double variance) {
  require_positive(variance, "variance");
  return 10.0 * std::log10(variance / kShotNoiseVariance);
}

double sideband_weight(const SystemParams& params) {
  const double ratio = params.mech_freq / params.cavity_linewidth;
  return 1.0 + 4.0 * ratio * ratio;
}

double cooperativity_from_photons(const SystemParams& params, double n_photons) {
  require_positive(n_photons, "n_photons");
  const double g0 = params.vacuum_coupling;
  return 4.0 * g0 * g0 * n_photons / (params.cavity_linewidth * params.total_mech_linewidth);
}

double photons_from_cooperativity(const SystemParams& params, double cooperativity) {
  require_positive(cooperativity, "cooperativity");
  const double g0 = params.vacuum_coupling;
  return cooperativity * params.cavity_linewidth * params.total_mech_linewidth / (4.0 * g0 * g0);
}

double coupling_rate(const SystemParams& params, double cooperativity) {
  require_non_negative(cooperativity, "cooperativity");
  return std::sqrt(cooperativity * params.cavity_linewidth * params.total_mech_linewidth / 4.0);
}

double weighted_cooperativity(double cooperativity, const SystemParams& params) {
  require_positive(cooperativity, "cooperativity");
  return 4.0 * cooperativity / sideband_weight(params);
}

double scatter_rate(double cooperativity, const SystemParams& params) {
  require_positive(cooperativity, "cooperativity");
  const double g = coupling_rate(params, cooperativity);
  const double kappa = params.cavity_linewidth;
  const double omega = params.mech_freq;
  return 4.0 * g * g * kappa / (kappa * kappa + 4.0 * omega * omega);
}

QuadCovariance drive_covariance(const DriveState& drive, const SystemParams& params) {
  const double r = drive.squeeze_r();
  const double theta = drive.squeeze_phase();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double thermal = (1.0 + 2.0 * params.n_c) * kShotNoiseVariance;
  const double loss = 1.0 - params.eta_in;

  QuadCovariance cov;
  cov.vxx = thermal * (loss + params.eta_in * squeeze_factor(r, c));
  cov.vyy = thermal * (loss + params.eta_in * squeeze_factor(r, -c));
  cov.vxy = -thermal * params.eta_in * std::sinh(2.0 * r) * s;
  return cov;
}

double heisenberg_product(const QuadCovariance& cov) {
  cov.validate();
  return cov.determinant();
}

}  // namespace sqzom
