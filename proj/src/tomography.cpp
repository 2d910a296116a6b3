#include "sqzom/tomography.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <ceres/ceres.h>

#include "sqzom/error.hpp"
#include "sqzom/spectra.hpp"

namespace sqzom {

void PhaseSweep::validate() const {
  if (theta_grid.size() != integrated_power.size() || theta_grid.size() < 4) {
    throw DomainError("phase sweep needs matching grids with at least 4 points");
  }
  for (double p : integrated_power) {
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("sweep power must be positive");
  }
  const double covered = theta_grid.back() - theta_grid.front();
  const double step = covered / static_cast<double>(theta_grid.size() - 1);
  if (covered + step < kTwoPi * (1.0 - 1e-9)) {
    throw DomainError("phase sweep must cover one full period of the squeeze phase");
  }
}

std::vector<double> phase_grid(std::size_t points) {
  if (points < 4) throw DomainError("phase grid needs at least 4 points");
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(points);
  }
  return grid;
}

namespace {

double heterodyne_imprecision(const QuadCovariance& cov, double eta, double c_tilde) {
  return (1.0 - 0.5 * eta + eta * (cov.vxx + cov.vyy)) / (eta * c_tilde);
}

std::vector<double> band_grid(double half_band_hz) {
  constexpr std::size_t kPoints = 4001;
  std::vector<double> grid(kPoints);
  for (std::size_t k = 0; k < kPoints; ++k) {
    grid[k] = -half_band_hz + 2.0 * half_band_hz * static_cast<double>(k) / (kPoints - 1);
  }
  grid[kPoints / 2] = 0.0;
  return grid;
}

}  // namespace

PhaseSweep simulate_phase_sweep(double squeeze_r, const SystemParams& params, double cooperativity,
                                std::span<const double> theta_grid, const SweepOptions& options) {
  params.validate();
  if (!(cooperativity > 0.0)) throw DomainError("cooperativity must be > 0");
  if (!(options.integration_linewidths > 0.0)) throw DomainError("integration band must be > 0");
  if (options.averages < 0) throw DomainError("averages must be >= 0");

  PhaseSweep sweep;
  sweep.theta_grid.assign(theta_grid.begin(), theta_grid.end());
  sweep.integrated_power.resize(theta_grid.size());
  sweep.integration_band_hz = options.integration_linewidths * params.total_mech_linewidth / kTwoPi;
  sweep.samples_per_point = options.averages;
  sweep.cooperativity = cooperativity;
  sweep.eta_in = params.eta_in;

  const DriveState reference = DriveState::coherent(cooperativity);

  if (options.band_model == BandModel::ideal) {
    const double c_tilde = weighted_cooperativity(cooperativity, params);
    const QuadCovariance ref_cov = drive_covariance(reference, params);
    const double n_imp = heterodyne_imprecision(ref_cov, params.eta_det, c_tilde);
    const double background = params.n_th + n_imp;
    const double norm = background + c_tilde * ref_cov.vxx;
    for (std::size_t k = 0; k < theta_grid.size(); ++k) {
      const DriveState drive(squeeze_r, theta_grid[k], cooperativity);
      sweep.integrated_power[k] = (background + c_tilde * drive_covariance(drive, params).vxx) / norm;
    }
  } else {
    const double half_band = 0.5 * sweep.integration_band_hz;
    const auto grid = band_grid(half_band);
    const double norm = integrated_power(heterodyne_upper_sideband(reference, params, grid), half_band);
    for (std::size_t k = 0; k < theta_grid.size(); ++k) {
      const DriveState drive(squeeze_r, theta_grid[k], cooperativity);
      sweep.integrated_power[k] =
          integrated_power(heterodyne_upper_sideband(drive, params, grid), half_band) / norm;
    }
  }

  if (options.averages > 0) {
    // Mean of `averages` exponential power samples: Gamma(M, 1/M) = χ²_{2M}/(2M).
    std::mt19937_64 rng(options.seed);
    std::gamma_distribution<double> radiometer(options.averages, 1.0 / options.averages);
    for (double& p : sweep.integrated_power) p *= radiometer(rng);
  }
  return sweep;
}

double sweep_model(double r, double eta_eff, double phase_offset, double theta) {
  const double pump_phase = 2.0 * theta;
  return 1.0 - eta_eff +
         eta_eff * (std::cosh(2.0 * r) - std::cos(0.5 * (phase_offset + pump_phase)) * std::sinh(2.0 * r));
}

namespace {

struct SweepResidual {
  SweepResidual(std::span<const double> theta, std::span<const double> y, std::span<const double> sigma)
      : theta_(theta), y_(y), sigma_(sigma) {}

  template <typename T>
  bool operator()(const T* const p, T* residual) const {
    using std::cos;
    using std::cosh;
    using std::sinh;
    const T& r = p[0];
    const T& eta = p[1];
    const T& phase = p[2];
    for (std::size_t k = 0; k < theta_.size(); ++k) {
      const T arg = 0.5 * (phase + T(2.0 * theta_[k]));
      const T model = T(1.0) - eta + eta * (cosh(T(2.0) * r) - cos(arg) * sinh(T(2.0) * r));
      residual[k] = (model - T(y_[k])) / T(sigma_[k]);
    }
    return true;
  }

  std::span<const double> theta_, y_, sigma_;
};

struct HarmonicFit {
  double mean = 0.0;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
  double amplitude_sigma = 0.0;
};

// Least squares of y against {1, cos θ, sin θ}.
HarmonicFit harmonic_fit(std::span<const double> theta, std::span<const double> y) {
  const std::size_t n = theta.size();
  Eigen::MatrixXd basis(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    basis(k, 0) = 1.0;
    basis(k, 1) = std::cos(theta[k]);
    basis(k, 2) = std::sin(theta[k]);
    rhs(k) = y[k];
  }
  const Eigen::Vector3d coef = basis.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd resid = basis * coef - rhs;
  const double s2 = resid.squaredNorm() / static_cast<double>(n > 3 ? n - 3 : 1);
  const Eigen::Matrix3d cov = (basis.transpose() * basis).inverse() * s2;
  HarmonicFit fit;
  fit.mean = coef(0);
  fit.cos_coef = coef(1);
  fit.sin_coef = coef(2);
  fit.amplitude_sigma = std::sqrt(0.5 * (cov(1, 1) + cov(2, 2)));
  return fit;
}

}  // namespace

SqueezeEstimate fit_squeezing(const PhaseSweep& sweep) {
  sweep.validate();
  const auto& theta = sweep.theta_grid;
  const auto& y = sweep.integrated_power;
  const double eta_in = sweep.eta_in > 0.0 ? sweep.eta_in : 1.0;

  const HarmonicFit harmonic = harmonic_fit(theta, y);
  const double amplitude = std::hypot(harmonic.cos_coef, harmonic.sin_coef);
  const double excess = harmonic.mean - 1.0;

  SqueezeEstimate est;
  const double resolvable = std::max(3.0 * harmonic.amplitude_sigma, 1e-12);
  if (amplitude <= resolvable || excess <= 0.0) {
    est.degenerate = true;
    est.r_hat = 0.0;
    est.eta_eff = 0.0;
    est.eta_det_om = 0.0;
    est.r_ci = {0.0, 0.5 * std::asinh(resolvable > 1e-12 ? resolvable / 1e-3 : 0.0)};
    est.eta_eff_ci = {0.0, 1.0};
    est.phase_ci = {0.0, 2.0 * kTwoPi};
    return est;
  }

  // Closed form from the first harmonic: mean − 1 = η(cosh 2r − 1),
  // amplitude = η sinh 2r, so tanh r = (mean − 1)/amplitude.
  const double tanh_r = std::min(excess / amplitude, 1.0 - 1e-12);
  std::array<double, 3> p{};
  p[0] = std::atanh(tanh_r);
  p[1] = std::min(amplitude / std::sinh(2.0 * p[0]), 1.0);
  p[2] = 2.0 * std::atan2(harmonic.sin_coef, -harmonic.cos_coef);

  std::vector<double> sigma(y.begin(), y.end());
  double scale = 1.0;
  ceres::Problem::Options problem_options;
  std::array<double, 9> cov{};
  bool have_cov = false;
  // Second pass re-weights with the first-pass model to avoid the downward
  // bias of data-proportional weights.
  for (int pass = 0; pass < 2; ++pass) {
    ceres::Problem problem(problem_options);
    auto* cost = new ceres::AutoDiffCostFunction<SweepResidual, ceres::DYNAMIC, 3>(
        new SweepResidual(theta, y, sigma), static_cast<int>(y.size()));
    problem.AddResidualBlock(cost, nullptr, p.data());
    problem.SetParameterLowerBound(p.data(), 0, 0.0);
    problem.SetParameterLowerBound(p.data(), 1, 0.0);
    problem.SetParameterUpperBound(p.data(), 1, 1.0);

    ceres::Solver::Options options;
    options.linear_solver_type = ceres::DENSE_QR;
    options.max_num_iterations = 200;
    options.function_tolerance = 1e-15;
    options.gradient_tolerance = 1e-15;
    options.parameter_tolerance = 1e-14;
    options.logging_type = ceres::SILENT;
    ceres::Solver::Summary summary;
    ceres::Solve(options, &problem, &summary);
    if (summary.termination_type == ceres::FAILURE) {
      throw FitError("squeezing fit failed: " + summary.message);
    }
    const double dof = static_cast<double>(y.size() > 3 ? y.size() - 3 : 1);
    scale = 2.0 * summary.final_cost / dof;

    ceres::Covariance::Options cov_options;
    cov_options.algorithm_type = ceres::DENSE_SVD;
    cov_options.null_space_rank = -1;
    ceres::Covariance covariance(cov_options);
    std::vector<std::pair<const double*, const double*>> blocks{{p.data(), p.data()}};
    have_cov = covariance.Compute(blocks, &problem) &&
               covariance.GetCovarianceBlock(p.data(), p.data(), cov.data());

    for (std::size_t k = 0; k < y.size(); ++k) sigma[k] = sweep_model(p[0], p[1], p[2], theta[k]);
  }

  auto half_width = [&](int idx) {
    return have_cov ? std::sqrt(std::max(0.0, cov[idx * 3 + idx] * scale))
                    : std::numeric_limits<double>::infinity();
  };
  est.r_hat = p[0];
  est.eta_eff = p[1];
  est.eta_det_om = p[1] / eta_in;
  est.phase_offset = std::remainder(p[2], 2.0 * kTwoPi);
  est.r_ci = {std::max(0.0, p[0] - half_width(0)), p[0] + half_width(0)};
  est.eta_eff_ci = {std::max(0.0, p[1] - half_width(1)), std::min(1.0, p[1] + half_width(1))};
  est.phase_ci = {est.phase_offset - half_width(2), est.phase_offset + half_width(2)};
  return est;
}

OptomechanicalEfficiency eta_det_om_predicted(const SystemParams& params, double cooperativity) {
  if (!(cooperativity > 0.0)) throw DomainError("cooperativity must be > 0");
  if (!(params.eta_det > 0.0)) throw DomainError("eta_det must be > 0");
  const double c_tilde = weighted_cooperativity(cooperativity, params);
  OptomechanicalEfficiency eff;
  eff.n_ba_coherent = cooperativity / sideband_weight(params);
  eff.n_imp = 1.0 / (4.0 * params.eta_det * c_tilde);
  eff.full = 1.0 / (1.0 + (params.n_th + eff.n_imp) / eff.n_ba_coherent);
  const double ratio = params.n_th * params.total_mech_linewidth / scatter_rate(cooperativity, params);
  eff.high_drive = 1.0 / (1.0 + ratio);
  if (eff.n_imp < params.n_th / 100.0 && std::abs(eff.full - eff.high_drive) > 0.01 * eff.full) {
    std::ostringstream msg;
    msg << "efficiency forms disagree beyond 1%: " << eff.full << " vs " << eff.high_drive;
    throw InvariantViolation(msg.str());
  }
  return eff;
}

}  // namespace sqzom
