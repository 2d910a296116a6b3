#include "sqzom/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <ceres/ceres.h>

#include "sqzom/error.hpp"

namespace sqzom {

using cplx = std::complex<double>;

std::string_view to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::homodyne: return "homodyne";
    case SpectrumKind::heterodyne_upper: return "heterodyne_upper";
  }
  return "unknown";
}

void Spectrum::validate() const {
  if (offset_hz.size() != psd.size() || offset_hz.empty()) {
    throw InvariantViolation("spectrum grid and psd sizes differ or are empty");
  }
  if (!psd_error.empty() && psd_error.size() != psd.size()) {
    throw InvariantViolation("spectrum error bars do not match the grid");
  }
  for (std::size_t i = 0; i < psd.size(); ++i) {
    if (!(psd[i] > 0.0) || !std::isfinite(psd[i])) {
      throw InvariantViolation("psd values must be positive and finite");
    }
    if (i > 0 && !(offset_hz[i] > offset_hz[i - 1])) {
      throw InvariantViolation("spectrum grid must be strictly increasing");
    }
  }
}

Susceptibilities susceptibilities(const SystemParams& params, double omega) {
  const cplx i{0.0, 1.0};
  Susceptibilities chi;
  chi.cavity = 1.0 / (0.5 * params.cavity_linewidth - i * omega);
  chi.mechanical = 1.0 / (0.5 * params.total_mech_linewidth - i * (omega - params.mech_freq));
  return chi;
}

std::vector<double> offset_grid(double span_hz, std::size_t points) {
  if (!(span_hz > 0.0) || points < 2) throw DomainError("offset grid needs span > 0 and >= 2 points");
  std::vector<double> grid(points);
  const double step = span_hz / static_cast<double>(points - 1);
  const std::size_t half = points / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double x = -0.5 * span_hz + step * static_cast<double>(k);
    grid[k] = x;
    grid[points - 1 - k] = -x;
  }
  if (points % 2 == 1) grid[half] = 0.0;
  return grid;
}

double analytic_floor(const DriveState& drive, const SystemParams& params, double detect_angle) {
  const double eta = params.eta_det;
  return 1.0 - eta + 4.0 * eta * drive_covariance(drive, params).variance_at(detect_angle);
}

Spectrum output_psd(const DriveState& drive, const SystemParams& params,
                    std::span<const double> offset_hz, double detect_angle) {
  params.validate();
  if (drive.detuning() != 0.0) {
    throw UnsupportedConfiguration("spectral solver supports only a drive on cavity resonance");
  }
  if (offset_hz.empty()) throw DomainError("offset grid is empty");

  const QuadCovariance cov = drive_covariance(drive, params);
  const double kappa = params.cavity_linewidth;
  const double gamma = params.total_mech_linewidth;
  const double g = coupling_rate(params, drive.cooperativity());
  const double eta = params.eta_det;
  const double bath = params.n_th + 0.5;
  const cplx i{0.0, 1.0};

  const cplx chi_c = susceptibilities(params, params.mech_freq).cavity;
  const cplx reflection = 1.0 - kappa * chi_c;  // unimodular
  // Drive amplitude noise -> mechanics -> phase quadrature of the output.
  const cplx backaction_path = -2.0 * i * g * g * kappa * chi_c * chi_c;
  // Mechanical bath -> phase quadrature of the output.
  const cplx thermal_path = g * std::sqrt(kappa * gamma) * chi_c;

  const double c = std::cos(detect_angle);
  const double s = std::sin(detect_angle);

  Spectrum spectrum;
  spectrum.offset_hz.assign(offset_hz.begin(), offset_hz.end());
  spectrum.psd.resize(offset_hz.size());
  spectrum.quadrature_angle = detect_angle;
  spectrum.kind = SpectrumKind::homodyne;
  spectrum.floor = 1.0 - eta + 4.0 * eta * cov.variance_at(detect_angle);
  spectrum.cooperativity = drive.cooperativity();
  spectrum.eta_det = eta;

  for (std::size_t k = 0; k < offset_hz.size(); ++k) {
    const cplx chi_m = 1.0 / (0.5 * gamma - i * (kTwoPi * offset_hz[k]));
    const cplx h_x = c * reflection + s * backaction_path * chi_m;
    const cplx h_y = s * reflection;
    const cplx h_b = s * thermal_path * chi_m;
    const double quad = std::norm(h_x) * cov.vxx + std::norm(h_y) * cov.vyy +
                        2.0 * std::real(h_x * std::conj(h_y)) * cov.vxy;
    spectrum.psd[k] = 1.0 - eta + 4.0 * eta * (quad + std::norm(h_b) * bath);
  }
  return spectrum;
}

Spectrum amplitude_quadrature_qnd_check(const DriveState& drive, const SystemParams& params,
                                        std::span<const double> offset_hz) {
  return output_psd(drive, params, offset_hz, 0.0);
}

Spectrum heterodyne_upper_sideband(const DriveState& drive, const SystemParams& params,
                                   std::span<const double> offset_hz) {
  SystemParams half = params;
  half.eta_det = 0.5 * params.eta_det;
  const Spectrum amp = output_psd(drive, half, offset_hz, 0.0);
  Spectrum out = output_psd(drive, half, offset_hz, std::numbers::pi / 2);
  for (std::size_t k = 0; k < out.psd.size(); ++k) out.psd[k] = 0.5 * (out.psd[k] + amp.psd[k]);
  out.floor = 0.5 * (out.floor + amp.floor);
  out.kind = SpectrumKind::heterodyne_upper;
  out.quadrature_angle = 0.0;
  out.eta_det = params.eta_det;
  return out;
}

namespace {

// Trapezoid weights of a non-uniform grid.
std::vector<double> trapezoid_weights(std::span<const double> x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double h = 0.5 * (x[k + 1] - x[k]);
    w[k] += h;
    w[k + 1] += h;
  }
  return w;
}

}  // namespace

double asymmetry_metric(const Spectrum& spectrum) {
  const auto w = trapezoid_weights(spectrum.offset_hz);
  double signed_sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < spectrum.psd.size(); ++k) {
    const double excess = (spectrum.psd[k] - spectrum.floor) * w[k];
    const double x = spectrum.offset_hz[k];
    signed_sum += (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0)) * excess;
    abs_sum += std::abs(excess);
  }
  return abs_sum > 0.0 ? signed_sum / abs_sum : 0.0;
}

double integrated_power(const Spectrum& spectrum, double half_band_hz) {
  if (!(half_band_hz > 0.0)) throw DomainError("integration band must be positive");
  double total = 0.0;
  const auto& x = spectrum.offset_hz;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double a = std::max(x[k], -half_band_hz);
    const double b = std::min(x[k + 1], half_band_hz);
    if (!(b > a)) continue;
    // Linear interpolation of the psd restricted to [a, b].
    const double span = x[k + 1] - x[k];
    const double ya = spectrum.psd[k] + (spectrum.psd[k + 1] - spectrum.psd[k]) * (a - x[k]) / span;
    const double yb = spectrum.psd[k] + (spectrum.psd[k + 1] - spectrum.psd[k]) * (b - x[k]) / span;
    total += 0.5 * (ya + yb) * (b - a);
  }
  return total;
}

double phonon_gain(const Spectrum& spectrum, const SystemParams& params) {
  const double c_tilde = weighted_cooperativity(spectrum.cooperativity, params);
  if (spectrum.kind == SpectrumKind::heterodyne_upper) return spectrum.eta_det * c_tilde;
  const double s = std::sin(spectrum.quadrature_angle);
  return 4.0 * spectrum.eta_det * c_tilde * s * s;
}

double occupancy_from_area(double lorentzian_area, const Spectrum& spectrum,
                           const SystemParams& params) {
  const double gain = phonon_gain(spectrum, params);
  if (!(gain > 0.0)) throw DomainError("spectrum carries no mechanical signal (zero gain)");
  const double half_width_hz = 0.5 * params.total_mech_linewidth / kTwoPi;
  return lorentzian_area / (gain * std::numbers::pi * half_width_hz) - 0.5;
}

double floor_in_phonons(double floor, const Spectrum& spectrum, const SystemParams& params) {
  const double gain = phonon_gain(spectrum, params);
  if (!(gain > 0.0)) throw DomainError("spectrum carries no mechanical signal (zero gain)");
  return floor / gain;
}

// ---------------------------------------------------------------------------
// Lineshape fitting

double LineshapeFit::evaluate(double offset_hz) const {
  const double w = 0.5 * linewidth_hz.value;
  const double d = offset_hz - center_hz.value;
  return floor.value + (peak.value * w * w + dispersive.value * w * d) / (d * d + w * w);
}

namespace {

// Parameter block layout: floor, A, B, center, half-width.
struct LineshapeResidual {
  LineshapeResidual(std::span<const double> x, std::span<const double> y, std::span<const double> sigma)
      : x_(x), y_(y), sigma_(sigma) {}

  template <typename T>
  bool operator()(const T* const p, T* residual) const {
    const T& floor = p[0];
    const T& a = p[1];
    const T& b = p[2];
    const T& center = p[3];
    const T& w = p[4];
    for (std::size_t k = 0; k < x_.size(); ++k) {
      const T d = T(x_[k]) - center;
      const T model = floor + (a * w * w + b * w * d) / (d * d + w * w);
      residual[k] = (model - T(y_[k])) / T(sigma_[k]);
    }
    return true;
  }

  std::span<const double> x_, y_, sigma_;
};

struct LinearFit {
  double cost = std::numeric_limits<double>::infinity();
  std::array<double, 5> p{};
};

// For fixed center and half-width the lineshape is linear in (floor, A, B).
LinearFit solve_linear(std::span<const double> x, std::span<const double> y,
                       std::span<const double> sigma, double center, double w) {
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - center;
    const double den = d * d + w * w;
    const Eigen::Vector3d basis(1.0 / sigma[k], w * w / den / sigma[k], w * d / den / sigma[k]);
    normal += basis * basis.transpose();
    rhs += basis * (y[k] / sigma[k]);
  }
  const Eigen::Vector3d coef = normal.ldlt().solve(rhs);
  LinearFit fit;
  fit.p = {coef[0], coef[1], coef[2], center, w};
  double cost = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - center;
    const double den = d * d + w * w;
    const double model = coef[0] + (coef[1] * w * w + coef[2] * w * d) / den;
    const double r = (model - y[k]) / sigma[k];
    cost += r * r;
  }
  fit.cost = std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
  return fit;
}

LinearFit initial_guess(std::span<const double> x, std::span<const double> y,
                        std::span<const double> sigma, std::optional<double> width_hint) {
  std::vector<double> sorted(y.begin(), y.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::size_t peak = 0;
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (std::abs(y[k] - median) > std::abs(y[peak] - median)) peak = k;
  }
  const double span = x.back() - x.front();
  const double spacing = span / static_cast<double>(x.size() - 1);

  std::vector<double> widths;
  const double w_lo = 0.25 * spacing;
  const double w_hi = 0.1 * span;
  for (int k = 0; k <= 48; ++k) widths.push_back(w_lo * std::pow(w_hi / w_lo, k / 48.0));
  if (width_hint) widths.push_back(0.5 * *width_hint);

  LinearFit best;
  for (double w : widths) {
    for (int j = -20; j <= 20; ++j) {
      const double center = x[peak] + 0.25 * w * j;
      LinearFit trial = solve_linear(x, y, sigma, center, w);
      if (trial.cost < best.cost) best = trial;
    }
  }
  return best;
}

}  // namespace

LineshapeFit fit_lineshape(const Spectrum& spectrum, const FitOptions& options) {
  spectrum.validate();
  const auto& x = spectrum.offset_hz;
  const auto& y = spectrum.psd;
  if (x.size() < 8) throw DomainError("lineshape fit needs at least 8 points");
  const double span = x.back() - x.front();
  if (options.linewidth_hint_hz && span < 10.0 * *options.linewidth_hint_hz) {
    throw DomainError("grid must span at least 10 linewidths for a lineshape fit");
  }

  const bool have_errors = !spectrum.psd_error.empty();
  std::vector<double> sigma(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    sigma[k] = have_errors ? spectrum.psd_error[k] : y[k];
    if (!(sigma[k] > 0.0)) throw DomainError("fit weights must be positive");
  }

  LinearFit start = initial_guess(x, y, sigma, options.linewidth_hint_hz);
  std::array<double, 5> p = start.p;

  ceres::Problem problem;
  auto* cost = new ceres::AutoDiffCostFunction<LineshapeResidual, ceres::DYNAMIC, 5>(
      new LineshapeResidual(x, y, sigma), static_cast<int>(x.size()));
  problem.AddResidualBlock(cost, nullptr, p.data());
  const double spacing = span / static_cast<double>(x.size() - 1);
  problem.SetParameterLowerBound(p.data(), 4, 1e-6 * spacing);
  problem.SetParameterUpperBound(p.data(), 4, span);
  problem.SetParameterLowerBound(p.data(), 3, x.front());
  problem.SetParameterUpperBound(p.data(), 3, x.back());

  ceres::Solver::Options solver_options;
  solver_options.linear_solver_type = ceres::DENSE_QR;
  solver_options.max_num_iterations = options.max_iterations;
  solver_options.function_tolerance = 1e-15;
  solver_options.gradient_tolerance = 1e-15;
  solver_options.parameter_tolerance = 1e-13;
  solver_options.num_threads = 1;
  solver_options.logging_type = ceres::SILENT;
  ceres::Solver::Summary summary;
  ceres::Solve(solver_options, &problem, &summary);

  if (summary.termination_type == ceres::FAILURE ||
      (summary.termination_type == ceres::NO_CONVERGENCE && summary.final_cost > start.cost * 0.5)) {
    std::ostringstream msg;
    msg << "lineshape fit did not converge after " << summary.iterations.size()
        << " iterations (initial cost " << summary.initial_cost << ", final cost "
        << summary.final_cost << "): " << summary.message;
    throw FitError(msg.str());
  }

  const std::size_t dof = x.size() > 5 ? x.size() - 5 : 1;
  const double chi2 = 2.0 * summary.final_cost;
  // Relative weights carry no absolute scale: rescale by the reduced chi².
  const double scale = have_errors ? 1.0 : chi2 / static_cast<double>(dof);

  std::array<double, 25> cov{};
  bool have_cov = false;
  {
    ceres::Covariance::Options cov_options;
    cov_options.algorithm_type = ceres::DENSE_SVD;
    cov_options.null_space_rank = -1;
    cov_options.num_threads = 1;
    ceres::Covariance covariance(cov_options);
    std::vector<std::pair<const double*, const double*>> blocks{{p.data(), p.data()}};
    if (covariance.Compute(blocks, &problem)) {
      have_cov = covariance.GetCovarianceBlock(p.data(), p.data(), cov.data());
    }
  }

  auto ci = [&](int idx) {
    if (!have_cov) return std::numeric_limits<double>::infinity();
    return std::sqrt(std::max(0.0, cov[idx * 5 + idx] * scale));
  };

  LineshapeFit fit;
  fit.floor = {p[0], ci(0)};
  fit.peak = {p[1], ci(1)};
  fit.dispersive = {p[2], ci(2)};
  fit.center_hz = {p[3], ci(3)};
  fit.linewidth_hz = {2.0 * p[4], 2.0 * ci(4)};
  fit.lorentzian_area = p[1] * std::numbers::pi * p[4];
  if (have_cov) {
    // Gradient of A·π·w with respect to (A, w).
    const double ga = std::numbers::pi * p[4];
    const double gw = std::numbers::pi * p[1];
    const double var = ga * ga * cov[1 * 5 + 1] + gw * gw * cov[4 * 5 + 4] + 2.0 * ga * gw * cov[1 * 5 + 4];
    fit.lorentzian_area_ci68 = std::sqrt(std::max(0.0, var * scale));
  } else {
    fit.lorentzian_area_ci68 = std::numeric_limits<double>::infinity();
  }
  fit.fano_coefficient = p[1] != 0.0 ? p[2] / p[1] : 0.0;
  fit.fit_residual = std::sqrt(chi2 / static_cast<double>(x.size()));
  fit.iterations = static_cast<int>(summary.iterations.size());
  return fit;
}

}  // namespace sqzom
