#include "sqzom/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <future>
#include <sstream>
#include <thread>

#include <fftw3.h>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqzom/error.hpp"
#include "sqzom/noise_budget.hpp"

namespace sqzom {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// SimConfig

SimConfig SimConfig::envelope(std::size_t total_segments, std::uint64_t seed, int n_trajectories) {
  if (total_segments == 0 || n_trajectories <= 0) throw DomainError("need at least one segment and trajectory");
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_trajectories = n_trajectories;
  const std::size_t per_traj =
      (total_segments + static_cast<std::size_t>(n_trajectories) - 1) / static_cast<std::size_t>(n_trajectories);
  const std::size_t samples = (per_traj + 1) * (cfg.segment_length / 2);
  cfg.duration = static_cast<double>(samples) * cfg.dt;
  return cfg;
}

SimConfig SimConfig::full_model(const SystemParams& params, double duration, std::uint64_t seed) {
  SimConfig cfg;
  cfg.mode = IntegrationMode::full;
  cfg.dt = 0.99 * std::min(0.1 / (0.5 * params.cavity_linewidth), 0.3 / params.mech_freq);
  cfg.duration = duration;
  cfg.n_trajectories = 1;
  cfg.seed = seed;
  cfg.decimation = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1e-6 / cfg.dt)));
  return cfg;
}

std::size_t SimConfig::samples_per_trajectory() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

void SimConfig::validate(const SystemParams& params) const {
  params.validate();
  std::ostringstream msg;
  if (!(dt > 0.0) || n_trajectories <= 0) {
    msg << "invalid simulation config: dt=" << dt << " trajectories=" << n_trajectories;
    throw DomainError(msg.str());
  }
  if (mode == IntegrationMode::full) {
    if (!(dt * 0.5 * params.cavity_linewidth < 0.1) || !(dt * params.mech_freq < 0.3)) {
      msg << "full-model step dt=" << dt << " s violates dt*kappa/2 < 0.1 or dt*Omega_m < 0.3";
      throw DomainError(msg.str());
    }
  } else {
    if (!(dt * 0.5 * params.total_mech_linewidth < 0.1)) {
      msg << "envelope step dt=" << dt << " s violates dt*Gamma/2 < 0.1";
      throw DomainError(msg.str());
    }
    if (!(1.0 / dt < 0.01 * params.cavity_linewidth)) {
      msg << "envelope sampling rate " << 1.0 / dt << " /s is not narrowband against kappa";
      throw DomainError(msg.str());
    }
    if (segment_length < 16 || segment_length % 2 != 0) {
      throw DomainError("segment length must be even and >= 16");
    }
  }
  if (duration * params.total_mech_linewidth < 100.0 * (1.0 - 1e-12)) {
    msg << "duration " << duration << " s is shorter than 100/Gamma";
    throw DomainError(msg.str());
  }
}

std::uint64_t SimConfig::hash() const {
  // FNV-1a over the field bytes.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
      h ^= (v >> (8 * k)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(mode));
  mix(std::bit_cast<std::uint64_t>(dt));
  mix(std::bit_cast<std::uint64_t>(duration));
  mix(static_cast<std::uint64_t>(n_trajectories));
  mix(seed);
  mix(segment_length);
  mix(decimation);
  return h;
}

// ---------------------------------------------------------------------------
// Noise

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

NoiseSynthesizer::NoiseSynthesizer(const DriveState& drive, const SystemParams& params, std::uint64_t seed,
                                   std::uint64_t stream)
    : cov_(drive_covariance(drive, params)), rng_(make_engine(seed, stream)) {
  cov_.validate();
  chol_[0] = std::sqrt(cov_.vxx);
  chol_[1] = cov_.vxy / chol_[0];
  const double rest = cov_.vyy - chol_[1] * chol_[1];
  if (!(rest > 0.0)) throw InvariantViolation("drive covariance is not positive-definite");
  chol_[2] = std::sqrt(rest);
  bath_std_ = std::sqrt(params.n_th + 0.5);
}

std::array<double, 2> NoiseSynthesizer::drive_sample() {
  const double a = normal_(rng_);
  const double b = normal_(rng_);
  return {chol_[0] * a, chol_[1] * a + chol_[2] * b};
}

std::array<double, 2> NoiseSynthesizer::bath_sample() {
  const double a = normal_(rng_);
  const double b = normal_(rng_);
  return {bath_std_ * a, bath_std_ * b};
}

double NoiseSynthesizer::vacuum_sample() { return 0.5 * normal_(rng_); }

cplx NoiseSynthesizer::vacuum_envelope() { return 0.5 * complex_normal(); }

cplx NoiseSynthesizer::complex_normal() {
  const double re = normal_(rng_);
  const double im = normal_(rng_);
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

// ---------------------------------------------------------------------------
// Envelope model

namespace {

struct EnvelopeSample {
  cplx out_x;
  cplx out_y;
  cplx vacuum;
  cplx mechanical;
};

class EnvelopeStepper {
 public:
  EnvelopeStepper(const DriveState& drive, const SystemParams& params, const SimConfig& cfg,
                  std::uint64_t stream)
      : noise_(drive, params, cfg.seed, stream), dt_(cfg.dt) {
    const double kappa = params.cavity_linewidth;
    const double gamma = params.total_mech_linewidth;
    const double g = coupling_rate(params, drive.cooperativity());
    const cplx i{0.0, 1.0};
    const cplx chi_c = 1.0 / (0.5 * kappa - i * params.mech_freq);
    reflection_ = 1.0 - kappa * chi_c;
    readout_ = std::sqrt(kappa) * g * chi_c;
    force_ = -2.0 * i * g * std::sqrt(kappa) * chi_c;
    sqrt_gamma_ = std::sqrt(gamma);

    const double h = 0.5 * dt_;
    decay_ = std::exp(-0.5 * gamma * h);
    // Gram matrix of the kernels {1, e^{−Γ(h−s)/2}} on [0, h].
    const double k11 = h;
    const double k12 = (1.0 - decay_) / (0.5 * gamma);
    const double k22 = (1.0 - decay_ * decay_) / gamma;
    gram_l11_ = std::sqrt(k11);
    gram_l21_ = k12 / gram_l11_;
    gram_l22_ = std::sqrt(std::max(0.0, k22 - gram_l21_ * gram_l21_));
    bath_kernel_ = std::sqrt((params.n_th + 0.5) * k22);
    const auto& cov = noise_.covariance();
    drive_l11_ = std::sqrt(cov.vxx);
    drive_l21_ = cov.vxy / drive_l11_;
    drive_l22_ = std::sqrt(cov.vyy - drive_l21_ * drive_l21_);
    vacuum_scale_ = 1.0 / std::sqrt(dt_);
  }

  EnvelopeSample step() {
    cplx w_x_total{0.0, 0.0};
    cplx w_y_total{0.0, 0.0};
    cplx mid{0.0, 0.0};
    for (int half = 0; half < 2; ++half) {
      const cplx n1 = noise_.complex_normal();
      const cplx n2 = noise_.complex_normal();
      const cplx n3 = noise_.complex_normal();
      const cplx mx_w = gram_l11_ * n1;
      const cplx mx_e = gram_l21_ * n1 + gram_l22_ * n2;
      // The Y input only reaches the output, so its kernel integral is not needed.
      const cplx my_w = gram_l11_ * n3;
      const cplx w_x = drive_l11_ * mx_w;
      const cplx e_x = drive_l11_ * mx_e;
      const cplx w_y = drive_l21_ * mx_w + drive_l22_ * my_w;
      const cplx e_b = bath_kernel_ * noise_.complex_normal();
      beta_ = decay_ * beta_ + sqrt_gamma_ * e_b + force_ * e_x;
      w_x_total += w_x;
      w_y_total += w_y;
      if (half == 0) mid = beta_;
    }
    if (!std::isfinite(beta_.real()) || !std::isfinite(beta_.imag())) {
      std::ostringstream msg;
      msg << "envelope integration diverged (dt=" << dt_ << " s)";
      throw InstabilityError(msg.str());
    }
    EnvelopeSample s;
    s.out_x = reflection_ * w_x_total / dt_;
    s.out_y = reflection_ * w_y_total / dt_ + readout_ * mid;
    s.vacuum = vacuum_scale_ * noise_.vacuum_envelope();
    s.mechanical = mid;
    return s;
  }

 private:
  NoiseSynthesizer noise_;
  double dt_;
  cplx reflection_, readout_, force_;
  double sqrt_gamma_;
  double decay_;
  double gram_l11_, gram_l21_, gram_l22_;
  double bath_kernel_;
  double drive_l11_, drive_l21_, drive_l22_;
  double vacuum_scale_;
  cplx beta_{0.0, 0.0};
};

// ---------------------------------------------------------------------------
// Full model

struct FullModel {
  Eigen::Matrix4d drift;
  Eigen::Matrix4d diffusion;
};

FullModel full_model(const DriveState& drive, const SystemParams& params) {
  const double kappa = params.cavity_linewidth;
  const double gamma = params.total_mech_linewidth;
  const double omega = params.mech_freq;
  const double g = coupling_rate(params, drive.cooperativity());
  const QuadCovariance cov = drive_covariance(drive, params);
  const double bath = params.n_th + 0.5;
  FullModel m;
  m.drift << -0.5 * kappa, 0.0, 0.0, 0.0,
             0.0, -0.5 * kappa, -std::numbers::sqrt2 * g, 0.0,
             0.0, 0.0, -0.5 * gamma, omega,
             -2.0 * std::numbers::sqrt2 * g, 0.0, -omega, -0.5 * gamma;
  m.diffusion.setZero();
  m.diffusion(0, 0) = kappa * cov.vxx;
  m.diffusion(0, 1) = m.diffusion(1, 0) = kappa * cov.vxy;
  m.diffusion(1, 1) = kappa * cov.vyy;
  m.diffusion(2, 2) = gamma * bath;
  m.diffusion(3, 3) = gamma * bath;
  return m;
}

class FullStepper {
 public:
  FullStepper(const DriveState& drive, const SystemParams& params, const SimConfig& cfg, std::uint64_t stream)
      : noise_(drive, params, cfg.seed, stream), dt_(cfg.dt) {
    const FullModel m = full_model(drive, params);
    // Van Loan: exp([[−A, D], [0, Aᵀ]]·dt) gives Φ and the noise covariance.
    Eigen::Matrix<double, 8, 8> block = Eigen::Matrix<double, 8, 8>::Zero();
    block.topLeftCorner<4, 4>() = -m.drift * dt_;
    block.topRightCorner<4, 4>() = m.diffusion * dt_;
    block.bottomRightCorner<4, 4>() = m.drift.transpose() * dt_;
    const Eigen::Matrix<double, 8, 8> e = block.exp();
    propagator_ = e.bottomRightCorner<4, 4>().transpose();
    Eigen::Matrix4d q = propagator_ * e.topRightCorner<4, 4>();
    q = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(q);
    const Eigen::Vector4d vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    noise_factor_ = eig.eigenvectors() * vals.asDiagonal();
    kappa_sqrt_ = std::sqrt(params.cavity_linewidth);
  }

  const Eigen::Vector4d& step() {
    Eigen::Vector4d n;
    for (int k = 0; k < 4; ++k) n(k) = noise_.normal();
    state_ = propagator_ * state_ + noise_factor_ * n;
    if (!state_.allFinite()) {
      std::ostringstream msg;
      msg << "full-model integration diverged (dt=" << dt_ << " s)";
      throw InstabilityError(msg.str());
    }
    return state_;
  }

  double kappa_sqrt() const { return kappa_sqrt_; }

 private:
  NoiseSynthesizer noise_;
  double dt_;
  Eigen::Matrix4d propagator_;
  Eigen::Matrix4d noise_factor_;
  Eigen::Vector4d state_ = Eigen::Vector4d::Zero();
  double kappa_sqrt_;
};

std::size_t burn_in_steps(const SimConfig& cfg, const SystemParams& params) {
  return static_cast<std::size_t>(std::ceil(cfg.burn_in(params) / cfg.dt));
}

// ---------------------------------------------------------------------------
// Welch accumulator

class Welch {
 public:
  Welch(std::size_t length, double dt, fftw_plan plan)
      : length_(length), dt_(dt), plan_(plan), window_(length), sum_(length, 0.0), sum_sq_(length, 0.0) {
    buffer_ = fftw_alloc_complex(length);
    work_ = fftw_alloc_complex(length);
    spectrum_ = fftw_alloc_complex(length);
    double w2 = 0.0;
    for (std::size_t n = 0; n < length; ++n) {
      window_[n] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(length)));
      w2 += window_[n] * window_[n];
    }
    scale_ = dt_ / w2;
  }
  ~Welch() {
    fftw_free(buffer_);
    fftw_free(work_);
    fftw_free(spectrum_);
  }
  Welch(const Welch&) = delete;
  Welch& operator=(const Welch&) = delete;

  void push(cplx value) {
    buffer_[fill_][0] = value.real();
    buffer_[fill_][1] = value.imag();
    if (++fill_ == length_) {
      process();
      const std::size_t half = length_ / 2;
      std::memmove(buffer_, buffer_ + half, half * sizeof(fftw_complex));
      fill_ = half;
    }
  }

  std::size_t segments() const { return segments_; }
  const std::vector<double>& sum() const { return sum_; }
  const std::vector<double>& sum_sq() const { return sum_sq_; }

 private:
  void process() {
    for (std::size_t n = 0; n < length_; ++n) {
      work_[n][0] = window_[n] * buffer_[n][0];
      work_[n][1] = window_[n] * buffer_[n][1];
    }
    fftw_execute_dft(plan_, work_, spectrum_);
    for (std::size_t k = 0; k < length_; ++k) {
      const double p = scale_ * (spectrum_[k][0] * spectrum_[k][0] + spectrum_[k][1] * spectrum_[k][1]);
      sum_[k] += p;
      sum_sq_[k] += p * p;
    }
    ++segments_;
  }

  std::size_t length_;
  double dt_;
  fftw_plan plan_;
  std::vector<double> window_;
  std::vector<double> sum_, sum_sq_;
  fftw_complex* buffer_;
  fftw_complex* work_;
  fftw_complex* spectrum_;
  std::size_t fill_ = 0;
  std::size_t segments_ = 0;
  double scale_ = 1.0;
};

// e^{+iδt} transform, matching the susceptibility convention of the spectra
// module (offsets above Ω_m appear at positive δ).
class Plan {
 public:
  explicit Plan(std::size_t length) {
    fftw_complex* in = fftw_alloc_complex(length);
    fftw_complex* out = fftw_alloc_complex(length);
    plan_ = fftw_plan_dft_1d(static_cast<int>(length), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  ~Plan() { fftw_destroy_plan(plan_); }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  fftw_plan get() const { return plan_; }

 private:
  fftw_plan plan_;
};

struct Detector {
  double gain_x, gain_y, vacuum;
  cplx operator()(const EnvelopeSample& s) const {
    return gain_x * s.out_x + gain_y * s.out_y + vacuum * s.vacuum;
  }
  cplx operator()(cplx x, cplx y, cplx v) const { return gain_x * x + gain_y * y + vacuum * v; }
};

Detector make_detector(double eta, double angle) {
  const double root = std::sqrt(eta);
  return {root * std::cos(angle), root * std::sin(angle), std::sqrt(1.0 - eta)};
}

McSpectrum assemble(const std::vector<double>& sum, const std::vector<double>& sum_sq, std::size_t segments,
                    double dt, const DriveState& drive, const SystemParams& params, double angle) {
  if (segments == 0) throw DomainError("run too short for a single Welch segment");
  const std::size_t length = sum.size();
  const double n = static_cast<double>(segments);
  McSpectrum out;
  out.segments = segments;
  out.few_segments = segments < 8;
  Spectrum& sp = out.spectrum;
  sp.offset_hz.resize(length);
  sp.psd.resize(length);
  sp.psd_error.resize(length);
  const double df = 1.0 / (static_cast<double>(length) * dt);
  for (std::size_t j = 0; j < length; ++j) {
    // Output index j runs over frequencies −L/2 .. L/2−1.
    const std::size_t k = (j + length / 2) % length;
    const double mean = sum[k] / n;
    const double var = std::max(0.0, sum_sq[k] / n - mean * mean);
    sp.offset_hz[j] = (static_cast<double>(j) - static_cast<double>(length / 2)) * df;
    sp.psd[j] = 4.0 * mean;
    sp.psd_error[j] = 4.0 * std::sqrt(var / n);
  }
  sp.quadrature_angle = angle;
  sp.kind = SpectrumKind::homodyne;
  sp.floor = analytic_floor(drive, params, angle);
  sp.cooperativity = drive.cooperativity();
  sp.eta_det = params.eta_det;
  return out;
}

void require_envelope(const SimConfig& cfg) {
  if (cfg.mode != IntegrationMode::sideband_envelope) {
    throw UnsupportedConfiguration("spectral estimates need the sideband-envelope model");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

TrajectoryBatch integrate(const DriveState& drive, const SystemParams& params, const SimConfig& config) {
  config.validate(params);
  const std::size_t steps = config.samples_per_trajectory();
  const std::size_t stride = config.mode == IntegrationMode::full ? std::max<std::size_t>(1, config.decimation) : 1;
  const std::size_t stored = steps / stride * static_cast<std::size_t>(config.n_trajectories);
  if (stored > 200'000'000) throw DomainError("run too long to store; use simulate_psd");

  TrajectoryBatch batch;
  batch.config = config;
  batch.drive = drive;
  batch.params = params;
  batch.config_hash = config.hash();
  batch.trajectories.resize(static_cast<std::size_t>(config.n_trajectories));
  const std::size_t burn = burn_in_steps(config, params);

  for (std::size_t t = 0; t < batch.trajectories.size(); ++t) {
    Trajectory& tr = batch.trajectories[t];
    if (config.mode == IntegrationMode::sideband_envelope) {
      EnvelopeStepper stepper(drive, params, config, t);
      for (std::size_t k = 0; k < burn; ++k) stepper.step();
      tr.mechanical.reserve(steps);
      tr.output_x.reserve(steps);
      tr.output_y.reserve(steps);
      tr.vacuum.reserve(steps);
      for (std::size_t k = 0; k < steps; ++k) {
        const EnvelopeSample s = stepper.step();
        tr.mechanical.push_back(s.mechanical);
        tr.output_x.push_back(s.out_x);
        tr.output_y.push_back(s.out_y);
        tr.vacuum.push_back(s.vacuum);
      }
    } else {
      FullStepper stepper(drive, params, config, t);
      for (std::size_t k = 0; k < burn; ++k) stepper.step();
      for (std::size_t k = 0; k < steps; ++k) {
        const Eigen::Vector4d& s = stepper.step();
        if (k % stride != 0) continue;
        tr.mechanical.emplace_back(s(2) / std::numbers::sqrt2, s(3) / std::numbers::sqrt2);
        // Cavity quadratures scaled to output units (input noise omitted).
        tr.output_x.emplace_back(-stepper.kappa_sqrt() * s(0), 0.0);
        tr.output_y.emplace_back(-stepper.kappa_sqrt() * s(1), 0.0);
      }
    }
  }
  return batch;
}

double mechanical_occupancy(const TrajectoryBatch& batch) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& tr : batch.trajectories) {
    for (const cplx& b : tr.mechanical) sum += std::norm(b);
    count += tr.mechanical.size();
  }
  if (count == 0) throw DomainError("empty trajectory batch");
  return sum / static_cast<double>(count) - 0.5;
}

McSpectrum estimate_psd(const TrajectoryBatch& batch, double detect_angle) {
  require_envelope(batch.config);
  const std::size_t length = batch.config.segment_length;
  const Plan plan(length);
  const Detector detect = make_detector(batch.params.eta_det, detect_angle);
  std::vector<double> sum(length, 0.0), sum_sq(length, 0.0);
  std::size_t segments = 0;
  for (const auto& tr : batch.trajectories) {
    Welch welch(length, batch.config.dt, plan.get());
    for (std::size_t k = 0; k < tr.output_x.size(); ++k) {
      welch.push(detect(tr.output_x[k], tr.output_y[k], tr.vacuum[k]));
    }
    for (std::size_t k = 0; k < length; ++k) {
      sum[k] += welch.sum()[k];
      sum_sq[k] += welch.sum_sq()[k];
    }
    segments += welch.segments();
  }
  return assemble(sum, sum_sq, segments, batch.config.dt, batch.drive, batch.params, detect_angle);
}

StreamResult simulate_psd(const DriveState& drive, const SystemParams& params, const SimConfig& config,
                          double detect_angle) {
  config.validate(params);
  require_envelope(config);
  const std::size_t length = config.segment_length;
  const std::size_t steps = config.samples_per_trajectory();
  const std::size_t burn = burn_in_steps(config, params);
  const Plan plan(length);
  const Detector detect = make_detector(params.eta_det, detect_angle);

  struct Partial {
    std::vector<double> sum, sum_sq;
    std::size_t segments = 0;
    double occupancy_sum = 0.0;
  };
  auto run = [&](std::size_t traj) {
    EnvelopeStepper stepper(drive, params, config, traj);
    for (std::size_t k = 0; k < burn; ++k) stepper.step();
    Welch welch(length, config.dt, plan.get());
    Partial p;
    for (std::size_t k = 0; k < steps; ++k) {
      const EnvelopeSample s = stepper.step();
      p.occupancy_sum += std::norm(s.mechanical);
      welch.push(detect(s));
    }
    p.sum = welch.sum();
    p.sum_sq = welch.sum_sq();
    p.segments = welch.segments();
    return p;
  };

  const std::size_t n_traj = static_cast<std::size_t>(config.n_trajectories);
  std::vector<Partial> partials(n_traj);
  const std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n_traj; start += workers) {
    const std::size_t stop = std::min(n_traj, start + workers);
    if (workers == 1) {
      partials[start] = run(start);
      continue;
    }
    std::vector<std::future<Partial>> futures;
    for (std::size_t t = start; t < stop; ++t) futures.push_back(std::async(std::launch::async, run, t));
    for (std::size_t t = start; t < stop; ++t) partials[t] = futures[t - start].get();
  }

  std::vector<double> sum(length, 0.0), sum_sq(length, 0.0);
  std::size_t segments = 0;
  double occupancy = 0.0;
  for (const Partial& p : partials) {
    for (std::size_t k = 0; k < length; ++k) {
      sum[k] += p.sum[k];
      sum_sq[k] += p.sum_sq[k];
    }
    segments += p.segments;
    occupancy += p.occupancy_sum;
  }
  StreamResult result;
  result.psd = assemble(sum, sum_sq, segments, config.dt, drive, params, detect_angle);
  result.mechanical_occupancy = occupancy / static_cast<double>(steps * n_traj) - 0.5;
  return result;
}

double full_model_occupancy(const DriveState& drive, const SystemParams& params) {
  params.validate();
  const FullModel m = full_model(drive, params);
  // A P + P Aᵀ + D = 0 in column-major vectorized form:
  // vec(A P) = (I ⊗ A) vec(P), vec(P Aᵀ) = (A ⊗ I) vec(P).
  Eigen::Matrix<double, 16, 16> lhs = Eigen::Matrix<double, 16, 16>::Zero();
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 4; ++i) {
    lhs.block<4, 4>(4 * i, 4 * i) += m.drift;
    for (int j = 0; j < 4; ++j) lhs.block<4, 4>(4 * i, 4 * j) += m.drift(i, j) * id;
  }
  Eigen::Matrix<double, 16, 1> rhs;
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 4; ++r) rhs(4 * c + r) = -m.diffusion(r, c);
  }
  const Eigen::Matrix<double, 16, 1> p = lhs.fullPivLu().solve(rhs);
  const double pxx = p(4 * 2 + 2);
  const double ppp = p(4 * 3 + 3);
  return 0.5 * (pxx + ppp) - 0.5;
}

ValidityCheck check_envelope_validity(const DriveState& drive, const SystemParams& params, std::uint64_t seed) {
  ValidityCheck check;
  const double c_tilde = weighted_cooperativity(drive.cooperativity(), params);
  check.envelope_occupancy = params.n_th + c_tilde * drive_covariance(drive, params).vxx;
  check.lyapunov_occupancy = full_model_occupancy(drive, params);
  check.lyapunov_deviation = std::abs(check.lyapunov_occupancy / check.envelope_occupancy - 1.0);
  check.kappa_over_gamma = params.cavity_linewidth / params.total_mech_linewidth;

  const SimConfig cfg = SimConfig::full_model(params, 100.0 / params.total_mech_linewidth, seed);
  cfg.validate(params);
  FullStepper stepper(drive, params, cfg, 0);
  const std::size_t burn = burn_in_steps(cfg, params);
  for (std::size_t k = 0; k < burn; ++k) stepper.step();
  const std::size_t steps = cfg.samples_per_trajectory();
  constexpr std::size_t kBatches = 20;
  const std::size_t per_batch = steps / kBatches;
  std::vector<double> batch_means;
  for (std::size_t b = 0; b < kBatches; ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < per_batch; ++k) {
      const Eigen::Vector4d& s = stepper.step();
      sum += 0.5 * (s(2) * s(2) + s(3) * s(3));
    }
    batch_means.push_back(sum / static_cast<double>(per_batch) - 0.5);
  }
  double mean = 0.0;
  for (double m : batch_means) mean += m;
  mean /= kBatches;
  double var = 0.0;
  for (double m : batch_means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(kBatches - 1);
  check.stochastic_occupancy = mean;
  check.stochastic_std_error = std::sqrt(var / kBatches);
  check.valid = check.lyapunov_deviation < 0.01 &&
                std::abs(mean - check.lyapunov_occupancy) < 4.0 * check.stochastic_std_error &&
                check.kappa_over_gamma > 100.0;
  return check;
}

// ---------------------------------------------------------------------------
// Verification harness

namespace {

struct CaseSpec {
  std::string name;
  double r;
  double theta;
  double cooperativity;
};

std::vector<CaseSpec> case_specs() {
  const double pi = std::numbers::pi;
  return {
      {"r0_theta0", 0.0, 0.0, 70.0},       {"r0_theta90", 0.0, 0.5 * pi, 70.0},
      {"r0_theta180", 0.0, pi, 70.0},      {"r1_theta0", 1.0, 0.0, 70.0},
      {"r1_theta90", 1.0, 0.5 * pi, 70.0}, {"r1_theta180", 1.0, pi, 70.0},
      {"occupancy_C10", 0.0, 0.0, 10.0},   {"occupancy_C70", 0.0, 0.0, 70.0},
      {"occupancy_C220", 0.0, 0.0, 220.0},
  };
}

Spectrum restrict(const Spectrum& sp, double half_band_hz) {
  Spectrum out = sp;
  out.offset_hz.clear();
  out.psd.clear();
  out.psd_error.clear();
  for (std::size_t k = 0; k < sp.offset_hz.size(); ++k) {
    if (std::abs(sp.offset_hz[k]) <= half_band_hz) {
      out.offset_hz.push_back(sp.offset_hz[k]);
      out.psd.push_back(sp.psd[k]);
      out.psd_error.push_back(sp.psd_error[k]);
    }
  }
  return out;
}

McCaseResult run_case(const CaseSpec& spec, std::size_t index, const SystemParams& params,
                      const McVerifyOptions& options) {
  const DriveState drive(spec.r, spec.theta, spec.cooperativity);
  const SimConfig cfg = SimConfig::envelope(options.segments, options.seed * 1000003ULL + index);
  const StreamResult sim = simulate_psd(drive, params, cfg);
  const double gamma_hz = params.total_mech_linewidth / kTwoPi;

  McCaseResult res;
  res.name = spec.name;
  res.squeeze_r = spec.r;
  res.squeeze_phase = spec.theta;
  res.cooperativity = spec.cooperativity;

  const Spectrum band = restrict(sim.psd.spectrum, 10.0 * gamma_hz);
  const Spectrum analytic = output_psd(drive, params, band.offset_hz);
  double sq = 0.0;
  for (std::size_t k = 0; k < band.psd.size(); ++k) {
    const double rel = band.psd[k] / analytic.psd[k] - 1.0;
    sq += rel * rel;
  }
  res.rms_deviation = std::sqrt(sq / static_cast<double>(band.psd.size()));
  res.asymmetry_mc = asymmetry_metric(band);
  res.asymmetry_analytic = asymmetry_metric(analytic);

  const Spectrum fit_band = restrict(sim.psd.spectrum, 20.0 * gamma_hz);
  const LineshapeFit fit = fit_lineshape(fit_band, {.linewidth_hint_hz = gamma_hz});
  res.occupancy_fit = occupancy_from_area(fit.lorentzian_area, fit_band, params);
  const NoiseBudget nb = budget(drive, params);
  res.occupancy_expected = params.n_th + nb.n_ba;
  res.occupancy_deviation = std::abs(res.occupancy_fit / res.occupancy_expected - 1.0);

  bool asymmetry_ok = true;
  if (std::abs(res.asymmetry_analytic) > 0.01) {
    asymmetry_ok = std::signbit(res.asymmetry_mc) == std::signbit(res.asymmetry_analytic);
  }
  res.passed = res.rms_deviation < options.rms_tolerance &&
               res.occupancy_deviation < options.occupancy_tolerance && asymmetry_ok;
  return res;
}

}  // namespace

std::vector<std::string> mc_case_names() {
  std::vector<std::string> names;
  for (const auto& c : case_specs()) names.push_back(c.name);
  return names;
}

McVerifyReport mc_verify(const SystemParams& params, const McVerifyOptions& options) {
  const auto specs = case_specs();
  const bool all = options.case_filter == "all";
  if (!all && std::none_of(specs.begin(), specs.end(),
                           [&](const CaseSpec& c) { return c.name == options.case_filter; })) {
    throw DomainError("unknown Monte Carlo case '" + options.case_filter + "'");
  }

  McVerifyReport report;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!all && specs[i].name != options.case_filter) continue;
    report.cases.push_back(run_case(specs[i], i, params, options));
  }

  {
    const DriveState drive(1.0, 0.5 * std::numbers::pi, 70.0);
    const SimConfig cfg = SimConfig::envelope(64, options.seed);
    const StreamResult a = simulate_psd(drive, params, cfg);
    const StreamResult b = simulate_psd(drive, params, cfg);
    report.deterministic = a.psd.spectrum.psd == b.psd.spectrum.psd &&
                           a.psd.spectrum.psd_error == b.psd.spectrum.psd_error &&
                           a.mechanical_occupancy == b.mechanical_occupancy;
  }

  bool valid = true;
  if (options.check_validity) {
    report.validity = check_envelope_validity(DriveState(1.0, 0.5 * std::numbers::pi, 70.0), params,
                                              options.seed);
    valid = report.validity.valid;
  }
  report.passed = report.deterministic && valid &&
                  std::all_of(report.cases.begin(), report.cases.end(),
                              [](const McCaseResult& c) { return c.passed; });
  return report;
}

}  // namespace sqzom
