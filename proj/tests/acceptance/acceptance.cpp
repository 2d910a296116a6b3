// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sqzom/cli.hpp"
#include "sqzom/core_model.hpp"
#include "sqzom/montecarlo.hpp"
#include "sqzom/noise_budget.hpp"
#include "sqzom/optimizer.hpp"
#include "sqzom/spectra.hpp"
#include "sqzom/tomography.hpp"

namespace fs = std::filesystem;
using namespace sqzom;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<DriveState> canonical_states(double c) {
  std::vector<DriveState> states;
  for (double r : {0.0, 1.0}) {
    for (double theta : {0.0, kPi / 2, kPi}) states.emplace_back(r, theta, c);
  }
  return states;
}

Outcome drive_model_anchor() {
  const QuadCovariance cov = drive_covariance(DriveState::coherent(1.0), SystemParams{});
  const double db = variance_to_db(cov.vxx);
  return {std::abs(db - 1.272) <= 0.005, fmt("excess = %.6f dB (target 1.272 +/- 0.005)", db)};
}

Outcome heisenberg_saturation() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams pure;
  pure.eta_in = 1.0;
  pure.n_c = 0.0;
  pure.eta_det = 1.0;
  double worst_pure = 0.0, lowest_impure = 1.0;
  for (int k = 0; k < 1000; ++k) {
    const DriveState d(1.15 * u(rng), (k % 2) ? kPi : 0.0, std::pow(10.0, -2.0 + 5.0 * u(rng)));
    worst_pure = std::max(worst_pure, std::abs(budget(d, pure).heisenberg_product - kHeisenbergBound));
  }
  for (int k = 0; k < 1000; ++k) {
    SystemParams p;
    p.eta_in = u(rng);
    p.n_c = 0.3 * u(rng);
    p.eta_det = 0.01 + 0.99 * u(rng);
    const DriveState d(1.15 * u(rng), kTwoPi * u(rng), std::pow(10.0, -2.0 + 5.0 * u(rng)));
    lowest_impure = std::min(lowest_impure, budget(d, p).heisenberg_product);
  }
  return {worst_pure < 1e-12 && lowest_impure >= kHeisenbergBound,
          fmt("max |pure - 1/16| = %.3g, min impure product = %.9f", worst_pure, lowest_impure)};
}

Outcome ideal_quantum_limit() {
  OptProblem p;
  p.params.eta_det = 1.0;
  p.params.eta_in = 1.0;
  p.params.n_c = 0.0;
  p.r_max = 0.0;
  p.fixed_theta = 0.0;
  const OptResult res = minimize_added_noise(p);
  const double c_tilde = weighted_cooperativity(res.cooperativity, p.params);
  return {std::abs(res.value - 0.5) <= 1e-6 && std::abs(c_tilde - 1.0) <= 1e-3 && res.audit_passed,
          fmt("n_add = %.10f at C~ = %.6f", res.value, c_tilde)};
}

Outcome qnd_efficiency_anchor() {
  const OptomechanicalEfficiency e = eta_det_om_predicted(SystemParams{}, 250.0);
  const double ratio = e.full / 0.03;
  return {std::abs(e.full - 0.939) <= 0.005 && ratio > 30.0, fmt("eta_OM = %.6f, ratio = %.3f", e.full, ratio)};
}

Outcome cooling_anchor() {
  const SystemParams p;
  const double net = p.total_mech_linewidth - p.intrinsic_mech_linewidth;
  const double n_f = cooled_occupancy(p.intrinsic_mech_linewidth, p.n_bath, 0.0, CoolingDrive{0.0, net});
  return {std::abs(n_f - 10.45) <= 0.1, fmt("n_f = %.6f phonons", n_f)};
}

Outcome budget_spectrum_consistency() {
  const SystemParams p;
  const double gamma_hz = p.total_mech_linewidth / kTwoPi;
  const auto grid = offset_grid(40.0 * gamma_hz, 4001);
  double worst_occ = 0.0, worst_floor = 0.0;
  for (double c : {10.0, 70.0, 220.0}) {
    for (const DriveState& d : canonical_states(c)) {
      const Spectrum s = output_psd(d, p, grid);
      const LineshapeFit fit = fit_lineshape(s, {.linewidth_hint_hz = gamma_hz});
      const NoiseBudget b = budget(d, p);
      const double occ = occupancy_from_area(fit.lorentzian_area, s, p);
      worst_occ = std::max(worst_occ, std::abs(occ / (p.n_th + b.n_ba) - 1.0));
      worst_floor = std::max(worst_floor, std::abs(fit.floor.value / analytic_floor(d, p, kPi / 2) - 1.0));
      worst_floor = std::max(worst_floor, std::abs(floor_in_phonons(fit.floor.value, s, p) / b.n_imp - 1.0));
    }
  }
  return {worst_occ < 0.01 && worst_floor < 0.01,
          fmt("max occupancy deviation %.3g, max floor deviation %.3g", worst_occ, worst_floor)};
}

Outcome fano_symmetry() {
  const SystemParams p;
  const auto grid = offset_grid(6000.0, 1201);
  double worst_axis = 0.0;
  for (double c : {10.0, 70.0, 220.0}) {
    for (double theta : {0.0, kPi}) {
      worst_axis = std::max(worst_axis, std::abs(asymmetry_metric(output_psd(DriveState(1.0, theta, c), p, grid))));
    }
  }
  const double fano = asymmetry_metric(output_psd(DriveState(1.0, kPi / 2, 220.0), p, grid));
  return {worst_axis < 1e-9 && std::abs(fano) > 1e-6,
          fmt("max |asym| on axis = %.3g, asym(theta=pi/2, C=220) = %.6g", worst_axis, fano)};
}

Outcome qnd_flatness() {
  const SystemParams p;
  const auto grid = offset_grid(6000.0, 1201);
  double worst = 0.0;
  for (double c : {10.0, 50.0, 220.0}) {
    for (const DriveState& d : canonical_states(c)) {
      const Spectrum s = amplitude_quadrature_qnd_check(d, p, grid);
      for (double v : s.psd) worst = std::max(worst, std::abs(v - s.floor) / s.floor);
    }
  }
  return {worst < 1e-8, fmt("max relative deviation %.3g", worst)};
}

Outcome monte_carlo_oracle() {
  const McVerifyReport rep = mc_verify(SystemParams{});
  double worst_rms = 0.0, worst_occ = 0.0;
  bool canonical_ok = true;
  int canonical = 0;
  for (const auto& c : rep.cases) {
    worst_rms = std::max(worst_rms, c.rms_deviation);
    worst_occ = std::max(worst_occ, c.occupancy_deviation);
    if (c.name.rfind("occupancy", 0) != 0) {
      ++canonical;
      canonical_ok = canonical_ok && c.passed && c.rms_deviation < 0.03 && c.occupancy_deviation < 0.05;
    }
  }
  return {rep.passed && canonical_ok && canonical == 6 && rep.deterministic,
          fmt("%zu cases, max RMS %.4f, max occupancy deviation %.4f, deterministic=%d, validity=%d",
              rep.cases.size(), worst_rms, worst_occ, rep.deterministic ? 1 : 0, rep.validity.valid ? 1 : 0)};
}

Outcome tomography_round_trip() {
  const SystemParams p;
  double worst = 0.0;
  for (double c : {10.0, 30.0, 100.0, 250.0, 500.0}) {
    for (int k = 0; k <= 23; ++k) {
      const double r = 0.05 * k;
      const SqueezeEstimate e = fit_squeezing(simulate_phase_sweep(std::min(r, 1.15), p, c, phase_grid()));
      worst = std::max(worst, std::abs(e.r_hat - std::min(r, 1.15)));
    }
  }
  const int seeds = 200;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) {
    SweepOptions o;
    o.averages = 20;
    o.seed = 1000 + static_cast<std::uint64_t>(s);
    sum += fit_squeezing(simulate_phase_sweep(1.0, p, 250.0, phase_grid(), o)).r_hat;
  }
  const double bias = sum / seeds - 1.0;
  return {worst < 1e-3 && std::abs(bias) < 0.02,
          fmt("noiseless max |r_hat - r| = %.3g, noisy bias at r=1 = %.4f (%d seeds)", worst, bias, seeds)};
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "sqzom_acceptance_determinism";
  fs::remove_all(root);
  std::size_t compared = 0;
  std::string mismatch;
  for (const std::string& recipe : cli::recipe_names()) {
    std::string stdout_text[2];
    for (int pass = 0; pass < 2; ++pass) {
      std::ostringstream out, err;
      const fs::path dir = root / std::to_string(pass);
      const int code = cli::run({"reproduce", recipe, "--seed", "7", "--svg", "--out-dir", dir.string()}, out, err);
      if (code != 0) return {false, recipe + " failed: " + err.str()};
      stdout_text[pass] = out.str();
    }
    ++compared;
    if (stdout_text[0] != stdout_text[1]) mismatch += " " + recipe + "(stdout)";
  }
  for (const auto& entry : fs::directory_iterator(root / "0")) {
    const fs::path other = root / "1" / entry.path().filename();
    ++compared;
    if (!fs::exists(other) || read_all(entry.path()) != read_all(other)) {
      mismatch += " " + entry.path().filename().string();
    }
  }
  fs::remove_all(root);
  return {mismatch.empty(), mismatch.empty() ? fmt("%zu outputs byte-identical", compared) : "differs:" + mismatch};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "drive model anchor", 1.0, drive_model_anchor},
      {2, "Heisenberg saturation", 5.0, heisenberg_saturation},
      {3, "ideal quantum limit", 5.0, ideal_quantum_limit},
      {4, "QND efficiency anchor", 1.0, qnd_efficiency_anchor},
      {5, "cooling anchor", 1.0, cooling_anchor},
      {6, "budget/spectrum consistency", 30.0, budget_spectrum_consistency},
      {7, "Fano symmetry", 10.0, fano_symmetry},
      {8, "QND flatness", 10.0, qnd_flatness},
      {9, "Monte Carlo oracle", 600.0, monte_carlo_oracle},
      {10, "tomography round trip", 60.0, tomography_round_trip},
      {11, "CLI determinism", 120.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.budget_s;
    const bool ok = o.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s %2d %s: %s [%.2f s of %.0f s]%s\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                elapsed, c.budget_s, in_time ? "" : " over time budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
