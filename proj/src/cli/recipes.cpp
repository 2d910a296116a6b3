#include "recipes.hpp"

#include <cmath>
#include <numbers>

#include "sqzom/noise_budget.hpp"
#include "sqzom/spectra.hpp"
#include "sqzom/tomography.hpp"

namespace sqzom::cli {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFig2SqueezeR = 0.9;

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

// Homodyne phase-quadrature spectra of the three drive families.
Table family_spectra(const std::string& name, const SystemParams& params, double cooperativity,
                     const std::vector<double>& grid) {
  const Spectrum coh = output_psd(DriveState::coherent(cooperativity), params, grid);
  const Spectrum amp = output_psd(DriveState::amplitude_squeezed(kFig2SqueezeR, cooperativity), params, grid);
  const Spectrum ph = output_psd(DriveState::phase_squeezed(kFig2SqueezeR, cooperativity), params, grid);
  Table t{name, {"offset_hz", "unsqueezed", "amplitude_squeezed", "phase_squeezed"}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) t.rows.push_back({grid[k], coh.psd[k], amp.psd[k], ph.psd[k]});
  return t;
}

PlotSpec family_plot(const std::string& title, bool log_y) {
  return {title, "offset_hz", {"unsqueezed", "amplitude_squeezed", "phase_squeezed"}, std::nullopt, false, log_y};
}

RecipeOutput fig2a(const SystemParams& params, std::uint64_t) {
  return {{family_spectra("fig2a", params, 70.0, offset_grid(300e3, 6000))},
          family_plot("Broadband sideband spectra, C = 70, r = 0.9", true)};
}

RecipeOutput fig2b(const SystemParams& params, std::uint64_t) {
  const double gamma_hz = params.total_mech_linewidth / kTwoPi;
  return {{family_spectra("fig2b", params, 70.0, offset_grid(10.0 * gamma_hz, 801))},
          family_plot("Mechanical Lorentzian, C = 70, r = 0.9", false)};
}

RecipeOutput fig2c(const SystemParams& params, std::uint64_t) {
  return {{family_spectra("fig2c", params, 70.0, linear_grid(20e3, 150e3, 521))},
          family_plot("Noise floor away from the mechanical line, C = 70, r = 0.9", false)};
}

RecipeOutput fig2d(const SystemParams& params, std::uint64_t) {
  constexpr double kC = 220.0;
  const double gamma_hz = params.total_mech_linewidth / kTwoPi;
  const auto grid = offset_grid(30.0 * gamma_hz, 1201);
  const double phases[] = {0.5 * kPi, 1.5 * kPi};
  Table spectra{"fig2d", {"offset_hz", "theta_90", "theta_270"}, {}};
  Table fits{"fig2d_fit", {"theta_deg", "fano_coefficient", "asymmetry", "linewidth_hz", "occupancy"}, {}};
  std::vector<Spectrum> sp;
  for (double theta : phases) {
    sp.push_back(output_psd(DriveState(kFig2SqueezeR, theta, kC), params, grid));
    const LineshapeFit fit = fit_lineshape(sp.back(), {.linewidth_hint_hz = gamma_hz});
    fits.rows.push_back({theta * 180.0 / kPi, fit.fano_coefficient, asymmetry_metric(sp.back()),
                         fit.linewidth_hz.value, occupancy_from_area(fit.lorentzian_area, sp.back(), params)});
  }
  for (std::size_t k = 0; k < grid.size(); ++k) spectra.rows.push_back({grid[k], sp[0].psd[k], sp[1].psd[k]});
  return {{spectra, fits},
          {"Fano lineshapes at intermediate squeeze phase, C = 220", "offset_hz", {"theta_90", "theta_270"},
           std::nullopt, false, false}};
}

std::vector<SweepRow> fig3_rows(const SystemParams& params) {
  const auto grid = log_grid(1.0, 1000.0, 61);
  return sweep_cooperativity(1.0, params, grid);
}

RecipeOutput fig3a(const SystemParams& params, std::uint64_t) {
  Table t{"fig3a", {"family", "C", "n_imp", "n_ba", "n_add", "n_total", "heisenberg_product"}, {}};
  for (const auto& row : fig3_rows(params)) {
    const NoiseBudget& b = row.budget;
    t.rows.push_back({std::string(to_string(row.family)), b.cooperativity, b.n_imp, b.n_ba, b.n_add, b.n_total,
                      b.heisenberg_product});
  }
  return {{t}, {"Total detected noise (phonons), r = 1", "C", {"n_total"}, "family", true, true}};
}

RecipeOutput fig3b(const SystemParams& params, std::uint64_t) {
  Table t{"fig3b", {"family", "C", "n_imp_times_c"}, {}};
  for (const auto& row : fig3_rows(params)) {
    t.rows.push_back({std::string(to_string(row.family)), row.budget.cooperativity, row.n_imp_times_c});
  }
  return {{t}, {"Imprecision noise times C, r = 1", "C", {"n_imp_times_c"}, "family", true, false}};
}

RecipeOutput fig3c(const SystemParams& params, std::uint64_t) {
  Table t{"fig3c", {"family", "C", "occupancy"}, {}};
  for (const auto& row : fig3_rows(params)) {
    t.rows.push_back({std::string(to_string(row.family)), row.budget.cooperativity, row.occupancy});
  }
  return {{t}, {"Mechanical occupancy n_th + n_ba, r = 1", "C", {"occupancy"}, "family", true, true}};
}

RecipeOutput fig4a(const SystemParams& params, std::uint64_t seed) {
  constexpr double kC = 250.0;
  const double rs[] = {0.25, 0.5, 0.75, 1.0};
  const auto theta = phase_grid(200);
  SweepOptions opts;
  opts.seed = seed;
  Table sweeps{"fig4a", {"theta_rad", "r_0.25", "r_0.5", "r_0.75", "r_1"}, {}};
  Table fits{"fig4a_fit", {"r", "r_hat", "eta_eff", "eta_det_om", "phase_offset"}, {}};
  std::vector<PhaseSweep> all;
  for (double r : rs) {
    all.push_back(simulate_phase_sweep(r, params, kC, theta, opts));
    const SqueezeEstimate est = fit_squeezing(all.back());
    fits.rows.push_back({r, est.r_hat, est.eta_eff, est.eta_det_om, est.phase_offset});
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    sweeps.rows.push_back({theta[k], all[0].integrated_power[k], all[1].integrated_power[k],
                           all[2].integrated_power[k], all[3].integrated_power[k]});
  }
  return {{sweeps, fits},
          {"Integrated upper-sideband power vs squeeze phase, C = 250", "theta_rad",
           {"r_0.25", "r_0.5", "r_0.75", "r_1"}, std::nullopt, false, false}};
}

RecipeOutput fig4c(const SystemParams& params, std::uint64_t) {
  Table t{"fig4c", {"C", "eta_det_om", "eta_det_om_high_drive", "n_imp", "n_ba_coherent"}, {}};
  for (double c : log_grid(1.0, 250.0, 50)) {
    const OptomechanicalEfficiency e = eta_det_om_predicted(params, c);
    t.rows.push_back({c, e.full, e.high_drive, e.n_imp, e.n_ba_coherent});
  }
  return {{t},
          {"Optomechanical detection efficiency", "C", {"eta_det_om", "eta_det_om_high_drive"}, std::nullopt, true,
           false}};
}

RecipeOutput figS3(const SystemParams& params, std::uint64_t) {
  const double gamma_hz = params.total_mech_linewidth / kTwoPi;
  const auto grid = offset_grid(20.0 * gamma_hz, 401);
  Table t{"figS3", {"C", "amplitude_max_rel_deviation", "phase_peak_over_floor"}, {}};
  for (double c : log_grid(1.0, 200.0, 30)) {
    const DriveState drive = DriveState::coherent(c);
    const Spectrum amp = amplitude_quadrature_qnd_check(drive, params, grid);
    const Spectrum ph = output_psd(drive, params, grid);
    double dev = 0.0;
    for (double v : amp.psd) dev = std::max(dev, std::abs(v / amp.floor - 1.0));
    double peak = 0.0;
    for (double v : ph.psd) peak = std::max(peak, v / ph.floor);
    t.rows.push_back({c, dev, peak});
  }
  return {{t},
          {"QND check: amplitude vs phase quadrature", "C", {"phase_peak_over_floor"}, std::nullopt, true, true}};
}

RecipeOutput figS5(const SystemParams& params, std::uint64_t) {
  Table t{"figS5", {"C_aux", "n_f_ideal", "n_f_model"}, {}};
  const double gamma = params.total_mech_linewidth;
  for (double c : log_grid(0.01, 100.0, 81)) {
    const CoolingDrive cool{0.0, c * gamma};
    t.rows.push_back({c, cooled_occupancy(gamma, params.n_th, 0.0, cool),
                      cooled_occupancy(gamma, params.n_th, params.n_c, cool)});
  }
  return {{t},
          {"Sideband cooling with an auxiliary tone", "C_aux", {"n_f_ideal", "n_f_model"}, std::nullopt, true,
           true}};
}

}  // namespace

const std::vector<Recipe>& recipes() {
  static const std::vector<Recipe> list = {
      {"fig2a", "broadband homodyne spectra, three drive families", fig2a},
      {"fig2b", "close-up of the mechanical Lorentzian", fig2b},
      {"fig2c", "noise floor away from the mechanical line", fig2c},
      {"fig2d", "Fano lineshapes at intermediate squeeze phase (C = 220) with fits", fig2d},
      {"fig3a", "total noise vs cooperativity, three drive families", fig3a},
      {"fig3b", "imprecision noise times C", fig3b},
      {"fig3c", "equilibrium phonon occupancy", fig3c},
      {"fig4a", "phase sweeps of integrated sideband power with fits", fig4a},
      {"fig4c", "optomechanical detection efficiency vs C", fig4c},
      {"figS3", "QND flatness of the amplitude quadrature", figS3},
      {"figS5", "sideband cooling with and without cavity thermal noise", figS5},
  };
  return list;
}

const Recipe* find_recipe(const std::string& name) {
  for (const auto& r : recipes()) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace sqzom::cli
