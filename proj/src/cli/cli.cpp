#include "sqzom/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "output.hpp"
#include "recipes.hpp"
#include "sqzom/config.hpp"
#include "sqzom/error.hpp"
#include "sqzom/montecarlo.hpp"
#include "sqzom/noise_budget.hpp"
#include "sqzom/optimizer.hpp"
#include "sqzom/spectra.hpp"
#include "sqzom/tomography.hpp"

namespace sqzom::cli {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Thrown by commands for failures that are not domain errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string params_path;
  int precision = 17;
  std::string out = "";

  SystemParams params() const {
    if (!params_path.empty()) return load_params(params_path);
    if (const char* env = std::getenv("SQZOM_PARAMS"); env && *env) return load_params(env);
    return bundled_params();
  }
  NumberFormat format() const { return {precision}; }
};

void add_common(CLI::App* sub, Common& c, const std::string& default_out, std::vector<std::string> outs) {
  sub->add_option("--params", c.params_path, "Parameter file (TOML key = value); falls back to $SQZOM_PARAMS");
  sub->add_option("--precision", c.precision, "Significant digits of numeric output")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();
  c.out = default_out;
  sub->add_option("--out", c.out, "Output format")->check(CLI::IsMember(outs))->capture_default_str();
}

void emit_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json budget_json(const NoiseBudget& b, const NumberFormat& f) {
  return {{"C", f.json(b.cooperativity)},
          {"n_imp", f.json(b.n_imp)},
          {"n_ba", f.json(b.n_ba)},
          {"n_add", f.json(b.n_add)},
          {"n_total", f.json(b.n_total)},
          {"heisenberg_product", f.json(b.heisenberg_product)}};
}

Table budget_table(const std::vector<NoiseBudget>& rows) {
  Table t{"budget", {"C", "n_imp", "n_ba", "n_add", "n_total", "heisenberg_product"}, {}};
  for (const auto& b : rows) t.rows.push_back({b.cooperativity, b.n_imp, b.n_ba, b.n_add, b.n_total, b.heisenberg_product});
  return t;
}

json interval_json(const Interval& i, const NumberFormat& f) { return json::array({f.json(i.lo), f.json(i.hi)}); }

json estimate_json(const SqueezeEstimate& e, const NumberFormat& f) {
  return {{"r_hat", f.json(e.r_hat)},
          {"eta_eff", f.json(e.eta_eff)},
          {"eta_det_om", f.json(e.eta_det_om)},
          {"phase_offset", f.json(e.phase_offset)},
          {"degenerate", e.degenerate},
          {"ci",
           {{"r", interval_json(e.r_ci, f)},
            {"eta_eff", interval_json(e.eta_eff_ci, f)},
            {"phase_offset", interval_json(e.phase_ci, f)}}}};
}

PhaseSweep read_sweep_csv(const std::string& path, const SystemParams& params, double cooperativity) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open sweep file '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("theta_rad,integrated_power", 0) != 0) {
    throw DomainError("sweep file '" + path + "' must start with header theta_rad,integrated_power");
  }
  PhaseSweep sweep;
  sweep.cooperativity = cooperativity;
  sweep.eta_in = params.eta_in;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    char* end = nullptr;
    const double theta = std::strtod(line.c_str(), &end);
    if (comma == std::string::npos || end != line.c_str() + comma) {
      throw DomainError("malformed sweep line " + std::to_string(lineno));
    }
    const double power = std::strtod(line.c_str() + comma + 1, &end);
    if (*end != '\0' && *end != '\r') throw DomainError("malformed sweep line " + std::to_string(lineno));
    sweep.theta_grid.push_back(theta);
    sweep.integrated_power.push_back(power);
  }
  return sweep;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--c-range expects lo:hi, got '" + text + "'");
  char* end = nullptr;
  const double lo = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + colon) throw UsageError("--c-range expects lo:hi, got '" + text + "'");
  const double hi = std::strtod(text.c_str() + colon + 1, &end);
  if (*end != '\0') throw UsageError("--c-range expects lo:hi, got '" + text + "'");
  return {lo, hi};
}

json opt_json(const OptResult& r, const OptProblem& p, const NumberFormat& f) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"stage", t.stage},
                     {"r", f.json(t.r)},
                     {"theta", f.json(t.theta)},
                     {"C", f.json(t.cooperativity)},
                     {"value", f.json(t.value)}});
  }
  return {{"objective", std::string(to_string(p.objective))},
          {"r", f.json(r.r)},
          {"theta", f.json(r.theta)},
          {"C", f.json(r.cooperativity)},
          {"value", f.json(r.value)},
          {"bounds_active",
           {{"r_lower", r.r_lower_active},
            {"r_upper", r.r_upper_active},
            {"c_lower", r.c_lower_active},
            {"c_upper", r.c_upper_active}}},
          {"audit", {{"min", f.json(r.audit_min)}, {"evaluations", r.audit_evaluations}, {"passed", r.audit_passed}}},
          {"trace", trace}};
}

json mc_json(const McVerifyReport& rep, const NumberFormat& f) {
  json cases = json::array();
  for (const auto& c : rep.cases) {
    cases.push_back({{"name", c.name},
                     {"r", f.json(c.squeeze_r)},
                     {"theta", f.json(c.squeeze_phase)},
                     {"C", f.json(c.cooperativity)},
                     {"rms_deviation", f.json(c.rms_deviation)},
                     {"occupancy_fit", f.json(c.occupancy_fit)},
                     {"occupancy_expected", f.json(c.occupancy_expected)},
                     {"occupancy_deviation", f.json(c.occupancy_deviation)},
                     {"asymmetry_mc", f.json(c.asymmetry_mc)},
                     {"asymmetry_analytic", f.json(c.asymmetry_analytic)},
                     {"passed", c.passed}});
  }
  const auto& v = rep.validity;
  return {{"passed", rep.passed},
          {"deterministic", rep.deterministic},
          {"validity",
           {{"valid", v.valid},
            {"envelope_occupancy", f.json(v.envelope_occupancy)},
            {"lyapunov_occupancy", f.json(v.lyapunov_occupancy)},
            {"lyapunov_deviation", f.json(v.lyapunov_deviation)},
            {"stochastic_occupancy", f.json(v.stochastic_occupancy)},
            {"stochastic_std_error", f.json(v.stochastic_std_error)},
            {"kappa_over_gamma", f.json(v.kappa_over_gamma)}}},
          {"cases", cases}};
}

}  // namespace

std::vector<std::string> recipe_names() {
  std::vector<std::string> names;
  for (const auto& r : recipes()) names.push_back(r.name);
  return names;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = args_in;
  // "sqzom run <subcommand> ..." is accepted as a synonym.
  if (!args.empty() && args.front() == "run") args.erase(args.begin());

  CLI::App app{"Squeezed-drive cavity optomechanics toolkit", "sqzom"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // budget
  Common budget_c;
  double budget_C = 70.0, budget_r = 0.0, budget_theta = 0.0;
  auto* budget_cmd = app.add_subcommand("budget", "Imprecision/backaction budget at one operating point");
  add_common(budget_cmd, budget_c, "json", {"json", "csv"});
  budget_cmd->add_option("--C", budget_C, "Measurement cooperativity")->capture_default_str();
  budget_cmd->add_option("--r", budget_r, "Squeezing parameter")->capture_default_str();
  budget_cmd->add_option("--theta-deg", budget_theta, "Squeeze phase (0 amplitude, 180 phase)")->capture_default_str();

  // sweep
  Common sweep_c;
  double sweep_r = 0.0, sweep_theta = 0.0, sweep_lo = 1.0, sweep_hi = 1000.0;
  std::size_t sweep_points = 61;
  auto* sweep_cmd = app.add_subcommand("sweep", "Noise budget over a log-spaced cooperativity grid");
  add_common(sweep_cmd, sweep_c, "csv", {"csv", "json"});
  sweep_cmd->add_option("--r", sweep_r, "Squeezing parameter")->capture_default_str();
  sweep_cmd->add_option("--theta-deg", sweep_theta, "Squeeze phase")->capture_default_str();
  sweep_cmd->add_option("--c-min", sweep_lo, "Lowest cooperativity")->capture_default_str();
  sweep_cmd->add_option("--c-max", sweep_hi, "Highest cooperativity")->capture_default_str();
  sweep_cmd->add_option("--points", sweep_points, "Grid points")->capture_default_str();

  // spectrum
  Common spec_c;
  double spec_C = 70.0, spec_r = 0.0, spec_theta = 0.0, spec_angle = 90.0, spec_span = 300e3;
  std::size_t spec_points = 6000;
  std::string spec_svg;
  auto* spec_cmd = app.add_subcommand("spectrum", "Homodyne PSD around the upper mechanical sideband");
  add_common(spec_cmd, spec_c, "csv", {"csv", "json"});
  spec_cmd->add_option("--C", spec_C, "Measurement cooperativity")->capture_default_str();
  spec_cmd->add_option("--r", spec_r, "Squeezing parameter")->capture_default_str();
  spec_cmd->add_option("--theta-deg", spec_theta, "Squeeze phase")->capture_default_str();
  spec_cmd->add_option("--angle-deg", spec_angle, "Detected quadrature (0 amplitude, 90 phase)")->capture_default_str();
  spec_cmd->add_option("--span-hz", spec_span, "Full span around the sideband")->capture_default_str();
  spec_cmd->add_option("--points", spec_points, "Grid points")->capture_default_str();
  spec_cmd->add_option("--svg", spec_svg, "Also write a line plot to this path");

  // tomo
  Common tomo_c;
  double tomo_r = 1.0, tomo_C = 250.0, tomo_lw = 5.0;
  std::size_t tomo_points = 200;
  int tomo_averages = 0;
  std::uint64_t tomo_seed = 1;
  std::string tomo_band = "ideal", tomo_in, tomo_dump;
  auto* tomo_cmd = app.add_subcommand("tomo", "Simulate and fit a squeeze-phase sweep");
  add_common(tomo_cmd, tomo_c, "json", {"json", "csv"});
  tomo_cmd->add_option("--r", tomo_r, "Squeezing parameter of the simulated drive")->capture_default_str();
  tomo_cmd->add_option("--C", tomo_C, "Measurement cooperativity")->capture_default_str();
  tomo_cmd->add_option("--points", tomo_points, "Phase points over one period")->capture_default_str();
  tomo_cmd->add_option("--averages", tomo_averages, "Averages per point (0: noiseless)")->capture_default_str();
  tomo_cmd->add_option("--seed", tomo_seed, "Noise seed")->capture_default_str();
  tomo_cmd->add_option("--band", tomo_band, "Band model")->check(CLI::IsMember({"ideal", "finite"}))->capture_default_str();
  tomo_cmd->add_option("--linewidths", tomo_lw, "Integration band in mechanical linewidths")->capture_default_str();
  tomo_cmd->add_option("--sweep-in", tomo_in, "Fit a sweep CSV (theta_rad,integrated_power) instead of simulating");
  tomo_cmd->add_option("--sweep-out", tomo_dump, "Write the sweep as CSV to this path");

  // optimize
  Common opt_c;
  std::string opt_objective = "n_add", opt_range = "0.01:10000";
  double opt_offset = 0.0, opt_rmax = 1.15;
  std::optional<double> opt_C, opt_theta;
  auto* opt_cmd = app.add_subcommand("optimize", "Optimal squeezing and drive strength");
  add_common(opt_cmd, opt_c, "json", {"json"});
  opt_cmd->add_option("--objective", opt_objective, "n_add | n_total | floor")
      ->check(CLI::IsMember({"n_add", "n_total", "floor"}))
      ->capture_default_str();
  opt_cmd->add_option("--offset-hz", opt_offset, "Offset from the mechanical resonance (floor objective)");
  opt_cmd->add_option("--r-max", opt_rmax, "Upper bound on r")->capture_default_str();
  opt_cmd->add_option("--c-range", opt_range, "Cooperativity bounds lo:hi")->capture_default_str();
  opt_cmd->add_option("--C", opt_C, "Fixed cooperativity (shorthand for --c-range C:C)");
  opt_cmd->add_option("--theta-deg", opt_theta, "Fix the squeeze phase");

  // mc-verify
  Common mc_c;
  std::string mc_case = "all";
  std::uint64_t mc_seed = 1;
  std::size_t mc_segments = 4096;
  std::string mc_report = "json";
  auto* mc_cmd = app.add_subcommand("mc-verify", "Monte Carlo cross-check of the analytic spectra");
  add_common(mc_cmd, mc_c, "json", {"json"});
  mc_cmd->add_option("--case", mc_case, "Case name or 'all'")->capture_default_str();
  mc_cmd->add_option("--seed", mc_seed, "Base seed")->capture_default_str();
  mc_cmd->add_option("--segments", mc_segments, "Welch segments per case")->capture_default_str();
  mc_cmd->add_option("--report", mc_report, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  // reproduce
  Common rep_c;
  std::string rep_name, rep_dir;
  bool rep_svg = false;
  std::uint64_t rep_seed = 1;
  auto* rep_cmd = app.add_subcommand("reproduce", "Regenerate the theory content of a figure");
  add_common(rep_cmd, rep_c, "csv", {"csv", "json"});
  rep_cmd->add_option("recipe", rep_name, "Figure recipe")->required();
  rep_cmd->add_option("--out-dir", rep_dir, "Write <recipe>.csv (and extra tables) into this directory");
  rep_cmd->add_flag("--svg", rep_svg, "Also write <recipe>.svg (into --out-dir, default .)");
  rep_cmd->add_option("--seed", rep_seed, "Seed for stochastic recipes")->capture_default_str();
  std::string recipe_list;
  for (const auto& n : recipe_names()) recipe_list += (recipe_list.empty() ? "" : ", ") + n;
  rep_cmd->footer("Recipes: " + recipe_list);

  auto fail = [&](const char* kind, const std::string& msg, int code) {
    err << json{{"error", kind}, {"message", msg}}.dump() << '\n';
    return code;
  };

  std::vector<const char*> argv{"sqzom"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help arrives as CallForHelp on the subcommand.
    return fail("usage", e.what(), kUsageError);
  }

  try {
    if (budget_cmd->parsed()) {
      const SystemParams p = budget_c.params();
      const NoiseBudget b = budget(DriveState(budget_r, budget_theta * kDeg, budget_C), p);
      if (budget_c.out == "csv") {
        write_csv(out, budget_table({b}), budget_c.format());
      } else {
        json j = budget_json(b, budget_c.format());
        j["r"] = budget_c.format().json(budget_r);
        j["theta_deg"] = budget_c.format().json(budget_theta);
        emit_json(out, j);
      }
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const SystemParams p = sweep_c.params();
      if (sweep_points < 2) throw DomainError("--points must be >= 2");
      const auto grid = log_grid(sweep_lo, sweep_hi, sweep_points);
      const auto rows = sweep_drive(DriveState(sweep_r, sweep_theta * kDeg, grid.front()), p, grid);
      if (sweep_c.out == "csv") {
        write_csv(out, budget_table(rows), sweep_c.format());
      } else {
        emit_json(out, table_json(budget_table(rows), sweep_c.format()));
      }
      return kOk;
    }

    if (spec_cmd->parsed()) {
      const SystemParams p = spec_c.params();
      const auto grid = offset_grid(spec_span, spec_points);
      const Spectrum s = output_psd(DriveState(spec_r, spec_theta * kDeg, spec_C), p, grid, spec_angle * kDeg);
      Table t{"spectrum", {"offset_hz", "psd_rel_shot"}, {}};
      for (std::size_t k = 0; k < grid.size(); ++k) t.rows.push_back({grid[k], s.psd[k]});
      if (spec_c.out == "csv") {
        write_csv(out, t, spec_c.format());
      } else {
        emit_json(out, {{"floor", spec_c.format().json(s.floor)},
                        {"asymmetry", spec_c.format().json(asymmetry_metric(s))},
                        {"data", table_json(t, spec_c.format())}});
      }
      if (!spec_svg.empty()) {
        write_file(spec_svg, render_svg(t, {"Output PSD (relative to shot noise)", "offset_hz", {"psd_rel_shot"},
                                            std::nullopt, false, false}));
      }
      return kOk;
    }

    if (tomo_cmd->parsed()) {
      const SystemParams p = tomo_c.params();
      PhaseSweep sweep;
      if (!tomo_in.empty()) {
        sweep = read_sweep_csv(tomo_in, p, tomo_C);
      } else {
        SweepOptions o;
        o.averages = tomo_averages;
        o.seed = tomo_seed;
        o.integration_linewidths = tomo_lw;
        o.band_model = tomo_band == "finite" ? BandModel::finite_band : BandModel::ideal;
        sweep = simulate_phase_sweep(tomo_r, p, tomo_C, phase_grid(tomo_points), o);
      }
      Table t{"sweep", {"theta_rad", "integrated_power"}, {}};
      for (std::size_t k = 0; k < sweep.theta_grid.size(); ++k) {
        t.rows.push_back({sweep.theta_grid[k], sweep.integrated_power[k]});
      }
      if (!tomo_dump.empty()) {
        std::ostringstream os;
        write_csv(os, t, NumberFormat{17});
        write_file(tomo_dump, os.str());
      }
      if (tomo_c.out == "csv") {
        write_csv(out, t, tomo_c.format());
      } else {
        emit_json(out, estimate_json(fit_squeezing(sweep), tomo_c.format()));
      }
      return kOk;
    }

    if (opt_cmd->parsed()) {
      OptProblem prob;
      prob.params = opt_c.params();
      prob.objective = objective_from_string(opt_objective);
      prob.r_max = opt_rmax;
      if (opt_C) {
        prob.c_min = prob.c_max = *opt_C;
      } else {
        std::tie(prob.c_min, prob.c_max) = parse_range(opt_range);
      }
      if (opt_theta) prob.fixed_theta = *opt_theta * kDeg;
      prob.offset_hz = opt_offset;
      const OptResult res = prob.objective == Objective::floor_at_offset ? optimal_floor_at_offset(prob, opt_offset)
                                                                         : minimize_added_noise(prob);
      emit_json(out, opt_json(res, prob, opt_c.format()));
      return kOk;
    }

    if (mc_cmd->parsed()) {
      McVerifyOptions o;
      o.case_filter = mc_case;
      o.seed = mc_seed;
      o.segments = mc_segments;
      const McVerifyReport rep = mc_verify(mc_c.params(), o);
      if (mc_report == "json") {
        emit_json(out, mc_json(rep, mc_c.format()));
      } else {
        const NumberFormat f{6};
        for (const auto& c : rep.cases) {
          out << (c.passed ? "PASS " : "FAIL ") << c.name << " rms=" << f.text(c.rms_deviation)
              << " occupancy_dev=" << f.text(c.occupancy_deviation) << '\n';
        }
        out << (rep.deterministic ? "PASS" : "FAIL") << " determinism\n";
        out << (rep.validity.valid ? "PASS" : "FAIL") << " envelope_validity\n";
      }
      if (!rep.passed) return fail("verification", "Monte Carlo oracle report failed", kVerificationFailure);
      return kOk;
    }

    if (rep_cmd->parsed()) {
      const Recipe* recipe = find_recipe(rep_name);
      if (!recipe) throw UsageError("unknown recipe '" + rep_name + "' (known: " + recipe_list + ")");
      const RecipeOutput result = recipe->build(rep_c.params(), rep_seed);
      const NumberFormat f = rep_c.format();
      if (rep_c.out == "csv") {
        write_csv(out, result.tables.front(), f);
      } else {
        json j = json::object();
        for (const auto& t : result.tables) j[t.name] = table_json(t, f);
        emit_json(out, j);
      }
      const std::filesystem::path dir = rep_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(rep_dir);
      if (!rep_dir.empty()) {
        for (const auto& t : result.tables) {
          std::ostringstream os;
          write_csv(os, t, f);
          write_file(dir / (t.name + ".csv"), os.str());
        }
      }
      if (rep_svg) write_file(dir / (recipe->name + ".svg"), render_svg(result.tables.front(), result.plot));
      return kOk;
    }
  } catch (const UsageError& e) {
    return fail("usage", e.what(), kUsageError);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), kDomainError);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kDomainError);
  }
  return fail("usage", "no subcommand given", kUsageError);
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sqzom::cli
