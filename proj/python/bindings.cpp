#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sqzom/cli.hpp"
#include "sqzom/config.hpp"
#include "sqzom/core_model.hpp"
#include "sqzom/error.hpp"
#include "sqzom/montecarlo.hpp"
#include "sqzom/noise_budget.hpp"
#include "sqzom/optimizer.hpp"
#include "sqzom/spectra.hpp"
#include "sqzom/tomography.hpp"

namespace py = pybind11;
using namespace sqzom;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::dict spectrum_dict(const Spectrum& s) {
  py::dict d;
  d["offset_hz"] = to_array(s.offset_hz);
  d["psd"] = to_array(s.psd);
  d["psd_error"] = to_array(s.psd_error);
  d["floor"] = s.floor;
  d["quadrature_angle"] = s.quadrature_angle;
  d["cooperativity"] = s.cooperativity;
  d["eta_det"] = s.eta_det;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sqzom, m) {
  m.doc() = "Squeezed-drive cavity optomechanics toolkit (native core)";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  static py::exception<DomainError> domain_error(m, "DomainError", error.ptr());
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<FitError> fit_error(m, "FitError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const FitError& e) {
      py::set_error(fit_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("cavity_freq", &SystemParams::cavity_freq)
      .def_readwrite("mech_freq", &SystemParams::mech_freq)
      .def_readwrite("cavity_linewidth", &SystemParams::cavity_linewidth)
      .def_readwrite("intrinsic_mech_linewidth", &SystemParams::intrinsic_mech_linewidth)
      .def_readwrite("total_mech_linewidth", &SystemParams::total_mech_linewidth)
      .def_readwrite("vacuum_coupling", &SystemParams::vacuum_coupling)
      .def_readwrite("n_th", &SystemParams::n_th)
      .def_readwrite("n_c", &SystemParams::n_c)
      .def_readwrite("eta_in", &SystemParams::eta_in)
      .def_readwrite("eta_det", &SystemParams::eta_det)
      .def_readwrite("n_bath", &SystemParams::n_bath)
      .def("validate", &SystemParams::validate)
      .def("__eq__", [](const SystemParams& a, const SystemParams& b) { return a == b; })
      .def("__repr__", [](const SystemParams& p) { return "SystemParams(\n" + format_params(p) + ")"; });

  m.def("bundled_params", &bundled_params);
  m.def("parse_params", [](const std::string& text) { return parse_params(text); }, py::arg("text"));
  m.def("load_params", &load_params, py::arg("path"));

  py::class_<DriveState>(m, "DriveState")
      .def(py::init<double, double, double>(), py::arg("r"), py::arg("theta"), py::arg("cooperativity"))
      .def_static("coherent", &DriveState::coherent, py::arg("cooperativity"))
      .def_static("amplitude_squeezed", &DriveState::amplitude_squeezed, py::arg("r"), py::arg("cooperativity"))
      .def_static("phase_squeezed", &DriveState::phase_squeezed, py::arg("r"), py::arg("cooperativity"))
      .def_property_readonly("r", &DriveState::squeeze_r)
      .def_property_readonly("theta", &DriveState::squeeze_phase)
      .def_property_readonly("cooperativity", &DriveState::cooperativity)
      .def("__repr__", [](const DriveState& d) {
        std::ostringstream os;
        os << "DriveState(r=" << d.squeeze_r() << ", theta=" << d.squeeze_phase() << ", C=" << d.cooperativity()
           << ")";
        return os.str();
      });

  py::class_<QuadCovariance>(m, "QuadCovariance")
      .def_readonly("vxx", &QuadCovariance::vxx)
      .def_readonly("vyy", &QuadCovariance::vyy)
      .def_readonly("vxy", &QuadCovariance::vxy)
      .def("variance_at", &QuadCovariance::variance_at, py::arg("angle"))
      .def("determinant", &QuadCovariance::determinant);

  m.def("drive_covariance", &drive_covariance, py::arg("drive"), py::arg("params"));
  m.def("variance_to_db", &variance_to_db);
  m.def("weighted_cooperativity", &weighted_cooperativity, py::arg("cooperativity"), py::arg("params"));

  py::class_<NoiseBudget>(m, "NoiseBudget")
      .def_readonly("cooperativity", &NoiseBudget::cooperativity)
      .def_readonly("n_imp", &NoiseBudget::n_imp)
      .def_readonly("n_ba", &NoiseBudget::n_ba)
      .def_readonly("n_add", &NoiseBudget::n_add)
      .def_readonly("n_total", &NoiseBudget::n_total)
      .def_readonly("heisenberg_product", &NoiseBudget::heisenberg_product);

  m.def("budget", &budget, py::arg("drive"), py::arg("params"));
  m.def("log_grid", &log_grid, py::arg("lo"), py::arg("hi"), py::arg("points"));
  m.def(
      "cooled_occupancy",
      [](double linewidth, double occupancy, double n_c, double stokes, double anti_stokes) {
        return cooled_occupancy(linewidth, occupancy, n_c, CoolingDrive{stokes, anti_stokes});
      },
      py::arg("linewidth"), py::arg("occupancy"), py::arg("n_c"), py::arg("stokes_rate"),
      py::arg("anti_stokes_rate"));

  m.def("offset_grid", [](double span, std::size_t points) { return to_array(offset_grid(span, points)); },
        py::arg("span_hz") = 300e3, py::arg("points") = 6000);
  m.def(
      "output_psd",
      [](const DriveState& d, const SystemParams& p, py::array_t<double, py::array::c_style | py::array::forcecast> f,
         double angle) { return spectrum_dict(output_psd(d, p, to_vector(f), angle)); },
      py::arg("drive"), py::arg("params"), py::arg("offset_hz"), py::arg("detect_angle") = std::numbers::pi / 2);

  m.def(
      "fit_squeezing",
      [](const std::vector<double>& theta, const std::vector<double>& power, double eta_in) {
        PhaseSweep s;
        s.theta_grid = theta;
        s.integrated_power = power;
        s.eta_in = eta_in;
        const SqueezeEstimate e = fit_squeezing(s);
        py::dict d;
        d["r_hat"] = e.r_hat;
        d["eta_eff"] = e.eta_eff;
        d["eta_det_om"] = e.eta_det_om;
        d["phase_offset"] = e.phase_offset;
        d["r_ci"] = py::make_tuple(e.r_ci.lo, e.r_ci.hi);
        d["degenerate"] = e.degenerate;
        return d;
      },
      py::arg("theta"), py::arg("power"), py::arg("eta_in") = 0.47);
  m.def(
      "simulate_phase_sweep",
      [](double r, const SystemParams& p, double c, std::size_t points, int averages, std::uint64_t seed) {
        SweepOptions o;
        o.averages = averages;
        o.seed = seed;
        const PhaseSweep s = simulate_phase_sweep(r, p, c, phase_grid(points), o);
        return py::make_tuple(to_array(s.theta_grid), to_array(s.integrated_power));
      },
      py::arg("r"), py::arg("params"), py::arg("cooperativity"), py::arg("points") = 200, py::arg("averages") = 0,
      py::arg("seed") = 1);
  m.def("eta_det_om_predicted", [](const SystemParams& p, double c) { return eta_det_om_predicted(p, c).full; },
        py::arg("params"), py::arg("cooperativity"));

  m.def(
      "minimize_added_noise",
      [](const SystemParams& p, double r_max, double c_min, double c_max, const std::string& objective) {
        OptProblem prob;
        prob.params = p;
        prob.r_max = r_max;
        prob.c_min = c_min;
        prob.c_max = c_max;
        prob.objective = objective_from_string(objective);
        const OptResult res = minimize_added_noise(prob);
        py::dict d;
        d["r"] = res.r;
        d["theta"] = res.theta;
        d["cooperativity"] = res.cooperativity;
        d["value"] = res.value;
        d["audit_passed"] = res.audit_passed;
        return d;
      },
      py::arg("params"), py::arg("r_max") = 1.15, py::arg("c_min") = 1e-2, py::arg("c_max") = 1e4,
      py::arg("objective") = "n_add");

  m.def(
      "simulate_psd",
      [](const DriveState& d, const SystemParams& p, std::size_t segments, std::uint64_t seed, double angle) {
        StreamResult res;
        {
          py::gil_scoped_release release;
          res = simulate_psd(d, p, SimConfig::envelope(segments, seed), angle);
        }
        py::dict out = spectrum_dict(res.psd.spectrum);
        out["mechanical_occupancy"] = res.mechanical_occupancy;
        return out;
      },
      py::arg("drive"), py::arg("params"), py::arg("segments") = 256, py::arg("seed") = 1,
      py::arg("detect_angle") = std::numbers::pi / 2);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
