#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irsv/baselines.hpp"
#include "irsv/coarse.hpp"
#include "irsv/error.hpp"
#include "irsv/geometry.hpp"
#include "irsv/harness.hpp"
#include "irsv/mode.hpp"
#include "irsv/signal_model.hpp"

namespace py = pybind11;
using namespace irsv;

namespace {

ExperimentConfig config_from(const std::string& text) {
    return parse_config(text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text));
}

SnapshotSet snapshots(const std::vector<Complex>& values, double ts) {
    SnapshotSet s;
    s.values = values;
    s.symbol_period_s = ts;
    return s;
}

std::vector<Method> methods_from(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) out.push_back(parse_method(n));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-stage IRS-assisted true-velocity estimation";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<EstimationError>(m, "EstimationError", base.ptr());

    m.def("doppler_pair",
          [](double speed, double heading, double theta_tb, double theta_it, double wavelength) {
              const auto p = doppler_pair(VelocityVector(speed, heading), theta_tb, theta_it, wavelength);
              return py::make_tuple(p.mu_d, p.mu_r);
          },
          py::arg("speed"), py::arg("heading"), py::arg("theta_tb"), py::arg("theta_it"), py::arg("wavelength"),
          "(mu_d, mu_r) in Hz; angles in radians.");
    m.def("recover_velocity",
          [](double mu_d, double mu_r, double theta_tb, double theta_it, double wavelength) {
              const auto v = recover_velocity({mu_d, mu_r}, theta_tb, theta_it, wavelength);
              return py::make_tuple(v.speed(), v.heading());
          },
          py::arg("mu_d"), py::arg("mu_r"), py::arg("theta_tb"), py::arg("theta_it"), py::arg("wavelength"),
          "(speed, heading) from a Doppler pair.");
    m.def("radial_velocity_no_irs",
          [](double mu_d, double theta_tb, double wavelength) {
              const auto v = radial_velocity_no_irs(mu_d, theta_tb, wavelength);
              return py::make_tuple(v.speed(), v.heading());
          },
          py::arg("mu_d"), py::arg("theta_tb"), py::arg("wavelength"));
    m.def("angles_from_positions",
          [](std::array<double, 2> bs, std::array<double, 2> irs, std::array<double, 2> target) {
              const auto s = angles_from_positions({bs[0], bs[1]}, {irs[0], irs[1]}, {target[0], target[1]});
              return py::dict(py::arg("theta_tb") = s.theta_tb, py::arg("theta_it") = s.theta_it,
                              py::arg("theta_bi") = s.theta_bi, py::arg("theta_ib") = s.theta_ib);
          },
          py::arg("bs"), py::arg("irs"), py::arg("target"));

    m.def("steering_bs", &steering_bs, py::arg("theta"), py::arg("n"), py::arg("spacing"), py::arg("wavelength"));
    m.def("doppler_steering", &doppler_steering, py::arg("mu"), py::arg("length"), py::arg("symbol_period"));

    m.def("coarse_grid",
          [](int n, double ts, int oversample) { return CoarseGrid::make(n, ts, oversample).frequencies; },
          py::arg("n_pilots"), py::arg("symbol_period"), py::arg("oversample") = 4);
    m.def("coarse_estimate",
          [](const std::vector<Complex>& z, double ts, int oversample) {
              return coarse_estimate(snapshots(z, ts), CoarseGrid::make(static_cast<int>(z.size()), ts, oversample));
          },
          py::arg("z"), py::arg("symbol_period"), py::arg("oversample") = 4,
          "Matched-filter grid peak of a direct-link snapshot sequence.");

    m.def("sample_covariance",
          [](const std::vector<Complex>& z, double ts, int p) { return sample_covariance(stack(snapshots(z, ts), p)); },
          py::arg("z"), py::arg("symbol_period"), py::arg("p") = 8);
    m.def("decompose",
          [](const CMatrix& r) {
              const auto d = decompose(r);
              return py::dict(py::arg("eigenvalues") = d.eigenvalues, py::arg("signal_subspace") = d.signal_subspace,
                              py::arg("noise_subspace") = d.noise_subspace, py::arg("noise_power") = d.noise_power,
                              py::arg("gamma") = d.gamma);
          },
          py::arg("r_hat"));

    auto subspace = [](const std::vector<Complex>& z, double ts, int p) {
        return decompose(sample_covariance(stack(snapshots(z, ts), p)));
    };
    m.def("mode",
          [subspace](const std::vector<Complex>& z, double ts, double mu_coarse, int p, double tol, int max_iter) {
              const auto r = mode_iterate(subspace(z, ts, p), init_c(mu_coarse, ts), {tol, max_iter});
              const auto [f1, f2] = roots_and_freqs(r.c, ts);
              const auto pair = match_tones(f1, f2, mu_coarse);
              return py::dict(py::arg("mu_d") = pair.mu_d, py::arg("mu_r") = pair.mu_r,
                              py::arg("c1") = r.c.c1, py::arg("c2") = r.c.c2,
                              py::arg("discrepancy") = r.discrepancy, py::arg("converged") = r.converged());
          },
          py::arg("z"), py::arg("symbol_period"), py::arg("mu_coarse"), py::arg("p") = 8, py::arg("tol") = 1e-8,
          py::arg("max_iter") = 50, "MODE on a combined snapshot sequence.");
    m.def("root_music",
          [subspace](const std::vector<Complex>& z, double ts, int p) { return root_music(subspace(z, ts, p), ts); },
          py::arg("z"), py::arg("symbol_period"), py::arg("p") = 8);
    m.def("esprit",
          [subspace](const std::vector<Complex>& z, double ts, int p) { return esprit(subspace(z, ts, p), ts); },
          py::arg("z"), py::arg("symbol_period"), py::arg("p") = 8);

    m.def("default_config", [] { return config_to_json(ExperimentConfig{}).dump(); });
    m.def("run_trial",
          [](const std::string& cfg, std::uint64_t index) {
              return trial_to_json(run_trial(config_from(cfg), index)).dump();
          },
          py::arg("config_json"), py::arg("index"), "One trial; config and result as JSON text.");
    m.def("trial_nmse",
          [](const std::string& cfg, int workers) {
              py::gil_scoped_release release;
              return nmse(run_trials(config_from(cfg), workers));
          },
          py::arg("config_json"), py::arg("workers") = 1);
    m.def("sweep",
          [](const std::string& cfg, const std::string& axis, const std::vector<double>& values,
             const std::vector<std::string>& methods, int workers) {
              SweepAxis ax;
              if (axis == "snr") ax = SweepAxis::kSnr;
              else if (axis == "speed") ax = SweepAxis::kSpeed;
              else throw ConfigError("axis must be snr or speed");
              const auto c = config_from(cfg);
              const auto ms = methods_from(methods);
              std::vector<SweepRow> rows;
              {
                  py::gil_scoped_release release;
                  rows = sweep(c, ax, values, ms, workers);
              }
              py::list out;
              for (const auto& r : rows) {
                  out.append(py::dict(py::arg("axis_value") = r.axis_value,
                                      py::arg("method") = std::string(to_string(r.method)), py::arg("nmse") = r.nmse,
                                      py::arg("n_success") = r.n_success, py::arg("n_fail") = r.n_fail,
                                      py::arg("seed") = r.seed));
              }
              return out;
          },
          py::arg("config_json"), py::arg("axis"), py::arg("values"), py::arg("methods"), py::arg("workers") = 1);
}
