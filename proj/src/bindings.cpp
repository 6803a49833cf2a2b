#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epduct/extension.hpp"
#include "epduct/pipeline.hpp"
#include "epduct/verification.hpp"

namespace py = pybind11;
using namespace epduct;

namespace {

py::array_t<double> field_to_array(const Field3& f) {
    const auto& g = f.grid();
    py::array_t<double> out({g.n1, g.n2, g.n3});
    std::copy(f.data().begin(), f.data().end(), out.mutable_data());
    return out;
}

Field3 array_to_field(const DuctGrid& g, const py::array_t<double>& a) {
    const auto buf = a.request();
    if (buf.ndim != 3 || buf.shape[0] != g.n1 || buf.shape[1] != g.n2 || buf.shape[2] != g.n3)
        throw ConfigError("array shape does not match the duct grid");
    Field3 f(g);
    const auto view = a.unchecked<3>();
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) f(i, j, k) = view(i, j, k);
    return f;
}

Vec3 to_vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Supersonic Euler-Poisson potential flow in a rectangular duct";

    py::register_exception<VacuumError>(m, "VacuumError");
    py::register_exception<SonicError>(m, "SonicError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SolverError>(m, "SolverError");

    py::class_<GasLaw>(m, "GasLaw")
        .def(py::init<double, double>(), py::arg("gamma"), py::arg("j0"))
        .def_readonly("gamma", &GasLaw::gamma)
        .def_readonly("j0", &GasLaw::j0)
        .def("sonic_density", &GasLaw::sonic_density)
        .def("sonic_speed", &GasLaw::sonic_speed);

    py::enum_<Regime>(m, "Regime")
        .value("Supersonic", Regime::Supersonic)
        .value("Subsonic", Regime::Subsonic)
        .value("Sonic", Regime::Sonic);

    m.def("enthalpy", &enthalpy, py::arg("gas"), py::arg("rho"));
    m.def("density",
          [](const GasLaw& gas, double z, std::array<double, 3> q) {
              return density(gas, z, to_vec3(q));
          },
          py::arg("gas"), py::arg("z"), py::arg("q"));
    m.def("sound_speed_sq",
          [](const GasLaw& gas, double z, std::array<double, 3> q) {
              return sound_speed_sq(gas, z, to_vec3(q));
          });
    m.def("coeff_A",
          [](const GasLaw& gas, double z, std::array<double, 3> q) {
              const Mat3 a = coeff_A(gas, z, to_vec3(q));
              py::array_t<double> out({3, 3});
              auto v = out.mutable_unchecked<2>();
              for (int i = 0; i < 3; ++i)
                  for (int j = 0; j < 3; ++j) v(i, j) = a[i][j];
              return out;
          });
    m.def("coeff_B",
          [](const GasLaw& gas, double z, std::array<double, 3> p, std::array<double, 3> q) {
              return coeff_B(gas, z, to_vec3(p), to_vec3(q));
          });
    m.def("regime",
          [](const GasLaw& gas, double z, std::array<double, 3> q) {
              return regime(gas, z, to_vec3(q));
          });
    m.def("density_partials", [](const GasLaw& gas, double z, std::array<double, 3> q) {
        const auto d = density_partials(gas, z, to_vec3(q));
        return std::make_pair(d.d_z, d.d_q1);
    });

    py::class_<BackgroundParams>(m, "BackgroundParams")
        .def(py::init([](double gamma, double j0, double b0, double u0, double e0,
                         double delta, double length, double step) {
                 BackgroundParams p;
                 p.gas = GasLaw(gamma, j0);
                 p.b0 = b0;
                 p.u0 = u0;
                 p.e0 = e0;
                 p.delta = delta;
                 p.length_request = length;
                 p.step = step;
                 return p;
             }),
             py::arg("gamma"), py::arg("j0"), py::arg("b0"), py::arg("u0"), py::arg("e0"),
             py::arg("delta") = -1.0, py::arg("length") = 1.0, py::arg("step") = 1e-3);

    py::enum_<OrbitClass>(m, "OrbitClass")
        .value("Periodic", OrbitClass::Periodic)
        .value("FiniteL1", OrbitClass::FiniteL1);

    py::class_<BackgroundSolution>(m, "BackgroundSolution")
        .def_readonly("x1", &BackgroundSolution::x1)
        .def_readonly("u", &BackgroundSolution::u)
        .def_readonly("e", &BackgroundSolution::e)
        .def_readonly("rho", &BackgroundSolution::rho)
        .def_readonly("phi0", &BackgroundSolution::phi0)
        .def_readonly("cap_phi0", &BackgroundSolution::cap_phi0)
        .def_readonly("l1_detected", &BackgroundSolution::l1_detected)
        .def_readonly("truncated", &BackgroundSolution::truncated)
        .def_readonly("invariant_drift", &BackgroundSolution::invariant_drift);

    m.def("h_potential", &h_potential, py::arg("params"), py::arg("u"),
          py::arg("abs_tol") = 1e-13);
    m.def("classify_orbit", &classify_orbit);
    m.def("integrate", &integrate);
    m.def("integrate_at", [](const BackgroundParams& p, const std::vector<double>& nodes) {
        return integrate_at(p, nodes);
    });

    m.def("solve_weights", [] { return solve_weights().c; },
          "Five-point reflection weights (15, -640, 3645, -6144, 3125)");

    py::class_<DuctGrid>(m, "DuctGrid")
        .def(py::init<int, int, int, double>(), py::arg("n1"), py::arg("n2"), py::arg("n3"),
             py::arg("length"))
        .def_readonly("n1", &DuctGrid::n1)
        .def_readonly("n2", &DuctGrid::n2)
        .def_readonly("n3", &DuctGrid::n3)
        .def_readonly("length", &DuctGrid::length)
        .def("x1_nodes", &DuctGrid::x1_nodes);

    m.def("eigenpair", [](int k, int l) {
        const auto [om, eta] = eigenpair(k, l);
        return std::make_pair(om, py::cpp_function(eta));
    });

    py::class_<CrossSectionBasis>(m, "CrossSectionBasis")
        .def(py::init<int, int, int>(), py::arg("m_max"), py::arg("n2"), py::arg("n3"))
        .def("num_modes", &CrossSectionBasis::num_modes)
        .def("modes", &CrossSectionBasis::modes)
        .def("omega", [](const CrossSectionBasis& b, int m) { return b.omega(m); })
        .def("gram", [](const CrossSectionBasis& b, int count) {
            const Eigen::MatrixXd g = b.gram(count);
            py::array_t<double> out({int(g.rows()), int(g.cols())});
            auto v = out.mutable_unchecked<2>();
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) v(i, j) = g(i, j);
            return out;
        });

    m.def("smooth_field",
          [](const DuctGrid& g, const py::array_t<double>& a, double r) {
              return field_to_array(smooth_field(array_to_field(g, a), r));
          },
          py::arg("grid"), py::arg("values"), py::arg("r"),
          "Quintic wall extension + mollification, restricted to the grid");

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def("set", &apply_setting, py::arg("key"), py::arg("value"))
        .def_readwrite("out_dir", &RunConfig::out_dir);

    m.def("parse_config_file", &parse_config_file);
    m.def("run_command", &run_command, py::arg("name"), py::arg("config"),
          py::arg("weight_sweep") = false,
          "Run a CLI command (background, weight, solve-linear, solve, verify, sweep); "
          "returns the exit code");

    // compact driver used by the smoke tests: solve the manufactured problem
    // and report its errors
    m.def("mms_errors",
          [](const BackgroundParams& params, double L, int n1, int n2, int n3, int m_max) {
              const DuctGrid grid(n1, n2, n3, L);
              const BackgroundSolution bg = integrate_at(params, grid.x1_nodes());
              const BaseCoefficients base = base_coefficients(bg);
              MmsCase mms = build_mms(bg, base, grid, m_max);
              const ModalSolution sol = solve(mms.problem);
              const MmsErrors err = mms_errors(mms, sol);
              return std::make_pair(err.err_psi, err.err_cap);
          },
          py::arg("params"), py::arg("L"), py::arg("n1"), py::arg("n2"), py::arg("n3"),
          py::arg("m_max") = 4);

    m.attr("__version__") = "0.1.0";
}
