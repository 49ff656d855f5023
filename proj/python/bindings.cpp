#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "breather/config.hpp"
#include "breather/eigensolve.hpp"
#include "breather/error.hpp"
#include "breather/field.hpp"
#include "breather/grid.hpp"
#include "breather/rng.hpp"
#include "breather/runner.hpp"
#include "breather/ssf.hpp"
#include "breather/ucp.hpp"
#include "breather/wegner.hpp"

namespace py = pybind11;
using namespace breather;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_numpy(const Array& a) {
  if (a.ndim() != 1) throw DomainError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

SingleSiteShape shape_from(const std::string& name) {
  if (name == "ball") return SingleSiteShape::ball;
  if (name == "cube") return SingleSiteShape::cube;
  throw DomainError("shape must be \"ball\" or \"cube\"");
}

MagneticSpec magnetic_from(double strength) {
  return strength == 0.0 ? MagneticSpec{} : MagneticSpec{MagneticKind::constant_field, strength};
}

HamiltonianMatrix operator_from(int dim, int box_side, int mesh, const Array& potential, double field) {
  const GridSpec grid = build_grid(dim, box_side, mesh);
  std::vector<double> v = potential.size() == 0 ? std::vector<double>(grid.dof(), 0.0) : from_numpy(potential);
  return assemble_hamiltonian(grid, v, magnetic_from(field));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-volume random breather operators: spectra, sampling and Wegner estimates";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.attr("__version__") = std::string(software_version());

  m.def("derive_seed", &derive_seed, py::arg("parent"), py::arg("index"));

  m.def(
      "sample_omega",
      [](int dim, int box_side, std::uint64_t seed, double omega_minus, double omega_plus) {
        const auto omega = sample_omega(MeasureSpec{omega_minus, omega_plus}, dim, box_side, seed);
        return to_numpy({omega.values().begin(), omega.values().end()});
      },
      py::arg("dim"), py::arg("box_side"), py::arg("seed"), py::arg("omega_minus") = 0.1,
      py::arg("omega_plus") = 0.4, "i.i.d. uniform radii, one per lattice site, lexicographic order.");

  m.def(
      "potential_on_grid",
      [](const Array& omega, int dim, int box_side, int mesh, const std::string& shape) {
        const OmegaSample sample(dim, box_side, from_numpy(omega));
        return to_numpy(potential_on_grid(sample, shape_from(shape), build_grid(dim, box_side, mesh)));
      },
      py::arg("omega"), py::arg("dim"), py::arg("box_side"), py::arg("mesh_per_unit"), py::arg("shape") = "ball");

  m.def(
      "grid_points",
      [](int dim, int box_side, int mesh) {
        const GridSpec grid = build_grid(dim, box_side, mesh);
        py::array_t<double> out({static_cast<py::ssize_t>(grid.dof()), static_cast<py::ssize_t>(dim)});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < grid.dof(); ++i) {
          const Point p = grid.point(i);
          for (int a = 0; a < dim; ++a) view(static_cast<py::ssize_t>(i), a) = p[static_cast<std::size_t>(a)];
        }
        return out;
      },
      py::arg("dim"), py::arg("box_side"), py::arg("mesh_per_unit"));

  m.def(
      "eigenvalues_below",
      [](int dim, int box_side, int mesh, const Array& potential, double b, double field) {
        const auto h = operator_from(dim, box_side, mesh, potential, field);
        py::gil_scoped_release release;
        return eigen_lowest(h, b, false).eigenvalues;
      },
      py::arg("dim"), py::arg("box_side"), py::arg("mesh_per_unit"), py::arg("potential") = Array(), py::arg("b"),
      py::arg("field") = 0.0, "All eigenvalues <= b in nondecreasing order. An empty potential means V = 0.");

  m.def(
      "count_below",
      [](int dim, int box_side, int mesh, const Array& potential, double sigma, double field) {
        const auto h = operator_from(dim, box_side, mesh, potential, field);
        return count_below(h, sigma);
      },
      py::arg("dim"), py::arg("box_side"), py::arg("mesh_per_unit"), py::arg("potential") = Array(),
      py::arg("sigma"), py::arg("field") = 0.0, "Number of eigenvalues <= sigma by inertia counting.");

  m.def(
      "spectral_shift",
      [](const std::vector<double>& spec0, const std::vector<double>& spec1, std::size_t dimension, double cutoff) {
        const StepFunction xi =
            spectral_shift(spectrum_from_values(spec0, dimension, cutoff), spectrum_from_values(spec1, dimension, cutoff));
        return py::make_tuple(xi.breakpoints, xi.values);
      },
      py::arg("spec0"), py::arg("spec1"), py::arg("dimension"), py::arg("cutoff"),
      "Breakpoints and values of N0 - N1 below the cutoff.");

  m.def("weyl_lower_bound", &weyl_lower_bound, py::arg("n"), py::arg("volume"), py::arg("dim"));
  m.def("ft_eval", &ft_eval, py::arg("t"), py::arg("dim"), py::arg("x"));
  m.def("k1_constant", &k1_constant, py::arg("dim"));
  m.def("wegner_constant", &wegner_constant, py::arg("dim"), py::arg("b"));

  m.def(
      "epsilon_max",
      [](double kappa, double M, double omega_plus) {
        UcpConstants k;
        k.kappa = kappa;
        k.M = M;
        return epsilon_max(k, omega_plus);
      },
      py::arg("kappa"), py::arg("M"), py::arg("omega_plus"));
  m.def(
      "delta_from_epsilon",
      [](double eps, double kappa, double M) {
        UcpConstants k;
        k.kappa = kappa;
        k.M = M;
        return delta_from_epsilon(eps, k);
      },
      py::arg("epsilon"), py::arg("kappa"), py::arg("M"));
  m.def(
      "wegner_rhs",
      [](double eps, int box_side, int dim, double b, double kappa, double M, double density_sup) {
        UcpConstants k;
        k.kappa = kappa;
        k.M = M;
        return wegner_rhs(eps, box_side, dim, b, k, density_sup);
      },
      py::arg("epsilon"), py::arg("box_side"), py::arg("dim"), py::arg("b"), py::arg("kappa"), py::arg("M"),
      py::arg("density_sup"));

  m.def("validate_config", [](const std::string& text) { return to_toml(parse_config(text, "<python>")); },
        py::arg("text"), "Parses and validates TOML text; returns its canonical form.");

  m.def(
      "run_experiment",
      [](const std::string& text, const std::string& kind, const std::string& out_dir, std::optional<std::size_t> threads) {
        ExperimentConfig c = parse_config(text, "<python>");
        if (!kind.empty()) {
          const auto k = experiment_kind_from_string(kind);
          if (!k) throw ConfigError("unknown experiment kind " + kind);
          c.experiment.kind = k;
        }
        if (!out_dir.empty()) c.run.out_dir = out_dir;
        if (threads) c.run.threads = threads;
        py::gil_scoped_release release;
        return run_experiment(c).files;
      },
      py::arg("config"), py::arg("kind") = "", py::arg("out_dir") = "", py::arg("threads") = py::none(),
      "Runs an experiment from TOML text; returns the files written.");

  m.def("sha256_hex", [](const py::bytes& data) { return sha256_hex(std::string(data)); }, py::arg("data"));
}
