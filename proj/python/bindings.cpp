#include <cmath>
#include <limits>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "modent/errors.hpp"
#include "modent/families.hpp"
#include "modent/models.hpp"
#include "modent/modular.hpp"
#include "modent/subspace.hpp"
#include "runner.hpp"

namespace py = pybind11;
using namespace modent;

namespace {

double as_float(const EntropyValue& v) {
  return v.infinite ? std::numeric_limits<double>::infinity() : v.value;
}

// generator rows, as in the config files
EntropyPipeline pipeline(const SymplecticHilbertSpace& space, const std::optional<Eigen::MatrixXd>& gens) {
  auto pure = PureSpace::purify(space);
  if (!gens) return entropy_pipeline(pure, base_subspace(pure));
  return entropy_pipeline(pure, span_columns(pure, gens->transpose()));
}

py::dict matrix_dict(const PureSpace& p) {
  py::dict d;
  d["i"] = p.i_matrix();
  d["tau_plus"] = p.tau_plus();
  d["D"] = p.D();
  d["absD"] = p.absD();
  d["C"] = p.C();
  d["padded"] = p.padded();
  return d;
}

}  // namespace

PYBIND11_MODULE(_modent, m) {
  m.doc() = "Relative entropy of coherent states on symplectic Hilbert spaces";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<SymplecticHilbertSpace>(m, "Space")
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, std::optional<double>>(), py::arg("tau"),
           py::arg("sigma"), py::arg("rel_tol") = py::none())
      .def_property_readonly("dim", &SymplecticHilbertSpace::dim)
      .def_property_readonly("tau", &SymplecticHilbertSpace::tau_gram)
      .def_property_readonly("sigma", &SymplecticHilbertSpace::sigma_form);

  m.def("oscillator_space", &oscillator_space, py::arg("m"));
  m.def("abelian_space", &abelian_space, py::arg("mu"));

  m.def(
      "validate",
      [](const SymplecticHilbertSpace& s) {
        const ValidationReport r = validate_space(s);
        py::dict d;
        d["is_valid"] = r.is_valid;
        d["min_tau_eigenvalue"] = r.min_tau_eigenvalue;
        d["operator_norm_D"] = r.operator_norm_D;
        d["kernel_dim"] = r.kernel_dim;
        d["padding_required"] = r.padding_required;
        d["messages"] = r.messages;
        return d;
      },
      py::arg("space"));

  m.def(
      "purify", [](const SymplecticHilbertSpace& s) { return matrix_dict(*PureSpace::purify(s)); },
      py::arg("space"), "Complex structure and polar pieces of the purification, user basis.");

  m.def(
      "decompose",
      [](const SymplecticHilbertSpace& s, const std::optional<Eigen::MatrixXd>& gens) {
        const EntropyPipeline p = pipeline(s, gens);
        py::dict d;
        d["dim_L"] = p.dec->L.dim();
        d["dim_La"] = p.dec->La.dim();
        d["dim_Lf"] = p.dec->Lf.dim();
        d["dim_Linf"] = p.dec->Linf.dim();
        d["dim_L0_plus"] = p.dec->L0plus.dim();
        d["P_a"] = p.dec->P_a_user();
        d["P_f"] = p.dec->P_f_user();
        d["Q"] = p.dec->Q_user();
        d["log_delta"] = p.md.log_delta_spectrum();
        return d;
      },
      py::arg("space"), py::arg("generators") = py::none());

  m.def(
      "entropy",
      [](const SymplecticHilbertSpace& s, const Eigen::VectorXd& f, const std::optional<Eigen::MatrixXd>& gens,
         const std::optional<Eigen::VectorXd>& g) {
        const EntropyPipeline p = pipeline(s, gens);
        if (!g) return as_float(p.form.value(VectorKplus(f)));
        return as_float(relative_entropy(p.form, VectorKplus(*g), VectorKplus(f)));
      },
      py::arg("space"), py::arg("f"), py::arg("generators") = py::none(), py::arg("g") = py::none(),
      "S(f) = S(coherent f || vacuum), or S(g || f) when g is given; inf when infinite.");

  m.def("arcoth", &arcoth);
  m.def(
      "oscillator_entropy",
      [](const std::vector<double>& mm, const std::vector<bool>& in_e, const Eigen::VectorXd& f) {
        return as_float(oscillator_entropy(mm, in_e, f));
      },
      py::arg("m"), py::arg("in_e"), py::arg("f"));
  m.def("abelian_entropy", &abelian_entropy, py::arg("mu"), py::arg("in_y"), py::arg("im_f"));

  m.def(
      "u1_entropy",
      [](double t, std::optional<double> beta, double center, double halfwidth, double amplitude) {
        const SmoothProbe f = SmoothProbe::bump(center, halfwidth, amplitude);
        return beta ? u1_kms_entropy(f, t, *beta) : u1_vacuum_entropy(f, t);
      },
      py::arg("t"), py::arg("beta") = py::none(), py::arg("center") = 0.0, py::arg("halfwidth") = 1.0,
      py::arg("amplitude") = 1.0, "Entropy of a bump probe for the half-line (t, inf).");

  m.def("commands", &cli::command_names);
  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config, const std::filesystem::path& out,
         std::optional<std::uint64_t> seed, int threads, const std::vector<std::string>& overrides) {
        cli::RunOptions o;
        o.command = command;
        o.config_path = config;
        o.out_dir = out;
        o.seed = seed;
        o.threads = threads;
        o.tol_overrides = overrides;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::run(o);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["status"] = r.status;
        d["error"] = r.error;
        d["files"] = r.files;
        d["summary"] = r.summary.dump();
        return d;
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      py::arg("tol_overrides") = std::vector<std::string>{});
}
