#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "langevin_mdp/cli.hpp"
#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/limit_flow.hpp"
#include "langevin_mdp/mc_harness.hpp"
#include "langevin_mdp/models.hpp"
#include "langevin_mdp/sde_sim.hpp"
#include "langevin_mdp/skeleton_rate.hpp"

namespace py = pybind11;
using namespace lmdp;

namespace {

using ArrayXd = Eigen::VectorXd;
using ArrayXXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Vec to_vec(const ArrayXd& x, int dim, const char* what) {
  if (x.size() != dim) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " has length " + std::to_string(x.size()) + ", expected " + std::to_string(dim));
  }
  return Vec(x);
}

ArrayXd from_vec(const Vec& v) { return ArrayXd(v); }

// JSON reports cross the boundary as plain Python objects.
py::object to_python(const Json& j) {
  static const auto* loads = new py::object(py::module_::import("json").attr("loads"));
  return (*loads)(j.dump());
}

Path limit_path(const CoefficientModel& m, const ArrayXd& q, double horizon, int steps) {
  return solve_limit_ode(m, to_vec(q, m.dim, "q"), TimeGrid(horizon, steps));
}

SimConfig make_sim(const CoefficientModel& m, double epsilon, const ArrayXd& q, const std::optional<ArrayXd>& p,
                   double horizon, int steps, double kappa, std::uint64_t seed, double cap, int min_substeps) {
  const Vec q0 = to_vec(q, m.dim, "q");
  const Vec p0 = p ? to_vec(*p, m.dim, "p") : Vec(Vec::Zero(m.dim));
  return SimConfig::make(epsilon, kappa, TimeGrid(horizon, steps), q0, p0, seed, cap, min_substeps);
}

Control make_control(const CoefficientModel& m, const TimeGrid& g, const std::optional<ArrayXXd>& rates) {
  if (!rates) return Control::zero(g, m.dim);
  if (rates->cols() != m.dim) throw Error(ErrorKind::InvalidArgument, "control must have one column per dimension");
  if (rates->rows() == g.steps()) return Control(g, *rates);
  return Control::piecewise(g, *rates);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Moderate deviations of small-mass Langevin dynamics with state-dependent damping";
  mod.attr("__version__") = kVersion;

  // Kept alive for the interpreter lifetime; no destructor runs at exit.
  static const auto* lmdp_error = new py::exception<Error>(mod, "LmdpError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(lmdp_error->ptr());
      py::object inst = type(e.what());
      inst.attr("kind") = to_string(e.kind());
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  py::class_<CoefficientModel>(mod, "Model")
      .def_static(
          "builtin",
          [](const std::string& name, const ModelParams& params) { return make_builtin_model(name, params); },
          py::arg("name"), py::arg("params") = ModelParams{})
      .def_readonly("name", &CoefficientModel::name)
      .def_readonly("dim", &CoefficientModel::dim)
      .def_readonly("lipschitz", &CoefficientModel::lipschitz)
      .def_readonly("alpha_min", &CoefficientModel::alpha_min)
      .def_readonly("alpha_max", &CoefficientModel::alpha_max)
      .def("drift", [](const CoefficientModel& m, const ArrayXd& x) { return from_vec(m.drift(to_vec(x, m.dim, "x"))); })
      .def("diffusion",
           [](const CoefficientModel& m, const ArrayXd& x) { return Eigen::MatrixXd(m.diffusion(to_vec(x, m.dim, "x"))); })
      .def("damping", [](const CoefficientModel& m, const ArrayXd& x) { return m.damping(to_vec(x, m.dim, "x")); })
      .def("__repr__", [](const CoefficientModel& m) {
        return "<Model " + m.name + " dim=" + std::to_string(m.dim) + ">";
      });

  mod.def("builtin_models", [] {
    py::list out;
    for (const auto& info : builtin_models()) out.append(py::make_tuple(info.name, info.summary, info.defaults));
    return out;
  });

  mod.def(
      "validate",
      [](const CoefficientModel& m, const ArrayXd& lower, const ArrayXd& upper, int samples, double tol,
         std::uint64_t seed) {
        const Box box{to_vec(lower, m.dim, "lower"), to_vec(upper, m.dim, "upper")};
        return to_python(to_json(validate_hypothesis(m, box, samples, tol, seed)));
      },
      py::arg("model"), py::arg("lower"), py::arg("upper"), py::arg("samples") = 2000, py::arg("tol") = 1e-6,
      py::arg("seed") = 0);

  mod.def(
      "limit_path",
      [](const CoefficientModel& m, const ArrayXd& q, double horizon, int steps) {
        return ArrayXXd(limit_path(m, q, horizon, steps).values);
      },
      py::arg("model"), py::arg("q"), py::arg("horizon") = 1.0, py::arg("steps") = 64,
      "Limit flow q0 on the grid, shape (steps + 1, dim).");

  mod.def(
      "skeleton_map",
      [](const CoefficientModel& m, const ArrayXd& q, const ArrayXXd& rates, double horizon) {
        const Path q0 = limit_path(m, q, horizon, static_cast<int>(rates.rows()));
        return ArrayXXd(skeleton_map(m, q0, make_control(m, q0.grid, rates)).values);
      },
      py::arg("model"), py::arg("q"), py::arg("control"), py::arg("horizon") = 1.0,
      "Skeleton path for a control given by its per-step derivative, shape (steps, dim).");

  mod.def(
      "rate_of_path",
      [](const CoefficientModel& m, const ArrayXd& q, const ArrayXXd& psi, double horizon) {
        const Path q0 = limit_path(m, q, horizon, static_cast<int>(psi.rows()) - 1);
        return to_python(to_json(rate_of_path(m, q0, Path(q0.grid, psi)), "path"));
      },
      py::arg("model"), py::arg("q"), py::arg("path"), py::arg("horizon") = 1.0);

  mod.def(
      "gramian",
      [](const CoefficientModel& m, const ArrayXd& q, double horizon, int steps) {
        const Path q0 = limit_path(m, q, horizon, steps);
        return Eigen::MatrixXd(controllability_gramian(m, q0, transition_family(m, q0)));
      },
      py::arg("model"), py::arg("q"), py::arg("horizon") = 1.0, py::arg("steps") = 64);

  mod.def(
      "terminal_rate",
      [](const CoefficientModel& m, const ArrayXd& q, const ArrayXd& x, double horizon, int steps) {
        const Path q0 = limit_path(m, q, horizon, steps);
        return to_python(to_json(terminal_rate(m, q0, transition_family(m, q0), to_vec(x, m.dim, "x")), "terminal"));
      },
      py::arg("model"), py::arg("q"), py::arg("x"), py::arg("horizon") = 1.0, py::arg("steps") = 64);

  mod.def(
      "exit_rate",
      [](const CoefficientModel& m, const ArrayXd& q, double delta, double horizon, int steps, int directions) {
        const Path q0 = limit_path(m, q, horizon, steps);
        Json j = to_json(exit_rate(m, q0, transition_family(m, q0), delta, {directions}), "exit");
        j["delta"] = delta;
        return to_python(j);
      },
      py::arg("model"), py::arg("q"), py::arg("delta"), py::arg("horizon") = 1.0, py::arg("steps") = 64,
      py::arg("directions") = 0);

  mod.def(
      "simulate",
      [](const CoefficientModel& m, double epsilon, const ArrayXd& q, const std::optional<ArrayXd>& p,
         const std::optional<ArrayXXd>& control, double horizon, int steps, double kappa, std::uint64_t seed,
         std::uint32_t sample, double cap, int min_substeps) {
        const SimConfig c = make_sim(m, epsilon, q, p, horizon, steps, kappa, seed, cap, min_substeps);
        const Control u = make_control(m, c.grid, control);
        const NoisePath w = sample_noise(c, sample, 0);
        const LangevinState s = simulate_langevin(m, c, w, u, Recording::Fine);
        const Path q0 = solve_limit_ode(m, c.q, c.grid);
        py::dict out;
        out["t"] = ArrayXd(Eigen::VectorXd::LinSpaced(steps + 1, 0.0, horizon));
        out["q"] = ArrayXXd(s.q.values);
        out["p"] = ArrayXXd(s.p.values);
        out["x"] = ArrayXXd(fluctuation_path(s.q, q0, c).values);
        out["substeps"] = c.substeps;
        out["remainder"] = to_python(to_json(remainder_decomposition(m, s, w, c, u), c));
        return out;
      },
      py::arg("model"), py::arg("epsilon"), py::arg("q"), py::arg("p") = py::none(), py::arg("control") = py::none(),
      py::arg("horizon") = 1.0, py::arg("steps") = 64, py::arg("kappa") = 0.25, py::arg("seed") = 0,
      py::arg("sample") = 0, py::arg("stiffness_cap") = 0.2, py::arg("min_substeps") = 1);

  mod.def(
      "exceedance",
      [](const CoefficientModel& m, double epsilon, const ArrayXd& q, double delta, long n, double horizon, int steps,
         double kappa, std::uint64_t seed, int threads) {
        const SimConfig c = make_sim(m, epsilon, q, std::nullopt, horizon, steps, kappa, seed, 0.2, 1);
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_exceedance(m, c, delta, n, {threads});
        }
        py::dict out;
        out["p_hat"] = e.probability;
        out["hits"] = e.hits;
        out["samples"] = e.samples;
        out["ci_lower"] = e.lower;
        out["ci_upper"] = e.upper;
        return out;
      },
      py::arg("model"), py::arg("epsilon"), py::arg("q"), py::arg("delta"), py::arg("n") = 1000,
      py::arg("horizon") = 1.0, py::arg("steps") = 64, py::arg("kappa") = 0.25, py::arg("seed") = 0,
      py::arg("threads") = 0);

  mod.def(
      "mdp_sweep",
      [](const CoefficientModel& m, const ArrayXd& q, double delta, const std::vector<double>& eps_list, long n,
         double horizon, int steps, double kappa, std::uint64_t seed, int threads) {
        check_eps_list(eps_list, 3);
        const SimConfig c = make_sim(m, eps_list.front(), q, std::nullopt, horizon, steps, kappa, seed, 0.2, 1);
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = mdp_slope_sweep(m, c, delta, eps_list, n, {threads});
        }
        return to_python(to_json(r, delta));
      },
      py::arg("model"), py::arg("q"), py::arg("delta"), py::arg("eps_list"), py::arg("n") = 10000,
      py::arg("horizon") = 1.0, py::arg("steps") = 64, py::arg("kappa") = 0.25, py::arg("seed") = 0,
      py::arg("threads") = 0);

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv = {"lmdp"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::ostringstream out, err;
        int status = 0;
        {
          py::gil_scoped_release release;
          status = run_cli(argv, out, err);
        }
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (status, stdout, stderr).");
}
