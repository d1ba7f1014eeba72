#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "liborforge/affine.hpp"
#include "liborforge/cli.hpp"
#include "liborforge/drift_engine.hpp"
#include "liborforge/errors.hpp"
#include "liborforge/simulation.hpp"
#include "liborforge/spec_document.hpp"

namespace py = pybind11;
using namespace liborforge;

namespace {

SimulationConfig make_config(std::size_t paths, std::uint64_t seed, double step, int workers) {
    SimulationConfig c;
    c.path_count = paths;
    c.master_seed = seed;
    c.time_step = step;
    c.worker_count = workers;
    return c;
}

AtomicJumpMeasure scalar_atoms(const std::vector<std::pair<double, double>>& atoms) {
    std::vector<JumpAtom> out;
    for (const auto& [size, intensity] : atoms) out.push_back({Vector::Constant(1, size), intensity});
    return AtomicJumpMeasure(1, std::move(out));
}

py::dict solution_dict(const RiccatiSolution& s) {
    py::dict d;
    d["u"] = s.u;
    d["t"] = s.grid;
    d["phi"] = s.phi;
    d["psi"] = s.psi;
    return d;
}

}  // namespace

PYBIND11_MODULE(_liborforge, m) {
    m.doc() = "Arbitrage-free LIBOR and forward-price models: drifts, measure changes, Riccati flows, simulation";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto invariant = py::register_exception<InvariantError>(m, "InvariantError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", invariant.ptr());
    py::register_exception<IndexError>(m, "TenorIndexError", invariant.ptr());
    py::register_exception<ContractError>(m, "ContractError", invariant.ptr());
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<RangeError>(m, "RangeError", numerical.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", numerical.ptr());
    py::register_exception<CalibrationError>(m, "CalibrationError", numerical.ptr());
    py::register_exception<SimulationError>(m, "SimulationError", numerical.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", error.ptr());

    py::class_<PathGrid>(m, "PathGrid")
        .def_readonly("times", &PathGrid::times)
        .def_readonly("path_count", &PathGrid::path_count)
        .def_readonly("dimension", &PathGrid::dimension)
        .def_property_readonly("states", [](const PathGrid& g) {
            py::array_t<double> a({g.path_count, g.times.size(), static_cast<std::size_t>(g.dimension)});
            std::copy(g.states.begin(), g.states.end(), a.mutable_data());
            return a;
        });

    py::class_<ModelSpec>(m, "Model")
        .def_static("from_file", &parse_spec, py::arg("path"))
        .def_static("from_json", [](const std::string& text) { return build_model(parse_spec_text(text)); },
                    py::arg("text"))
        .def_property_readonly("family", [](const ModelSpec& s) { return to_string(s.family()); })
        .def_property_readonly("construction", [](const ModelSpec& s) { return to_string(s.construction()); })
        .def_property_readonly("dimension", &ModelSpec::dimension)
        .def_property_readonly("rate_count", &ModelSpec::rate_count)
        .def_property_readonly("dates", [](const ModelSpec& s) { return s.tenor().dates(); })
        .def_property_readonly("initial_state", [](const ModelSpec& s) { return Vector(s.initial_state()); })
        .def("with_zero_drift", &ModelSpec::with_zero_drift, py::arg("on") = true)
        .def("backward_value", [](const ModelSpec& s, int k, double t,
                                  const Vector& x) { return s.backward_functional(k).value(t, x); })
        .def("terminal_value", [](const ModelSpec& s, int k, double t,
                                  const Vector& x) { return s.terminal_functional(k).value(t, x); })
        .def("drift_residual_backward",
             py::overload_cast<const ModelSpec&, int, double, const Vector&>(&drift_residual_backward), py::arg("k"),
             py::arg("t"), py::arg("x"))
        .def("drift_residual_terminal",
             py::overload_cast<const ModelSpec&, int, double, const Vector&>(&drift_residual_terminal), py::arg("k"),
             py::arg("t"), py::arg("x"))
        .def(
            "validate",
            [](const ModelSpec& s, int samples, std::uint64_t seed) {
                AuditOptions o;
                o.samples = samples;
                o.seed = seed;
                const ValidationReport r = validate_assumptions(s, o);
                py::list checks;
                for (const auto& c : r.checks) {
                    py::dict d;
                    d["name"] = c.name;
                    d["value"] = c.value;
                    d["passed"] = c.passed;
                    d["informational"] = c.informational;
                    d["detail"] = c.detail;
                    checks.append(d);
                }
                py::dict out;
                out["verdict"] = r.verdict();
                out["c1"] = r.c1;
                out["c2"] = r.c2;
                out["checks"] = checks;
                return out;
            },
            py::arg("samples") = 1000, py::arg("seed") = 20240101)
        .def(
            "residual_sweep",
            [](const ModelSpec& s, int samples, std::uint64_t seed) {
                AuditOptions o;
                o.seed = seed;
                const ResidualSweep r = drift_residual_sweep(s, samples, o);
                py::dict out;
                out["max_backward"] = r.max_backward;
                out["max_terminal"] = r.max_terminal;
                out["tolerance"] = r.tolerance;
                out["passed"] = r.passed;
                return out;
            },
            py::arg("samples") = 1000, py::arg("seed") = 20240101)
        .def(
            "simulate",
            [](const ModelSpec& s, std::size_t paths, std::uint64_t seed, double step, int workers) {
                py::gil_scoped_release release;
                return simulate_driver(s, make_config(paths, seed, step, workers));
            },
            py::arg("paths") = 1000, py::arg("seed") = 1, py::arg("step") = 0.0, py::arg("workers") = 1)
        .def("forward_prices", &forward_price_paths, py::arg("grid"), py::arg("k"))
        .def(
            "martingale_test",
            [](const ModelSpec& s, std::size_t paths, std::uint64_t seed, double step, int workers,
               std::vector<double> checkpoints) {
                MartingaleReport r;
                {
                    py::gil_scoped_release release;
                    r = martingale_test(s, make_config(paths, seed, step, workers), std::move(checkpoints));
                }
                py::list rows;
                for (const auto& row : r.rows) {
                    py::dict d;
                    d["k"] = row.k;
                    d["t"] = row.t;
                    d["mean"] = row.mean;
                    d["target"] = row.target;
                    d["std_error"] = row.std_error;
                    d["z"] = row.z;
                    d["passed"] = row.passed;
                    rows.append(d);
                }
                return rows;
            },
            py::arg("paths") = 100000, py::arg("seed") = 1, py::arg("step") = 0.0, py::arg("workers") = 1,
            py::arg("checkpoints") = std::vector<double>{})
        .def(
            "caplet_prices",
            [](const ModelSpec& s, const std::vector<double>& strikes, std::size_t paths, std::uint64_t seed,
               double step, int workers) {
                std::vector<CapletQuote> quotes;
                {
                    py::gil_scoped_release release;
                    quotes = caplet_prices(s, make_config(paths, seed, step, workers), strikes);
                }
                py::list out;
                for (const auto& q : quotes) {
                    py::dict d;
                    d["k"] = q.k;
                    d["strike"] = q.strike;
                    d["price"] = q.price;
                    d["std_error"] = q.std_error;
                    out.append(d);
                }
                return out;
            },
            py::arg("strikes") = std::vector<double>{0.0}, py::arg("paths") = 100000, py::arg("seed") = 1,
            py::arg("step") = 0.0, py::arg("workers") = 1);

    py::class_<AffineDriverSpec>(m, "AffineDriver")
        .def(py::init([](double b_tilde, double beta, double alpha,
                         const std::vector<std::pair<double, double>>& constant_jumps,
                         const std::vector<std::pair<double, double>>& state_jumps) {
                 return AffineDriverSpec(b_tilde, beta, alpha, scalar_atoms(constant_jumps), scalar_atoms(state_jumps));
             }),
             py::arg("b_tilde"), py::arg("beta"), py::arg("alpha"),
             py::arg("constant_jumps") = std::vector<std::pair<double, double>>{},
             py::arg("state_jumps") = std::vector<std::pair<double, double>>{})
        .def_property_readonly("pure_drift", &AffineDriverSpec::pure_drift);

    m.def(
        "riccati_solve",
        [](const AffineDriverSpec& d, double u, double horizon, double step) {
            return solution_dict(riccati_solve(d, u, horizon, step));
        },
        py::arg("driver"), py::arg("u"), py::arg("horizon"), py::arg("step"));
    m.def("mgf", &mgf, py::arg("driver"), py::arg("u"), py::arg("t"), py::arg("x") = 1.0);
    m.def(
        "calibrate_u",
        [](const AffineDriverSpec& d, const std::vector<double>& dates, const std::vector<double>& bond_prices) {
            return calibrate_u(d, InitialCurve(TenorStructure(dates), bond_prices));
        },
        py::arg("driver"), py::arg("dates"), py::arg("bond_prices"));

    m.def("canonicalize_spec", [](const std::string& text) { return serialize_spec(parse_spec_text(text)); },
          py::arg("text"));
    m.def(
        "run_cli",
        [](const std::string& command, const std::string& spec, const std::string& out_dir, py::object seed,
           py::object paths, bool zero_drift, py::object workers) {
            CliOptions o;
            o.spec_path = spec;
            o.out_dir = out_dir;
            o.zero_drift = zero_drift;
            if (!seed.is_none()) o.seed = seed.cast<std::uint64_t>();
            if (!paths.is_none()) o.paths = paths.cast<std::size_t>();
            if (!workers.is_none()) o.workers = workers.cast<int>();
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_command(command, o, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("command"), py::arg("spec"), py::arg("out_dir") = ".", py::arg("seed") = py::none(),
        py::arg("paths") = py::none(), py::arg("zero_drift") = false, py::arg("workers") = py::none());
}
