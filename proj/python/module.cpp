#include <optional>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bdm/bd_chain.hpp"
#include "bdm/cli.hpp"
#include "bdm/config.hpp"
#include "bdm/config_space.hpp"
#include "bdm/engine.hpp"
#include "bdm/error.hpp"

namespace py = pybind11;
using namespace bdm;

namespace {

// Library errors surface in Python as BdmError with the code name in front of the message.
PyObject* g_error = nullptr;

py::tuple run_cli(const std::vector<std::string>& args)
{
    std::vector<std::string> argv{"bdmove"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, err;
    int code;
    {
        py::gil_scoped_release release;
        code = cli_main(argv, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

py::dict simulate_text(const std::string& toml_text, std::optional<std::uint64_t> seed)
{
    RunConfig rc = resolve_config(toml_text, Command::Simulate, Overrides{seed, std::nullopt});
    Configuration x0 = rc.initial_state();
    std::optional<TrajectoryLog> sim;
    {
        py::gil_scoped_release release;
        rc.model->validate(rc.seed, rc.run.validate_probes, rc.run.validate_max_count);
        sim.emplace(simulate(*rc.model, x0, rc.run.horizon, rc.run.checkpoints, rc.seed));
    }
    const TrajectoryLog& log = *sim;
    py::list events;
    for (const auto& e : log.events) {
        events.append(py::make_tuple(e.t, jump_type_name(e.kind), e.n));
    }
    py::list checkpoints;
    for (const auto& c : log.checkpoints) {
        checkpoints.append(py::make_tuple(c.t, c.state.points()));
    }
    py::dict d;
    d["model_hash"] = rc.model_hash;
    d["echo"] = rc.echo;
    d["events"] = events;
    d["checkpoints"] = checkpoints;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Birth-death-move process core";

    g_error = PyErr_NewException("bdmove.BdmError", PyExc_RuntimeError, nullptr);
    m.attr("BdmError") = py::handle(g_error);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            PyErr_SetString(g_error, e.what());
        }
    });

    py::class_<Domain, std::shared_ptr<Domain>>(m, "Domain")
        .def_static("box", [](std::vector<double> lo, std::vector<double> hi) {
            return std::make_shared<Domain>(Domain::box(std::move(lo), std::move(hi)));
        })
        .def_static("unbounded", [](std::size_t dim) { return std::make_shared<Domain>(Domain::unbounded(dim)); })
        .def_property_readonly("dim", &Domain::dim)
        .def_property_readonly("bounded", &Domain::bounded)
        .def("volume", &Domain::volume);

    py::class_<Configuration>(m, "Configuration")
        .def(py::init([](const std::shared_ptr<Domain>& w, const std::vector<std::vector<double>>& pts) {
                 return Configuration::from_points(w, pts);
             }),
             py::arg("domain"), py::arg("points") = std::vector<std::vector<double>>{})
        .def("__len__", &Configuration::count)
        .def("points", &Configuration::points)
        .def("insert", [](const Configuration& x, std::vector<double> p) { return x.insert(p); })
        .def("remove", &Configuration::remove)
        .def("__eq__", &Configuration::operator==)
        .def("__hash__", &Configuration::hash)
        .def("__repr__", [](const Configuration& x) { return "Configuration(n=" + std::to_string(x.count()) + ")"; });

    m.def("d1", &d1, "Optimal-matching distance with unit truncation and surplus penalty");
    m.def("hausdorff", &hausdorff);

    py::class_<SimpleChainSpec>(m, "SimpleChain")
        .def_static("constant", &SimpleChainSpec::constant)
        .def_static("mm_infinity", &SimpleChainSpec::mm_infinity)
        .def_static("explicit_arrays", &SimpleChainSpec::explicit_arrays)
        .def("with_cutoff", &SimpleChainSpec::with_cutoff)
        .def("beta", &SimpleChainSpec::beta)
        .def("delta", &SimpleChainSpec::delta)
        .def("ergodicity", [](const SimpleChainSpec& c) {
            auto r = ergodicity_check(c);
            return py::make_tuple(verdict_name(r.verdict), r.rationale);
        })
        .def("stationary_distribution", [](const SimpleChainSpec& c) { return stationary_distribution(c); })
        .def("expected_return_time", [](const SimpleChainSpec& c) { return expected_return_time(c); });

    m.def("run_cli", &run_cli, py::arg("args"),
          "Runs the bdmove command line with the given arguments; returns (exit_code, stdout, stderr).");
    m.def("simulate", &simulate_text, py::arg("config"), py::arg("seed") = py::none(),
          "Simulates one trajectory of the model described by a TOML document.");
    m.def("resolve", [](const std::string& text, const std::string& command) {
        auto c = parse_command(command);
        if (!c) {
            throw Error(Errc::ConfigError, "unknown command " + command);
        }
        RunConfig rc = resolve_config(text, *c);
        return py::make_tuple(rc.echo, rc.model_hash);
    });
}
