#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vmplace/bench.hpp"
#include "vmplace/cli.hpp"
#include "vmplace/version.hpp"

namespace py = pybind11;
using namespace vmplace;

namespace {

std::vector<VmSpec> specs(const std::vector<std::string>& names) {
    std::vector<VmSpec> out;
    for (const auto& n : names)
        out.push_back(VmSpec::parse(n));
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "vmplace core bindings";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.def(
        "categorize",
        [](const std::string& flavor, std::int64_t pm_cpu, std::int64_t pm_mem) {
            return std::string(to_string(categorize(VmSpec::parse(flavor), pm_cpu, pm_mem)));
        },
        py::arg("flavor"), py::arg("pm_cpu") = 128, py::arg("pm_mem") = 160);

    m.def(
        "alw",
        [](std::int64_t cpu, std::int64_t mem, const std::vector<std::string>& flavors) {
            const auto set = specs(flavors);
            const auto a = alw(Resources{cpu, mem}, set);
            return py::make_tuple(a.cpu, a.mem);
        },
        py::arg("cpu"), py::arg("mem"), py::arg("flavors"),
        "At-least waste (cpu, mem) of a residual over a flavor list such as ['12U8G'].");

    m.def(
        "solve_assignment",
        [](const std::vector<std::string>& flavors, std::int64_t pm_cpu, std::int64_t pm_mem, double lambda) {
            ExperimentConfig c;
            c.cluster.pm_cpu = pm_cpu;
            c.cluster.pm_mem = pm_mem;
            c.lambda = lambda;
            c.flavors = specs(flavors);
            const auto plan = cmd_solve_assign(c);
            py::dict d;
            d["c1"] = plan.split.c1;
            d["m1"] = plan.split.m1;
            d["c2"] = plan.split.c2;
            d["m2"] = plan.split.m2;
            d["objective"] = plan.objective;
            d["lambda"] = plan.lambda;
            return d;
        },
        py::arg("flavors"), py::arg("pm_cpu") = 128, py::arg("pm_mem") = 160, py::arg("lam") = 0.5);

    m.def(
        "run_experiment",
        [](const std::string& config_json) { return report_csv(cmd_run(parse_config(config_json))); },
        py::arg("config_json"), "Runs a JSON experiment config and returns the CSV report.");

    m.def(
        "heterogeneity",
        [](const std::string& config_json) { return report_csv(cmd_heterogeneity(parse_config(config_json))); },
        py::arg("config_json"), "Filter-and-examination report as CSV.");

    m.def(
        "gen_trace",
        [](const std::string& path, std::size_t length, std::uint64_t seed, double delete_prob, double burst_mean) {
            auto s = default_synth_config();
            s.length = length;
            s.seed = seed;
            s.delete_prob = delete_prob;
            s.burst_mean = burst_mean;
            cmd_gen_trace(s, path);
        },
        py::arg("path"), py::arg("length") = 20000, py::arg("seed") = 0, py::arg("delete_prob") = 0.3,
        py::arg("burst_mean") = 4.0);

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli_main(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one vmplace command; returns (exit_code, stdout, stderr).");
}
