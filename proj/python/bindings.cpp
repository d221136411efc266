// Thin bindings: configs travel as {dotted key: string} dicts, results as plain dicts/lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pkslab/experiment.hpp"
#include "pkslab/ode.hpp"
#include "pkslab/run.hpp"
#include "pkslab/verify.hpp"

namespace py = pybind11;
using namespace pkslab;

namespace {

using Settings = std::map<std::string, std::string>;

SimConfig build(const Settings& s) {
    SimConfig c;
    for (const auto& [k, v] : s) apply_setting(c, k, v);
    return c;
}

Settings settings(const SimConfig& c) {
    Settings out;
    for (const auto& k : config_keys()) out[k] = get_setting(c, k);
    return out;
}

// columns keyed like run.csv, so notebooks and the csv agree
py::dict records(const RunResult& r) {
    const auto& cols = run_csv_columns();
    std::vector<std::vector<double>> data(cols.size() - 1);
    std::vector<std::string> status;
    for (const auto& rec : r.records) {
        std::string row = run_csv_row(rec);
        if (!row.empty() && row.back() == '\n') row.pop_back();
        std::stringstream ss(row);
        std::string cell;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            std::getline(ss, cell, ',');
            if (k + 1 == cols.size())
                status.push_back(cell);
            else
                data[k].push_back(std::stod(cell));
        }
    }
    py::dict d;
    for (std::size_t k = 0; k + 1 < cols.size(); ++k) d[py::str(cols[k])] = data[k];
    d[py::str(cols.back())] = status;
    return d;
}

py::dict simulate(const Settings& s) {
    SimConfig c = build(s);
    c.validate();
    RunResult r;
    {
        py::gil_scoped_release nogil;
        r = run_simulation(c);
    }
    py::dict out;
    out["status"] = to_string(r.status);
    out["reason"] = r.reason;
    out["steps"] = r.steps;
    out["records"] = records(r);
    out["fit"] = py::module_::import("json").attr("loads")(fit_json(r).dump());
    py::list checks;
    for (const auto& ch : run_checks(r)) {
        py::dict d;
        d["name"] = ch.name;
        d["value"] = ch.value;
        d["tolerance"] = ch.tolerance;
        d["asserted"] = ch.asserted;
        d["pass"] = ch.pass;
        checks.append(d);
    }
    out["checks"] = checks;
    return out;
}

py::list verify(const std::string& suite, const Settings& s) {
    SimConfig c = build(s);
    VerificationReport r;
    {
        py::gil_scoped_release nogil;
        r = run_suite(suite, c);
    }
    py::list out;
    for (const auto& ch : r.checks) {
        py::dict d;
        d["name"] = ch.name;
        d["pass"] = ch.pass;
        d["asserted"] = ch.asserted;
        d["worst"] = ch.worst;
        d["tolerance"] = ch.tolerance;
        d["samples"] = ch.samples;
        out.append(d);
    }
    return out;
}

py::dict ode(double h0, double m1, double A, double c1, double t_max) {
    OdeParams p;
    p.m1 = m1;
    p.A = A;
    p.c1 = c1;
    p.validate();
    OdeTrajectory tr = integrate_ode(h0, p, t_max);
    py::dict out;
    out["t"] = tr.t;
    out["h"] = tr.h;
    out["sup"] = tr.sup;
    out["h_star"] = tr.eq.h_star;
    out["h_2star"] = tr.eq.h_2star;
    out["stable"] = tr.eq.stable;
    return out;
}

py::dict kernel(double k1, double k2, double k3, double A, double b, const std::vector<double>& t) {
    py::dict out;
    std::vector<double> r1, amp, bound;
    for (const auto& row : kernel_table(k1, k2, k3, A, b, t)) {
        r1.push_back(row.r1);
        amp.push_back(row.amplitude);
        bound.push_back(row.bound);
    }
    out["t"] = t;
    out["r1"] = r1;
    out["amplitude"] = amp;
    out["bound"] = bound;
    out["constant"] = affine_constant(k1, A, b);
    return out;
}

}  // namespace

PYBIND11_MODULE(_pkslab, m) {
    m.attr("__version__") = kVersion;
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<OdeDomainError>(m, "OdeDomainError", PyExc_ValueError);

    m.def("default_config", [] { return settings(SimConfig{}); });
    m.def("resolve_config", [](const Settings& s) { return settings(build(s)); }, py::arg("settings"));
    m.def("simulate", &simulate, py::arg("settings") = Settings{});
    m.def("verify", &verify, py::arg("suite"), py::arg("settings") = Settings{});
    m.def("suite_names", &suite_names);
    m.def("run_csv_columns", &run_csv_columns);
    m.def("ode", &ode, py::arg("h0"), py::arg("m1") = 1.0, py::arg("A") = 1.0, py::arg("c1") = std::sqrt(2.0),
          py::arg("t_max") = 0.0);
    m.def("kernel", &kernel, py::arg("k1"), py::arg("k2"), py::arg("k3"), py::arg("A"), py::arg("b"), py::arg("t"));
    m.def("mass_threshold", &mass_threshold);
    m.def("mass_class", [](double M) { return to_string(mass_threshold_check(M)); }, py::arg("M"));
}
