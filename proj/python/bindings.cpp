#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ucbf/config.hpp"
#include "ucbf/qp.hpp"
#include "ucbf/sim.hpp"

namespace py = pybind11;
using namespace ucbf;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

// `source` is a built-in id or a JSON document.
ScenarioConfig resolve(const std::string& source, const Overrides& sets) {
    const auto first = source.find_first_not_of(" \t\r\n");
    ScenarioConfig cfg =
        (first != std::string::npos && source[first] == '{') ? config_from_json(source) : builtin_config(source);
    return apply_overrides(cfg, sets);
}

py::dict trace_arrays(const Trace& tr) {
    const auto n = static_cast<Eigen::Index>(tr.records.size());
    Vec t(n), rho(n), h(n), thr(n), bl(n), delta(n);
    Mat x, th, u;
    if (n > 0) {
        x.resize(n, tr.records[0].x.size());
        th.resize(n, tr.records[0].theta_hat.size());
        u.resize(n, tr.records[0].u.size());
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& r = tr.records[static_cast<std::size_t>(k)];
        t[k] = r.t;
        rho[k] = r.rho;
        h[k] = r.h;
        thr[k] = r.threshold;
        bl[k] = r.barrier_like;
        delta[k] = r.delta;
        x.row(k) = r.x.transpose();
        th.row(k) = r.theta_hat.transpose();
        u.row(k) = r.u.transpose();
    }
    py::dict d;
    d["t"] = t;
    d["x"] = x;
    d["theta_hat"] = th;
    d["rho"] = rho;
    d["u"] = u;
    d["delta"] = delta;
    d["h"] = h;
    d["threshold"] = thr;
    d["barrier_like"] = bl;
    d["aborted"] = tr.aborted;
    d["abort_reason"] = tr.abort_reason;
    return d;
}

py::dict qp_dict(const QPSolution& s) {
    py::dict d;
    d["u"] = s.u;
    d["delta"] = s.delta;
    d["status"] = to_string(s.status);
    d["kkt_residual"] = s.kkt_residual;
    d["active_set"] = s.active_set;
    d["multipliers"] = s.multipliers;
    d["certificate_rows"] = s.certificate_rows;
    return d;
}

std::vector<ConstraintRow> to_rows(const std::vector<std::tuple<Vec, double, bool>>& rows) {
    std::vector<ConstraintRow> out;
    for (const auto& [a, b, soft] : rows) {
        out.push_back({a, b, soft ? ConstraintRow::Kind::TrackingSoft : ConstraintRow::Kind::SafetyHard});
    }
    return out;
}

std::optional<Box> to_box(const std::optional<Vec>& lower, const std::optional<Vec>& upper) {
    if (!lower && !upper) {
        return std::nullopt;
    }
    if (!lower || !upper) {
        throw ConfigError("input box needs both lower and upper");
    }
    Box b{*lower, *upper};
    b.validate("input_box");
    return b;
}

}  // namespace

PYBIND11_MODULE(_ucbf, m) {
    m.doc() = "adaptive safety filters under unmatched parametric uncertainty";

    auto base = py::register_exception<Error>(m, "UcbfError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<InfeasibleStart>(m, "InfeasibleStart", base.ptr());
    py::register_exception<UnsupportedFeature>(m, "UnsupportedFeature", base.ptr());
    py::register_exception<InconsistentMeasurement>(m, "InconsistentMeasurement", base.ptr());

    m.def("gallery_json", [] { return gallery_json(builtin_configs()); });
    m.def("builtin_config_json", [](const std::string& id) { return config_to_json(builtin_config(id)); },
          py::arg("id"));
    m.def(
        "resolve_config_json",
        [](const std::string& source, const Overrides& sets) { return config_to_json(resolve(source, sets)); },
        py::arg("source"), py::arg("sets") = Overrides{});

    m.def(
        "check_premises",
        [](const std::string& source, const Overrides& sets) {
            const PremiseReport p = check_premises(build_scenario(resolve(source, sets)));
            py::dict d;
            d["h0"] = p.h0;
            d["threshold"] = p.threshold;
            d["gain_bound"] = p.gain_bound;
            d["admissible"] = p.admissible;
            d["start_inside"] = p.start_inside;
            d["problems"] = p.problems;
            d["ok"] = p.ok();
            return d;
        },
        py::arg("source"), py::arg("sets") = Overrides{});

    m.def(
        "verify",
        [](const std::string& source, const Overrides& sets, int jobs) {
            const Scenario sc = build_scenario(resolve(source, sets));
            VerificationReport r;
            {
                py::gil_scoped_release release;
                r = verify_scenario(sc, jobs);
            }
            py::dict d;
            d["pass"] = r.pass;
            d["min_margin"] = r.min_margin;
            d["points_evaluated"] = r.points_evaluated;
            d["points_in_domain"] = r.points_in_domain;
            d["argmin_x"] = r.argmin_x;
            d["argmin_theta"] = r.argmin_theta;
            d["text"] = r.to_text();
            return d;
        },
        py::arg("source"), py::arg("sets") = Overrides{}, py::arg("jobs") = 1);

    m.def(
        "run",
        [](const std::string& source, const Overrides& sets) {
            const Scenario sc = build_scenario(resolve(source, sets));
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run(sc);
            }
            py::dict d;
            d["pass"] = res.report.invariance_pass;
            d["report_text"] = res.report.to_text();
            d["trace"] = trace_arrays(res.trace);
            return d;
        },
        py::arg("source"), py::arg("sets") = Overrides{});

    m.def(
        "sweep",
        [](const std::string& source, const Overrides& sets, const std::string& param,
           const std::vector<double>& values, int jobs) {
            const Scenario sc = build_scenario(resolve(source, sets));
            const SweepParam p = sweep_param_from_string(param);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = sweep(sc, p, values, jobs);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["value"] = r.value;
                d["admissible"] = r.admissible;
                d["premise_ok"] = r.premise_ok;
                d["pass"] = r.report.invariance_pass;
                d["min_h"] = r.report.min_h;
                d["rho_max"] = r.report.rho_max;
                d["final_state"] = r.final_state;
                d["diff_to_finer"] = r.diff_to_finer;
                d["convergence_ratio"] = r.convergence_ratio;
                out.append(d);
            }
            return out;
        },
        py::arg("source"), py::arg("sets") = Overrides{}, py::arg("param") = "gamma",
        py::arg("values") = std::vector<double>{}, py::arg("jobs") = 1);

    m.def(
        "solve_min_norm",
        [](const std::vector<std::tuple<Vec, double, bool>>& rows, double slack_weight,
           const std::optional<Vec>& lower, const std::optional<Vec>& upper) {
            return qp_dict(solve_min_norm(to_rows(rows), slack_weight, to_box(lower, upper)));
        },
        py::arg("rows"), py::arg("slack_weight") = 100.0, py::arg("lower") = py::none(),
        py::arg("upper") = py::none());

    m.def(
        "pointwise_filter",
        [](const Vec& u_nominal, const std::vector<std::tuple<Vec, double, bool>>& rows,
           const std::optional<Vec>& lower, const std::optional<Vec>& upper) {
            return qp_dict(pointwise_filter(u_nominal, to_rows(rows), to_box(lower, upper)));
        },
        py::arg("u_nominal"), py::arg("rows"), py::arg("lower") = py::none(), py::arg("upper") = py::none());

    m.def("project_halfspace", &project_halfspace, py::arg("u"), py::arg("a"), py::arg("b"));
    m.def("tightened_threshold", &tightened_threshold, py::arg("gamma"), py::arg("vartheta"));
}
