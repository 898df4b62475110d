#include "ucbf/trace_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "ucbf/format.hpp"

namespace ucbf {

namespace {

void indexed(std::vector<std::string>& cols, const std::string& stem, int count) {
    for (int i = 0; i < count; ++i) {
        cols.push_back(stem + "_" + std::to_string(i));
    }
}

QPStatus status_from_string(const std::string& s) {
    if (s == "optimal") return QPStatus::Optimal;
    if (s == "infeasible") return QPStatus::Infeasible;
    if (s == "unbounded_guard") return QPStatus::UnboundedGuard;
    throw ConfigError("trace: unknown qp status '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

int count_prefix(const std::map<std::string, std::size_t>& idx, const std::string& stem) {
    int n = 0;
    while (idx.count(stem + "_" + std::to_string(n)) != 0) {
        ++n;
    }
    return n;
}

}  // namespace

std::vector<std::string> trace_columns(const Scenario& sc) {
    const auto& m = sc.model;
    std::vector<std::string> cols{"t"};
    indexed(cols, "x", m.n);
    indexed(cols, "theta_hat", m.p);
    cols.push_back("rho");
    indexed(cols, "u", m.m);
    cols.push_back("delta");
    cols.push_back("h");
    if (sc.sliding) {
        cols.push_back("s");
    }
    for (const char* c : {"barrier_like", "effective_gain", "threshold", "qp_status", "clamp_fired"}) {
        cols.emplace_back(c);
    }
    if (sc.clf) {
        indexed(cols, "phi_hat", m.p);
        cols.emplace_back("varrho");
    }
    if (sc.estimator) {
        indexed(cols, "bound_lower", m.p);
        indexed(cols, "bound_upper", m.p);
    }
    for (const char* c : {"rho_dot", "transient", "predictor_residual", "qp_active", "rho_held"}) {
        cols.emplace_back(c);
    }
    return cols;
}

void write_trace_csv(std::ostream& os, const Scenario& sc, const Trace& trace) {
    const auto cols = trace_columns(sc);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        os << (i ? "," : "") << cols[i];
    }
    os << '\n';
    const auto vec = [&os](const Vec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            os << ',' << fmt_double(v[i]);
        }
    };
    for (const auto& r : trace.records) {
        os << fmt_double(r.t);
        vec(r.x);
        vec(r.theta_hat);
        os << ',' << fmt_double(r.rho);
        vec(r.u);
        os << ',' << fmt_double(r.delta) << ',' << fmt_double(r.h);
        if (sc.sliding) {
            os << ',' << fmt_double(r.s.value_or(0.0));
        }
        os << ',' << fmt_double(r.barrier_like) << ',' << fmt_double(r.effective_gain) << ','
           << fmt_double(r.threshold) << ',' << to_string(r.qp_status) << ',' << (r.clamp_fired ? 1 : 0);
        if (sc.clf) {
            vec(r.phi_hat);
            os << ',' << fmt_double(r.varrho);
        }
        if (sc.estimator) {
            vec(r.bound_lower);
            vec(r.bound_upper);
        }
        os << ',' << fmt_double(r.rho_dot) << ',' << fmt_double(r.transient) << ','
           << fmt_double(r.predictor_residual) << ',' << r.qp_active << ',' << (r.rho_held ? 1 : 0) << '\n';
    }
}

void write_trace_csv(const std::string& path, const Scenario& sc, const Trace& trace) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open " + path + " for writing");
    }
    write_trace_csv(os, sc, trace);
}

Trace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("trace: empty file");
    }
    const auto header = split(line);
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < header.size(); ++i) {
        idx[header[i]] = i;
    }
    const int n = count_prefix(idx, "x");
    const int p = count_prefix(idx, "theta_hat");
    const int m = count_prefix(idx, "u");
    const int np = count_prefix(idx, "phi_hat");
    const int nb = count_prefix(idx, "bound_lower");
    const bool has_s = idx.count("s") != 0;
    const bool has_varrho = idx.count("varrho") != 0;

    Trace trace;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ConfigError("trace: row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(header.size()));
        }
        const auto num = [&](const std::string& col) { return std::stod(cells.at(idx.at(col))); };
        const auto vec = [&](const std::string& stem, int count) {
            Vec v(count);
            for (int i = 0; i < count; ++i) {
                v[i] = num(stem + "_" + std::to_string(i));
            }
            return v;
        };
        TraceRecord r;
        r.t = num("t");
        r.x = vec("x", n);
        r.theta_hat = vec("theta_hat", p);
        r.rho = num("rho");
        r.u = vec("u", m);
        r.delta = num("delta");
        r.h = num("h");
        if (has_s) {
            r.s = num("s");
        }
        r.barrier_like = num("barrier_like");
        r.effective_gain = num("effective_gain");
        r.threshold = num("threshold");
        r.qp_status = status_from_string(cells.at(idx.at("qp_status")));
        r.clamp_fired = cells.at(idx.at("clamp_fired")) == "1";
        if (np > 0) {
            r.phi_hat = vec("phi_hat", np);
        }
        if (has_varrho) {
            r.varrho = num("varrho");
        }
        if (nb > 0) {
            r.bound_lower = vec("bound_lower", nb);
            r.bound_upper = vec("bound_upper", nb);
        }
        r.rho_dot = num("rho_dot");
        r.transient = num("transient");
        r.predictor_residual = num("predictor_residual");
        r.qp_active = cells.at(idx.at("qp_active"));
        r.rho_held = cells.at(idx.at("rho_held")) == "1";
        trace.records.push_back(std::move(r));
    }
    return trace;
}

Trace read_trace_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open " + path);
    }
    return read_trace_csv(is);
}

}  // namespace ucbf
