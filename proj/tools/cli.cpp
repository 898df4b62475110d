#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ucbf/config.hpp"
#include "ucbf/format.hpp"
#include "ucbf/trace_io.hpp"

namespace ucbf::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kFail = 2;
constexpr int kPremise = 3;

struct Common {
    std::string scenario;
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    int jobs = 1;
    bool json = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario, "built-in scenario id (A-F)");
    cmd->add_option("--config", c.config, "path to a scenario JSON document");
    cmd->add_option("--set", c.sets, "dotted-key override k=v (repeatable)");
    cmd->add_option("--out", c.out, "output directory (default $UCBF_OUT or ./out)");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--json", c.json, "print a JSON summary");
}

ScenarioConfig load_config(const Common& c) {
    if (c.scenario.empty() == c.config.empty()) {
        throw ConfigError("give exactly one of --scenario or --config");
    }
    ScenarioConfig cfg;
    if (!c.scenario.empty()) {
        cfg = builtin_config(c.scenario);
    } else {
        std::ifstream is(c.config);
        if (!is) {
            throw ConfigError("cannot open config " + c.config);
        }
        std::stringstream ss;
        ss << is.rdbuf();
        cfg = config_from_json(ss.str());
    }
    std::vector<std::pair<std::string, std::string>> sets;
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + s + "'");
        }
        sets.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return apply_overrides(cfg, sets);
}

fs::path output_dir(const Common& c) {
    fs::path dir = "out";
    if (const char* env = std::getenv("UCBF_OUT"); env != nullptr && *env != '\0') {
        dir = env;
    }
    if (!c.out.empty()) {
        dir = c.out;
    }
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot write " + path.string());
    }
    os << text;
}

// "key: value" lines to a flat JSON object; numbers stay numbers.
nlohmann::json text_to_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::object();
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto colon = line.find(": ");
        if (colon == std::string::npos) {
            continue;
        }
        const std::string key = line.substr(0, colon);
        const std::string value = line.substr(colon + 2);
        char* end = nullptr;
        const double d = std::strtod(value.c_str(), &end);
        if (end != value.c_str() && *end == '\0' && std::isfinite(d)) {
            j[key] = d;
        } else if (j.contains(key)) {
            if (!j[key].is_array()) {
                j[key] = nlohmann::json::array({j[key]});
            }
            j[key].push_back(value);
        } else {
            j[key] = value;
        }
    }
    return j;
}

std::string premise_text(const PremiseReport& p) {
    std::ostringstream os;
    os << "premise_h0: " << fmt_double(p.h0) << '\n';
    os << "premise_threshold: " << fmt_double(p.threshold) << '\n';
    os << "premise_gain_bound: " << fmt_double(p.gain_bound) << '\n';
    os << "premise_admissible: " << (p.admissible ? "true" : "false") << '\n';
    os << "premise_start_inside: " << (p.start_inside ? "true" : "false") << '\n';
    for (const auto& prob : p.problems) {
        os << "premise_problem: " << prob << '\n';
    }
    return os.str();
}

int cmd_run(const Common& c, std::ostream& out, std::ostream& err) {
    const ScenarioConfig cfg = load_config(c);
    const Scenario sc = build_scenario(cfg);
    const fs::path dir = output_dir(c);

    PremiseReport prem;
    try {
        prem = check_premises(sc);
    } catch (const InfeasibleStart& e) {
        err << "premise violated: " << e.what() << '\n';
        return kPremise;
    }
    const VerificationReport cert = verify_scenario(sc, c.jobs);
    write_text(dir / "certificate.txt", cert.to_text());
    if (!prem.ok() || !cert.pass) {
        for (const auto& p : prem.problems) {
            err << "premise violated: " << p << '\n';
        }
        if (!cert.pass) {
            err << "premise violated: grid certificate FAIL, min margin " << fmt_double(cert.min_margin) << '\n';
        }
        write_text(dir / "report.txt", premise_text(prem) + "certificate: " + (cert.pass ? "PASS" : "FAIL") + '\n');
        return kPremise;
    }

    const RunResult res = run(sc);
    write_trace_csv((dir / "trace.csv").string(), sc, res.trace);
    const std::string report = res.report.to_text() + premise_text(prem);
    write_text(dir / "report.txt", report);
    if (c.json) {
        out << text_to_json(report).dump(2) << '\n';
    } else {
        out << report;
    }
    return res.report.invariance_pass ? kPass : kFail;
}

int cmd_verify(const Common& c, std::ostream& out) {
    const ScenarioConfig cfg = load_config(c);
    const Scenario sc = build_scenario(cfg);
    const VerificationReport cert = verify_scenario(sc, c.jobs);
    const fs::path dir = output_dir(c);
    write_text(dir / "certificate.txt", cert.to_text());
    if (c.json) {
        out << text_to_json(cert.to_text()).dump(2) << '\n';
    } else {
        out << cert.to_text();
    }
    return cert.pass ? kPass : kFail;
}

int cmd_sweep(const Common& c, const std::string& param, const std::vector<double>& values, std::ostream& out) {
    if (values.empty()) {
        throw ConfigError("sweep: --values must list at least one value");
    }
    const ScenarioConfig cfg = load_config(c);
    const Scenario sc = build_scenario(cfg);
    const SweepParam p = sweep_param_from_string(param);
    const auto rows = sweep(sc, p, values, c.jobs);

    std::ostringstream csv;
    csv << "param,value,admissible,premise_ok,invariance_verdict,min_h,min_barrier_like_margin,rho_max,aborted,"
           "diff_to_finer,convergence_ratio\n";
    bool all_pass = true;
    for (const auto& r : rows) {
        csv << param << ',' << fmt_double(r.value) << ',' << (r.admissible ? 1 : 0) << ',' << (r.premise_ok ? 1 : 0)
            << ',' << (r.report.invariance_pass ? "PASS" : "FAIL") << ',' << fmt_double(r.report.min_h) << ','
            << fmt_double(r.report.min_barrier_like_margin) << ',' << fmt_double(r.report.rho_max) << ','
            << (r.report.aborted ? 1 : 0) << ',' << (r.diff_to_finer ? fmt_double(*r.diff_to_finer) : "") << ','
            << (r.convergence_ratio ? fmt_double(*r.convergence_ratio) : "") << '\n';
        if (r.premise_ok && !r.report.invariance_pass) {
            all_pass = false;
        }
    }
    const fs::path dir = output_dir(c);
    write_text(dir / "sweep.csv", csv.str());
    out << csv.str();
    return all_pass ? kPass : kFail;
}

bool matches(const ScenarioConfig& c, const std::string& filter) {
    if (filter.empty() || c.id == filter) {
        return true;
    }
    return std::find(c.tags.begin(), c.tags.end(), filter) != c.tags.end();
}

int cmd_list(bool json, const std::string& filter, std::ostream& out) {
    std::vector<ScenarioConfig> picked;
    for (const auto& c : builtin_configs()) {
        if (matches(c, filter)) {
            picked.push_back(c);
        }
    }
    if (json) {
        out << gallery_json(picked) << '\n';
        return kPass;
    }
    for (const auto& c : picked) {
        out << c.id << "  " << c.description << '\n';
    }
    return kPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"adaptive safety filters with unmatched parameter uncertainty"};
    app.require_subcommand(1);

    Common run_opts;
    auto* run_cmd = app.add_subcommand("run", "simulate a scenario and evaluate the monitors");
    add_common(run_cmd, run_opts);

    Common verify_opts;
    auto* verify_cmd = app.add_subcommand("verify", "grid-verify the barrier condition");
    add_common(verify_cmd, verify_opts);

    Common sweep_opts;
    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario over a list of parameter values");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--param", sweep_param, "gamma | eta | sigma | dt")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->delimiter(',');

    bool list_json = false;
    std::string list_filter;
    auto* list_cmd = app.add_subcommand("list", "print the built-in scenario gallery");
    list_cmd->add_flag("--json", list_json, "machine-readable gallery");
    list_cmd->add_option("--filter", list_filter, "id or tag");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (*run_cmd) return cmd_run(run_opts, out, err);
        if (*verify_cmd) return cmd_verify(verify_opts, out);
        if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_param, sweep_values, out);
        if (*list_cmd) return cmd_list(list_json, list_filter, out);
    } catch (const PremiseViolation& e) {
        err << "premise violated: " << e.what() << '\n';
        return kPremise;
    } catch (const InfeasibleStart& e) {
        err << "premise violated: " << e.what() << '\n';
        return kPremise;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace ucbf::cli
