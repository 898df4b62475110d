#include "ucbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "ucbf/format.hpp"

namespace ucbf {

const ScalarField& Scenario::safety_field() const {
    return sliding ? sliding->field() : barrier.h;
}

double Scenario::static_threshold() const {
    return tightened_threshold(adaptation.gamma, params.vartheta_sup);
}

bool Scenario::has_predictor() const {
    return estimator.has_value() || adaptation.law == AdaptationLaw::Composite;
}

// -- premises and certificate -------------------------------------------------

PremiseReport check_premises(const Scenario& sc) {
    PremiseReport rep;
    sc.params.validate();
    sc.adaptation.validate();
    require_size(sc.x0, sc.model.n, "x0");
    require_size(sc.theta_hat0, sc.model.p, "theta_hat0");
    sc.model.check_shapes(sc.x0);

    rep.threshold = sc.static_threshold();
    rep.h0 = sc.safety_field().value(sc.x0, sc.theta_hat0);
    const double h_plain = sc.barrier.h.value(sc.x0, sc.theta_hat0);

    if (!sc.adaptation.scaling.contains(sc.rho0)) {
        rep.problems.push_back("rho0 = " + fmt_double(sc.rho0) + " lies outside the scaling function domain");
    }

    if (sc.adaptation.law == AdaptationLaw::RacbfBaseline) {
        // The baseline is studied from starts below the tightened level; only h >= 0 is required.
        rep.admissible = true;
        rep.start_inside = h_plain >= 0.0;
        if (!rep.start_inside) {
            rep.problems.push_back("h(x0) = " + fmt_double(h_plain) + " is negative");
        }
        return rep;
    }

    if (!(rep.h0 > 0.0)) {
        rep.problems.push_back("start value " + fmt_double(rep.h0) + " is not strictly positive");
        return rep;
    }
    rep.gain_bound = admissible_gain_lower_bound(sc.params.vartheta_sup, rep.h0);
    rep.admissible = gain_is_admissible(sc.adaptation.gamma, sc.params.vartheta_sup, rep.h0);
    if (!rep.admissible) {
        rep.problems.push_back("gamma = " + fmt_double(sc.adaptation.gamma) +
                               " is below the admissible bound " + fmt_double(rep.gain_bound));
    }
    rep.start_inside = rep.h0 >= rep.threshold && h_plain >= 0.0;
    if (!rep.start_inside) {
        rep.problems.push_back("x0 is not inside the tightened set: value " + fmt_double(rep.h0) +
                               " < threshold " + fmt_double(rep.threshold));
    }
    if (sc.sliding) {
        rep.initial_sets = initial_condition_sets_check(*sc.sliding, sc.barrier, sc.x0, sc.theta_hat0);
        if (rep.initial_sets) {
            for (std::size_t i = 0; i < rep.initial_sets->size(); ++i) {
                if (!(*rep.initial_sets)[i]) {
                    rep.problems.push_back("initial-condition set " + std::to_string(i) + " not satisfied");
                }
            }
        }
    }
    return rep;
}

VerificationReport verify_scenario(const Scenario& sc, int jobs) {
    if (!sc.input_box) {
        throw ConfigError("verification needs an input box");
    }
    const InputSet input = InputSet::make_box(sc.input_box->lower, sc.input_box->upper);
    const auto thetas = parameter_grid(sc.params.box(), sc.theta_points);
    VerifyOptions opts;
    opts.jobs = jobs;
    if (sc.adaptation.law == AdaptationLaw::RacbfBaseline) {
        opts.racbf_gamma = sc.adaptation.gamma;
    }
    if (sc.sliding) {
        return verify_houcbf_grid(sc.model, sc.barrier, *sc.sliding, sc.alpha, input, thetas, sc.grid, opts);
    }
    return verify_ucbf_grid(sc.model, sc.barrier.h, sc.alpha, input, thetas, sc.grid, opts);
}

// -- simulator ----------------------------------------------------------------

struct Simulator::Eval {
    Vec zdot;
    Vec u;
    double delta = 0.0;
    QPStatus status = QPStatus::Optimal;
    std::string active;
    AdaptationRates rates;
    bool rho_held = false;
    double rho_eval = 0.0;
    Vec epsilon;
    double predictor_residual = 0.0;
};

Simulator::Simulator(Scenario sc) : sc_(std::move(sc)) {
    const int n = sc_.model.n;
    const int p = sc_.model.p;
    int size = n + p + 1;
    i_theta_ = n;
    i_rho_ = n + p;
    if (sc_.clf) {
        require_size(sc_.clf->phi_hat0, p, "phi_hat0");
        i_phi_ = size;
        i_varrho_ = size + p;
        size += p + 1;
    }
    const bool filtered = sc_.estimator && sc_.estimator->mode == PredictorState::Mode::FilteredVelocity;
    if (filtered) {
        i_filter_ = size;
        size += n;
    }
    z_ = Vec::Zero(size);
    z_.head(n) = sc_.x0;
    z_.segment(i_theta_, p) = sc_.theta_hat0;
    z_[i_rho_] = sc_.rho0;
    if (sc_.clf) {
        z_.segment(i_phi_, p) = sc_.clf->phi_hat0;
        z_[i_varrho_] = sc_.clf->varrho0;
    }
    if (filtered) {
        z_.segment(i_filter_, n) = sc_.x0;
    }
    if (sc_.estimator) {
        bound_ = UncertaintyBound::from_parameters(sc_.params);
    }
}

double Simulator::threshold() const {
    if (bound_ && sc_.estimator->dynamic_threshold) {
        return dynamic_threshold(*bound_, sc_.adaptation.gamma);
    }
    return sc_.static_threshold();
}

Simulator::Eval Simulator::evaluate(double t, const Vec& z) const {
    const auto& m = sc_.model;
    const Vec x = z.head(m.n);
    const Vec theta_hat = z.segment(i_theta_, m.p);
    const double rho = z[i_rho_];
    const ScalarField& field = sc_.safety_field();
    const bool racbf = sc_.adaptation.law == AdaptationLaw::RacbfBaseline;

    AdaptationConfig acfg = sc_.adaptation;
    if (bound_ && acfg.projection) {
        acfg.projection = Box{bound_->lower, bound_->upper};
    }

    Eval ev;
    ev.rho_eval = std::max(rho, acfg.scaling.lower());

    // safety row
    const double thr = threshold();
    ConstraintRow row = safety_row(m, field, sc_.alpha, x, theta_hat, thr);
    if (racbf) {
        const Vec grad = field.grad_x(x, theta_hat);
        row.b = grad.dot(racbf_modified_drift(m, field, x, theta_hat, acfg.gamma)) +
                sc_.alpha(field.value(x, theta_hat) - thr);
    }
    std::vector<ConstraintRow> rows{row};

    QPSolution sol;
    if (sc_.controller.kind == ControllerSpec::Kind::MinNorm) {
        if (sc_.clf) {
            rows.push_back(tracking_row(m, sc_.clf->V, sc_.clf->Q, x, z.segment(i_phi_, m.p)));
        }
        sol = solve_min_norm(rows, sc_.controller.slack_weight, sc_.input_box);
    } else {
        const Vec u_nom = sc_.controller.nominal ? sc_.controller.nominal(t, x) : Vec::Zero(m.m);
        sol = pointwise_filter(u_nom, rows, sc_.input_box);
    }
    if (sol.status != QPStatus::Optimal && sc_.controller.halt_on_infeasible) {
        throw PremiseViolation("qp " + to_string(sol.status) + " at t = " + fmt_double(t) + ", x = " + fmt_vec(x));
    }
    ev.u = sol.u;
    ev.delta = sol.delta;
    ev.status = sol.status;
    for (std::size_t i = 0; i < sol.active_set.size(); ++i) {
        if (i > 0) {
            ev.active += ';';
        }
        ev.active += std::to_string(sol.active_set[i]);
    }

    const Vec xdot = eval_true_dynamics(m, x, ev.u, sc_.params.theta_true);

    // predictor
    if (sc_.has_predictor()) {
        Vec measured = xdot;
        if (i_filter_ >= 0) {
            measured = sc_.estimator->filter_pole * (x - z.segment(i_filter_, m.n));
        }
        ev.epsilon = predictor_error(m, x, measured, ev.u, theta_hat);
        const Vec identity = m.delta(x).transpose() * (theta_hat - sc_.params.theta_true);
        ev.predictor_residual = (ev.epsilon - identity).norm();
    }

    // adaptation
    switch (acfg.law) {
    case AdaptationLaw::Direct:
        ev.rates = direct_rates(m, field, acfg, x, theta_hat, ev.rho_eval);
        break;
    case AdaptationLaw::Leaky:
        ev.rates = leaky_rates(m, field, acfg, x, theta_hat, ev.rho_eval);
        break;
    case AdaptationLaw::Composite:
        ev.rates = composite_rates(m, field, acfg, x, theta_hat, ev.rho_eval, ev.epsilon);
        break;
    case AdaptationLaw::HighOrder:
        if (!sc_.sliding) {
            throw ConfigError("high_order law needs a sliding variable");
        }
        ev.rates = high_order_rates(m, *sc_.sliding, acfg, x, theta_hat, ev.rho_eval);
        break;
    case AdaptationLaw::RacbfBaseline:
        ev.rates.theta_hat_dot = racbf_rates(m, field, acfg, x, theta_hat);
        ev.rates.transient = field.grad_theta(x, theta_hat).dot(ev.rates.theta_hat_dot);
        ev.rates.rho_dot = 0.0;
        break;
    }
    double rho_dot = ev.rates.rho_dot;
    if (rho <= acfg.scaling.lower() && rho_dot < 0.0) {
        rho_dot = 0.0;
        ev.rho_held = true;
    }

    ev.zdot = Vec::Zero(z.size());
    ev.zdot.head(m.n) = xdot;
    ev.zdot.segment(i_theta_, m.p) = ev.rates.theta_hat_dot;
    ev.zdot[i_rho_] = rho_dot;
    if (sc_.clf) {
        const auto tr = tracking_rates(m, sc_.clf->V, sc_.clf->adaptation, x, z.segment(i_phi_, m.p),
                                       std::max(z[i_varrho_], sc_.clf->adaptation.scaling.lower()));
        ev.zdot.segment(i_phi_, m.p) = tr.theta_hat_dot;
        double vr = tr.rho_dot;
        if (z[i_varrho_] <= sc_.clf->adaptation.scaling.lower() && vr < 0.0) {
            vr = 0.0;
        }
        ev.zdot[i_varrho_] = vr;
    }
    if (i_filter_ >= 0) {
        ev.zdot.segment(i_filter_, m.n) = sc_.estimator->filter_pole * (x - z.segment(i_filter_, m.n));
    }
    if (!ev.zdot.allFinite()) {
        throw DomainError("non-finite state derivative at t = " + fmt_double(t));
    }
    return ev;
}

Vec Simulator::rhs(double t, const Vec& z) const {
    return evaluate(t, z).zdot;
}

TraceRecord Simulator::observe() const {
    const auto& m = sc_.model;
    const Eval ev = evaluate(t_, z_);
    TraceRecord r;
    r.t = t_;
    r.x = x();
    r.theta_hat = theta_hat();
    r.rho = rho();
    r.u = ev.u;
    r.delta = ev.delta;
    r.h = sc_.barrier.h.value(r.x, r.theta_hat);
    if (sc_.sliding) {
        r.s = sc_.sliding->field().value(r.x, r.theta_hat);
    }
    const double b = r.s ? *r.s : r.h;
    r.barrier_like = barrier_like_value(b, sc_.adaptation, ev.rho_eval, r.theta_hat - sc_.params.theta_true);
    const double v = sc_.adaptation.law == AdaptationLaw::RacbfBaseline ? 1.0
                                                                        : sc_.adaptation.scaling.eval(ev.rho_eval).v;
    r.effective_gain = sc_.adaptation.gamma * v;
    r.threshold = threshold();
    r.qp_status = ev.status;
    r.clamp_fired = last_clamp_;
    if (sc_.clf) {
        r.phi_hat = z_.segment(i_phi_, m.p);
        r.varrho = z_[i_varrho_];
    }
    if (bound_) {
        r.bound_lower = bound_->lower;
        r.bound_upper = bound_->upper;
    }
    r.rho_dot = ev.rates.rho_dot;
    r.transient = ev.rates.transient;
    r.predictor_residual = ev.predictor_residual;
    r.qp_active = ev.active;
    r.rho_held = ev.rho_held;
    return r;
}

TraceRecord Simulator::step() {
    const double h = sc_.dt;
    const Vec k1 = rhs(t_, z_);
    const Vec k2 = rhs(t_ + 0.5 * h, z_ + 0.5 * h * k1);
    const Vec k3 = rhs(t_ + 0.5 * h, z_ + 0.5 * h * k2);
    const Vec k4 = rhs(t_ + h, z_ + h * k3);
    z_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ++step_index_;
    t_ = static_cast<double>(step_index_) * h;

    const auto& m = sc_.model;
    if (sc_.estimator && sc_.estimator->cadence > 0 &&
        step_index_ % static_cast<std::size_t>(sc_.estimator->cadence) == 0) {
        const Eval ev = evaluate(t_, z_);
        bound_ = set_membership_update(*bound_, m, x(), ev.epsilon, theta_hat(), sc_.estimator->noise_margin);
    }

    last_clamp_ = false;
    if (sc_.adaptation.projection) {
        const Box box = bound_ ? Box{bound_->lower, bound_->upper} : *sc_.adaptation.projection;
        const Vec th = theta_hat();
        const Vec clamped = box.clamp(th);
        if (clamped != th) {
            last_clamp_ = true;
            z_.segment(i_theta_, m.p) = clamped;
        }
    }
    if (sc_.clf && sc_.clf->adaptation.projection) {
        const Vec ph = z_.segment(i_phi_, m.p);
        z_.segment(i_phi_, m.p) = sc_.clf->adaptation.projection->clamp(ph);
    }

    const auto& sf = sc_.adaptation.scaling;
    if (rho() > sf.upper()) {
        throw DomainError("rho = " + fmt_double(rho()) + " left the scaling domain at t = " + fmt_double(t_));
    }
    if (rho() < sf.lower() - 1e-6) {
        throw DomainError("rho = " + fmt_double(rho()) + " fell below the scaling domain at t = " + fmt_double(t_));
    }
    if (!z_.allFinite()) {
        throw DomainError("non-finite state at t = " + fmt_double(t_));
    }
    return observe();
}

Trace simulate(const Scenario& sc) {
    Trace trace;
    const auto steps = static_cast<std::size_t>(std::llround(sc.T / sc.dt));
    trace.records.reserve(steps + 1);
    try {
        Simulator sim(sc);
        trace.records.push_back(sim.observe());
        for (std::size_t k = 0; k < steps; ++k) {
            trace.records.push_back(sim.step());
        }
    } catch (const Error& e) {
        trace.aborted = true;
        trace.abort_reason = e.what();
    }
    return trace;
}

// -- monitors -----------------------------------------------------------------

namespace {

int sign_of(double v) {
    return (v > 0.0) - (v < 0.0);
}

Vec joint_state(const TraceRecord& r) {
    Vec z(r.x.size() + r.theta_hat.size() + 1);
    z << r.x, r.theta_hat, r.rho;
    return z;
}

}  // namespace

MonitorReport evaluate_monitors(const Scenario& sc, const Trace& trace) {
    MonitorReport rep;
    rep.scenario_id = sc.id;
    rep.law = to_string(sc.adaptation.law);
    rep.aborted = trace.aborted;
    rep.abort_reason = trace.abort_reason;
    const auto& recs = trace.records;
    rep.steps = recs.size();
    if (recs.empty()) {
        rep.invariance_pass = false;
        return rep;
    }

    const auto& cfg = sc.adaptation;
    const bool racbf = cfg.law == AdaptationLaw::RacbfBaseline;
    const bool has_transient_term = cfg.law == AdaptationLaw::Direct || cfg.law == AdaptationLaw::Composite ||
                          cfg.law == AdaptationLaw::HighOrder;
    const auto scaling_v = [&](double rho) {
        return racbf ? 1.0 : cfg.scaling.eval(std::max(rho, cfg.scaling.lower())).v;
    };

    rep.min_h = std::numeric_limits<double>::infinity();
    rep.min_barrier_like_margin = std::numeric_limits<double>::infinity();
    rep.rho_min = std::numeric_limits<double>::infinity();
    rep.rho_max = -std::numeric_limits<double>::infinity();
    double running_min_s = std::numeric_limits<double>::infinity();
    bool contains = true;
    bool has_bound = false;

    for (std::size_t k = 0; k < recs.size(); ++k) {
        const auto& r = recs[k];
        rep.min_h = std::min(rep.min_h, r.h);
        if (r.s) {
            rep.min_s = std::min(rep.min_s.value_or(*r.s), *r.s);
            running_min_s = std::min(running_min_s, *r.s);
            if (running_min_s >= -sc.tol.h && r.h < -sc.tol.h) {
                ++rep.sliding_implication_violations;
            }
        }
        const double v = scaling_v(r.rho);
        rep.min_barrier_like_margin = std::min(rep.min_barrier_like_margin, r.barrier_like - v * cfg.eta);
        rep.rho_min = std::min(rep.rho_min, r.rho);
        rep.rho_max = std::max(rep.rho_max, r.rho);

        if (cfg.law == AdaptationLaw::Leaky) {
            const double floor = issf_floor(sc.alpha, cfg.scaling, cfg.sigma, std::max(r.rho, 0.0));
            rep.issf_floor_min = std::min(rep.issf_floor_min.value_or(floor), floor);
            if (r.h < floor - sc.tol.h) {
                ++rep.issf_violations;
            }
        }
        if (has_transient_term && std::abs(r.transient) > sc.tol.sign_floor) {
            ++rep.sign_checked;
            if (sign_of(r.rho_dot) != -sign_of(r.transient)) {
                ++rep.sign_opposition_violations;
            }
        }
        if (r.bound_lower.size() > 0) {
            has_bound = true;
            contains = contains && Box{r.bound_lower, r.bound_upper}.contains(sc.params.theta_true);
        }
        if (sc.has_predictor()) {
            rep.predictor_identity_max = std::max(rep.predictor_identity_max.value_or(0.0), r.predictor_residual);
        }
        if (r.qp_status != QPStatus::Optimal) {
            ++rep.qp_infeasible_count;
        }
        rep.clamp_count += r.clamp_fired ? 1 : 0;
        rep.rho_floor_holds += r.rho_held ? 1 : 0;

        if (k + 1 < recs.size()) {
            const auto& nx = recs[k + 1];
            const double dt = nx.t - r.t;
            if (dt > 0.0) {
                const double rate = (nx.h - r.h) / dt;
                if (rate < -sc.alpha(r.h - v * cfg.eta) - sc.tol.derivative) {
                    ++rep.derivative_check_violations;
                }
            }
            if (nx.threshold > r.threshold) {
                rep.threshold_monotone = false;
            }
            if (nx.qp_active != r.qp_active) {
                ++rep.active_set_changes;
            } else {
                const double dz = (joint_state(nx) - joint_state(r)).norm();
                if (dz > 0.0) {
                    rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, (nx.u - r.u).norm() / dz);
                }
            }
        }
    }
    if (has_bound) {
        rep.membership_contains_truth = contains;
    }
    rep.final_threshold = recs.back().threshold;
    rep.stability_gap = std::abs(recs.back().h - recs.back().threshold);
    rep.invariance_pass = !trace.aborted && rep.min_h >= -sc.tol.h;
    return rep;
}

std::string MonitorReport::to_text() const {
    std::ostringstream os;
    const auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string("n/a"); };
    os << "scenario: " << scenario_id << '\n';
    os << "law: " << law << '\n';
    os << "records: " << steps << '\n';
    os << "min_h: " << fmt_double(min_h) << '\n';
    os << "min_s: " << opt(min_s) << '\n';
    os << "min_barrier_like_margin: " << fmt_double(min_barrier_like_margin) << '\n';
    os << "rho_min: " << fmt_double(rho_min) << '\n';
    os << "rho_max: " << fmt_double(rho_max) << '\n';
    os << "issf_floor_min: " << opt(issf_floor_min) << '\n';
    os << "issf_violations: " << issf_violations << '\n';
    os << "derivative_check_violations: " << derivative_check_violations << '\n';
    os << "sign_checked: " << sign_checked << '\n';
    os << "sign_opposition_violations: " << sign_opposition_violations << '\n';
    os << "sliding_implication_violations: " << sliding_implication_violations << '\n';
    os << "stability_gap: " << fmt_double(stability_gap) << '\n';
    os << "final_threshold: " << fmt_double(final_threshold) << '\n';
    os << "threshold_monotone: " << (threshold_monotone ? "true" : "false") << '\n';
    os << "membership_contains_truth: "
       << (membership_contains_truth ? (*membership_contains_truth ? "true" : "false") : "n/a") << '\n';
    os << "predictor_identity_max: " << opt(predictor_identity_max) << '\n';
    os << "qp_infeasible_count: " << qp_infeasible_count << '\n';
    os << "clamp_count: " << clamp_count << '\n';
    os << "rho_floor_holds: " << rho_floor_holds << '\n';
    os << "lipschitz_estimate: " << fmt_double(lipschitz_estimate) << '\n';
    os << "active_set_changes: " << active_set_changes << '\n';
    os << "aborted: " << (aborted ? "true" : "false") << '\n';
    if (aborted) {
        os << "abort_reason: " << abort_reason << '\n';
    }
    os << "invariance_verdict: " << (invariance_pass ? "PASS" : "FAIL") << '\n';
    return os.str();
}

RunResult run(const Scenario& sc) {
    RunResult res;
    res.trace = simulate(sc);
    res.report = evaluate_monitors(sc, res.trace);
    return res;
}

// -- sweeps -------------------------------------------------------------------

SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "gamma") return SweepParam::Gamma;
    if (name == "eta") return SweepParam::Eta;
    if (name == "sigma") return SweepParam::Sigma;
    if (name == "dt") return SweepParam::Dt;
    throw ConfigError("unknown sweep parameter: " + name);
}

std::string to_string(SweepParam p) {
    switch (p) {
    case SweepParam::Gamma: return "gamma";
    case SweepParam::Eta: return "eta";
    case SweepParam::Sigma: return "sigma";
    case SweepParam::Dt: return "dt";
    }
    return "gamma";
}

namespace {

Vec final_state(const Scenario& sc) {
    Simulator sim(sc);
    const auto steps = static_cast<std::size_t>(std::llround(sc.T / sc.dt));
    for (std::size_t k = 0; k < steps; ++k) {
        sim.step();
    }
    return sim.state();
}

template <typename F>
void parallel_for(std::size_t count, int jobs, F&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

}  // namespace

std::vector<SweepRow> sweep(const Scenario& base, SweepParam param, const std::vector<double>& values, int jobs) {
    if (values.empty()) {
        throw ConfigError("sweep: empty value list");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ConfigError("sweep: non-finite value");
        }
    }
    std::vector<SweepRow> rows(values.size());
    parallel_for(values.size(), jobs, [&](std::size_t i) {
        Scenario sc = base;
        const double v = values[i];
        switch (param) {
        case SweepParam::Gamma: sc.adaptation.gamma = v; break;
        case SweepParam::Eta: sc.adaptation.eta = v; break;
        case SweepParam::Sigma: sc.adaptation.sigma = v; break;
        case SweepParam::Dt: sc.dt = v; break;
        }
        SweepRow row;
        row.value = v;
        try {
            const auto prem = check_premises(sc);
            row.admissible = prem.admissible;
            row.premise_ok = prem.ok();
        } catch (const Error&) {
            row.admissible = false;
            row.premise_ok = false;
        }
        try {
            sc.adaptation.validate();
            const auto res = run(sc);
            row.report = res.report;
            if (!res.trace.records.empty()) {
                const auto& last = res.trace.records.back();
                row.final_state = joint_state(last);
            }
        } catch (const Error& e) {
            row.report.scenario_id = sc.id;
            row.report.aborted = true;
            row.report.abort_reason = e.what();
        }
        rows[i] = std::move(row);
    });

    if (param == SweepParam::Dt) {
        // order by decreasing dt to pair each step size with the next finer one
        std::vector<std::size_t> order(values.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
        for (std::size_t j = 0; j + 1 < order.size(); ++j) {
            auto& coarse = rows[order[j]];
            const auto& fine = rows[order[j + 1]];
            if (coarse.final_state.size() > 0 && coarse.final_state.size() == fine.final_state.size()) {
                coarse.diff_to_finer = (coarse.final_state - fine.final_state).norm();
            }
        }
        for (std::size_t j = 0; j + 2 < order.size(); ++j) {
            const auto& a = rows[order[j]].diff_to_finer;
            const auto& b = rows[order[j + 1]].diff_to_finer;
            if (a && b && *b > 0.0) {
                rows[order[j]].convergence_ratio = *a / *b;
            }
        }
    }
    return rows;
}

double self_convergence_ratio(const Scenario& sc, double dt, double horizon) {
    Scenario a = sc;
    a.T = horizon;
    a.dt = dt;
    Scenario b = a;
    b.dt = dt / 2.0;
    Scenario c = a;
    c.dt = dt / 4.0;
    const Vec za = final_state(a);
    const Vec zb = final_state(b);
    const Vec zc = final_state(c);
    return (za - zb).norm() / (zb - zc).norm();
}

}  // namespace ucbf
