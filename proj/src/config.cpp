#include "ucbf/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "ucbf/registry.hpp"

namespace ucbf {

using nlohmann::json;

// -- built-in gallery ---------------------------------------------------------

namespace {

ScenarioConfig scenario_a() {
    ScenarioConfig c;
    c.id = "A";
    c.description = "unmatched 2-state system, direct law, pointwise safety filter";
    c.tags = {"unmatched", "direct"};
    c.model = "unmatched_2d";
    c.barrier = "ellipse_unmatched";
    c.barrier_params = {{"c", 0.25}};
    c.theta_lower = {0.5};
    c.theta_upper = {1.5};
    c.theta_true = {1.0};
    c.adaptation.law = "direct";
    c.adaptation.gamma = 1.0;
    c.adaptation.eta = 0.1;
    c.adaptation.scaling = {"arctan_plus_one", std::nullopt, 10.0};
    c.adaptation.projection = true;
    c.controller.kind = "pointwise_filter";
    c.controller.nominal = {"pd", 3.0, 3.0, {3.0}};
    c.input_lower = {-10.0};
    c.input_upper = {10.0};
    c.x0 = {0.0, 0.0};
    c.theta_hat0 = {1.5};
    c.grid_lower = {-1.2, -3.5};
    c.grid_upper = {1.2, 3.5};
    return c;
}

ScenarioConfig scenario_b() {
    ScenarioConfig c = scenario_a();
    c.id = "B";
    c.description = "scenario A under the leaky law";
    c.tags = {"unmatched", "leaky"};
    c.adaptation.law = "leaky";
    c.adaptation.sigma = 1.0;
    c.adaptation.scaling = {"exp_saturating", 2.0, std::nullopt};
    return c;
}

ScenarioConfig scenario_c() {
    ScenarioConfig c = scenario_a();
    c.id = "C";
    c.description = "relative-degree-two position bound, sliding variable, high-order law";
    c.tags = {"unmatched", "high_order"};
    c.barrier = "position_bound";
    c.barrier_params = {};
    c.sliding = SlidingConfig{"linear", 2.0, 0.0, 1.0};
    c.adaptation.law = "high_order";
    c.grid_lower = {-1.2, -1.0};
    c.grid_upper = {1.2, 1.0};
    return c;
}

ScenarioConfig scenario_d() {
    ScenarioConfig c = scenario_a();
    c.id = "D";
    c.description = "scenario A with set-membership estimation and a shrinking threshold";
    c.tags = {"unmatched", "direct", "estimator", "data_driven"};
    c.estimator = EstimatorConfig{"exact", 50.0, 10, 1e-9, true};
    return c;
}

ScenarioConfig scenario_e() {
    ScenarioConfig c = scenario_a();
    c.id = "E";
    c.description = "scenario A with a tracking objective, min-norm controller and dual estimates";
    c.tags = {"unmatched", "direct", "tracking", "clf"};
    c.controller.kind = "min_norm";
    c.controller.nominal = {};
    c.controller.slack_weight = 100.0;
    ClfConfig clf;
    clf.x_ref = {1.2, 1.2};
    clf.adaptation.law = "direct";
    clf.adaptation.gamma = 1.0;
    clf.adaptation.eta = 0.1;
    clf.adaptation.scaling = {"arctan_plus_one", std::nullopt, 10.0};
    clf.phi_hat0 = {1.5};
    clf.varrho0 = 0.0;
    c.clf = clf;
    return c;
}

ScenarioConfig scenario_f() {
    ScenarioConfig c;
    c.id = "F";
    c.description = "baseline robust adaptive barrier on a scalar system, started below the tightened level";
    c.tags = {"baseline", "racbf"};
    c.model = "scalar_drift";
    c.barrier = "racbf_scalar";
    c.barrier_params = {{"k", 0.25}};
    c.theta_lower = {0.5};
    c.theta_upper = {1.5};
    c.theta_true = {1.0};
    c.adaptation.law = "racbf_baseline";
    c.adaptation.gamma = 1.0;
    c.adaptation.eta = 0.1;
    c.adaptation.projection = false;
    c.controller.kind = "min_norm";
    c.input_lower = {-10.0};
    c.input_upper = {10.0};
    c.x0 = {0.0};
    c.theta_hat0 = {1.5};
    c.T = 30.0;
    c.grid_lower = {-1.0};
    c.grid_upper = {3.0};
    return c;
}

}  // namespace

std::vector<ScenarioConfig> builtin_configs() {
    return {scenario_a(), scenario_b(), scenario_c(), scenario_d(), scenario_e(), scenario_f()};
}

ScenarioConfig builtin_config(const std::string& id) {
    for (auto& c : builtin_configs()) {
        if (c.id == id) {
            return c;
        }
    }
    throw ConfigError("unknown scenario id: " + id);
}

// -- JSON writing -------------------------------------------------------------

namespace {

json scaling_json(const ScalingConfig& s) {
    json j{{"kind", s.kind}};
    if (s.zeta) j["zeta"] = *s.zeta;
    if (s.upper) j["upper"] = *s.upper;
    return j;
}

json adaptation_json(const AdaptationSection& a) {
    return {{"law", a.law},          {"gamma", a.gamma},
            {"eta", a.eta},          {"sigma", a.sigma},
            {"beta", a.beta},        {"scaling", scaling_json(a.scaling)},
            {"projection", a.projection}, {"force_w_zero", a.force_w_zero}};
}

json to_json_doc(const ScenarioConfig& c) {
    json j;
    j["id"] = c.id;
    j["description"] = c.description;
    j["tags"] = c.tags;
    j["model"] = c.model;
    j["barrier"] = {{"id", c.barrier}, {"params", c.barrier_params}};
    if (c.sliding) {
        j["sliding"] = {{"kind", c.sliding->kind},
                        {"lambda1", c.sliding->lambda1},
                        {"lambda2", c.sliding->lambda2},
                        {"q", c.sliding->q}};
    }
    j["params"] = {{"lower", c.theta_lower}, {"upper", c.theta_upper}, {"theta_true", c.theta_true}};
    if (c.vartheta) j["params"]["vartheta"] = *c.vartheta;
    j["alpha"] = {{"kind", c.alpha_kind}, {"gain", c.alpha_gain}};
    j["adaptation"] = adaptation_json(c.adaptation);
    j["controller"] = {{"kind", c.controller.kind},
                       {"nominal",
                        {{"kind", c.controller.nominal.kind},
                         {"kp", c.controller.nominal.kp},
                         {"kd", c.controller.nominal.kd},
                         {"target", c.controller.nominal.target}}},
                       {"slack_weight", c.controller.slack_weight},
                       {"on_infeasible", c.controller.on_infeasible}};
    j["input_box"] = {{"kind", "box"}, {"lower", c.input_lower}, {"upper", c.input_upper}};
    if (c.clf) {
        j["clf"] = {{"kind", c.clf->kind},
                    {"x_ref", c.clf->x_ref},
                    {"adaptation", adaptation_json(c.clf->adaptation)},
                    {"phi_hat0", c.clf->phi_hat0},
                    {"varrho0", c.clf->varrho0}};
    }
    if (c.estimator) {
        j["estimator"] = {{"mode", c.estimator->mode},
                          {"filter_pole", c.estimator->filter_pole},
                          {"cadence", c.estimator->cadence},
                          {"noise_margin", c.estimator->noise_margin},
                          {"dynamic_threshold", c.estimator->dynamic_threshold}};
    }
    j["x0"] = c.x0;
    j["theta_hat0"] = c.theta_hat0;
    j["rho0"] = c.rho0;
    j["T"] = c.T;
    j["dt"] = c.dt;
    j["grid"] = {{"x_lower", c.grid_lower},
                 {"x_upper", c.grid_upper},
                 {"points_per_axis", c.points_per_axis},
                 {"theta_points", c.theta_points}};
    j["monitors"] = {{"tol_h", c.tol_h},
                     {"tol_derivative", c.tol_derivative},
                     {"sign_floor", c.sign_floor},
                     {"stability_rel", c.stability_rel}};
    return j;
}

}  // namespace

std::string config_to_json(const ScenarioConfig& cfg, int indent) {
    return to_json_doc(cfg).dump(indent);
}

std::string gallery_json(const std::vector<ScenarioConfig>& configs) {
    json arr = json::array();
    for (const auto& c : configs) {
        arr.push_back(to_json_doc(c));
    }
    return json{{"scenarios", arr}}.dump(2);
}

// -- strict JSON reading ------------------------------------------------------

namespace {

// Object view that remembers which keys were read and rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(where() + ": expected an object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            throw ConfigError(where() + ": missing key '" + key + "'");
        }
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(where() + ": missing key '" + key + "'");
        }
        return as_number(j_.at(key), key);
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) {
            throw ConfigError(where() + "." + key + ": expected an integer");
        }
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) {
            throw ConfigError(where() + "." + key + ": expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(where() + ": missing key '" + key + "'");
        }
        const json& v = j_.at(key);
        if (!v.is_string()) {
            throw ConfigError(where() + "." + key + ": expected a string");
        }
        return v.get<std::string>();
    }

    DVec vector(const std::string& key, std::optional<DVec> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(where() + ": missing key '" + key + "'");
        }
        return as_vector(j_.at(key), where() + "." + key);
    }

    Reader object(const std::string& key) { return Reader(at(key), where() + "." + key); }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (seen_.find(item.key()) == seen_.end()) {
                throw ConfigError(where() + ": unknown key '" + item.key() + "'");
            }
        }
    }

    [[nodiscard]] std::string where() const { return path_; }

    static DVec as_vector(const json& v, const std::string& what) {
        if (!v.is_array()) {
            throw ConfigError(what + ": expected an array of numbers");
        }
        DVec out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                throw ConfigError(what + ": expected an array of numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number()) {
            throw ConfigError(where() + "." + key + ": expected a number");
        }
        return v.get<double>();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ScalingConfig read_scaling(Reader r) {
    ScalingConfig s;
    s.kind = r.string("kind");
    if (r.has("zeta")) s.zeta = r.number("zeta");
    if (r.has("upper")) s.upper = r.number("upper");
    r.finish();
    if (s.kind != "arctan_plus_one" && s.kind != "exp_saturating") {
        throw ConfigError(r.where() + ".kind: expected arctan_plus_one or exp_saturating");
    }
    if (s.kind == "exp_saturating" && !s.zeta) {
        throw ConfigError(r.where() + ": exp_saturating needs zeta");
    }
    if (s.kind == "arctan_plus_one" && s.zeta) {
        throw ConfigError(r.where() + ": arctan_plus_one fixes zeta from its upper edge");
    }
    return s;
}

AdaptationSection read_adaptation(Reader r) {
    AdaptationSection a;
    a.law = r.string("law", std::string("direct"));
    a.gamma = r.number("gamma", a.gamma);
    a.eta = r.number("eta", a.eta);
    a.sigma = r.number("sigma", a.sigma);
    a.beta = r.number("beta", a.beta);
    if (r.has("scaling")) a.scaling = read_scaling(r.object("scaling"));
    a.projection = r.boolean("projection", a.projection);
    a.force_w_zero = r.boolean("force_w_zero", a.force_w_zero);
    r.finish();
    adaptation_law_from_string(a.law);
    if (!(a.gamma > 0.0)) throw ConfigError(r.where() + ".gamma: must be positive");
    if (!(a.eta > 0.0)) throw ConfigError(r.where() + ".eta: must be positive");
    if (!(a.sigma > 0.0)) throw ConfigError(r.where() + ".sigma: must be positive");
    if (!(a.beta > 0.0)) throw ConfigError(r.where() + ".beta: must be positive");
    return a;
}

void read_input_box(const json& v, ScenarioConfig& c) {
    if (v.is_array()) {
        if (v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            // uniform [lo, hi] applied to every input
            c.input_lower = {v[0].get<double>()};
            c.input_upper = {v[1].get<double>()};
            return;
        }
        c.input_lower.clear();
        c.input_upper.clear();
        for (const auto& pair : v) {
            const DVec lh = Reader::as_vector(pair, "input_box");
            if (lh.size() != 2) {
                throw ConfigError("input_box: expected [lo, hi] pairs");
            }
            c.input_lower.push_back(lh[0]);
            c.input_upper.push_back(lh[1]);
        }
        return;
    }
    Reader r(v, "input_box");
    const std::string kind = r.string("kind", std::string("box"));
    if (kind == "ball") {
        throw UnsupportedFeature("input_box: only boxes are supported, got a ball");
    }
    if (kind != "box") {
        throw ConfigError("input_box.kind: expected box");
    }
    c.input_lower = r.vector("lower");
    c.input_upper = r.vector("upper");
    r.finish();
}

void check_finite(const DVec& v, const std::string& what) {
    for (double e : v) {
        if (!std::isfinite(e)) {
            throw ConfigError(what + ": values must be finite");
        }
    }
}

}  // namespace

ScenarioConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    Reader r(doc, "config");
    ScenarioConfig c;
    c.id = r.string("id");
    c.description = r.string("description", std::string());
    if (r.has("tags")) {
        const json& t = r.at("tags");
        if (!t.is_array()) throw ConfigError("config.tags: expected an array of strings");
        for (const auto& e : t) {
            if (!e.is_string()) throw ConfigError("config.tags: expected an array of strings");
            c.tags.push_back(e.get<std::string>());
        }
    }
    c.model = r.string("model");
    {
        Reader b = r.object("barrier");
        c.barrier = b.string("id");
        if (b.has("params")) {
            const json& p = b.at("params");
            if (!p.is_object()) throw ConfigError("config.barrier.params: expected an object");
            for (const auto& item : p.items()) {
                if (!item.value().is_number()) {
                    throw ConfigError("config.barrier.params." + item.key() + ": expected a number");
                }
                c.barrier_params[item.key()] = item.value().get<double>();
            }
        }
        b.finish();
    }
    if (r.has("sliding")) {
        Reader s = r.object("sliding");
        SlidingConfig sc;
        sc.kind = s.string("kind", sc.kind);
        sc.lambda1 = s.number("lambda1", sc.lambda1);
        sc.lambda2 = s.number("lambda2", sc.lambda2);
        sc.q = s.number("q", sc.q);
        s.finish();
        if (sc.kind != "linear" && sc.kind != "state_dependent") {
            throw ConfigError("config.sliding.kind: expected linear or state_dependent");
        }
        c.sliding = sc;
    }
    {
        Reader p = r.object("params");
        c.theta_lower = p.vector("lower");
        c.theta_upper = p.vector("upper");
        c.theta_true = p.vector("theta_true");
        if (p.has("vartheta")) c.vartheta = p.vector("vartheta");
        p.finish();
    }
    if (r.has("alpha")) {
        Reader a = r.object("alpha");
        c.alpha_kind = a.string("kind", c.alpha_kind);
        c.alpha_gain = a.number("gain", c.alpha_gain);
        a.finish();
        if (c.alpha_kind != "linear" && c.alpha_kind != "linear_cubic") {
            throw ConfigError("config.alpha.kind: expected linear or linear_cubic");
        }
        if (!(c.alpha_gain > 0.0)) throw ConfigError("config.alpha.gain: must be positive");
    }
    if (r.has("adaptation")) c.adaptation = read_adaptation(r.object("adaptation"));
    if (r.has("controller")) {
        Reader k = r.object("controller");
        c.controller.kind = k.string("kind", c.controller.kind);
        if (k.has("nominal")) {
            Reader n = k.object("nominal");
            c.controller.nominal.kind = n.string("kind", std::string("none"));
            c.controller.nominal.kp = n.number("kp", 0.0);
            c.controller.nominal.kd = n.number("kd", 0.0);
            c.controller.nominal.target = n.vector("target", DVec{});
            n.finish();
            if (c.controller.nominal.kind != "none" && c.controller.nominal.kind != "pd") {
                throw ConfigError("config.controller.nominal.kind: expected none or pd");
            }
        }
        c.controller.slack_weight = k.number("slack_weight", c.controller.slack_weight);
        c.controller.on_infeasible = k.string("on_infeasible", c.controller.on_infeasible);
        k.finish();
        if (c.controller.kind != "pointwise_filter" && c.controller.kind != "min_norm") {
            throw ConfigError("config.controller.kind: expected pointwise_filter or min_norm");
        }
        if (c.controller.on_infeasible != "flag" && c.controller.on_infeasible != "halt") {
            throw ConfigError("config.controller.on_infeasible: expected flag or halt");
        }
        if (!(c.controller.slack_weight > 0.0)) {
            throw ConfigError("config.controller.slack_weight: must be positive");
        }
    }
    read_input_box(r.at("input_box"), c);
    if (r.has("clf")) {
        Reader k = r.object("clf");
        ClfConfig clf;
        clf.kind = k.string("kind", clf.kind);
        clf.x_ref = k.vector("x_ref");
        if (k.has("adaptation")) clf.adaptation = read_adaptation(k.object("adaptation"));
        clf.phi_hat0 = k.vector("phi_hat0");
        clf.varrho0 = k.number("varrho0", 0.0);
        k.finish();
        if (clf.kind != "quadratic") throw ConfigError("config.clf.kind: expected quadratic");
        c.clf = clf;
    }
    if (r.has("estimator")) {
        Reader e = r.object("estimator");
        EstimatorConfig est;
        est.mode = e.string("mode", est.mode);
        est.filter_pole = e.number("filter_pole", est.filter_pole);
        est.cadence = e.integer("cadence", est.cadence);
        est.noise_margin = e.number("noise_margin", est.noise_margin);
        est.dynamic_threshold = e.boolean("dynamic_threshold", est.dynamic_threshold);
        e.finish();
        if (est.mode != "exact" && est.mode != "filtered") {
            throw ConfigError("config.estimator.mode: expected exact or filtered");
        }
        if (!(est.filter_pole > 0.0)) throw ConfigError("config.estimator.filter_pole: must be positive");
        if (est.cadence < 0) throw ConfigError("config.estimator.cadence: must be nonnegative");
        if (!(est.noise_margin >= 0.0)) throw ConfigError("config.estimator.noise_margin: must be nonnegative");
        c.estimator = est;
    }
    c.x0 = r.vector("x0");
    c.theta_hat0 = r.vector("theta_hat0");
    c.rho0 = r.number("rho0", c.rho0);
    c.T = r.number("T", c.T);
    c.dt = r.number("dt", c.dt);
    if (r.has("grid")) {
        Reader g = r.object("grid");
        c.grid_lower = g.vector("x_lower");
        c.grid_upper = g.vector("x_upper");
        c.points_per_axis = g.integer("points_per_axis", c.points_per_axis);
        c.theta_points = g.integer("theta_points", c.theta_points);
        g.finish();
        if (c.points_per_axis < 2 || c.theta_points < 1) {
            throw ConfigError("config.grid: points_per_axis >= 2 and theta_points >= 1 required");
        }
    }
    if (r.has("monitors")) {
        Reader m = r.object("monitors");
        c.tol_h = m.number("tol_h", c.tol_h);
        c.tol_derivative = m.number("tol_derivative", c.tol_derivative);
        c.sign_floor = m.number("sign_floor", c.sign_floor);
        c.stability_rel = m.number("stability_rel", c.stability_rel);
        m.finish();
    }
    r.finish();

    if (!(c.T > 0.0) || !(c.dt > 0.0) || c.dt > c.T) {
        throw ConfigError("config: need 0 < dt <= T");
    }
    for (const auto* v : {&c.theta_lower, &c.theta_upper, &c.theta_true, &c.x0, &c.theta_hat0, &c.input_lower,
                          &c.input_upper, &c.grid_lower, &c.grid_upper}) {
        check_finite(*v, "config");
    }
    if (!std::isfinite(c.rho0)) {
        throw ConfigError("config.rho0: must be finite");
    }
    return c;
}

ScenarioConfig apply_overrides(const ScenarioConfig& cfg,
                               const std::vector<std::pair<std::string, std::string>>& sets) {
    if (sets.empty()) {
        return cfg;
    }
    json doc = to_json_doc(cfg);
    for (const auto& [key, raw] : sets) {
        if (key.empty()) {
            throw ConfigError("override: empty key");
        }
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;
        }
        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty()) {
                throw ConfigError("override: malformed key '" + key + "'");
            }
            if (!node->is_object()) {
                throw ConfigError("override: '" + key + "' descends into a non-object");
            }
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            if (node->is_null()) {
                *node = json::object();
            }
            start = dot + 1;
        }
    }
    return config_from_json(doc.dump());
}

// -- build ----------------------------------------------------------------------

namespace {

Vec to_vec(const DVec& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ScalingFunction build_scaling(const ScalingConfig& s) {
    if (s.kind == "arctan_plus_one") {
        return ScalingFunction::arctan_plus_one(s.upper.value_or(10.0));
    }
    return ScalingFunction::exp_saturating(*s.zeta, s.upper.value_or(std::numeric_limits<double>::infinity()));
}

AdaptationConfig build_adaptation(const AdaptationSection& a, const ParameterBox& params) {
    AdaptationConfig out;
    out.law = adaptation_law_from_string(a.law);
    out.gamma = a.gamma;
    out.eta = a.eta;
    out.sigma = a.sigma;
    out.beta = a.beta;
    out.scaling = build_scaling(a.scaling);
    if (a.projection) {
        out.projection = params.box();
    }
    out.force_w_zero = a.force_w_zero;
    out.validate();
    return out;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& c) {
    Scenario sc;
    sc.id = c.id;
    sc.description = c.description;
    sc.model = make_model(c.model);
    const int n = sc.model.n;
    const int m = sc.model.m;
    const int p = sc.model.p;
    sc.params = ParameterBox::make(to_vec(c.theta_lower), to_vec(c.theta_upper), to_vec(c.theta_true),
                                   c.vartheta ? to_vec(*c.vartheta) : Vec());
    require_size(sc.params.lower, p, "params.lower");
    sc.params.validate();
    sc.barrier = make_barrier(c.barrier, c.barrier_params, sc.model);
    if (c.sliding) {
        const auto kind = c.sliding->kind == "linear" ? SlidingVariable::Kind::Linear
                                                      : SlidingVariable::Kind::StateDependent;
        sc.sliding = SlidingVariable::make(sc.barrier, kind, c.sliding->lambda1, c.sliding->lambda2, c.sliding->q);
    }
    sc.alpha = c.alpha_kind == "linear" ? ClassKInfinity::linear(c.alpha_gain) : make_linear_cubic(c.alpha_gain);
    sc.adaptation = build_adaptation(c.adaptation, sc.params);
    const bool high_order_law = sc.adaptation.law == AdaptationLaw::HighOrder;
    if (high_order_law != sc.sliding.has_value()) {
        throw ConfigError("config: the high_order law and a sliding section go together");
    }

    sc.controller.kind = c.controller.kind == "min_norm" ? ControllerSpec::Kind::MinNorm
                                                         : ControllerSpec::Kind::PointwiseFilter;
    sc.controller.slack_weight = c.controller.slack_weight;
    sc.controller.halt_on_infeasible = c.controller.on_infeasible == "halt";
    if (c.controller.nominal.kind == "pd") {
        if (n != 2 * m) {
            throw ConfigError("controller.nominal: pd needs n = 2 m");
        }
        if (static_cast<int>(c.controller.nominal.target.size()) != m) {
            throw ConfigError("controller.nominal.target: expected " + std::to_string(m) + " entries");
        }
        const double kp = c.controller.nominal.kp;
        const double kd = c.controller.nominal.kd;
        const Vec target = to_vec(c.controller.nominal.target);
        sc.controller.nominal = [kp, kd, target, m](double, const Vec& x) -> Vec {
            return -kp * (x.head(m) - target) - kd * x.tail(m);
        };
    }

    if (c.input_lower.size() == 1 && m > 1) {
        sc.input_box = Box{Vec::Constant(m, c.input_lower[0]), Vec::Constant(m, c.input_upper[0])};
    } else {
        sc.input_box = Box{to_vec(c.input_lower), to_vec(c.input_upper)};
    }
    require_size(sc.input_box->lower, m, "input_box");
    sc.input_box->validate("input_box");

    if (c.clf) {
        if (sc.controller.kind != ControllerSpec::Kind::MinNorm) {
            throw ConfigError("clf: a tracking objective needs the min_norm controller");
        }
        const Vec x_ref = to_vec(c.clf->x_ref);
        require_size(x_ref, n, "clf.x_ref");
        const auto q = make_quadratic_clf(x_ref, p);
        ClfSpec spec;
        spec.V = q.V;
        spec.Q = q.Q;
        spec.adaptation = build_adaptation(c.clf->adaptation, sc.params);
        spec.phi_hat0 = to_vec(c.clf->phi_hat0);
        require_size(spec.phi_hat0, p, "clf.phi_hat0");
        spec.varrho0 = c.clf->varrho0;
        sc.clf = spec;
    }
    if (c.estimator) {
        EstimatorSpec e;
        e.mode = c.estimator->mode == "exact" ? PredictorState::Mode::ExactVelocity
                                              : PredictorState::Mode::FilteredVelocity;
        e.filter_pole = c.estimator->filter_pole;
        e.cadence = c.estimator->cadence;
        e.noise_margin = c.estimator->noise_margin;
        e.dynamic_threshold = c.estimator->dynamic_threshold;
        sc.estimator = e;
    }

    sc.x0 = to_vec(c.x0);
    sc.theta_hat0 = to_vec(c.theta_hat0);
    require_size(sc.x0, n, "x0");
    require_size(sc.theta_hat0, p, "theta_hat0");
    sc.model.check_shapes(sc.x0);
    sc.rho0 = c.rho0;
    sc.T = c.T;
    sc.dt = c.dt;
    sc.tol = {c.tol_h, c.tol_derivative, c.sign_floor, c.stability_rel};
    sc.grid.bounds = Box{to_vec(c.grid_lower), to_vec(c.grid_upper)};
    require_size(sc.grid.bounds.lower, n, "grid.x_lower");
    sc.grid.bounds.validate("grid");
    sc.grid.points_per_axis = c.points_per_axis;
    sc.theta_points = c.theta_points;
    return sc;
}

}  // namespace ucbf
