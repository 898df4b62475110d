#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ucbf/sim.hpp"

namespace ucbf {

using DVec = std::vector<double>;

struct ScalingConfig {
    std::string kind = "arctan_plus_one";  // arctan_plus_one | exp_saturating
    std::optional<double> zeta;            // exp_saturating only
    std::optional<double> upper;           // domain upper edge; defaults per kind
    bool operator==(const ScalingConfig&) const = default;
};

struct AdaptationSection {
    std::string law = "direct";
    double gamma = 1.0;
    double eta = 0.1;
    double sigma = 1.0;
    double beta = 1.0;
    ScalingConfig scaling;
    bool projection = false;
    bool force_w_zero = false;
    bool operator==(const AdaptationSection&) const = default;
};

struct NominalConfig {
    std::string kind = "none";  // none | pd
    double kp = 0.0;
    double kd = 0.0;
    DVec target;
    bool operator==(const NominalConfig&) const = default;
};

struct ControllerConfig {
    std::string kind = "pointwise_filter";  // pointwise_filter | min_norm
    NominalConfig nominal;
    double slack_weight = 100.0;
    std::string on_infeasible = "flag";  // flag | halt
    bool operator==(const ControllerConfig&) const = default;
};

struct SlidingConfig {
    std::string kind = "linear";  // linear | state_dependent
    double lambda1 = 1.0;
    double lambda2 = 0.0;
    double q = 1.0;
    bool operator==(const SlidingConfig&) const = default;
};

struct ClfConfig {
    std::string kind = "quadratic";
    DVec x_ref;
    AdaptationSection adaptation;
    DVec phi_hat0;
    double varrho0 = 0.0;
    bool operator==(const ClfConfig&) const = default;
};

struct EstimatorConfig {
    std::string mode = "exact";  // exact | filtered
    double filter_pole = 50.0;
    int cadence = 10;
    double noise_margin = 0.0;
    bool dynamic_threshold = true;
    bool operator==(const EstimatorConfig&) const = default;
};

struct ScenarioConfig {
    std::string id;
    std::string description;
    std::vector<std::string> tags;
    std::string model;
    std::string barrier;
    std::map<std::string, double> barrier_params;
    std::optional<SlidingConfig> sliding;
    DVec theta_lower;
    DVec theta_upper;
    DVec theta_true;
    std::optional<DVec> vartheta;
    std::string alpha_kind = "linear";  // linear | linear_cubic
    double alpha_gain = 1.0;
    AdaptationSection adaptation;
    ControllerConfig controller;
    DVec input_lower;
    DVec input_upper;
    std::optional<ClfConfig> clf;
    std::optional<EstimatorConfig> estimator;
    DVec x0;
    DVec theta_hat0;
    double rho0 = 0.0;
    double T = 10.0;
    double dt = 1e-3;
    DVec grid_lower;
    DVec grid_upper;
    int points_per_axis = 41;
    int theta_points = 11;
    double tol_h = 1e-6;
    double tol_derivative = 1e-3;
    double sign_floor = 1e-10;
    double stability_rel = 0.05;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Built-in gallery A..F in id order.
std::vector<ScenarioConfig> builtin_configs();
ScenarioConfig builtin_config(const std::string& id);

/// JSON text of a config (schema documented in the README).
std::string config_to_json(const ScenarioConfig& cfg, int indent = 2);
/// Strict parse: unknown keys, wrong types and out-of-range values raise ConfigError.
ScenarioConfig config_from_json(const std::string& text);

/// Applies dotted-key overrides ("adaptation.gamma", "0.5"). The value is read
/// as JSON and falls back to a bare string.
ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const std::vector<std::pair<std::string, std::string>>& sets);

/// Resolves ids into a runnable Scenario.
Scenario build_scenario(const ScenarioConfig& cfg);

/// {"scenarios": [...]} document for the whole gallery (or a filtered subset).
std::string gallery_json(const std::vector<ScenarioConfig>& configs);

}  // namespace ucbf
