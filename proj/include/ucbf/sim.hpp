#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ucbf/adaptation.hpp"
#include "ucbf/barrier.hpp"
#include "ucbf/estimator.hpp"
#include "ucbf/model.hpp"
#include "ucbf/qp.hpp"

namespace ucbf {

struct ControllerSpec {
    enum class Kind { MinNorm, PointwiseFilter };
    Kind kind = Kind::PointwiseFilter;
    /// Nominal law u(t, x) for the pointwise filter.
    std::function<Vec(double, const Vec&)> nominal;
    double slack_weight = 100.0;
    bool halt_on_infeasible = false;
};

/// Tracking objective for the min-norm controller: V and its decay rate Q,
/// each allowed to depend on the tracking estimate phi_hat.
struct ClfSpec {
    ScalarField V;
    ScalarField Q;
    AdaptationConfig adaptation;
    Vec phi_hat0;
    double varrho0 = 0.0;
};

struct EstimatorSpec {
    PredictorState::Mode mode = PredictorState::Mode::ExactVelocity;
    double filter_pole = 50.0;
    /// Set-membership update every `cadence` steps; 0 disables the update.
    int cadence = 10;
    double noise_margin = 0.0;
    /// Feed vartheta(t) into the safety row threshold.
    bool dynamic_threshold = true;
};

struct MonitorTolerances {
    double h = 1e-6;
    double derivative = 1e-3;
    double sign_floor = 1e-10;
    /// Allowed distance of min h below the threshold, relative to the threshold.
    double stability_rel = 0.05;
};

struct Scenario {
    std::string id;
    std::string description;
    DynamicsModel model;
    ParameterBox params;
    BarrierFamily barrier;
    std::optional<SlidingVariable> sliding;
    ClassKInfinity alpha = ClassKInfinity::linear(1.0);
    AdaptationConfig adaptation;
    ControllerSpec controller;
    std::optional<Box> input_box;
    std::optional<ClfSpec> clf;
    std::optional<EstimatorSpec> estimator;
    Vec x0;
    Vec theta_hat0;
    double rho0 = 0.0;
    double T = 10.0;
    double dt = 1e-3;
    MonitorTolerances tol;
    StateGrid grid;
    int theta_points = 11;

    /// Field that the safety row and adaptation act on: s for high-order runs, h otherwise.
    [[nodiscard]] const ScalarField& safety_field() const;
    [[nodiscard]] double static_threshold() const;
    [[nodiscard]] bool has_predictor() const;
};

struct TraceRecord {
    double t = 0.0;
    Vec x;
    Vec theta_hat;
    double rho = 0.0;
    Vec u;
    double delta = 0.0;
    double h = 0.0;
    std::optional<double> s;
    double barrier_like = 0.0;
    double effective_gain = 0.0;
    double threshold = 0.0;
    QPStatus qp_status = QPStatus::Optimal;
    bool clamp_fired = false;

    // trailing telemetry
    Vec phi_hat;
    double varrho = 0.0;
    Vec bound_lower;
    Vec bound_upper;
    double rho_dot = 0.0;
    double transient = 0.0;
    double predictor_residual = 0.0;
    std::string qp_active;
    bool rho_held = false;
};

struct Trace {
    std::vector<TraceRecord> records;
    bool aborted = false;
    std::string abort_reason;
};

struct MonitorReport {
    std::string scenario_id;
    std::string law;
    std::size_t steps = 0;
    double min_h = 0.0;
    std::optional<double> min_s;
    double min_barrier_like_margin = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    std::optional<double> issf_floor_min;
    std::size_t issf_violations = 0;
    std::size_t derivative_check_violations = 0;
    std::size_t sign_checked = 0;
    std::size_t sign_opposition_violations = 0;
    std::size_t sliding_implication_violations = 0;
    double stability_gap = 0.0;
    double final_threshold = 0.0;
    bool threshold_monotone = true;
    std::optional<bool> membership_contains_truth;
    std::optional<double> predictor_identity_max;
    std::size_t qp_infeasible_count = 0;
    std::size_t clamp_count = 0;
    std::size_t rho_floor_holds = 0;
    double lipschitz_estimate = 0.0;
    std::size_t active_set_changes = 0;
    bool aborted = false;
    std::string abort_reason;
    bool invariance_pass = false;

    [[nodiscard]] std::string to_text() const;
};

/// Machine-checked premises of the scenario (start, gain, initial sets).
struct PremiseReport {
    double h0 = 0.0;
    double threshold = 0.0;
    double gain_bound = 0.0;
    bool admissible = false;
    bool start_inside = false;
    std::optional<std::vector<bool>> initial_sets;
    std::vector<std::string> problems;

    [[nodiscard]] bool ok() const { return problems.empty(); }
};

PremiseReport check_premises(const Scenario& sc);

/// Grid certificate for the scenario's barrier (or sliding variable).
VerificationReport verify_scenario(const Scenario& sc, int jobs = 1);

/// Closed-loop simulator for the augmented state (x, theta_hat, rho[, phi_hat, varrho][, filter]).
class Simulator {
public:
    explicit Simulator(Scenario sc);

    [[nodiscard]] const Scenario& scenario() const { return sc_; }
    [[nodiscard]] double time() const { return t_; }
    [[nodiscard]] const Vec& state() const { return z_; }
    [[nodiscard]] Vec x() const { return z_.head(sc_.model.n); }
    [[nodiscard]] Vec theta_hat() const { return z_.segment(sc_.model.n, sc_.model.p); }
    [[nodiscard]] double rho() const { return z_[sc_.model.n + sc_.model.p]; }
    [[nodiscard]] const std::optional<UncertaintyBound>& bound() const { return bound_; }

    /// Record describing the current state (controller and rates evaluated here).
    [[nodiscard]] TraceRecord observe() const;
    /// One RK4 step of length dt; returns the record of the new state.
    TraceRecord step();

    /// Augmented vector field at (t, z), controller re-solved.
    [[nodiscard]] Vec rhs(double t, const Vec& z) const;

private:
    struct Eval;
    [[nodiscard]] Eval evaluate(double t, const Vec& z) const;
    [[nodiscard]] double threshold() const;

    Scenario sc_;
    Vec z_;
    double t_ = 0.0;
    std::size_t step_index_ = 0;
    std::optional<UncertaintyBound> bound_;
    bool last_clamp_ = false;
    int i_theta_ = 0;
    int i_rho_ = 0;
    int i_phi_ = -1;
    int i_varrho_ = -1;
    int i_filter_ = -1;
};

Trace simulate(const Scenario& sc);

/// Offline monitors: pure in (scenario, trace).
MonitorReport evaluate_monitors(const Scenario& sc, const Trace& trace);

struct RunResult {
    Trace trace;
    MonitorReport report;
};

RunResult run(const Scenario& sc);

enum class SweepParam { Gamma, Eta, Sigma, Dt };
SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam p);

struct SweepRow {
    double value = 0.0;
    bool admissible = true;
    bool premise_ok = true;
    MonitorReport report;
    Vec final_state;
    /// dt sweeps only: |final state - next finer final state| and the ratio of successive differences.
    std::optional<double> diff_to_finer;
    std::optional<double> convergence_ratio;
};

std::vector<SweepRow> sweep(const Scenario& base, SweepParam param, const std::vector<double>& values,
                            int jobs = 1);

/// dt-halving self-convergence on a horizon: |z_dt - z_dt/2| / |z_dt/2 - z_dt/4|.
double self_convergence_ratio(const Scenario& sc, double dt, double horizon);

}  // namespace ucbf
