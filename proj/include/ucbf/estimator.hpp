#pragma once

#include "ucbf/model.hpp"

namespace ucbf {

/// Velocity source for the state predictor. Exact mode reads the true
/// dynamics; filtered mode runs xi_dot = pole (x - xi) and uses pole (x - xi).
struct PredictorState {
    enum class Mode { ExactVelocity, FilteredVelocity };
    Mode mode = Mode::ExactVelocity;
    double filter_pole = 50.0;
    Vec filtered_x;

    static PredictorState exact() { return {}; }
    static PredictorState filtered(const Vec& x0, double pole = 50.0);

    [[nodiscard]] Vec velocity_estimate(const Vec& x) const;
    [[nodiscard]] Vec filter_rate(const Vec& x) const;
};

/// xdot_measured - [f(x) - Delta(x)^T theta_hat + g(x) u].
Vec predictor_error(const DynamicsModel& model, const Vec& x, const Vec& x_dot_measured, const Vec& u,
                    const Vec& theta_hat);

/// Axis-aligned outer bound on theta. vartheta is the elementwise width,
/// capped by the static bound it started from.
struct UncertaintyBound {
    Vec lower;
    Vec upper;
    Vec vartheta;

    static UncertaintyBound from_parameters(const ParameterBox& params);
    [[nodiscard]] bool contains(const Vec& theta, double tol = 0.0) const;
};

/// Intersects the box with the strips |delta_j^T (theta_hat - theta) - eps_j| <= noise_margin,
/// one per state component, tightened back to a box. Throws InconsistentMeasurement
/// when the intersection is empty.
UncertaintyBound set_membership_update(const UncertaintyBound& bound, const DynamicsModel& model, const Vec& x,
                                       const Vec& epsilon, const Vec& theta_hat, double noise_margin);

/// vartheta(t)^T vartheta(t) / (2 gamma).
double dynamic_threshold(const UncertaintyBound& bound, double gamma);

}  // namespace ucbf
