#include "ucbf/estimator.hpp"

#include <cmath>

#include "ucbf/format.hpp"

namespace ucbf {

PredictorState PredictorState::filtered(const Vec& x0, double pole) {
    if (!(pole > 0.0)) {
        throw ConfigError("predictor: filter pole must be positive");
    }
    PredictorState s;
    s.mode = Mode::FilteredVelocity;
    s.filter_pole = pole;
    s.filtered_x = x0;
    return s;
}

Vec PredictorState::velocity_estimate(const Vec& x) const {
    if (mode != Mode::FilteredVelocity) {
        throw ConfigError("predictor: exact mode has no filtered velocity");
    }
    require_size(x, filtered_x.size(), "predictor state");
    return filter_pole * (x - filtered_x);
}

Vec PredictorState::filter_rate(const Vec& x) const {
    return velocity_estimate(x);
}

Vec predictor_error(const DynamicsModel& model, const Vec& x, const Vec& x_dot_measured, const Vec& u,
                    const Vec& theta_hat) {
    require_size(x, model.n, "predictor x");
    require_size(x_dot_measured, model.n, "predictor xdot");
    require_size(u, model.m, "predictor u");
    require_size(theta_hat, model.p, "predictor theta_hat");
    return x_dot_measured - (eval_drift(model, x, theta_hat) + model.g(x) * u);
}

UncertaintyBound UncertaintyBound::from_parameters(const ParameterBox& params) {
    return {params.lower, params.upper, params.vartheta_sup};
}

bool UncertaintyBound::contains(const Vec& theta, double tol) const {
    return Box{lower, upper}.contains(theta, tol);
}

UncertaintyBound set_membership_update(const UncertaintyBound& bound, const DynamicsModel& model, const Vec& x,
                                       const Vec& epsilon, const Vec& theta_hat, double noise_margin) {
    if (!(noise_margin >= 0.0)) {
        throw ConfigError("set membership: noise margin must be nonnegative");
    }
    require_size(epsilon, model.n, "set membership epsilon");
    const Mat delta = model.delta(x);
    UncertaintyBound out = bound;

    for (int j = 0; j < model.n; ++j) {
        const Vec col = delta.col(j);
        if (col.cwiseAbs().maxCoeff() == 0.0) {
            continue;
        }
        // col^T theta in [lo, hi]
        const double centre = col.dot(theta_hat) - epsilon[j];
        const double lo = centre - noise_margin;
        const double hi = centre + noise_margin;
        for (int k = 0; k < model.p; ++k) {
            if (col[k] == 0.0) {
                continue;
            }
            double rest_min = 0.0;
            double rest_max = 0.0;
            for (int i = 0; i < model.p; ++i) {
                if (i == k) {
                    continue;
                }
                const double a = col[i] * out.lower[i];
                const double b = col[i] * out.upper[i];
                rest_min += std::min(a, b);
                rest_max += std::max(a, b);
            }
            double new_lo = (lo - rest_max) / col[k];
            double new_hi = (hi - rest_min) / col[k];
            if (col[k] < 0.0) {
                std::swap(new_lo, new_hi);
            }
            out.lower[k] = std::max(out.lower[k], new_lo);
            out.upper[k] = std::min(out.upper[k], new_hi);
            if (out.lower[k] > out.upper[k]) {
                throw InconsistentMeasurement("set membership: empty intersection for parameter " +
                                              std::to_string(k) + " at x = " + fmt_vec(x) +
                                              "; noise margin too small or model mismatch");
            }
        }
    }
    out.vartheta = bound.vartheta.cwiseMin(out.upper - out.lower);
    return out;
}

double dynamic_threshold(const UncertaintyBound& bound, double gamma) {
    return bound.vartheta.squaredNorm() / (2.0 * gamma);
}

}  // namespace ucbf
