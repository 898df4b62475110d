#include "ucbf/adaptation.hpp"

#include <cmath>

namespace ucbf {

std::string to_string(AdaptationLaw law) {
    switch (law) {
    case AdaptationLaw::Direct: return "direct";
    case AdaptationLaw::Leaky: return "leaky";
    case AdaptationLaw::Composite: return "composite";
    case AdaptationLaw::HighOrder: return "high_order";
    case AdaptationLaw::RacbfBaseline: return "racbf_baseline";
    }
    return "direct";
}

AdaptationLaw adaptation_law_from_string(const std::string& name) {
    if (name == "direct") return AdaptationLaw::Direct;
    if (name == "leaky") return AdaptationLaw::Leaky;
    if (name == "composite") return AdaptationLaw::Composite;
    if (name == "high_order") return AdaptationLaw::HighOrder;
    if (name == "racbf_baseline") return AdaptationLaw::RacbfBaseline;
    throw ConfigError("unknown adaptation law: " + name);
}

void AdaptationConfig::validate() const {
    if (!(gamma > 0.0)) {
        throw ConfigError("adaptation: gamma must be positive");
    }
    if (!(eta > 0.0)) {
        throw ConfigError("adaptation: eta must be positive");
    }
    if (law == AdaptationLaw::Leaky && !(sigma > 0.0)) {
        throw ConfigError("adaptation: sigma must be positive for the leaky law");
    }
    if (law == AdaptationLaw::Composite && !(beta > 0.0)) {
        throw ConfigError("adaptation: beta must be positive for the composite law");
    }
    if (projection) {
        projection->validate("adaptation projection");
    }
}

Vec projection_mask(const std::optional<Box>& box, const Vec& theta_hat, const Vec& raw_rate) {
    Vec mask = Vec::Ones(theta_hat.size());
    if (!box) {
        return mask;
    }
    for (Eigen::Index i = 0; i < theta_hat.size(); ++i) {
        const bool at_lower = theta_hat[i] <= box->lower[i] && raw_rate[i] < 0.0;
        const bool at_upper = theta_hat[i] >= box->upper[i] && raw_rate[i] > 0.0;
        if (at_lower || at_upper) {
            mask[i] = 0.0;
        }
    }
    return mask;
}

namespace {

double guarded_denominator(double b, double eta, const char* what) {
    const double d = b + eta;
    if (!(d >= 1e-12)) {
        throw SingularDenominator(std::string(what) + " + eta = " + std::to_string(d) +
                                  " fell below 1e-12; the invariance premise no longer holds");
    }
    return d;
}

// theta_hat_dot and rho_dot of the direct law for an arbitrary barrier-like field.
AdaptationRates gain_scaled_rates(const DynamicsModel& model, const ScalarField& field,
                                  const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho,
                                  const Vec* epsilon, const char* what) {
    const auto sv = cfg.scaling.eval(rho);
    const Mat delta = model.delta(x);
    const Vec direction = cfg.gamma * (delta * field.grad_x(x, theta_hat));
    Vec raw = sv.v * direction;
    if (epsilon != nullptr) {
        raw -= cfg.beta * (delta * *epsilon);
    }
    const Vec mask = projection_mask(cfg.projection, theta_hat, raw);

    AdaptationRates out;
    out.theta_hat_dot = raw.cwiseProduct(mask);
    const Vec grad_theta = field.grad_theta(x, theta_hat);
    out.transient = grad_theta.dot(out.theta_hat_dot);
    const double denom = guarded_denominator(field.value(x, theta_hat), cfg.eta, what);
    out.rho_dot = -(sv.v / sv.dv) * (1.0 / denom) * out.transient;
    return out;
}

}  // namespace

AdaptationRates direct_rates(const DynamicsModel& model, const ScalarField& barrier,
                             const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho) {
    return gain_scaled_rates(model, barrier, cfg, x, theta_hat, rho, nullptr, "h");
}

AdaptationRates leaky_rates(const DynamicsModel& model, const ScalarField& barrier,
                            const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho) {
    const auto sv = cfg.scaling.eval(rho);
    const Vec direction = cfg.gamma * (model.delta(x) * barrier.grad_x(x, theta_hat));
    const Vec mask = projection_mask(cfg.projection, theta_hat, direction);

    AdaptationRates out;
    out.theta_hat_dot = sv.v * direction.cwiseProduct(mask);
    const Vec grad_theta = barrier.grad_theta(x, theta_hat);
    out.transient = grad_theta.dot(out.theta_hat_dot);

    double w = 0.0;
    if (!cfg.force_w_zero && out.transient < 0.0) {
        w = -cfg.scaling.zeta() * grad_theta.dot(direction.cwiseProduct(mask));
    }
    const double denom = guarded_denominator(barrier.value(x, theta_hat), cfg.eta, "h");
    out.rho_dot = (sv.v / sv.dv) * (1.0 / denom) * (-cfg.sigma * rho + w);
    return out;
}

AdaptationRates composite_rates(const DynamicsModel& model, const ScalarField& barrier,
                                const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho,
                                const Vec& epsilon) {
    require_size(epsilon, model.n, "predictor error");
    return gain_scaled_rates(model, barrier, cfg, x, theta_hat, rho, &epsilon, "h");
}

AdaptationRates high_order_rates(const DynamicsModel& model, const SlidingVariable& sliding,
                                 const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho) {
    return gain_scaled_rates(model, sliding.field(), cfg, x, theta_hat, rho, nullptr, "s");
}

Vec racbf_rates(const DynamicsModel& model, const ScalarField& barrier, const AdaptationConfig& cfg,
                const Vec& x, const Vec& theta_hat) {
    const Vec raw = cfg.gamma * (model.delta(x) * barrier.grad_x(x, theta_hat));
    return raw.cwiseProduct(projection_mask(cfg.projection, theta_hat, raw));
}

AdaptationRates tracking_rates(const DynamicsModel& model, const ScalarField& clf,
                               const AdaptationConfig& cfg, const Vec& x, const Vec& phi_hat, double varrho) {
    const auto sv = cfg.scaling.eval(varrho);
    const Vec raw = -cfg.gamma * sv.v * (model.delta(x) * clf.grad_x(x, phi_hat));
    AdaptationRates out;
    out.theta_hat_dot = raw.cwiseProduct(projection_mask(cfg.projection, phi_hat, raw));
    out.transient = clf.grad_theta(x, phi_hat).dot(out.theta_hat_dot);
    const double denom = guarded_denominator(clf.value(x, phi_hat), cfg.eta, "V");
    out.rho_dot = -(sv.v / sv.dv) * (1.0 / denom) * out.transient;
    return out;
}

double admissible_gain_lower_bound(const Vec& vartheta, double h0) {
    if (!(h0 > 0.0)) {
        throw InfeasibleStart("admissible gain: h(x0) = " + std::to_string(h0) +
                              " must be strictly positive");
    }
    return vartheta.squaredNorm() / (2.0 * h0);
}

bool gain_is_admissible(double gamma, const Vec& vartheta, double h0) {
    return gamma >= admissible_gain_lower_bound(vartheta, h0);
}

double barrier_like_value(double b, const AdaptationConfig& cfg, double rho, const Vec& theta_tilde) {
    const double v = cfg.law == AdaptationLaw::RacbfBaseline ? 1.0 : cfg.scaling.eval(rho).v;
    return v * (b + cfg.eta) - theta_tilde.squaredNorm() / (2.0 * cfg.gamma);
}

double issf_floor(const ClassKInfinity& alpha, const ScalingFunction& sf, double sigma, double rho) {
    if (rho < 0.0) {
        throw DomainError("issf floor: rho must be nonnegative, got " + std::to_string(rho));
    }
    const double v = sf.eval(rho).v;
    return -alpha.inverse(sigma * v * rho) / v;
}

ConvexPotential ConvexPotential::half_squared_norm() {
    return {[](const Vec& v) { return 0.5 * v.squaredNorm(); },
            [](const Vec& v) -> Vec { return v; },
            [](const Vec& v) -> Mat { return Mat::Identity(v.size(), v.size()); }};
}

double bregman_divergence(const ConvexPotential& psi, const Vec& y, const Vec& x) {
    return psi.value(y) - psi.value(x) - (y - x).dot(psi.grad(x));
}

double bregman_rate(const ConvexPotential& psi, const Vec& y, const Vec& x, const Vec& x_dot) {
    return (x - y).dot(psi.hessian(x) * x_dot);
}

}  // namespace ucbf
