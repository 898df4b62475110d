#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ucbf/barrier.hpp"
#include "ucbf/model.hpp"

namespace ucbf {

enum class AdaptationLaw { Direct, Leaky, Composite, HighOrder, RacbfBaseline };

std::string to_string(AdaptationLaw law);
AdaptationLaw adaptation_law_from_string(const std::string& name);

struct AdaptationConfig {
    AdaptationLaw law = AdaptationLaw::Direct;
    double gamma = 1.0;
    double eta = 0.1;
    double sigma = 1.0;  // leak rate, leaky law only
    double beta = 1.0;   // estimation gain, composite law only
    ScalingFunction scaling = ScalingFunction::arctan_plus_one();
    /// Box for theta_hat. Components sitting on a face have their outward rate
    /// zeroed before rho_dot is formed.
    std::optional<Box> projection;
    /// Leaky law only: drop the switching input w (pure leak).
    bool force_w_zero = false;

    void validate() const;
};

struct AdaptationRates {
    Vec theta_hat_dot;
    double rho_dot = 0.0;
    /// grad_theta b^T theta_hat_dot, the adaptation transient acting on the barrier.
    double transient = 0.0;
};

/// Mask of components allowed to move: zero where theta_hat sits on a face of
/// the box and the raw rate points outward.
Vec projection_mask(const std::optional<Box>& box, const Vec& theta_hat, const Vec& raw_rate);

AdaptationRates direct_rates(const DynamicsModel& model, const ScalarField& barrier,
                             const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho);

AdaptationRates leaky_rates(const DynamicsModel& model, const ScalarField& barrier,
                            const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho);

/// epsilon is the state-predictor error, measured xdot minus predicted xdot.
AdaptationRates composite_rates(const DynamicsModel& model, const ScalarField& barrier,
                                const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho,
                                const Vec& epsilon);

/// Direct law driven by the sliding variable s instead of h.
AdaptationRates high_order_rates(const DynamicsModel& model, const SlidingVariable& sliding,
                                 const AdaptationConfig& cfg, const Vec& x, const Vec& theta_hat, double rho);

/// gamma Delta(x) grad_x h^r(x, theta_hat); no gain scaling.
Vec racbf_rates(const DynamicsModel& model, const ScalarField& barrier, const AdaptationConfig& cfg,
                const Vec& x, const Vec& theta_hat);

/// Tracking-side estimate for the CLF row: phi_hat_dot = -gamma v Delta grad_x V,
/// varrho_dot = -(v / v') grad_phi V^T phi_hat_dot / (V + eta).
AdaptationRates tracking_rates(const DynamicsModel& model, const ScalarField& clf,
                               const AdaptationConfig& cfg, const Vec& x, const Vec& phi_hat, double varrho);

/// vartheta^T vartheta / (2 h0). Throws InfeasibleStart when h0 <= 0.
double admissible_gain_lower_bound(const Vec& vartheta, double h0);

/// gamma >= admissible_gain_lower_bound(vartheta, h0), evaluated in exactly
/// that form so the flag flips at the bound itself.
bool gain_is_admissible(double gamma, const Vec& vartheta, double h0);

/// v(rho) (b + eta) - theta_tilde^T theta_tilde / (2 gamma). Uses ground truth;
/// telemetry only.
double barrier_like_value(double b, const AdaptationConfig& cfg, double rho, const Vec& theta_tilde);

/// -alpha^{-1}(sigma v(rho) rho) / v(rho), the lower bound on h under the leaky law.
double issf_floor(const ClassKInfinity& alpha, const ScalingFunction& sf, double sigma, double rho);

/// Strictly convex potential with gradient and Hessian.
struct ConvexPotential {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hessian;

    static ConvexPotential half_squared_norm();
};

/// psi(y) - psi(x) - (y - x)^T grad psi(x).
double bregman_divergence(const ConvexPotential& psi, const Vec& y, const Vec& x);

/// d/dt of bregman_divergence(psi, y, x(t)) for fixed y: (x - y)^T hess psi(x) xdot.
double bregman_rate(const ConvexPotential& psi, const Vec& y, const Vec& x, const Vec& x_dot);

}  // namespace ucbf
