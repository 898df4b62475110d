#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucbf/barrier.hpp"
#include "ucbf/model.hpp"

namespace ucbf {

/// a . u <= b. Tracking rows are relaxed to a . u <= b + delta.
struct ConstraintRow {
    enum class Kind { SafetyHard, TrackingSoft };
    Vec a;
    double b = 0.0;
    Kind kind = Kind::SafetyHard;
};

enum class QPStatus { Optimal, Infeasible, UnboundedGuard };

std::string to_string(QPStatus status);

struct QPSolution {
    Vec u;
    double delta = 0.0;
    QPStatus status = QPStatus::Optimal;
    double kkt_residual = 0.0;
    /// Indices into the full constraint list: rows first, then delta >= 0,
    /// then box upper faces, then box lower faces.
    std::vector<int> active_set;
    /// Multipliers matching active_set.
    std::vector<double> multipliers;
    /// Infeasible only: safety rows still violated by the least-violation control.
    std::vector<int> certificate_rows;
};

/// grad h^T [f - Delta^T theta_hat + g u] >= -alpha(h - threshold), as a row.
ConstraintRow safety_row(const DynamicsModel& model, const ScalarField& field, const ClassKInfinity& alpha,
                         const Vec& x, const Vec& theta_hat, double threshold);

/// grad V^T [f - Delta^T phi_hat + g u] <= -Q + delta.
ConstraintRow tracking_row(const DynamicsModel& model, const ScalarField& clf, const ScalarField& decay,
                           const Vec& x, const Vec& phi_hat);

/// min 1/2 |u|^2 + r delta^2 over the rows and optional box on u.
QPSolution solve_min_norm(const std::vector<ConstraintRow>& rows, double slack_weight,
                          const std::optional<Box>& input_box = std::nullopt);

/// min 1/2 |u - u_nominal|^2 over safety rows and optional box on u.
QPSolution pointwise_filter(const Vec& u_nominal, const std::vector<ConstraintRow>& rows,
                            const std::optional<Box>& input_box = std::nullopt);

/// Euclidean projection of u onto {a . u <= b}.
Vec project_halfspace(const Vec& u, const Vec& a, double b);

}  // namespace ucbf
