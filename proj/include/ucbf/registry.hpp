#pragma once

#include <map>
#include <string>
#include <vector>

#include "ucbf/barrier.hpp"
#include "ucbf/model.hpp"

namespace ucbf {

using ParamMap = std::map<std::string, double>;

/// Built-in dynamics by id:
///   unmatched_2d   x1dot = x2 - theta x1, x2dot = u
///   scalar_drift   xdot = -1 + theta x + u
DynamicsModel make_model(const std::string& id);
std::vector<std::string> model_ids();

/// Built-in barrier families by id:
///   ellipse_unmatched  h = 1 - x1^2 - c (x2 - theta x1)^2          (c)
///   position_bound     h = 1 - x1^2, relative degree 2 on unmatched_2d
///   racbf_scalar       h = x + 1 - k theta^2                        (k)
BarrierFamily make_barrier(const std::string& id, const ParamMap& params, const DynamicsModel& model);
std::vector<std::string> barrier_ids();

/// Default parameter values of a barrier family; unknown names are rejected.
ParamMap barrier_defaults(const std::string& id);

/// V = 1/2 |x - x_ref|^2 and Q = |x - x_ref|^2, both independent of the estimate.
struct QuadraticClf {
    ScalarField V;
    ScalarField Q;
};
QuadraticClf make_quadratic_clf(const Vec& x_ref, int p);

/// alpha(r) = r for r < 0 and r + k r^3 otherwise.
ClassKInfinity make_linear_cubic(double k);

}  // namespace ucbf
