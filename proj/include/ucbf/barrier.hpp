#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ucbf/model.hpp"

namespace ucbf {

/// Scalar function of (x, theta) with analytic gradients in both arguments.
struct ScalarField {
    std::function<double(const Vec&, const Vec&)> value;
    std::function<Vec(const Vec&, const Vec&)> grad_x;
    std::function<Vec(const Vec&, const Vec&)> grad_theta;
};

/// Parameter-indexed barrier h_theta(x). For relative degree r > 1 the family
/// also carries h^(i)_theta(x), i = 1..r-1, the time derivatives along the
/// certainty-equivalent drift f - Delta^T theta.
struct BarrierFamily {
    std::string id;
    ScalarField h;
    int relative_degree = 1;
    std::vector<ScalarField> derivative_chain;
};

/// s_theta = h^(r-1) + phi(h, ..., h^(r-2)).
class SlidingVariable {
public:
    enum class Kind { Linear, StateDependent };

    /// Linear kind uses the repeated eigenvalue lambda1: s = (d/dt + lambda1)^(r-1) h.
    /// The state-dependent kind s = hdot + (lambda1 + lambda2 |h|^q) h needs r = 2.
    /// A relative-degree-one barrier yields s = h.
    static SlidingVariable make(const BarrierFamily& barrier, Kind kind, double lambda1,
                                double lambda2 = 0.0, double q = 1.0);

    [[nodiscard]] const ScalarField& field() const { return field_; }
    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double lambda1() const { return lambda1_; }
    [[nodiscard]] double lambda2() const { return lambda2_; }
    [[nodiscard]] double q() const { return q_; }
    [[nodiscard]] int relative_degree() const { return relative_degree_; }

private:
    Kind kind_ = Kind::Linear;
    double lambda1_ = 1.0;
    double lambda2_ = 0.0;
    double q_ = 1.0;
    int relative_degree_ = 1;
    ScalarField field_;
};

/// vartheta^T vartheta / (2 gamma).
double tightened_threshold(double gamma, const Vec& vartheta);

/// f(x) - Delta(x)^T (theta_hat - gamma grad_theta h(x, theta_hat)).
Vec racbf_modified_drift(const DynamicsModel& model, const ScalarField& barrier, const Vec& x,
                         const Vec& theta_hat, double gamma);

// -- grid verification --------------------------------------------------------

/// Admissible input set. Only boxes are supported by the verifier.
struct InputSet {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    Box box;
    double radius = 0.0;

    static InputSet make_box(Vec lower, Vec upper) { return {Kind::Box, Box{std::move(lower), std::move(upper)}, 0.0}; }
    [[nodiscard]] const Box& require_box() const;
};

struct StateGrid {
    Box bounds;
    int points_per_axis = 41;
};

/// Tensor grid over the parameter box, `points_per_axis` per dimension.
std::vector<Vec> parameter_grid(const Box& theta_box, int points_per_axis);

struct VerifyOptions {
    /// Only grid points with field(x, theta) >= domain_level are checked.
    double domain_level = 0.0;
    /// Margin is computed against alpha(field - tighten).
    double tighten = 0.0;
    /// When set, points must also satisfy this field >= 0 (h for sliding checks).
    const ScalarField* also_nonnegative = nullptr;
    /// When set, the drift is modified by racbf_modified_drift with this gamma.
    std::optional<double> racbf_gamma;
    /// |grad^T g| below this counts as a zero-authority point.
    double authority_eps = 1e-12;
    int jobs = 1;
};

struct VerificationReport {
    std::string condition;
    std::string domain;
    std::size_t points_evaluated = 0;
    std::size_t points_in_domain = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    Vec argmin_x;
    Vec argmin_theta;
    bool pass = false;
    std::size_t zero_authority_count = 0;
    double zero_authority_min_margin = std::numeric_limits<double>::infinity();
    StateGrid x_grid;
    std::size_t theta_points = 0;
    Box input_box;
    std::vector<std::string> notes;

    /// Structured text rendering (one `key: value` pair per line).
    [[nodiscard]] std::string to_text() const;
};

/// Closed-form sup over a box of c^T u.
double sup_over_box(const Vec& c, const Box& box);

/// margin = sup_u grad^T [f - Delta^T theta + g u] + alpha(field - tighten).
double condition_margin(const DynamicsModel& model, const ScalarField& field, const ClassKInfinity& alpha,
                        const Box& input_box, const Vec& x, const Vec& theta, double tighten = 0.0,
                        std::optional<double> racbf_gamma = std::nullopt);

VerificationReport verify_ucbf_grid(const DynamicsModel& model, const ScalarField& barrier,
                                    const ClassKInfinity& alpha, const InputSet& input_set,
                                    const std::vector<Vec>& theta_grid, const StateGrid& x_grid,
                                    const VerifyOptions& options = {});

/// Same check with s_theta in place of h_theta; for r > 1 the domain is
/// additionally restricted to h_theta >= 0.
VerificationReport verify_houcbf_grid(const DynamicsModel& model, const BarrierFamily& barrier,
                                      const SlidingVariable& sliding, const ClassKInfinity& alpha,
                                      const InputSet& input_set, const std::vector<Vec>& theta_grid,
                                      const StateGrid& x_grid, VerifyOptions options = {});

/// For i = 0..r-1 whether (d/dt + lambda)^i h_theta(x0) >= 0.
std::vector<bool> initial_condition_sets_check(const BarrierFamily& barrier, const Vec& x0,
                                               const Vec& theta_hat0, double lambda);

/// Sliding-variable form: the linear kind checks with lambda1; the
/// state-dependent kind has no closed-form initial sets and returns nullopt.
std::optional<std::vector<bool>> initial_condition_sets_check(const SlidingVariable& sliding,
                                                              const BarrierFamily& barrier,
                                                              const Vec& x0, const Vec& theta_hat0);

/// Largest relative mismatch between the analytic gradients of `field` and
/// central differences, over `samples` random points in the given boxes.
double gradient_check(const ScalarField& field, const Box& x_box, const Box& theta_box, int samples,
                      unsigned seed, double step = 1e-6);

}  // namespace ucbf
