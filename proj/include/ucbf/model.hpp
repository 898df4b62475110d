#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ucbf/common.hpp"

namespace ucbf {

/// Control-affine dynamics with parametric uncertainty:
///   xdot = f(x) - Delta(x)^T theta + g(x) u
/// where Delta(x) is p x n and g(x) is n x m.
struct DynamicsModel {
    std::string id;
    int n = 0;
    int m = 0;
    int p = 0;
    std::function<Vec(const Vec&)> f;
    std::function<Mat(const Vec&)> delta;
    std::function<Mat(const Vec&)> g;

    /// Evaluates every evaluator at x and checks the output shapes.
    void check_shapes(const Vec& x) const;
};

/// f(x) - Delta(x)^T theta + g(x) u.
Vec eval_true_dynamics(const DynamicsModel& model, const Vec& x, const Vec& u, const Vec& theta);

/// f(x) - Delta(x)^T theta, the drift seen by a certainty-equivalent design.
Vec eval_drift(const DynamicsModel& model, const Vec& x, const Vec& theta);

/// Largest sampled difference quotient |F(x) - F(y)| / |x - y| over random
/// pairs in a box; a finite value is taken as local Lipschitz evidence.
double sampled_lipschitz_bound(const DynamicsModel& model, const Box& box, const Vec& theta,
                               int samples, unsigned seed);

/// Known parameter set Theta and the per-element bound on |theta_hat - theta|.
struct ParameterBox {
    Vec lower;
    Vec upper;
    Vec theta_true;
    Vec vartheta_sup;

    /// Builds the box; vartheta defaults to upper - lower.
    static ParameterBox make(Vec lower, Vec upper, Vec theta_true, Vec vartheta = {});

    [[nodiscard]] Box box() const { return {lower, upper}; }
    void validate() const;
};

// -- extended class-K_infinity functions ------------------------------------

class ClassKInfinity {
public:
    enum class Kind { Linear, UserSupplied };

    static ClassKInfinity linear(double gain = 1.0);
    static ClassKInfinity user_supplied(std::string name, std::function<double(double)> forward,
                                        std::function<double(double)> inverse);

    double operator()(double r) const;
    [[nodiscard]] double inverse(double r) const;

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double gain() const { return gain_; }
    [[nodiscard]] const std::string& name() const { return name_; }

private:
    Kind kind_ = Kind::Linear;
    double gain_ = 1.0;
    std::string name_ = "linear";
    std::function<double(double)> forward_;
    std::function<double(double)> inverse_;
};

struct ClassKGrid {
    double r_min = -10.0;
    double r_max = 10.0;
    int r_points = 201;
    double c_max = 10.0;
    int c_points = 46;
};

struct ClassKCertificate {
    bool monotone = true;
    bool zero_at_origin = true;
    bool superlinear = true;
    bool inverse_consistent = true;
    double worst_monotone_violation = 0.0;
    double worst_superlinear_violation = 0.0;
    double worst_inverse_error = 0.0;
    double worst_r = 0.0;
    double worst_c = 1.0;

    [[nodiscard]] bool pass() const {
        return monotone && zero_at_origin && superlinear && inverse_consistent;
    }
};

/// Checks strict monotonicity, alpha(0) = 0, alpha^{-1}(alpha(r)) = r and
/// c * alpha(r) <= alpha(c * r) for c >= 1 on a sampled grid.
ClassKCertificate certify_class_k(const ClassKInfinity& alpha, const ClassKGrid& grid = {});

// -- scaling functions -------------------------------------------------------

struct ScalingValue {
    double v;
    double dv;
};

/// Bounded, strictly increasing gain multiplier v(rho) with 1 <= v <= zeta.
class ScalingFunction {
public:
    enum class Kind { ArctanPlusOne, ExpSaturating };

    /// v = arctan(rho) + 1 on [0, upper]; zeta is v(upper).
    static ScalingFunction arctan_plus_one(double upper = 10.0);
    /// v = zeta - (zeta - 1) exp(-rho) on [0, upper].
    static ScalingFunction exp_saturating(double zeta,
                                          double upper = std::numeric_limits<double>::infinity());

    /// Throws DomainError when rho lies outside [lower(), upper()].
    [[nodiscard]] ScalingValue eval(double rho) const;

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double zeta() const { return zeta_; }
    [[nodiscard]] double lower() const { return lower_; }
    [[nodiscard]] double upper() const { return upper_; }
    [[nodiscard]] bool contains(double rho) const { return rho >= lower_ && rho <= upper_; }

private:
    Kind kind_ = Kind::ArctanPlusOne;
    double zeta_ = 0.0;
    double lower_ = 0.0;
    double upper_ = 10.0;
};

inline ScalingValue eval_scaling(const ScalingFunction& sf, double rho) { return sf.eval(rho); }

}  // namespace ucbf
