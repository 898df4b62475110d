#include "ucbf/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ucbf {

void DynamicsModel::check_shapes(const Vec& x) const {
    require_size(x, n, "state");
    const Vec fx = f(x);
    const Mat dx = delta(x);
    const Mat gx = g(x);
    if (fx.size() != n) {
        throw ConfigError("model " + id + ": f(x) has wrong dimension");
    }
    if (dx.rows() != p || dx.cols() != n) {
        throw ConfigError("model " + id + ": Delta(x) must be p x n");
    }
    if (gx.rows() != n || gx.cols() != m) {
        throw ConfigError("model " + id + ": g(x) must be n x m");
    }
}

Vec eval_drift(const DynamicsModel& model, const Vec& x, const Vec& theta) {
    require_size(x, model.n, "state");
    require_size(theta, model.p, "theta");
    return model.f(x) - model.delta(x).transpose() * theta;
}

Vec eval_true_dynamics(const DynamicsModel& model, const Vec& x, const Vec& u, const Vec& theta) {
    require_size(u, model.m, "input");
    return eval_drift(model, x, theta) + model.g(x) * u;
}

double sampled_lipschitz_bound(const DynamicsModel& model, const Box& box, const Vec& theta,
                               int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&] {
        Vec x(box.dim());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] = box.lower[i] + unit(rng) * (box.upper[i] - box.lower[i]);
        }
        return x;
    };
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Vec x = draw();
        Vec y = x;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            y[i] += 1e-4 * (unit(rng) - 0.5) * (box.upper[i] - box.lower[i]);
        }
        const double dist = (x - y).norm();
        if (dist == 0.0) {
            continue;
        }
        const Vec fx = eval_drift(model, x, theta);
        const Vec fy = eval_drift(model, y, theta);
        const double lg = (model.g(x) - model.g(y)).norm();
        worst = std::max(worst, (fx - fy).norm() / dist + lg / dist);
    }
    return worst;
}

ParameterBox ParameterBox::make(Vec lower, Vec upper, Vec theta_true, Vec vartheta) {
    ParameterBox box;
    box.lower = std::move(lower);
    box.upper = std::move(upper);
    box.theta_true = std::move(theta_true);
    box.vartheta_sup = vartheta.size() == 0 ? Vec(box.upper - box.lower) : std::move(vartheta);
    box.validate();
    return box;
}

void ParameterBox::validate() const {
    Box{lower, upper}.validate("parameter box");
    require_size(theta_true, lower.size(), "theta_true");
    require_size(vartheta_sup, lower.size(), "vartheta_sup");
    if (!Box{lower, upper}.contains(theta_true)) {
        throw ConfigError("parameter box: theta_true outside [lower, upper]");
    }
    if ((vartheta_sup.array() < 0.0).any()) {
        throw ConfigError("parameter box: vartheta_sup must be nonnegative");
    }
}

// -- class-K_infinity --------------------------------------------------------

ClassKInfinity ClassKInfinity::linear(double gain) {
    if (!(gain > 0.0)) {
        throw ConfigError("linear class-K gain must be positive");
    }
    ClassKInfinity a;
    a.kind_ = Kind::Linear;
    a.gain_ = gain;
    a.name_ = "linear";
    return a;
}

ClassKInfinity ClassKInfinity::user_supplied(std::string name, std::function<double(double)> forward,
                                             std::function<double(double)> inverse) {
    if (!forward || !inverse) {
        throw ConfigError("user-supplied class-K function needs forward and inverse evaluators");
    }
    ClassKInfinity a;
    a.kind_ = Kind::UserSupplied;
    a.gain_ = std::numeric_limits<double>::quiet_NaN();
    a.name_ = std::move(name);
    a.forward_ = std::move(forward);
    a.inverse_ = std::move(inverse);
    return a;
}

double ClassKInfinity::operator()(double r) const {
    return kind_ == Kind::Linear ? gain_ * r : forward_(r);
}

double ClassKInfinity::inverse(double r) const {
    return kind_ == Kind::Linear ? r / gain_ : inverse_(r);
}

ClassKCertificate certify_class_k(const ClassKInfinity& alpha, const ClassKGrid& grid) {
    ClassKCertificate cert;
    cert.zero_at_origin = alpha(0.0) == 0.0;

    std::vector<double> rs(static_cast<std::size_t>(grid.r_points));
    for (int i = 0; i < grid.r_points; ++i) {
        rs[static_cast<std::size_t>(i)] =
            grid.r_min + (grid.r_max - grid.r_min) * i / std::max(1, grid.r_points - 1);
    }

    for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
        const double step = alpha(rs[i + 1]) - alpha(rs[i]);
        if (!(step > 0.0)) {
            cert.monotone = false;
            cert.worst_monotone_violation = std::max(cert.worst_monotone_violation, -step);
        }
    }

    for (double r : rs) {
        const double err = std::abs(alpha.inverse(alpha(r)) - r);
        cert.worst_inverse_error = std::max(cert.worst_inverse_error, err);
        if (err > 1e-10) {
            cert.inverse_consistent = false;
        }
        for (int j = 0; j < grid.c_points; ++j) {
            const double c = 1.0 + (grid.c_max - 1.0) * j / std::max(1, grid.c_points - 1);
            const double lhs = c * alpha(r);
            const double rhs = alpha(c * r);
            // Relative slack absorbs rounding in exact-equality cases.
            const double slack = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
            const double violation = lhs - rhs;
            if (violation > slack) {
                cert.superlinear = false;
                if (violation > cert.worst_superlinear_violation) {
                    cert.worst_superlinear_violation = violation;
                    cert.worst_r = r;
                    cert.worst_c = c;
                }
            }
        }
    }
    return cert;
}

// -- scaling functions -------------------------------------------------------

ScalingFunction ScalingFunction::arctan_plus_one(double upper) {
    if (!(upper > 0.0)) {
        throw ConfigError("arctan_plus_one: domain upper bound must be positive");
    }
    ScalingFunction sf;
    sf.kind_ = Kind::ArctanPlusOne;
    sf.lower_ = 0.0;
    sf.upper_ = upper;
    sf.zeta_ = std::atan(upper) + 1.0;
    return sf;
}

ScalingFunction ScalingFunction::exp_saturating(double zeta, double upper) {
    if (!(zeta > 1.0)) {
        throw ConfigError("exp_saturating: zeta must exceed 1");
    }
    if (!(upper > 0.0)) {
        throw ConfigError("exp_saturating: domain upper bound must be positive");
    }
    ScalingFunction sf;
    sf.kind_ = Kind::ExpSaturating;
    sf.lower_ = 0.0;
    sf.upper_ = upper;
    sf.zeta_ = zeta;
    return sf;
}

ScalingValue ScalingFunction::eval(double rho) const {
    if (!contains(rho)) {
        throw DomainError("scaling function: rho = " + std::to_string(rho) + " outside [" +
                          std::to_string(lower_) + ", " + std::to_string(upper_) + "]");
    }
    switch (kind_) {
    case Kind::ArctanPlusOne:
        return {std::atan(rho) + 1.0, 1.0 / (1.0 + rho * rho)};
    case Kind::ExpSaturating: {
        const double e = std::exp(-rho);
        return {zeta_ - (zeta_ - 1.0) * e, (zeta_ - 1.0) * e};
    }
    }
    return {1.0, 1.0};
}

}  // namespace ucbf
