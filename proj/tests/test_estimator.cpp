#include <doctest.h>

#include <cmath>
#include <random>

#include "ucbf/config.hpp"
#include "ucbf/estimator.hpp"
#include "ucbf/registry.hpp"

using namespace ucbf;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

// xdot = -Delta(x)^T theta + u with Delta(x) = diag(x1, x2) (p = n = m = 2).
DynamicsModel diagonal_model() {
    DynamicsModel m;
    m.id = "diag";
    m.n = m.m = m.p = 2;
    m.f = [](const Vec&) { return Vec::Zero(2); };
    m.delta = [](const Vec& x) -> Mat { return Mat(x.asDiagonal()); };
    m.g = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
    return m;
}

// Delta(x) columns are (1, 1) and (1, -1) regardless of x.
DynamicsModel coupled_model() {
    DynamicsModel m = diagonal_model();
    m.delta = [](const Vec&) { return Mat{{1.0, 1.0}, {1.0, -1.0}}; };
    return m;
}

UncertaintyBound box2(double lo, double hi) {
    return UncertaintyBound::from_parameters(
        ParameterBox::make(Vec::Constant(2, lo), Vec::Constant(2, hi), Vec::Constant(2, 0.5 * (lo + hi))));
}

}  // namespace

TEST_CASE("predictor error with the true parameter is zero") {
    const auto m = make_model("unmatched_2d");
    const Vec x{{0.4, -0.3}};
    const Vec u = v1(1.2);
    const Vec th = v1(0.9);
    const Vec xdot = eval_true_dynamics(m, x, u, th);
    CHECK(predictor_error(m, x, xdot, u, th).norm() <= 1e-12);
}

TEST_CASE("predictor error equals Delta^T theta_tilde in exact mode") {
    const auto m = make_model("unmatched_2d");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Vec x{{d(rng), d(rng)}};
        const Vec u = v1(d(rng));
        const Vec th = v1(1.0 + 0.4 * d(rng));
        const Vec th_hat = v1(1.0 + 0.4 * d(rng));
        const Vec eps = predictor_error(m, x, eval_true_dynamics(m, x, u, th), u, th_hat);
        CHECK((eps - m.delta(x).transpose() * (th_hat - th)).norm() <= 1e-12);
    }
    CHECK_THROWS_AS(predictor_error(m, Vec::Zero(2), Vec::Zero(3), v1(0.0), v1(0.0)), ConfigError);
}

TEST_CASE("filtered velocity converges on a constant-velocity segment") {
    // x(t) = x0 + v t, xi(0) = x0: estimate = v (1 - exp(-pole t))
    const Vec x0{{0.2, -0.1}};
    const Vec vel{{1.5, -0.5}};
    const double pole = 50.0;
    auto ps = PredictorState::filtered(x0, pole);
    const double dt = 1e-4;
    double t = 0.0;
    for (int k = 0; k < 2000; ++k) {
        // RK4 on xi_dot = pole (x(t) - xi)
        const auto rate = [&](double tt, const Vec& xi) -> Vec { return pole * (x0 + vel * tt - xi); };
        const Vec& xi = ps.filtered_x;
        const Vec k1 = rate(t, xi);
        const Vec k2 = rate(t + dt / 2, xi + dt / 2 * k1);
        const Vec k3 = rate(t + dt / 2, xi + dt / 2 * k2);
        const Vec k4 = rate(t + dt, xi + dt * k3);
        ps.filtered_x = xi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += dt;
        const Vec est = ps.velocity_estimate(x0 + vel * t);
        const Vec closed = vel * (1.0 - std::exp(-pole * t));
        CHECK((est - closed).norm() <= 1e-9);
        CHECK((est - vel).norm() <= vel.norm() * std::exp(-pole * t) + 1e-9);
    }
    CHECK((ps.filter_rate(x0 + vel * t) - ps.velocity_estimate(x0 + vel * t)).norm() == 0.0);
}

TEST_CASE("set membership: no information leaves the box unchanged") {
    const auto m = diagonal_model();
    const auto b = box2(0.0, 2.0);
    const auto out = set_membership_update(b, m, Vec::Zero(2), Vec{{0.3, -0.2}}, Vec::Constant(2, 1.0), 0.0);
    CHECK(out.lower == b.lower);
    CHECK(out.upper == b.upper);
}

TEST_CASE("set membership: exact scalar inversion") {
    const auto m = make_model("scalar_drift");  // Delta = [[-x]]
    auto b = UncertaintyBound::from_parameters(ParameterBox::make(v1(0.5), v1(1.5), v1(0.7)));
    // x = -1 gives delta = 1; eps = delta (theta_hat - theta) = 0.3 with theta_hat = 1 pins theta = 0.7
    const auto out = set_membership_update(b, m, v1(-1.0), v1(0.3), v1(1.0), 0.0);
    CHECK(out.lower[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(out.upper[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(out.vartheta[0] <= 1e-15);
    CHECK(dynamic_threshold(out, 1.0) <= 1e-30);
}

TEST_CASE("set membership: independent regressors observed in turn") {
    const auto m = diagonal_model();
    const Vec truth{{0.8, 1.3}};
    const Vec th_hat{{1.0, 1.0}};
    const double nm = 0.01;
    auto b = box2(0.0, 2.0);
    // first measurement informs theta_1 only
    Vec x{{1.0, 0.0}};
    Vec eps = m.delta(x).transpose() * (th_hat - truth);
    b = set_membership_update(b, m, x, eps, th_hat, nm);
    CHECK(b.contains(truth));
    CHECK(b.upper[0] - b.lower[0] <= 2.0 * nm + 1e-15);
    CHECK(b.upper[1] - b.lower[1] == 2.0);
    // second measurement informs theta_2
    x = Vec{{0.0, 1.0}};
    eps = m.delta(x).transpose() * (th_hat - truth);
    b = set_membership_update(b, m, x, eps, th_hat, nm);
    CHECK(b.contains(truth));
    CHECK((b.upper - b.lower).maxCoeff() <= 2.0 * nm + 1e-15);
}

TEST_CASE("set membership: coupled regressors, hand interval arithmetic") {
    // strips theta1 + theta2 = 2.1 and theta1 - theta2 = -0.5 (noise 0), box [0, 2]^2
    const auto m = coupled_model();
    const Vec truth{{0.8, 1.3}};
    const Vec th_hat{{1.0, 1.0}};
    const Vec eps = m.delta(Vec::Zero(2)).transpose() * (th_hat - truth);
    const auto b = set_membership_update(box2(0.0, 2.0), m, Vec::Zero(2), eps, th_hat, 0.0);
    CHECK(b.contains(truth, 1e-12));
    // sum strip: theta1 in [0.1, 2], theta2 in [0.1, 2]; difference strip then gives
    // theta1 in [0.1 - 0.5, 2 - 0.5] -> [0.1, 1.5] and theta2 in [0.1 + 0.5, 1.5 + 0.5] -> [0.6, 2]
    CHECK(b.lower[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(b.upper[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(b.lower[1] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(b.upper[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("set membership: sound and monotone under bounded noise") {
    const auto m = coupled_model();
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const double nm = 0.05;
    const Vec truth{{0.8, 1.3}};
    auto b = box2(0.0, 2.0);
    double prev_norm = b.vartheta.squaredNorm();
    for (int k = 0; k < 200; ++k) {
        const auto mk = [&] {
            DynamicsModel mm = m;
            const double a = d(rng), c = d(rng), e = d(rng), f = d(rng);
            mm.delta = [a, c, e, f](const Vec&) { return Mat{{a, c}, {e, f}}; };
            return mm;
        }();
        const Vec th_hat{{1.0 + 0.5 * d(rng), 1.0 + 0.5 * d(rng)}};
        const Vec noise{{nm * d(rng), nm * d(rng)}};
        const Vec eps = mk.delta(Vec::Zero(2)).transpose() * (th_hat - truth) + noise;
        const auto next = set_membership_update(b, mk, Vec::Zero(2), eps, th_hat, nm);
        CHECK((next.lower.array() >= b.lower.array()).all());
        CHECK((next.upper.array() <= b.upper.array()).all());
        CHECK(next.contains(truth));
        CHECK(next.vartheta.squaredNorm() <= prev_norm);
        prev_norm = next.vartheta.squaredNorm();
        b = next;
    }
    CHECK((b.upper - b.lower).maxCoeff() < 0.5);
}

TEST_CASE("set membership: empty intersection is reported") {
    const auto m = make_model("scalar_drift");
    const auto b = UncertaintyBound::from_parameters(ParameterBox::make(v1(0.5), v1(1.5), v1(1.0)));
    // claims theta = 1 - 0.9 = 0.1, outside [0.5, 1.5]
    CHECK_THROWS_AS(set_membership_update(b, m, v1(-1.0), v1(0.9), v1(1.0), 0.0), InconsistentMeasurement);
}

TEST_CASE("dynamic threshold") {
    const auto pb = ParameterBox::make(Vec{{0.0, 1.0}}, Vec{{1.0, 3.0}}, Vec{{0.5, 2.0}});
    const auto b = UncertaintyBound::from_parameters(pb);
    CHECK(dynamic_threshold(b, 2.5) == tightened_threshold(2.5, pb.vartheta_sup));
    UncertaintyBound collapsed = b;
    collapsed.lower = collapsed.upper = pb.theta_true;
    collapsed.vartheta = Vec::Zero(2);
    CHECK(dynamic_threshold(collapsed, 2.5) == 0.0);
}

TEST_CASE("relaxing the threshold keeps the applied input feasible along a trace") {
    const auto sc = build_scenario(builtin_config("A"));
    const auto trace = simulate(sc);
    int checked = 0;
    for (std::size_t k = 0; k < trace.records.size(); k += 25) {
        const auto& r = trace.records[k];
        const auto row = safety_row(sc.model, sc.barrier.h, sc.alpha, r.x, r.theta_hat, r.threshold);
        if (row.a.dot(r.u) > row.b + 1e-9) {
            continue;
        }
        for (double f : {0.0, 0.25, 0.5, 1.0}) {
            const auto relaxed = safety_row(sc.model, sc.barrier.h, sc.alpha, r.x, r.theta_hat, f * r.threshold);
            CHECK(relaxed.b >= row.b);
            CHECK(relaxed.a.dot(r.u) <= relaxed.b + 1e-9);
        }
        ++checked;
    }
    CHECK(checked > 100);
}
