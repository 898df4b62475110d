#include <doctest.h>

#include <cmath>
#include <random>

#include "ucbf/model.hpp"
#include "ucbf/registry.hpp"

using namespace ucbf;

namespace {

// f(x) = A x with A = [[0, 1], [0, 0]], Delta(x)^T theta = [theta x1, 0], g = [0, 1]^T
DynamicsModel linear_test_model() {
    DynamicsModel m;
    m.id = "linear_test";
    m.n = 2;
    m.m = 1;
    m.p = 1;
    m.f = [](const Vec& x) { return Vec{{x[1], 0.0}}; };
    m.delta = [](const Vec& x) { return Mat{{x[0], 0.0}}; };
    m.g = [](const Vec&) { return Mat{{0.0}, {1.0}}; };
    return m;
}

Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST_CASE("true dynamics, zero case") {
    const auto m = linear_test_model();
    CHECK(eval_true_dynamics(m, Vec::Zero(2), v1(0.0), v1(0.0)).norm() == 0.0);
}

TEST_CASE("true dynamics, direct substitution") {
    const auto m = linear_test_model();
    const Vec xd = eval_true_dynamics(m, Vec{{1.0, 0.0}}, v1(1.0), v1(0.5));
    CHECK(xd[0] == -0.5);
    CHECK(xd[1] == 1.0);
}

TEST_CASE("true dynamics agree with a hand-coded duplicate") {
    const auto m = make_model("unmatched_2d");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double x1 = d(rng), x2 = d(rng), u = d(rng), th = d(rng);
        const Vec got = eval_true_dynamics(m, Vec{{x1, x2}}, v1(u), v1(th));
        CHECK(std::abs(got[0] - (x2 - th * x1)) <= 1e-12);
        CHECK(std::abs(got[1] - u) <= 1e-12);
    }
    const auto s = make_model("scalar_drift");
    for (int i = 0; i < 200; ++i) {
        const double x = d(rng), u = d(rng), th = d(rng);
        CHECK(std::abs(eval_true_dynamics(s, v1(x), v1(u), v1(th))[0] - (-1.0 + th * x + u)) <= 1e-12);
    }
}

TEST_CASE("true dynamics are affine in u and theta") {
    for (const auto& id : model_ids()) {
        const auto m = make_model(id);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        for (int i = 0; i < 50; ++i) {
            Vec x(m.n), u(m.m), t1(m.p), t2(m.p);
            for (auto* v : {&x, &u, &t1, &t2}) {
                for (Eigen::Index k = 0; k < v->size(); ++k) {
                    (*v)[k] = d(rng);
                }
            }
            const Vec du = eval_true_dynamics(m, x, u, t1) - eval_true_dynamics(m, x, Vec::Zero(m.m), t1);
            CHECK((du - m.g(x) * u).norm() <= 1e-12);
            const Vec dt = eval_true_dynamics(m, x, u, t1 + t2) - eval_true_dynamics(m, x, u, t1);
            CHECK((dt + m.delta(x).transpose() * t2).norm() <= 1e-12);
        }
    }
}

TEST_CASE("dimension mismatch is a configuration error") {
    const auto m = linear_test_model();
    CHECK_THROWS_AS(eval_true_dynamics(m, Vec::Zero(3), v1(0.0), v1(0.0)), ConfigError);
    CHECK_THROWS_AS(eval_true_dynamics(m, Vec::Zero(2), Vec::Zero(2), v1(0.0)), ConfigError);
    CHECK_THROWS_AS(eval_true_dynamics(m, Vec::Zero(2), v1(0.0), Vec::Zero(2)), ConfigError);
}

TEST_CASE("built-in models are locally Lipschitz on their operating box") {
    const auto m = make_model("unmatched_2d");
    const Box box{Vec::Constant(2, -2.0), Vec::Constant(2, 2.0)};
    const double l = sampled_lipschitz_bound(m, box, v1(1.0), 500, 5);
    CHECK(std::isfinite(l));
    CHECK(l > 0.0);
    CHECK(l < 10.0);
}

TEST_CASE("parameter box") {
    const auto pb = ParameterBox::make(v1(0.5), v1(1.5), v1(1.0));
    CHECK(pb.vartheta_sup[0] == 1.0);
    CHECK_THROWS_AS(ParameterBox::make(v1(0.5), v1(1.5), v1(2.0)), ConfigError);
    CHECK_THROWS_AS(ParameterBox::make(v1(0.5), v1(1.5), v1(1.0), v1(-0.1)), ConfigError);
    // a declared bound smaller than the box diameter is allowed (constrained initial estimate)
    CHECK(ParameterBox::make(v1(0.5), v1(1.5), v1(1.0), v1(0.5)).vartheta_sup[0] == 0.5);
}

TEST_CASE("scaling function values") {
    const auto at = ScalingFunction::arctan_plus_one();
    auto s = eval_scaling(at, 0.0);
    CHECK(s.v == 1.0);
    CHECK(s.dv == 1.0);
    s = eval_scaling(at, 1.0);
    CHECK(s.v == doctest::Approx(1.0 + M_PI / 4.0).epsilon(1e-15));
    CHECK(s.dv == 0.5);

    const auto ex = ScalingFunction::exp_saturating(2.0);
    s = eval_scaling(ex, 0.0);
    CHECK(s.v == 1.0);
    CHECK(s.dv == 1.0);
}

TEST_CASE("scaling function domain") {
    const auto at = ScalingFunction::arctan_plus_one();
    CHECK(at.lower() == 0.0);
    CHECK(at.upper() == 10.0);
    CHECK_THROWS_AS((void)at.eval(10.5), DomainError);
    CHECK_THROWS_AS((void)at.eval(-0.1), DomainError);
    CHECK_THROWS_AS(ScalingFunction::exp_saturating(1.0), ConfigError);
}

TEST_CASE("scaling functions: bounded, increasing, derivative matches differences") {
    for (const auto& sf : {ScalingFunction::arctan_plus_one(), ScalingFunction::exp_saturating(2.0, 50.0),
                           ScalingFunction::exp_saturating(5.0)}) {
        const double hi = std::isfinite(sf.upper()) ? sf.upper() : 40.0;
        for (int i = 1; i < 400; ++i) {
            const double rho = hi * i / 400.0;
            const auto s = sf.eval(rho);
            CHECK(s.v >= 1.0);
            CHECK(s.v <= sf.zeta());
            CHECK(s.dv > 0.0);
            const double eps = 1e-6;
            const double fd = (sf.eval(rho + eps).v - sf.eval(rho - eps).v) / (2.0 * eps);
            CHECK(std::abs(fd - s.dv) <= 1e-6);
        }
    }
}

TEST_CASE("class-K certificate: linear kinds pass with zero violation") {
    for (double k : {1.0, 2.0}) {
        const auto c = certify_class_k(ClassKInfinity::linear(k));
        CHECK(c.pass());
        CHECK(c.worst_superlinear_violation == 0.0);
    }
    const auto a = ClassKInfinity::linear(2.0);
    CHECK(a(0.0) == 0.0);
    for (double r : {-3.0, -0.5, 0.25, 7.0}) {
        for (double c : {1.0, 1.5, 4.0}) {
            CHECK(c * a(r) == a(c * r));
        }
    }
    CHECK_THROWS_AS(ClassKInfinity::linear(0.0), ConfigError);
}

TEST_CASE("class-K certificate: pure cubic fails for negative r") {
    const auto cubic = ClassKInfinity::user_supplied(
        "cubic", [](double r) { return r * r * r; }, [](double r) { return std::cbrt(r); });
    const auto c = certify_class_k(cubic);
    CHECK_FALSE(c.superlinear);
    CHECK_FALSE(c.pass());
    CHECK(c.worst_r < 0.0);
    CHECK(c.worst_c > 1.0);
    // the hand-evaluated witness: c alpha(r) = -2 versus alpha(c r) = -8
    CHECK(2.0 * cubic(-1.0) == -2.0);
    CHECK(cubic(-2.0) == -8.0);
}

TEST_CASE("class-K certificate: linear-cubic passes and inverts") {
    const auto a = make_linear_cubic(0.5);
    const auto c = certify_class_k(a);
    CHECK(c.pass());
    CHECK(c.worst_inverse_error <= 1e-10);
}
