#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "ucbf/config.hpp"
#include "ucbf/qp.hpp"
#include "ucbf/registry.hpp"

using namespace ucbf;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

ConstraintRow hard(Vec a, double b) { return {std::move(a), b, ConstraintRow::Kind::SafetyHard}; }
ConstraintRow soft(Vec a, double b) { return {std::move(a), b, ConstraintRow::Kind::TrackingSoft}; }

DynamicsModel scalar_model() {
    DynamicsModel m;
    m.id = "scalar";
    m.n = m.m = m.p = 1;
    m.f = [](const Vec&) { return Vec::Zero(1); };
    m.delta = [](const Vec&) { return Mat::Zero(1, 1); };
    m.g = [](const Vec&) { return Mat::Ones(1, 1); };
    return m;
}

ScalarField affine_field(double value, double gx) {
    ScalarField f;
    f.value = [value](const Vec&, const Vec&) { return value; };
    f.grad_x = [gx](const Vec&, const Vec&) { return Vec::Constant(1, gx); };
    f.grad_theta = [](const Vec&, const Vec&) { return Vec::Zero(1); };
    return f;
}

// Stationarity and complementarity recomputed from the reported active set.
struct KktCheck {
    double stationarity = 0.0;
    double complementarity = 0.0;
    double min_multiplier = 0.0;
};

KktCheck recompute_kkt(const oracle::QpInstance& q, const QPSolution& s) {
    const auto m = q.target.size();
    bool tracking = false;
    for (const auto& r : q.rows) {
        tracking = tracking || r.kind == ConstraintRow::Kind::TrackingSoft;
    }
    std::vector<Vec> normals;
    std::vector<double> gaps;
    for (const auto& r : q.rows) {
        Vec a(m + 1);
        a << r.a, (r.kind == ConstraintRow::Kind::TrackingSoft ? -1.0 : 0.0);
        normals.push_back(a);
        gaps.push_back(a.head(m).dot(s.u) + a[m] * s.delta - r.b);
    }
    if (tracking) {
        Vec a = Vec::Zero(m + 1);
        a[m] = -1.0;
        normals.push_back(a);
        gaps.push_back(-s.delta);
    }
    if (q.box) {
        for (Eigen::Index i = 0; i < m; ++i) {
            Vec a = Vec::Zero(m + 1);
            a[i] = 1.0;
            normals.push_back(a);
            gaps.push_back(s.u[i] - q.box->upper[i]);
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            Vec a = Vec::Zero(m + 1);
            a[i] = -1.0;
            normals.push_back(a);
            gaps.push_back(q.box->lower[i] - s.u[i]);
        }
    }
    Vec grad(m + 1);
    grad << s.u - q.target, 2.0 * q.slack_weight * s.delta;
    KktCheck k;
    for (std::size_t j = 0; j < s.active_set.size(); ++j) {
        const auto idx = static_cast<std::size_t>(s.active_set[j]);
        const double mu = s.multipliers[j];
        grad += mu * normals.at(idx);
        k.complementarity = std::max(k.complementarity, std::abs(mu * gaps.at(idx)));
        k.min_multiplier = std::min(k.min_multiplier, mu);
    }
    if (!tracking) {
        grad[m] = 0.0;
    }
    k.stationarity = grad.norm();
    return k;
}

}  // namespace

TEST_CASE("safety row sign convention") {
    // grad h^T g = 1, drift 0, alpha(h - thr) = 2  ->  -u <= 2
    const auto row = safety_row(scalar_model(), affine_field(2.0, 1.0), ClassKInfinity::linear(), v1(0.0), v1(0.0), 0.0);
    CHECK(row.a[0] == -1.0);
    CHECK(row.b == 2.0);
    CHECK(row.kind == ConstraintRow::Kind::SafetyHard);
    const auto tight = safety_row(scalar_model(), affine_field(2.5, 1.0), ClassKInfinity::linear(), v1(0.0), v1(0.0), 0.5);
    CHECK(tight.b == 2.0);
}

TEST_CASE("safety row on the boundary forbids outward input") {
    const auto row = safety_row(scalar_model(), affine_field(0.0, 1.0), ClassKInfinity::linear(), v1(0.0), v1(0.0), 0.0);
    CHECK(row.a[0] == -1.0);
    CHECK(row.b == 0.0);
    const auto s = pointwise_filter(v1(-3.0), {row});
    CHECK(s.u[0] == 0.0);
}

TEST_CASE("safety row feasibility agrees with the grid margin on scenario A") {
    const auto sc = build_scenario(builtin_config("A"));
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ux(-1.2, 1.2), uy(-3.5, 3.5), ut(0.5, 1.5);
    int feasible = 0;
    for (int i = 0; i < 400; ++i) {
        const Vec x{{ux(rng), uy(rng)}};
        const Vec th = v1(ut(rng));
        if (sc.barrier.h.value(x, th) < 0.0) {
            continue;
        }
        const double margin = condition_margin(sc.model, sc.barrier.h, sc.alpha, *sc.input_box, x, th);
        if (std::abs(margin) < 1e-9) {
            continue;
        }
        const auto row = safety_row(sc.model, sc.barrier.h, sc.alpha, x, th, 0.0);
        const auto sol = pointwise_filter(Vec::Zero(1), {row}, sc.input_box);
        CHECK((sol.status == QPStatus::Optimal) == (margin >= 0.0));
        feasible += sol.status == QPStatus::Optimal ? 1 : 0;
    }
    CHECK(feasible > 0);
}

TEST_CASE("tracking row at the reference is trivially satisfiable") {
    const auto m = make_model("unmatched_2d");
    const Vec ref{{0.3, -0.4}};
    const auto clf = make_quadratic_clf(ref, 1);
    const auto row = tracking_row(m, clf.V, clf.Q, ref, v1(1.0));
    CHECK(row.a.norm() == 0.0);
    CHECK(row.b >= 0.0);
    CHECK(row.kind == ConstraintRow::Kind::TrackingSoft);
}

TEST_CASE("tracking row on a stable drift is met at u = 0") {
    DynamicsModel m;
    m.id = "stable";
    m.n = 2;
    m.m = 1;
    m.p = 1;
    m.f = [](const Vec& x) -> Vec { return -x; };
    m.delta = [](const Vec&) { return Mat::Zero(1, 2); };
    m.g = [](const Vec&) { return Mat{{0.0}, {1.0}}; };
    const auto clf = make_quadratic_clf(Vec::Zero(2), 1);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const Vec x{{d(rng), d(rng)}};
        const auto row = tracking_row(m, clf.V, clf.Q, x, v1(0.0));
        CHECK(row.a.dot(Vec::Zero(1)) <= row.b + 1e-12);
        const auto s = solve_min_norm({row}, 100.0);
        CHECK(s.u.norm() <= 1e-12);
        CHECK(s.delta <= 1e-12);
    }
}

TEST_CASE("tracking row against a binding safety row needs slack") {
    // safety u >= 1 against tracking u <= -1 + delta: optimum u = 1, delta = 2
    oracle::QpInstance q;
    q.rows = {hard(v1(-1.0), -1.0), soft(v1(1.0), -1.0)};
    q.target = Vec::Zero(1);
    q.slack_weight = 100.0;
    q.feasible_point = v1(2.0);
    const auto s = solve_min_norm(q.rows, q.slack_weight);
    REQUIRE(s.status == QPStatus::Optimal);
    const auto [u, f] = oracle::grid_search(q);
    CHECK(s.delta > 0.0);
    CHECK(std::abs(oracle::full_objective(q, s.u, s.delta) - f) <= 1e-6);
    CHECK(std::abs(s.u[0] - u[0]) <= 1e-4);
    CHECK(s.u[0] == doctest::Approx(1.0));
    CHECK(s.delta == doctest::Approx(2.0));
}

TEST_CASE("min-norm: trivial cases") {
    const auto none = solve_min_norm({}, 100.0, Box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)});
    CHECK(none.u.size() == 2);
    CHECK(none.u.norm() == 0.0);
    CHECK(none.delta == 0.0);

    const auto inactive = solve_min_norm({hard(v1(-1.0), 2.0)}, 100.0);
    CHECK(inactive.u[0] == 0.0);
    CHECK(inactive.active_set.empty());

    CHECK_THROWS_AS(solve_min_norm({hard(v1(-1.0), 2.0)}, 0.0), ConfigError);
}

TEST_CASE("min-norm: active row matches a dense grid") {
    const auto s = solve_min_norm({hard(v1(-1.0), -1.5)}, 100.0);
    CHECK(s.u[0] == 1.5);
    REQUIRE(s.active_set.size() == 1);
    CHECK(s.active_set[0] == 0);
    CHECK(s.kkt_residual <= 1e-10);
    double best = 1e300;
    double best_u = 0.0;
    for (int k = 0; k <= 200000; ++k) {
        const double u = -10.0 + 1e-4 * k;
        if (-u <= -1.5 && 0.5 * u * u < best) {
            best = 0.5 * u * u;
            best_u = u;
        }
    }
    CHECK(std::abs(s.u[0] - best_u) <= 1e-3);
}

TEST_CASE("pointwise filter: safe nominal is returned exactly") {
    const Vec nominal{{0.3, -0.7}};
    const auto s = pointwise_filter(nominal, {hard(Vec{{1.0, 1.0}}, 5.0)},
                                    Box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)});
    CHECK(s.u == nominal);
    CHECK(s.active_set.empty());
}

TEST_CASE("pointwise filter: single violated row is the halfspace projection") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const int m = 1 + i % 4;
        Vec a(m), u(m);
        for (int j = 0; j < m; ++j) {
            a[j] = d(rng);
            u[j] = 3.0 * d(rng);
        }
        const double b = a.dot(u) - 0.1 - std::abs(d(rng));
        const Vec closed = u - a * (a.dot(u) - b) / a.squaredNorm();
        const auto s = pointwise_filter(u, {hard(a, b)});
        CHECK((s.u - closed).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((project_halfspace(u, a, b) - closed).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("pointwise filter: conflicting rows are infeasible with a certificate") {
    const auto s = pointwise_filter(v1(0.0), {hard(v1(-1.0), -1.0), hard(v1(1.0), -1.0)});
    CHECK(s.status == QPStatus::Infeasible);
    CHECK_FALSE(s.certificate_rows.empty());
    const auto boxed = pointwise_filter(v1(0.0), {hard(v1(-1.0), -2.0)}, Box{v1(-1.0), v1(1.0)});
    CHECK(boxed.status == QPStatus::Infeasible);
    REQUIRE(boxed.certificate_rows.size() == 1);
    CHECK(boxed.certificate_rows[0] == 0);
    // least-violation control stays in the box
    CHECK(boxed.u[0] == 1.0);
}

TEST_CASE("pointwise filter rejects tracking rows") {
    CHECK_THROWS_AS(pointwise_filter(v1(0.0), {soft(v1(1.0), 0.0)}), ConfigError);
}

TEST_CASE("random instances: optimality, feasibility and KKT") {
    std::mt19937_64 rng(777);
    for (int i = 0; i < 200; ++i) {
        const auto q = oracle::random_instance(rng);
        const auto s = q.min_norm ? solve_min_norm(q.rows, q.slack_weight, q.box)
                                  : pointwise_filter(q.target, q.rows, q.box);
        REQUIRE(s.status == QPStatus::Optimal);
        const double f = oracle::full_objective(q, s.u, s.delta);
        CHECK(f <= oracle::dual_grid_search(q) + 1e-6);
        CHECK(s.delta >= 0.0);
        for (const auto& r : q.rows) {
            const double slack = r.kind == ConstraintRow::Kind::TrackingSoft ? s.delta : 0.0;
            CHECK(r.a.dot(s.u) - r.b - slack <= 1e-8);
        }
        if (q.box) {
            CHECK(q.box->contains(s.u, 1e-8));
        }
        const auto k = recompute_kkt(q, s);
        CHECK(k.stationarity <= 1e-8);
        CHECK(k.complementarity <= 1e-8);
        CHECK(k.min_multiplier >= -1e-10);
        CHECK(s.kkt_residual <= 1e-8);
    }
}

TEST_CASE("slack does not grow with the slack weight") {
    std::mt19937_64 rng(555);
    int with_slack = 0;
    for (int i = 0; i < 300; ++i) {
        auto q = oracle::random_instance(rng);
        if (!q.min_norm) {
            continue;
        }
        double prev = std::numeric_limits<double>::infinity();
        for (double r : {1.0, 10.0, 100.0}) {
            const auto s = solve_min_norm(q.rows, r, q.box);
            CHECK(s.delta <= prev + 1e-12);
            prev = s.delta;
            with_slack += s.delta > 0.0 ? 1 : 0;
        }
    }
    CHECK(with_slack > 0);
}

TEST_CASE("solver is deterministic") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto q = oracle::random_instance(rng);
        const auto a = solve_min_norm(q.rows, q.slack_weight, q.box);
        const auto b = solve_min_norm(q.rows, q.slack_weight, q.box);
        CHECK(a.u == b.u);
        CHECK(a.delta == b.delta);
        CHECK(a.active_set == b.active_set);
    }
}
