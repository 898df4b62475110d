#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ucbf/config.hpp"
#include "ucbf/sim.hpp"
#include "ucbf/trace_io.hpp"

using namespace ucbf;

namespace {

Scenario scenario(const std::string& id, const std::vector<std::pair<std::string, std::string>>& sets = {}) {
    return build_scenario(apply_overrides(builtin_config(id), sets));
}

}  // namespace

TEST_CASE("a step from an equilibrium leaves the plant state unchanged") {
    // x = 0, theta_hat = theta, nominal PD aimed at the origin: every plant and estimate rate vanishes
    auto sc = scenario("A", {{"controller.nominal.target", "[0.0]"}, {"theta_hat0", "[1.0]"}});
    Simulator sim(sc);
    const Vec z0 = sim.state();
    sim.step();
    CHECK((sim.x() - z0.head(2)).norm() <= 1e-12);
    CHECK((sim.theta_hat() - z0.segment(2, 1)).norm() <= 1e-12);
}

TEST_CASE("one small RK4 step agrees with forward Euler to second order") {
    for (const char* id : {"A", "C", "F"}) {
        auto sc = scenario(id, {{"dt", "1e-6"}});
        Simulator sim(sc);
        const Vec z0 = sim.state();
        const Vec euler = z0 + sc.dt * sim.rhs(0.0, z0);
        sim.step();
        CAPTURE(id);
        CHECK((sim.state() - euler).norm() <= 1e-9);
    }
}

TEST_CASE("scenario A keeps the state inside the safe set") {
    const auto res = run(scenario("A"));
    CHECK(res.report.invariance_pass);
    CHECK(res.report.min_h >= -1e-6);
    CHECK_FALSE(res.report.aborted);
    CHECK(res.report.steps == 10001);
}

TEST_CASE("a larger adaptation gain lowers the threshold and stays safe") {
    const auto base = scenario("A");
    const double bound = check_premises(base).gain_bound;
    const auto lo = run(scenario("A", {{"adaptation.gamma", std::to_string(bound)}}));
    const auto hi = run(scenario("A", {{"adaptation.gamma", std::to_string(10.0 * bound)}}));
    CHECK(lo.report.invariance_pass);
    CHECK(hi.report.invariance_pass);
    CHECK(hi.trace.records.front().threshold < lo.trace.records.front().threshold);
    CHECK(hi.trace.records.front().threshold == doctest::Approx(lo.trace.records.front().threshold / 10.0));
}

TEST_CASE("zero uncertainty reduces to a plain barrier run") {
    const auto res = run(scenario("A", {{"params.lower", "[1.0]"},
                                        {"params.upper", "[1.0]"},
                                        {"params.theta_true", "[1.0]"},
                                        {"theta_hat0", "[1.0]"}}));
    CHECK(res.report.min_h >= -1e-9);
    for (const auto& r : res.trace.records) {
        CHECK(r.threshold == 0.0);
        CHECK(r.theta_hat[0] == 1.0);
    }
}

TEST_CASE("monitors are a pure function of the written trace") {
    const auto sc = scenario("B", {{"T", "2.0"}});
    const auto res = run(sc);
    std::stringstream ss;
    write_trace_csv(ss, sc, res.trace);
    const Trace back = read_trace_csv(ss);
    REQUIRE(back.records.size() == res.trace.records.size());
    const auto again = evaluate_monitors(sc, back);
    CHECK(again.to_text() == res.report.to_text());
}

TEST_CASE("runs are deterministic") {
    const auto sc = scenario("D", {{"T", "2.0"}});
    const auto a = run(sc);
    const auto b = run(sc);
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
        CHECK(a.trace.records[k].x == b.trace.records[k].x);
        CHECK(a.trace.records[k].rho == b.trace.records[k].rho);
    }
    CHECK(a.report.to_text() == b.report.to_text());
}

TEST_CASE("sweeps return one row per value in order; jobs do not change results") {
    const auto sc = scenario("A", {{"T", "2.0"}});
    const std::vector<double> etas{0.05, 0.1, 0.2, 0.4};
    const auto rows = sweep(sc, SweepParam::Eta, etas, 1);
    const auto rows4 = sweep(sc, SweepParam::Eta, etas, 4);
    REQUIRE(rows.size() == etas.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].value == etas[i]);
        CHECK(rows[i].report.invariance_pass);
        CHECK(rows[i].final_state == rows4[i].final_state);
        CHECK_FALSE(rows[i].diff_to_finer.has_value());
    }
}

TEST_CASE("gain sweep flags inadmissible values") {
    const auto sc = scenario("A", {{"T", "1.0"}});
    const double bound = check_premises(sc).gain_bound;
    const auto rows = sweep(sc, SweepParam::Gamma, {0.5 * bound, bound, 2.0 * bound});
    REQUIRE(rows.size() == 3);
    CHECK_FALSE(rows[0].admissible);
    CHECK(rows[1].admissible);
    CHECK(rows[2].admissible);
}

TEST_CASE("dt sweep fills the convergence columns") {
    const auto sc = scenario("A", {{"T", "0.01"}});
    const auto rows = sweep(sc, SweepParam::Dt, {2e-3, 1e-3, 5e-4});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].diff_to_finer.has_value());
    CHECK(rows[1].diff_to_finer.has_value());
    CHECK_FALSE(rows[2].diff_to_finer.has_value());
    REQUIRE(rows[0].convergence_ratio.has_value());
    CHECK(*rows[0].convergence_ratio > 8.0);
    CHECK(*rows[0].diff_to_finer > *rows[1].diff_to_finer);
}

TEST_CASE("sampled Lipschitz estimate is finite") {
    const auto res = run(scenario("A", {{"T", "1.0"}}));
    CHECK(std::isfinite(res.report.lipschitz_estimate));
    CHECK(res.report.lipschitz_estimate > 0.0);
}

TEST_CASE("leaky law keeps rho nonnegative") {
    const auto res = run(scenario("B"));
    CHECK(res.report.rho_min >= 0.0);
    for (const auto& r : res.trace.records) {
        CHECK(r.rho >= 0.0);
    }
}

TEST_CASE("sliding variable positivity implies the position bound") {
    const auto res = run(scenario("C"));
    CHECK(res.report.invariance_pass);
    CHECK(res.report.sliding_implication_violations == 0);
    REQUIRE(res.report.min_s.has_value());
    CHECK(*res.report.min_s >= -1e-6);
    for (const auto& r : res.trace.records) {
        REQUIRE(r.s.has_value());
        if (*r.s >= 0.0) {
            CHECK(r.h >= -1e-6);
        }
    }
}

TEST_CASE("premise violations are reported") {
    const auto outside = check_premises(scenario("A", {{"x0", "[1.2, 0.0]"}}));
    CHECK(outside.h0 < 0.0);
    CHECK_FALSE(outside.ok());
    const auto low = check_premises(scenario("A", {{"adaptation.gamma", "0.25"}}));
    CHECK_FALSE(low.admissible);
    CHECK_FALSE(low.ok());
}
