#include <doctest.h>

#include <json.hpp>

#include "ucbf/config.hpp"

using namespace ucbf;

TEST_CASE("every built-in config survives a JSON round trip") {
    for (const auto& c : builtin_configs()) {
        CAPTURE(c.id);
        const auto back = config_from_json(config_to_json(c));
        CHECK(back == c);
        CHECK(config_to_json(back) == config_to_json(c));
    }
}

TEST_CASE("built-in gallery is A..F and every entry builds") {
    const auto all = builtin_configs();
    REQUIRE(all.size() == 6);
    const char* ids[] = {"A", "B", "C", "D", "E", "F"};
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].id == ids[i]);
        const Scenario sc = build_scenario(all[i]);
        CHECK(sc.id == all[i].id);
        CHECK(sc.x0.size() == sc.model.n);
        CHECK(sc.theta_hat0.size() == sc.model.p);
    }
    CHECK(builtin_config("C").sliding.has_value());
    CHECK(builtin_config("D").estimator.has_value());
    CHECK(builtin_config("E").clf.has_value());
    CHECK_THROWS_AS(builtin_config("Z"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
    auto doc = nlohmann::json::parse(config_to_json(builtin_config("A")));
    doc["adaptation"]["gama"] = 1.0;
    CHECK_THROWS_AS(config_from_json(doc.dump()), ConfigError);
    doc = nlohmann::json::parse(config_to_json(builtin_config("A")));
    doc["extra"] = true;
    CHECK_THROWS_AS(config_from_json(doc.dump()), ConfigError);
    CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("out-of-range values are rejected") {
    const auto a = builtin_config("A");
    CHECK_THROWS_AS(apply_overrides(a, {{"adaptation.gamma", "0.0"}}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(a, {{"adaptation.eta", "-1"}}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(a, {{"adaptation.law", "\"nonsense\""}}), ConfigError);
}

TEST_CASE("dotted overrides") {
    const auto a = builtin_config("A");
    const auto b = apply_overrides(a, {{"adaptation.gamma", "2.5"}, {"T", "3"}, {"adaptation.law", "leaky"}});
    CHECK(b.adaptation.gamma == 2.5);
    CHECK(b.T == 3.0);
    CHECK(b.adaptation.law == "leaky");
    const auto c = apply_overrides(a, {{"input_box", "[-0.1, 0.1]"}});
    CHECK(c.input_lower == DVec{-0.1});
    CHECK(c.input_upper == DVec{0.1});
    CHECK(apply_overrides(a, {}) == a);
    CHECK_THROWS_AS(apply_overrides(a, {{"", "1"}}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(a, {{"T.x", "1"}}), ConfigError);
}

TEST_CASE("a ball input set is an unsupported feature") {
    CHECK_THROWS_AS(apply_overrides(builtin_config("A"), {{"input_box", R"({"kind": "ball", "radius": 1.0})"}}),
                    UnsupportedFeature);
}

TEST_CASE("gallery json lists the requested configs") {
    const auto doc = nlohmann::json::parse(gallery_json(builtin_configs()));
    REQUIRE(doc.at("scenarios").size() == 6);
    CHECK(doc["scenarios"][2]["id"] == "C");
}
