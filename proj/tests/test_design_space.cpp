#include <doctest.h>

#include "pgg/design_space.hpp"
#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

using namespace pgg;

TEST_CASE("unit point at 0 maps to every parameter minimum") {
    const UnitPoint u(kDesignDim, 0.0);
    const PggConfig c = map_unit_point_to_config(u);
    CHECK(c.group_size == 2);
    CHECK(c.game_length == 1);
    CHECK(c.contribution_type == ContributionType::variable);
    CHECK(c.contribution_framing == ContributionFraming::opt_in);
    CHECK(c.mpcr == doctest::Approx(0.5));  // 1/group_size: multiplier exactly 1
    CHECK_FALSE(c.communication);
    CHECK_FALSE(c.peer_outcome_visibility);
    CHECK(c.actor_anonymity == ActorAnonymity::hidden);
    CHECK_FALSE(c.horizon_knowledge);
    CHECK(c.peer_incentive_cost == 1);
    CHECK(c.punishment_impact == 1);
    CHECK_FALSE(c.reward_enabled);
    CHECK(c.reward_impact == doctest::Approx(0.5));
    // flagged downstream:
    const auto violations = validate_config(c);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "degenerate multiplier");
}

TEST_CASE("unit point at 1 maps to every parameter maximum") {
    const UnitPoint u(kDesignDim, 1.0);
    const PggConfig c = map_unit_point_to_config(u);
    CHECK(c.group_size == 20);
    CHECK(c.game_length == 30);
    CHECK(c.contribution_type == ContributionType::all_or_nothing);
    CHECK(c.contribution_framing == ContributionFraming::opt_out);
    CHECK(c.mpcr == doctest::Approx(0.7));
    CHECK(c.communication);
    CHECK(c.actor_anonymity == ActorAnonymity::revealed);
    CHECK(c.peer_incentive_cost == 4);
    CHECK(c.punishment_impact == 4);
    CHECK(c.reward_enabled);
    CHECK(c.reward_impact == doctest::Approx(1.5));
    CHECK(validate_config(c).empty());
}

TEST_CASE("mpcr intermediate parameter resolves after group size") {
    // group size 4 with the mpcr coordinate at 0 -> mpcr = 1/4
    UnitPoint u(kDesignDim, 0.5);
    u[0] = 2.0 / 18.0;  // maps to group_size 4
    u[4] = 0.0;
    const PggConfig c = map_unit_point_to_config(u);
    REQUIRE(c.group_size == 4);
    CHECK(c.mpcr == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("mpcr lower bound holds for every generated config") {
    Rng rng(42);
    for (int trial = 0; trial < 2000; ++trial) {
        UnitPoint u(kDesignDim);
        for (auto& x : u) x = rng.uniform();
        const PggConfig c = map_unit_point_to_config(u);
        CHECK(c.mpcr >= 1.0 / c.group_size - 1e-12);
        CHECK(c.mpcr <= 0.7 + 1e-12);
        CHECK(c.multiplier() >= 1.0 - 1e-12);
    }
}

TEST_CASE("sobol design generation is deterministic and in bounds") {
    const auto a = sobol_designs(64, true, 11);
    const auto b = sobol_designs(64, true, 11);
    REQUIRE(a.size() == 64);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].same_design(b[i]));
        const auto violations = validate_config(a[i]);
        for (const auto& v : violations) CHECK(v == "degenerate multiplier");
    }
}

TEST_CASE("validate_config flags bounds violations") {
    PggConfig c;
    c.group_size = 21;
    c.mpcr = 0.3;
    const auto violations = validate_config(c);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations[0].find("group_size") != std::string::npos);
}

TEST_CASE("validate_config accepts an interior point") {
    PggConfig c;
    c.group_size = 4;
    c.game_length = 10;
    c.mpcr = 0.5;
    c.peer_incentive_cost = 2;
    c.punishment_impact = 3;
    c.reward_impact = 1.0;
    CHECK(validate_config(c).empty());
}

TEST_CASE("random_generate basics") {
    CHECK(random_generate(0, {}, 5).empty());

    const auto a = random_generate(25, {}, 123);
    const auto b = random_generate(25, {}, 123);
    REQUIRE(a.size() == 25);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].same_design(b[i]));
        CHECK(a[i].wave == Wave::validation);
    }
}

TEST_CASE("random_generate avoids exclusions on all 13 parameters") {
    const auto learning = sobol_designs(64, true, 3);
    const auto validation = random_generate(40, {}, 17, learning);
    REQUIRE(validation.size() == 40);
    for (const auto& v : validation) {
        for (const auto& l : learning) CHECK_FALSE(v.same_design(l));
    }
}

TEST_CASE("random_generate exhaustion error") {
    // Collapse the space to 2^7 = 128 distinct configurations (all integer
    // ranges pinned, mpcr forced to 1/group_size, reward impact constant),
    // then ask for more than exist.
    ParameterBounds tight;
    tight.group_size_min = tight.group_size_max = 2;
    tight.game_length_min = tight.game_length_max = 1;
    tight.mpcr_max = 0.5;
    tight.peer_incentive_cost_min = tight.peer_incentive_cost_max = 1;
    tight.punishment_impact_min = tight.punishment_impact_max = 1;
    tight.reward_impact_min = tight.reward_impact_max = 1.0;

    CHECK(random_generate(128, tight, 77).size() == 128);
    try {
        (void)random_generate(129, tight, 77);
        FAIL("expected exhaustion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::exhaustion);
    }
}
