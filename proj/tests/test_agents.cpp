#include <doctest.h>

#include "pgg/agents.hpp"
#include "pgg/engine.hpp"
#include "pgg/rng.hpp"

using namespace pgg;

namespace {

Observation obs_with_peers(std::vector<PeerContribution> current,
                           std::vector<PeerContribution> previous = {}) {
    Observation obs;
    obs.self_id = 0;
    obs.balance = 20.0;
    obs.current_contributions = std::move(current);
    obs.previous_contributions = std::move(previous);
    return obs;
}

}  // namespace

TEST_CASE("fixed policies") {
    Rng rng(1);
    Observation obs;
    PolicySpec coop{PolicyName::always_cooperate, 1.0, 10, 1};
    PolicySpec defect{PolicyName::always_defect, 0.0, 10, 1};
    CHECK(decide_contribution(coop, obs, rng) == 20);
    CHECK(decide_contribution(defect, obs, rng) == 0);
    CHECK(decide_redistribution(defect, obs, rng).empty());
}

TEST_CASE("fractional policy rounds and coerces under all-or-nothing") {
    Rng rng(1);
    Observation obs;
    PolicySpec frac{PolicyName::fractional, 0.33, 10, 1};
    CHECK(decide_contribution(frac, obs, rng) == 7);  // round(6.6)
    obs.all_or_nothing = true;
    CHECK(decide_contribution(frac, obs, rng) == 0);  // 7 is nearer to 0
    frac.fraction = 0.6;
    CHECK(decide_contribution(frac, obs, rng) == 20);  // 12 is nearer to 20
}

TEST_CASE("conditional cooperator matches the mean of others' last contributions") {
    Rng rng(1);
    auto obs = obs_with_peers({}, {{0, 5}, {1, 10}, {2, 20}});
    obs.round = 2;
    PolicySpec cc{PolicyName::conditional_cooperator, 1.0, 10, 1};
    CHECK(decide_contribution(cc, obs, rng) == 15);  // mean(10, 20), self excluded

    Observation round1;
    CHECK(decide_contribution(cc, round1, rng) == 20);  // opens cooperatively
}

TEST_CASE("random policy stays within the legal action set") {
    PolicySpec rnd{PolicyName::random_uniform, 1.0, 10, 1};
    Observation obs;
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const int c = decide_contribution(rnd, obs, rng);
        CHECK(c >= 0);
        CHECK(c <= 20);
    }
    obs.all_or_nothing = true;
    for (int i = 0; i < 50; ++i) {
        const int c = decide_contribution(rnd, obs, rng);
        CHECK((c == 0 || c == 20));
    }
}

TEST_CASE("norm enforcer punishes below-threshold contributors, lowest first") {
    Rng rng(1);
    PolicySpec enforcer{PolicyName::norm_enforcer, 1.0, 10, 1};
    auto obs = obs_with_peers({{0, 20}, {1, 5}, {2, 20}});
    obs.punishment_enabled = true;
    const auto actions = decide_redistribution(enforcer, obs, rng);
    REQUIRE(actions.size() == 1);
    CHECK(actions[0].target == 1);
    CHECK(actions[0].units == 1);
    CHECK(actions[0].kind == SanctionKind::punish);
}

TEST_CASE("norm enforcer honors budget and balance") {
    Rng rng(1);
    PolicySpec enforcer{PolicyName::norm_enforcer, 1.0, 10, 2};
    auto obs = obs_with_peers({{0, 20}, {1, 0}, {2, 3}, {3, 6}});
    obs.punishment_enabled = true;
    SUBCASE("budget caps at two lowest contributors") {
        const auto actions = decide_redistribution(enforcer, obs, rng);
        REQUIRE(actions.size() == 2);
        CHECK(actions[0].target == 1);
        CHECK(actions[1].target == 2);
    }
    SUBCASE("balance caps below budget") {
        obs.peer_incentive_cost = 4;
        obs.balance = 5.0;  // affords one unit at cost 4
        const auto actions = decide_redistribution(enforcer, obs, rng);
        REQUIRE(actions.size() == 1);
        CHECK(actions[0].target == 1);
    }
    SUBCASE("negative balance means no action") {
        obs.balance = -3.0;
        CHECK(decide_redistribution(enforcer, obs, rng).empty());
    }
    SUBCASE("disabled punishment means no action") {
        obs.punishment_enabled = false;
        CHECK(decide_redistribution(enforcer, obs, rng).empty());
    }
}

TEST_CASE("norm enforcer breaks contribution ties by player id") {
    Rng rng(1);
    PolicySpec enforcer{PolicyName::norm_enforcer, 1.0, 10, 1};
    auto obs = obs_with_peers({{0, 20}, {3, 5}, {1, 5}});
    obs.punishment_enabled = true;
    const auto actions = decide_redistribution(enforcer, obs, rng);
    REQUIRE(actions.size() == 1);
    CHECK(actions[0].target == 1);
}

TEST_CASE("reciprocator rewards the single highest contributor, ties to lowest id") {
    Rng rng(1);
    PolicySpec rec{PolicyName::reciprocator, 1.0, 10, 1};
    auto obs = obs_with_peers({{0, 10}, {1, 20}, {2, 20}});
    obs.reward_enabled = true;
    const auto actions = decide_redistribution(rec, obs, rng);
    REQUIRE(actions.size() == 1);
    CHECK(actions[0].target == 1);
    CHECK(actions[0].kind == SanctionKind::reward);

    obs.reward_enabled = false;
    CHECK(decide_redistribution(rec, obs, rng).empty());
}

TEST_CASE("policies never emit illegal actions inside full games") {
    // Driven through the engine: any illegal action would throw.
    Rng rng(5150);
    const PolicyName pool[] = {PolicyName::always_cooperate, PolicyName::always_defect,
                               PolicyName::fractional, PolicyName::conditional_cooperator,
                               PolicyName::norm_enforcer, PolicyName::reciprocator,
                               PolicyName::random_uniform};
    for (int trial = 0; trial < 100; ++trial) {
        UnitPoint u(kDesignDim);
        for (auto& x : u) x = rng.uniform();
        PggConfig c = map_unit_point_to_config(u);
        c.config_id = "legal";
        c.punishment_enabled = rng.uniform() < 0.5;
        GameSpec spec;
        spec.config = c;
        spec.intended_size = c.group_size;
        for (int i = 0; i < c.group_size; ++i) {
            PolicySpec p;
            p.policy = pool[rng.uniform_int(0, 6)];
            p.fraction = rng.uniform();
            p.punish_threshold = static_cast<int>(rng.uniform_int(0, 20));
            p.sanction_budget = static_cast<int>(rng.uniform_int(1, 4));
            spec.roster.push_back(p);
        }
        spec.seed = rng.next_u64();
        CHECK_NOTHROW((void)run_game(spec));
    }
}

TEST_CASE("deterministic policies give identical action streams across reruns") {
    PggConfig c;
    c.config_id = "det";
    c.group_size = 4;
    c.game_length = 6;
    c.mpcr = 0.5;
    c.punishment_enabled = true;
    GameSpec spec;
    spec.config = c;
    spec.intended_size = 4;
    spec.roster = {{PolicyName::always_cooperate, 1.0, 10, 1},
                   {PolicyName::conditional_cooperator, 1.0, 10, 1},
                   {PolicyName::norm_enforcer, 1.0, 10, 2},
                   {PolicyName::always_defect, 0.0, 10, 1}};
    spec.seed = 1;
    const GameLog a = run_game(spec);
    spec.seed = 2;  // deterministic policies ignore the stream entirely
    const GameLog b = run_game(spec);
    for (std::size_t r = 0; r < a.rounds.size(); ++r) {
        CHECK(a.rounds[r].contributions == b.rounds[r].contributions);
        CHECK(a.rounds[r].sanctions.size() == b.rounds[r].sanctions.size());
    }
}
