#pragma once

#include <string>
#include <vector>

#include "pgg/game_types.hpp"
#include "pgg/rng.hpp"

namespace pgg {

enum class PolicyName {
    always_cooperate,
    always_defect,
    fractional,
    conditional_cooperator,
    norm_enforcer,
    reciprocator,
    random_uniform,
};

std::string to_string(PolicyName p);
PolicyName policy_from_string(const std::string& s);

// Scripted decision policy driving one seat.
//   fractional:      contributes round(endowment * fraction)
//   norm_enforcer:   contributes fully; punishes peers below `punish_threshold`,
//                    one unit each, lowest contributors first, up to
//                    `sanction_budget` units and its own balance
//   reciprocator:    contributes fully; rewards the single highest contributor
//                    one unit (ties to the lowest player id)
struct PolicySpec {
    PolicyName policy = PolicyName::always_cooperate;
    double fraction = 1.0;      // fractional only, in [0,1]
    int punish_threshold = 10;  // norm_enforcer, coins
    int sanction_budget = 1;    // per-round unit budget

    std::string label() const;
};

// Contribution decision for an active player. Deterministic policies ignore
// the rng. Under all-or-nothing the value is coerced to the nearer of {0,20}
// (ties up). conditional_cooperator matches the mean of the others' previous-
// round contributions and opens with full contribution in round 1.
int decide_contribution(const PolicySpec& policy, const Observation& obs, Rng& rng);

// Redistribution decision; empty for every policy except norm_enforcer and
// reciprocator. Never emits illegal actions: disabled mechanisms, self
// targets, inactive targets, or spend beyond the stage-start balance.
std::vector<SanctionAction> decide_redistribution(const PolicySpec& policy, const Observation& obs,
                                                  Rng& rng);

}  // namespace pgg
