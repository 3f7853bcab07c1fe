#include "pgg/agents.hpp"

#include <algorithm>
#include <cmath>

#include "pgg/errors.hpp"

namespace pgg {

std::string to_string(PolicyName p) {
    switch (p) {
        case PolicyName::always_cooperate: return "always_cooperate";
        case PolicyName::always_defect: return "always_defect";
        case PolicyName::fractional: return "fractional";
        case PolicyName::conditional_cooperator: return "conditional_cooperator";
        case PolicyName::norm_enforcer: return "norm_enforcer";
        case PolicyName::reciprocator: return "reciprocator";
        case PolicyName::random_uniform: return "random";
    }
    return "?";
}

PolicyName policy_from_string(const std::string& s) {
    if (s == "always_cooperate") return PolicyName::always_cooperate;
    if (s == "always_defect") return PolicyName::always_defect;
    if (s == "fractional") return PolicyName::fractional;
    if (s == "conditional_cooperator") return PolicyName::conditional_cooperator;
    if (s == "norm_enforcer") return PolicyName::norm_enforcer;
    if (s == "reciprocator") return PolicyName::reciprocator;
    if (s == "random") return PolicyName::random_uniform;
    throw Error(ErrorCode::ingestion, "unknown policy: " + s);
}

std::string PolicySpec::label() const {
    switch (policy) {
        case PolicyName::fractional: return "fractional(f=" + std::to_string(fraction) + ")";
        case PolicyName::norm_enforcer:
            return "norm_enforcer(t=" + std::to_string(punish_threshold) +
                   ",b=" + std::to_string(sanction_budget) + ")";
        default: return to_string(policy);
    }
}

namespace {

int coerce_all_or_nothing(int value) {
    // nearest of {0, kEndowment}, tie toward full contribution
    return value * 2 >= kEndowment ? kEndowment : 0;
}

int legalize(int value, const Observation& obs) {
    value = std::clamp(value, 0, kEndowment);
    return obs.all_or_nothing ? coerce_all_or_nothing(value) : value;
}

}  // namespace

int decide_contribution(const PolicySpec& spec, const Observation& obs, Rng& rng) {
    switch (spec.policy) {
        case PolicyName::always_cooperate:
        case PolicyName::norm_enforcer:
        case PolicyName::reciprocator:
            return legalize(kEndowment, obs);
        case PolicyName::always_defect:
            return legalize(0, obs);
        case PolicyName::fractional:
            return legalize(static_cast<int>(std::llround(kEndowment * spec.fraction)), obs);
        case PolicyName::conditional_cooperator: {
            double sum = 0.0;
            int count = 0;
            for (const auto& pc : obs.previous_contributions) {
                if (pc.player_id == obs.self_id) continue;
                sum += pc.contribution;
                ++count;
            }
            // round 1 (or no peers observed): open cooperatively
            if (count == 0) return legalize(kEndowment, obs);
            return legalize(static_cast<int>(std::llround(sum / count)), obs);
        }
        case PolicyName::random_uniform:
            if (obs.all_or_nothing) return rng.uniform_int(0, 1) ? kEndowment : 0;
            return static_cast<int>(rng.uniform_int(0, kEndowment));
    }
    return 0;
}

std::vector<SanctionAction> decide_redistribution(const PolicySpec& spec, const Observation& obs,
                                                  Rng&) {
    std::vector<SanctionAction> actions;
    const int cost = obs.peer_incentive_cost;
    if (spec.policy == PolicyName::norm_enforcer && obs.punishment_enabled) {
        std::vector<PeerContribution> targets;
        for (const auto& pc : obs.current_contributions) {
            if (pc.player_id != obs.self_id && pc.contribution < spec.punish_threshold)
                targets.push_back(pc);
        }
        std::sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) {
            if (a.contribution != b.contribution) return a.contribution < b.contribution;
            return a.player_id < b.player_id;
        });
        int affordable = cost > 0 ? static_cast<int>(std::floor(obs.balance / cost)) : 0;
        int budget = std::min(spec.sanction_budget, std::max(0, affordable));
        for (const auto& t : targets) {
            if (budget <= 0) break;
            actions.push_back({obs.self_id, t.player_id, 1, SanctionKind::punish});
            --budget;
        }
    } else if (spec.policy == PolicyName::reciprocator && obs.reward_enabled) {
        const PeerContribution* best = nullptr;
        for (const auto& pc : obs.current_contributions) {
            if (pc.player_id == obs.self_id) continue;
            if (!best || pc.contribution > best->contribution ||
                (pc.contribution == best->contribution && pc.player_id < best->player_id)) {
                best = &pc;
            }
        }
        if (best && obs.balance >= cost && spec.sanction_budget >= 1) {
            actions.push_back({obs.self_id, best->player_id, 1, SanctionKind::reward});
        }
    }
    return actions;
}

}  // namespace pgg
