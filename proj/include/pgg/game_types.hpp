#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pgg {

constexpr int kEndowment = 20;       // per-round endowment, constant across all games
constexpr double kInitialBalance = 20.0;  // one-time piggy-bank grant before round 1

enum class Stage { contribution, redistribution, summary };
enum class SanctionKind { punish, reward };

std::string to_string(SanctionKind k);
SanctionKind sanction_kind_from_string(const std::string& s);

// One punish/reward action. `units` are clicks; the coin cost to the actor is
// units * peer_incentive_cost, and the target-side amount scales by the
// mechanism's impact factor.
struct SanctionAction {
    int actor = 0;
    int target = 0;
    int units = 0;
    SanctionKind kind = SanctionKind::punish;
};

struct PeerContribution {
    int player_id = 0;
    int contribution = 0;
};

struct PeerOutcomeSummary {
    int player_id = 0;
    double net = 0.0;
    double punishment_received = 0.0;
    double reward_received = 0.0;
};

struct SanctionReceived {
    int actor_id = -1;  // -1 when actor identities are hidden
    int units = 0;
    SanctionKind kind = SanctionKind::punish;
};

// What one player is shown at a decision point. Gated fields are populated
// exactly when the corresponding config flag enables them:
//   total_rounds / rounds_remaining  <- horizon_knowledge
//   peer_outcomes                    <- peer_outcome_visibility
//   messages                         <- communication
//   sanctions_received actor ids     <- actor_anonymity == revealed
// Contributions themselves are always public in the redistribution stage, and
// the previous round's contributions are carried for every player.
struct Observation {
    Stage stage = Stage::contribution;
    int round = 1;
    std::optional<int> total_rounds;
    std::optional<int> rounds_remaining;
    int self_id = 0;
    double balance = kInitialBalance;

    // Static mechanics every player is shown.
    double multiplier = 1.0;
    bool all_or_nothing = false;
    bool opt_out = false;
    bool punishment_enabled = false;
    bool reward_enabled = false;
    int peer_incentive_cost = 1;
    int punishment_impact = 1;
    double reward_impact = 0.5;

    std::vector<PeerContribution> current_contributions;   // redistribution stage only
    std::vector<PeerContribution> previous_contributions;  // from round 2 onward
    std::vector<PeerOutcomeSummary> peer_outcomes;         // previous round, gated
    std::vector<SanctionReceived> sanctions_received;      // own, previous round
    std::vector<std::string> messages;                     // full chat log, gated
};

}  // namespace pgg
