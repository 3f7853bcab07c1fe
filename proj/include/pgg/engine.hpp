#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pgg/agents.hpp"
#include "pgg/design_space.hpp"
#include "pgg/game_types.hpp"

namespace pgg {

struct DropoutEvent {
    int player_id = 0;
    int round = 1;  // player is removed before this round's contribution stage
};

struct GameSpec {
    PggConfig config;
    int intended_size = 0;  // must equal roster.size()
    std::vector<PolicySpec> roster;
    std::vector<DropoutEvent> dropout_schedule;
    std::uint64_t seed = 0;
};

struct PlayerState {
    int player_id = 0;
    double balance = kInitialBalance;  // cumulative piggy bank
    bool active = true;
};

struct RoundRecord {
    int round = 1;
    std::vector<std::optional<int>> contributions;  // by player id; nullopt = inactive
    int fund_total = 0;
    int share = 0;  // identical for all active players (SI-style nearest-integer division)
    int active_count = 0;
    std::vector<SanctionAction> sanctions;
    std::vector<std::optional<double>> net;  // per-player round earnings
    std::vector<std::string> messages;       // broadcast during this round
};

struct GameLog {
    PggConfig config;
    int intended_size = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> roster_labels;
    int started_size = 0;  // players completing round 1
    bool truncated = false;  // all players dropped before game_length rounds
    std::vector<RoundRecord> rounds;
    std::vector<double> final_balances;
};

// Single-game state machine. One round = contribution_stage ->
// redistribution_stage -> settle_round; dropouts apply between rounds.
// Exposed so stage-level behavior can be driven directly in tests; run_game
// composes it with agent policies.
class GameState {
public:
    GameState(const PggConfig& config, int intended_size);

    // Returns false (no-op) when the player is already inactive.
    bool apply_dropout(int player_id);

    // One entry per player id; nullopt for an active player defaults by
    // framing (opt_out -> full endowment, opt_in -> 0). Throws
    // Error(invalid_action) on out-of-range or non-all-or-nothing values, or
    // on an action supplied for an inactive player.
    void contribution_stage(const std::vector<std::optional<int>>& actions);

    // Validates the whole action set against stage-start balances, then
    // applies it atomically (order of actors is irrelevant). Throws without
    // modifying state: mechanism_disabled, invalid_target (inactive target or
    // self target), invalid_action, insufficient_balance (the offending
    // actor's entire action set is rejected).
    void redistribution_stage(const std::vector<SanctionAction>& actions);

    RoundRecord settle_round();

    // Chat broadcast; observations surface it only when communication is on.
    void post_message(int player_id, const std::string& text);

    Observation make_observation(int player_id, Stage stage) const;

    int round() const { return round_; }
    int active_count() const;
    const std::vector<PlayerState>& players() const { return players_; }
    const PggConfig& config() const { return config_; }

private:
    PggConfig config_;
    int intended_size_;
    int round_ = 1;
    std::vector<PlayerState> players_;

    // current-round scratch, cleared by settle_round
    bool contributions_set_ = false;
    std::vector<std::optional<int>> contributions_;
    std::vector<SanctionAction> sanctions_;
    std::vector<double> spend_;
    std::vector<double> punishment_received_;
    std::vector<double> reward_received_;
    std::vector<std::string> round_messages_;

    std::vector<std::string> chat_log_;        // persists across rounds
    std::optional<RoundRecord> previous_round_;
};

// Deterministic given spec.seed. Agent decision streams derive from
// (seed, round, player, stage), so results do not depend on evaluation order.
GameLog run_game(const GameSpec& spec);

}  // namespace pgg
