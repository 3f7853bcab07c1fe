#include "pgg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

namespace pgg {

std::string to_string(SanctionKind k) { return k == SanctionKind::punish ? "punish" : "reward"; }

SanctionKind sanction_kind_from_string(const std::string& s) {
    if (s == "punish") return SanctionKind::punish;
    if (s == "reward") return SanctionKind::reward;
    throw Error(ErrorCode::ingestion, "unknown sanction kind: " + s);
}

namespace {

int round_half_away(double x) { return static_cast<int>(std::llround(x)); }

}  // namespace

GameState::GameState(const PggConfig& config, int intended_size)
    : config_(config), intended_size_(intended_size) {
    players_.resize(static_cast<std::size_t>(intended_size));
    for (int i = 0; i < intended_size; ++i) players_[static_cast<std::size_t>(i)].player_id = i;
    contributions_.assign(static_cast<std::size_t>(intended_size), std::nullopt);
    spend_.assign(static_cast<std::size_t>(intended_size), 0.0);
    punishment_received_.assign(static_cast<std::size_t>(intended_size), 0.0);
    reward_received_.assign(static_cast<std::size_t>(intended_size), 0.0);
}

int GameState::active_count() const {
    int n = 0;
    for (const auto& p : players_) n += p.active ? 1 : 0;
    return n;
}

bool GameState::apply_dropout(int player_id) {
    auto& p = players_.at(static_cast<std::size_t>(player_id));
    if (!p.active) return false;  // no-op, caller may warn
    p.active = false;
    return true;
}

void GameState::contribution_stage(const std::vector<std::optional<int>>& actions) {
    if (actions.size() != players_.size()) {
        throw Error(ErrorCode::invalid_action, "contribution action vector size mismatch");
    }
    std::vector<std::optional<int>> resolved(players_.size(), std::nullopt);
    for (std::size_t i = 0; i < players_.size(); ++i) {
        if (!players_[i].active) {
            if (actions[i].has_value()) {
                throw Error(ErrorCode::invalid_action,
                            "player " + std::to_string(i) + " is inactive and cannot contribute");
            }
            continue;
        }
        int c = actions[i].has_value() ? *actions[i]
                                       : (config_.opt_out() ? kEndowment : 0);
        if (c < 0 || c > kEndowment) {
            throw Error(ErrorCode::invalid_action, "player " + std::to_string(i) +
                                                        " contribution " + std::to_string(c) +
                                                        " outside [0," +
                                                        std::to_string(kEndowment) + "]");
        }
        if (config_.all_or_nothing() && c != 0 && c != kEndowment) {
            throw Error(ErrorCode::invalid_action,
                        "player " + std::to_string(i) + " contribution " + std::to_string(c) +
                            " violates all-or-nothing");
        }
        resolved[i] = c;
    }
    contributions_ = std::move(resolved);
    contributions_set_ = true;
}

void GameState::redistribution_stage(const std::vector<SanctionAction>& actions) {
    // Validate everything against stage-start balances before touching state.
    std::vector<double> spend(players_.size(), 0.0);
    for (const auto& a : actions) {
        if (a.actor < 0 || a.actor >= intended_size_ || a.target < 0 || a.target >= intended_size_) {
            throw Error(ErrorCode::invalid_action, "sanction actor/target out of range");
        }
        if (a.units <= 0) {
            throw Error(ErrorCode::invalid_action,
                        "actor " + std::to_string(a.actor) + " sanction units must be positive");
        }
        if (a.kind == SanctionKind::punish && !config_.punishment_enabled) {
            throw Error(ErrorCode::mechanism_disabled, "punishment is disabled in this game");
        }
        if (a.kind == SanctionKind::reward && !config_.reward_enabled) {
            throw Error(ErrorCode::mechanism_disabled, "reward is disabled in this game");
        }
        if (!players_[static_cast<std::size_t>(a.actor)].active) {
            throw Error(ErrorCode::invalid_action,
                        "actor " + std::to_string(a.actor) + " is inactive");
        }
        if (!players_[static_cast<std::size_t>(a.target)].active) {
            throw Error(ErrorCode::invalid_target,
                        "target " + std::to_string(a.target) + " is inactive");
        }
        if (a.target == a.actor) {
            throw Error(ErrorCode::invalid_target,
                        "actor " + std::to_string(a.actor) + " cannot target itself");
        }
        spend[static_cast<std::size_t>(a.actor)] +=
            static_cast<double>(a.units) * config_.peer_incentive_cost;
    }
    for (std::size_t i = 0; i < players_.size(); ++i) {
        if (spend[i] > 0.0 && spend[i] > players_[i].balance + 1e-12) {
            throw Error(ErrorCode::insufficient_balance,
                        "actor " + std::to_string(i) + " spend " + std::to_string(spend[i]) +
                            " exceeds balance " + std::to_string(players_[i].balance));
        }
    }
    // Apply atomically: all amounts computed from stage-start balances.
    for (const auto& a : actions) {
        const double coins = static_cast<double>(a.units) * config_.peer_incentive_cost;
        spend_[static_cast<std::size_t>(a.actor)] += coins;
        if (a.kind == SanctionKind::punish) {
            punishment_received_[static_cast<std::size_t>(a.target)] +=
                coins * config_.punishment_impact;
        } else {
            reward_received_[static_cast<std::size_t>(a.target)] += coins * config_.reward_impact;
        }
        sanctions_.push_back(a);
    }
}

RoundRecord GameState::settle_round() {
    if (!contributions_set_) {
        // a settle without an explicit stage call treats every active player
        // as having defaulted by framing
        contribution_stage(std::vector<std::optional<int>>(players_.size(), std::nullopt));
    }
    RoundRecord rec;
    rec.round = round_;
    rec.contributions = contributions_;
    rec.active_count = active_count();
    rec.sanctions = sanctions_;
    rec.messages = round_messages_;
    rec.net.assign(players_.size(), std::nullopt);

    int fund = 0;
    for (const auto& c : contributions_) fund += c.value_or(0);
    rec.fund_total = fund;
    rec.share = rec.active_count > 0
                    ? round_half_away(config_.multiplier() * fund / rec.active_count)
                    : 0;

    for (std::size_t i = 0; i < players_.size(); ++i) {
        if (!players_[i].active) continue;
        const double net = (kEndowment - *contributions_[i]) + rec.share - spend_[i] -
                           punishment_received_[i] + reward_received_[i];
        players_[i].balance += net;
        rec.net[i] = net;
    }

    previous_round_ = rec;
    contributions_.assign(players_.size(), std::nullopt);
    contributions_set_ = false;
    sanctions_.clear();
    spend_.assign(players_.size(), 0.0);
    punishment_received_.assign(players_.size(), 0.0);
    reward_received_.assign(players_.size(), 0.0);
    round_messages_.clear();
    ++round_;
    return rec;
}

void GameState::post_message(int player_id, const std::string& text) {
    std::string line = "p" + std::to_string(player_id) + ": " + text;
    round_messages_.push_back(line);
    chat_log_.push_back(std::move(line));
}

Observation GameState::make_observation(int player_id, Stage stage) const {
    const auto& self = players_.at(static_cast<std::size_t>(player_id));
    Observation obs;
    obs.stage = stage;
    obs.round = round_;
    obs.self_id = player_id;
    obs.balance = self.balance;
    obs.multiplier = config_.multiplier();
    obs.all_or_nothing = config_.all_or_nothing();
    obs.opt_out = config_.opt_out();
    obs.punishment_enabled = config_.punishment_enabled;
    obs.reward_enabled = config_.reward_enabled;
    obs.peer_incentive_cost = config_.peer_incentive_cost;
    obs.punishment_impact = config_.punishment_impact;
    obs.reward_impact = config_.reward_impact;
    if (config_.horizon_knowledge) {
        obs.total_rounds = config_.game_length;
        obs.rounds_remaining = config_.game_length - round_ + 1;
    }
    if (stage != Stage::contribution && contributions_set_) {
        for (std::size_t i = 0; i < contributions_.size(); ++i) {
            if (contributions_[i].has_value())
                obs.current_contributions.push_back({static_cast<int>(i), *contributions_[i]});
        }
    }
    if (previous_round_.has_value()) {
        const RoundRecord& prev = *previous_round_;
        for (std::size_t i = 0; i < prev.contributions.size(); ++i) {
            if (prev.contributions[i].has_value())
                obs.previous_contributions.push_back({static_cast<int>(i), *prev.contributions[i]});
        }
        if (config_.peer_outcome_visibility) {
            std::vector<double> pun(prev.contributions.size(), 0.0);
            std::vector<double> rew(prev.contributions.size(), 0.0);
            for (const auto& s : prev.sanctions) {
                const double coins = static_cast<double>(s.units) * config_.peer_incentive_cost;
                if (s.kind == SanctionKind::punish)
                    pun[static_cast<std::size_t>(s.target)] += coins * config_.punishment_impact;
                else
                    rew[static_cast<std::size_t>(s.target)] += coins * config_.reward_impact;
            }
            for (std::size_t i = 0; i < prev.net.size(); ++i) {
                if (prev.net[i].has_value()) {
                    obs.peer_outcomes.push_back(
                        {static_cast<int>(i), *prev.net[i], pun[i], rew[i]});
                }
            }
        }
        for (const auto& s : prev.sanctions) {
            if (s.target != player_id) continue;
            const bool revealed = config_.actor_anonymity == ActorAnonymity::revealed;
            obs.sanctions_received.push_back({revealed ? s.actor : -1, s.units, s.kind});
        }
    }
    if (config_.communication) obs.messages = chat_log_;
    return obs;
}

GameLog run_game(const GameSpec& spec) {
    if (spec.intended_size <= 0 ||
        spec.roster.size() != static_cast<std::size_t>(spec.intended_size)) {
        throw Error(ErrorCode::usage, "roster size must equal intended_size");
    }
    for (const auto& d : spec.dropout_schedule) {
        if (d.round < 1 || d.round > spec.config.game_length || d.player_id < 0 ||
            d.player_id >= spec.intended_size) {
            throw Error(ErrorCode::usage, "dropout event outside the game");
        }
    }

    GameLog log;
    log.config = spec.config;
    log.intended_size = spec.intended_size;
    log.seed = spec.seed;
    for (const auto& p : spec.roster) log.roster_labels.push_back(p.label());

    std::map<int, std::vector<int>> dropouts_by_round;
    for (const auto& d : spec.dropout_schedule) dropouts_by_round[d.round].push_back(d.player_id);

    GameState state(spec.config, spec.intended_size);
    auto agent_rng = [&](int player, int round, int stage) {
        const std::uint64_t unit = (static_cast<std::uint64_t>(round) << 32) |
                                   (static_cast<std::uint64_t>(player) << 8) |
                                   static_cast<std::uint64_t>(stage);
        return Rng(derive_seed(spec.seed, "agent", unit));
    };

    for (int r = 1; r <= spec.config.game_length; ++r) {
        if (auto it = dropouts_by_round.find(r); it != dropouts_by_round.end()) {
            for (int pid : it->second) state.apply_dropout(pid);
        }
        if (state.active_count() == 0) {
            log.truncated = true;
            break;
        }
        std::vector<std::optional<int>> contributions(
            static_cast<std::size_t>(spec.intended_size), std::nullopt);
        for (const auto& p : state.players()) {
            if (!p.active) continue;
            Rng rng = agent_rng(p.player_id, r, 0);
            Observation obs = state.make_observation(p.player_id, Stage::contribution);
            contributions[static_cast<std::size_t>(p.player_id)] =
                decide_contribution(spec.roster[static_cast<std::size_t>(p.player_id)], obs, rng);
        }
        state.contribution_stage(contributions);

        std::vector<SanctionAction> actions;
        for (const auto& p : state.players()) {
            if (!p.active) continue;
            Rng rng = agent_rng(p.player_id, r, 1);
            Observation obs = state.make_observation(p.player_id, Stage::redistribution);
            auto mine =
                decide_redistribution(spec.roster[static_cast<std::size_t>(p.player_id)], obs, rng);
            actions.insert(actions.end(), mine.begin(), mine.end());
        }
        state.redistribution_stage(actions);
        log.rounds.push_back(state.settle_round());
    }

    log.started_size = log.rounds.empty() ? 0 : log.rounds.front().active_count;
    for (const auto& p : state.players()) log.final_balances.push_back(p.balance);
    return log;
}

}  // namespace pgg
