#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pgg/sobol.hpp"

namespace pgg {

enum class ContributionType { variable, all_or_nothing };
enum class ContributionFraming { opt_in, opt_out };
enum class ActorAnonymity { hidden, revealed };
enum class Wave { learning, validation };

std::string to_string(ContributionType t);
std::string to_string(ContributionFraming f);
std::string to_string(ActorAnonymity a);
std::string to_string(Wave w);
ContributionType contribution_type_from_string(const std::string& s);
ContributionFraming contribution_framing_from_string(const std::string& s);
ActorAnonymity actor_anonymity_from_string(const std::string& s);
Wave wave_from_string(const std::string& s);

// Sampleable ranges of the design space. The MPCR lower bound is 1/group_size
// (multiplier >= 1) and is resolved per configuration, not stored here.
struct ParameterBounds {
    int group_size_min = 2;
    int group_size_max = 20;
    int game_length_min = 1;
    int game_length_max = 30;
    double mpcr_max = 0.7;
    int peer_incentive_cost_min = 1;
    int peer_incentive_cost_max = 4;
    int punishment_impact_min = 1;
    int punishment_impact_max = 4;
    double reward_impact_min = 0.5;
    double reward_impact_max = 1.5;
};

// One point in the design space: the 13 sampled parameters plus the focal
// punishment treatment (the 14th dimension).
struct PggConfig {
    std::string config_id;
    Wave wave = Wave::learning;
    bool punishment_enabled = false;

    int group_size = 2;
    int game_length = 1;
    ContributionType contribution_type = ContributionType::variable;
    ContributionFraming contribution_framing = ContributionFraming::opt_in;
    double mpcr = 0.5;
    bool communication = false;
    bool peer_outcome_visibility = false;
    ActorAnonymity actor_anonymity = ActorAnonymity::hidden;
    bool horizon_knowledge = false;
    int peer_incentive_cost = 1;
    int punishment_impact = 1;
    bool reward_enabled = false;
    double reward_impact = 0.5;

    double multiplier() const { return mpcr * group_size; }
    bool all_or_nothing() const { return contribution_type == ContributionType::all_or_nothing; }
    bool opt_out() const { return contribution_framing == ContributionFraming::opt_out; }

    // Equality on the 13 sampled parameters (ignores id/wave/punishment flag).
    bool same_design(const PggConfig& other) const;
};

// Unit-cube coordinate order for the 13 sampled parameters (fixed convention,
// mirrored by the CSV column order):
//   0 group_size        integer [2,20]
//   1 game_length       integer [1,30]
//   2 contribution_type 0=variable 1=all_or_nothing
//   3 contribution_framing 0=opt_in 1=opt_out
//   4 mpcr              intermediate position in [1/group_size, 0.7]
//   5 communication     0/1
//   6 peer_outcome_visibility 0/1
//   7 actor_anonymity   0=hidden 1=revealed
//   8 horizon_knowledge 0/1
//   9 peer_incentive_cost integer [1,4]
//  10 punishment_impact integer [1,4]
//  11 reward_enabled    0/1
//  12 reward_impact     real [0.5,1.5]
constexpr int kDesignDim = 13;
extern const std::array<const char*, kDesignDim> kDesignParameterNames;

// Integer parameters map as min + round(u*(max-min)) with round-half-away-
// from-zero; binaries as round(u); MPCR is resolved after group_size as
// 1/group_size + u*(mpcr_max - 1/group_size).
PggConfig map_unit_point_to_config(const UnitPoint& u, const ParameterBounds& bounds = {});

// Learning-wave designs: first n points of the 13-dimensional Sobol sequence
// mapped to configurations. Ids are "L" + zero-padded index.
std::vector<PggConfig> sobol_designs(int n, bool scramble, std::uint64_t seed,
                                     const ParameterBounds& bounds = {});

// Validation-wave designs: each parameter drawn independently and uniformly
// (via a uniform unit point pushed through the same mapping). Outputs never
// equal an exclusion on all 13 sampled parameters; throws
// Error(exhaustion) when n distinct configs cannot be found.
std::vector<PggConfig> random_generate(int n, const ParameterBounds& bounds, std::uint64_t seed,
                                       const std::vector<PggConfig>& exclusions = {});

// Empty result means the config is within bounds and its multiplier exceeds 1.
// A multiplier of exactly 1 yields the "degenerate multiplier" violation; such
// configs can still be simulated but normalized efficiency is undefined.
std::vector<std::string> validate_config(const PggConfig& cfg, const ParameterBounds& bounds = {});

}  // namespace pgg
