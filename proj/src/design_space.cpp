#include "pgg/design_space.hpp"

#include <cmath>
#include <cstdio>

#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

namespace pgg {

const std::array<const char*, kDesignDim> kDesignParameterNames = {
    "group_size",
    "game_length",
    "contribution_type",
    "contribution_framing",
    "mpcr",
    "communication",
    "peer_outcome_visibility",
    "actor_anonymity",
    "horizon_knowledge",
    "peer_incentive_cost",
    "punishment_impact",
    "reward_enabled",
    "reward_impact",
};

std::string to_string(ContributionType t) {
    return t == ContributionType::variable ? "variable" : "all_or_nothing";
}
std::string to_string(ContributionFraming f) {
    return f == ContributionFraming::opt_in ? "opt_in" : "opt_out";
}
std::string to_string(ActorAnonymity a) {
    return a == ActorAnonymity::hidden ? "hidden" : "revealed";
}
std::string to_string(Wave w) { return w == Wave::learning ? "learning" : "validation"; }

ContributionType contribution_type_from_string(const std::string& s) {
    if (s == "variable") return ContributionType::variable;
    if (s == "all_or_nothing") return ContributionType::all_or_nothing;
    throw Error(ErrorCode::ingestion, "unknown contribution_type value: " + s);
}
ContributionFraming contribution_framing_from_string(const std::string& s) {
    if (s == "opt_in") return ContributionFraming::opt_in;
    if (s == "opt_out") return ContributionFraming::opt_out;
    throw Error(ErrorCode::ingestion, "unknown contribution_framing value: " + s);
}
ActorAnonymity actor_anonymity_from_string(const std::string& s) {
    if (s == "hidden") return ActorAnonymity::hidden;
    if (s == "revealed") return ActorAnonymity::revealed;
    throw Error(ErrorCode::ingestion, "unknown actor_anonymity value: " + s);
}
Wave wave_from_string(const std::string& s) {
    if (s == "learning") return Wave::learning;
    if (s == "validation") return Wave::validation;
    throw Error(ErrorCode::ingestion, "unknown wave value: " + s);
}

bool PggConfig::same_design(const PggConfig& other) const {
    return group_size == other.group_size && game_length == other.game_length &&
           contribution_type == other.contribution_type &&
           contribution_framing == other.contribution_framing && mpcr == other.mpcr &&
           communication == other.communication &&
           peer_outcome_visibility == other.peer_outcome_visibility &&
           actor_anonymity == other.actor_anonymity &&
           horizon_knowledge == other.horizon_knowledge &&
           peer_incentive_cost == other.peer_incentive_cost &&
           punishment_impact == other.punishment_impact && reward_enabled == other.reward_enabled &&
           reward_impact == other.reward_impact;
}

namespace {

// Half-away-from-zero; used for every integer/binary mapping so endpoints are reachable.
int map_int(double u, int lo, int hi) {
    return lo + static_cast<int>(std::llround(u * (hi - lo)));
}

bool map_bool(double u) { return std::llround(u) != 0; }

}  // namespace

PggConfig map_unit_point_to_config(const UnitPoint& u, const ParameterBounds& b) {
    if (u.size() != kDesignDim) {
        throw Error(ErrorCode::usage,
                    "unit point has dimension " + std::to_string(u.size()) + ", expected " +
                        std::to_string(kDesignDim));
    }
    PggConfig c;
    c.group_size = map_int(u[0], b.group_size_min, b.group_size_max);
    c.game_length = map_int(u[1], b.game_length_min, b.game_length_max);
    c.contribution_type = map_bool(u[2]) ? ContributionType::all_or_nothing : ContributionType::variable;
    c.contribution_framing = map_bool(u[3]) ? ContributionFraming::opt_out : ContributionFraming::opt_in;
    // MPCR rides an intermediate coordinate: the lower bound depends on the
    // resolved group size (multiplier >= 1).
    const double mpcr_lo = 1.0 / c.group_size;
    c.mpcr = mpcr_lo + u[4] * (b.mpcr_max - mpcr_lo);
    c.communication = map_bool(u[5]);
    c.peer_outcome_visibility = map_bool(u[6]);
    c.actor_anonymity = map_bool(u[7]) ? ActorAnonymity::revealed : ActorAnonymity::hidden;
    c.horizon_knowledge = map_bool(u[8]);
    c.peer_incentive_cost = map_int(u[9], b.peer_incentive_cost_min, b.peer_incentive_cost_max);
    c.punishment_impact = map_int(u[10], b.punishment_impact_min, b.punishment_impact_max);
    c.reward_enabled = map_bool(u[11]);
    c.reward_impact = b.reward_impact_min + u[12] * (b.reward_impact_max - b.reward_impact_min);
    return c;
}

namespace {

std::string padded_id(char prefix, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%03d", prefix, index);
    return buf;
}

}  // namespace

std::vector<PggConfig> sobol_designs(int n, bool scramble, std::uint64_t seed,
                                     const ParameterBounds& bounds) {
    auto points = sobol_generate(kDesignDim, n, scramble, seed);
    std::vector<PggConfig> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        PggConfig c = map_unit_point_to_config(points[i], bounds);
        c.config_id = padded_id('L', static_cast<int>(i));
        c.wave = Wave::learning;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<PggConfig> random_generate(int n, const ParameterBounds& bounds, std::uint64_t seed,
                                       const std::vector<PggConfig>& exclusions) {
    if (n < 0) throw Error(ErrorCode::usage, "random_generate: n must be >= 0");
    Rng rng(derive_seed(seed, "design.random"));
    std::vector<PggConfig> out;
    out.reserve(static_cast<std::size_t>(n));
    const long budget = 1000L * (n > 0 ? n : 1);
    long attempts = 0;
    while (static_cast<int>(out.size()) < n) {
        if (++attempts > budget) {
            throw Error(ErrorCode::exhaustion,
                        "could not generate " + std::to_string(n) +
                            " configs distinct from the exclusion set within " +
                            std::to_string(budget) + " attempts");
        }
        UnitPoint u(kDesignDim);
        for (auto& x : u) x = rng.uniform();
        PggConfig c = map_unit_point_to_config(u, bounds);
        bool clash = false;
        for (const auto& e : exclusions) {
            if (c.same_design(e)) { clash = true; break; }
        }
        if (!clash) {
            for (const auto& prev : out) {
                if (c.same_design(prev)) { clash = true; break; }
            }
        }
        if (clash) continue;
        c.config_id = padded_id('V', static_cast<int>(out.size()));
        c.wave = Wave::validation;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::string> validate_config(const PggConfig& c, const ParameterBounds& b) {
    std::vector<std::string> v;
    auto check_int = [&](const char* name, int value, int lo, int hi) {
        if (value < lo || value > hi) {
            v.push_back(std::string(name) + " " + std::to_string(value) + " outside [" +
                        std::to_string(lo) + "," + std::to_string(hi) + "]");
        }
    };
    check_int("group_size", c.group_size, b.group_size_min, b.group_size_max);
    check_int("game_length", c.game_length, b.game_length_min, b.game_length_max);
    check_int("peer_incentive_cost", c.peer_incentive_cost, b.peer_incentive_cost_min,
              b.peer_incentive_cost_max);
    check_int("punishment_impact", c.punishment_impact, b.punishment_impact_min,
              b.punishment_impact_max);
    if (c.group_size > 0) {
        const double lo = 1.0 / c.group_size;
        if (c.mpcr < lo - 1e-12 || c.mpcr > b.mpcr_max + 1e-12) {
            v.push_back("mpcr " + std::to_string(c.mpcr) + " outside [" + std::to_string(lo) +
                        "," + std::to_string(b.mpcr_max) + "]");
        }
        if (std::fabs(c.multiplier() - 1.0) < 1e-9) v.push_back("degenerate multiplier");
    }
    if (c.reward_impact < b.reward_impact_min - 1e-12 ||
        c.reward_impact > b.reward_impact_max + 1e-12) {
        v.push_back("reward_impact " + std::to_string(c.reward_impact) + " outside [" +
                    std::to_string(b.reward_impact_min) + "," +
                    std::to_string(b.reward_impact_max) + "]");
    }
    return v;
}

}  // namespace pgg
