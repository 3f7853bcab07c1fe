#pragma once

#include <optional>
#include <utility>

#include "pgg/engine.hpp"

namespace pgg {

struct GameOutcome {
    double e_group = 0.0;             // realized earnings, net of all costs and sanctions
    double e_full_cooperation = 0.0;  // hypothetical benchmark on the same dropout trace
    double e_full_defection = 0.0;
    double efficiency = 0.0;
    std::optional<double> normalized_efficiency;  // undefined when benchmarks coincide
    double mean_contribution_fraction = 0.0;
    bool included = true;
};

// Hypothetical (full cooperation, full defection) earnings, computed at the
// round level with the log's per-round active counts and then aggregated:
// full-coop round = n_r * round(multiplier * endowment) (nobody sanctions),
// full-defect round = n_r * endowment. Both apply the same nearest-integer
// share rounding as real play.
std::pair<double, double> benchmark_earnings(const GameLog& log);

// Sum of per-player net earnings across rounds (the initial piggy-bank grant
// is not earnings and is excluded, as in the benchmarks).
double group_earnings(const GameLog& log);

double efficiency(const GameLog& log);

// Throws Error(undefined_measure) when the full-cooperation and full-defection
// benchmarks coincide (multiplier 1, or a rounded share equal to the
// endowment). May exceed 1 with rewards and go negative with punishment.
double normalized_efficiency(const GameLog& log);

// Mean of c/endowment over all (player, round) decisions, skipping rounds a
// player did not complete.
double mean_contribution_fraction(const GameLog& log);

// Included iff (intended - started)/intended <= 0.18. With any_time_dropout,
// "started" is replaced by the active count in the final round (the stricter
// alternative reading used for sensitivity reruns).
bool inclusion_filter(const GameLog& log, int intended_size, bool any_time_dropout = false);

GameOutcome compute_outcome(const GameLog& log, bool any_time_dropout = false);

}  // namespace pgg
