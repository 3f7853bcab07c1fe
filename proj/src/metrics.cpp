#include "pgg/metrics.hpp"

#include <cmath>

#include "pgg/errors.hpp"

namespace pgg {

std::pair<double, double> benchmark_earnings(const GameLog& log) {
    const int coop_share =
        static_cast<int>(std::llround(log.config.multiplier() * kEndowment));
    double full_coop = 0.0;
    double full_defect = 0.0;
    for (const auto& r : log.rounds) {
        full_coop += static_cast<double>(r.active_count) * coop_share;
        full_defect += static_cast<double>(r.active_count) * kEndowment;
    }
    return {full_coop, full_defect};
}

double group_earnings(const GameLog& log) {
    double total = 0.0;
    for (const auto& r : log.rounds) {
        for (const auto& net : r.net) {
            if (net.has_value()) total += *net;
        }
    }
    return total;
}

double efficiency(const GameLog& log) {
    auto [full_coop, full_defect] = benchmark_earnings(log);
    (void)full_defect;
    if (full_coop <= 0.0) {
        throw Error(ErrorCode::undefined_measure,
                    "efficiency undefined: no completed rounds in game");
    }
    return group_earnings(log) / full_coop;
}

double normalized_efficiency(const GameLog& log) {
    auto [full_coop, full_defect] = benchmark_earnings(log);
    if (full_coop == full_defect) {
        throw Error(ErrorCode::undefined_measure,
                    "normalized efficiency undefined: full-cooperation and full-defection "
                    "benchmarks coincide (multiplier effectively 1)");
    }
    return (group_earnings(log) - full_defect) / (full_coop - full_defect);
}

double mean_contribution_fraction(const GameLog& log) {
    double sum = 0.0;
    long count = 0;
    for (const auto& r : log.rounds) {
        for (const auto& c : r.contributions) {
            if (c.has_value()) {
                sum += static_cast<double>(*c) / kEndowment;
                ++count;
            }
        }
    }
    if (count == 0) {
        throw Error(ErrorCode::undefined_measure,
                    "mean contribution fraction undefined: no decisions in game");
    }
    return sum / static_cast<double>(count);
}

bool inclusion_filter(const GameLog& log, int intended_size, bool any_time_dropout) {
    if (intended_size <= 0) throw Error(ErrorCode::usage, "intended_size must be positive");
    int present = log.started_size;
    if (any_time_dropout) present = log.rounds.empty() ? 0 : log.rounds.back().active_count;
    const double missing = static_cast<double>(intended_size - present) / intended_size;
    return missing <= 0.18;
}

GameOutcome compute_outcome(const GameLog& log, bool any_time_dropout) {
    GameOutcome out;
    auto [full_coop, full_defect] = benchmark_earnings(log);
    out.e_full_cooperation = full_coop;
    out.e_full_defection = full_defect;
    out.e_group = group_earnings(log);
    out.efficiency = efficiency(log);
    if (full_coop != full_defect) {
        out.normalized_efficiency = (out.e_group - full_defect) / (full_coop - full_defect);
    }
    out.mean_contribution_fraction = mean_contribution_fraction(log);
    out.included = inclusion_filter(log, log.intended_size, any_time_dropout);
    return out;
}

}  // namespace pgg
