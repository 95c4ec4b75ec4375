#pragma once

#include <cstdint>
#include <string>

#include "jshop/rng.hpp"
#include "jshop/schedule.hpp"
#include "jshop/sim_env.hpp"

namespace jshop {

enum class RuleKind { spt, lpt, fifo, mwkr, random_pick };

enum class TieBreak { lowest_job_id, random_choice };

struct Rule {
    RuleKind kind = RuleKind::spt;
    TieBreak tie_break = TieBreak::lowest_job_id;
    uint64_t seed = 0;
};

RuleKind rule_from_name(const std::string& name);  // spt|lpt|fifo|mwkr|random
std::string rule_name(RuleKind kind);

// The rule's choice among the currently eligible jobs. rng is consulted only
// for RANDOM picks and random tie-breaks.
int rule_pick(const Env& env, const Rule& rule, RngStream* rng);

// Runs one environment episode, answering every query with rule_pick.
Schedule dispatch(const Instance& inst, const Rule& rule);

// Smallest makespan among the four deterministic rules.
long long best_rule_makespan(const Instance& inst);

struct OracleResult {
    long long makespan = 0;
    Schedule schedule;
};

// Exhaustive minimum over every schedule the environment can reach (non-delay
// schedules), by depth-first search over eligible sets with lower-bound
// pruning. Requires n*m <= limit.
OracleResult brute_force_optimum(const Instance& inst, int limit = 12);

// Exhaustive minimum over active schedules (delayed starts allowed), for
// quantifying what the no-idle restriction gives up. Requires n*m <= limit.
OracleResult active_optimum(const Instance& inst, int limit = 9);

}  // namespace jshop
