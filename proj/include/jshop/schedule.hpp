#pragma once

#include <string>
#include <vector>

#include "jshop/instance.hpp"

namespace jshop {

struct Assignment {
    int job = 0;
    int op = 0;  // position within the job's routing
    int machine = 0;
    long long start = 0;
    long long end = 0;
    bool operator==(const Assignment&) const = default;
};

struct Schedule {
    std::string instance;
    long long makespan = 0;
    std::vector<Assignment> assignments;  // sorted by (machine, start)
    bool operator==(const Schedule&) const = default;
};

// Sorts assignments by (machine, start) and fills in the makespan.
Schedule make_schedule(const Instance& inst, std::vector<Assignment> assignments);

// Independent validity check: every operation scheduled exactly once, machine
// exclusivity, per-job precedence, routing/duration agreement, recorded
// makespan. Throws std::invalid_argument naming the first violation.
void check_schedule(const Schedule& sched, const Instance& inst);

std::string schedule_to_json(const Schedule& sched);
Schedule schedule_from_json(const std::string& text);

}  // namespace jshop
