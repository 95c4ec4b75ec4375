#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jshop/instance.hpp"
#include "jshop/schedule.hpp"

namespace jshop {

struct EnvConfig {
    // Episode time ceiling. 0 means "derive at reset": twice the best
    // makespan among the SPT/LPT/FIFO/MWKR rules on the instance.
    long long rollout_budget = 0;
    double final_reward_scale = 1.0;
    int final_reward_offset = 100;
    // Early termination when cumulative machine occupancy drops below this
    // value; negative disables. Checked at clock advances once the clock has
    // passed 10% of the rollout budget.
    double occupancy_threshold = -1.0;
    // Invalid-action truncation limit. 0 means 10 * n * m.
    long long invalid_action_limit = 0;
};

// Flattened observation. Component layout, in order:
//   machine_status      m    1 if the machine is running an operation
//   operation_progress  m    remaining time of the running op / max duration
//   jobs_remaining      n    remaining op count / m
//   operation_matrix    n*m  1 if that operation is completed or running
//   job_available       n    1 if the job's next op is assignable now
//   machine_processing  m    (job id + 1) / n of the running job, 0 if idle
struct Observation {
    std::vector<double> vec;
    std::vector<uint8_t> mask;  // n entries, mask[j] == job_available[j]

    static int dim(int n_jobs, int n_machines) {
        return 3 * n_machines + 2 * n_jobs + n_jobs * n_machines;
    }
};

struct StepInfo {
    long long clock = 0;
    long long makespan_so_far = 0;
    double occupancy = 1.0;
    bool invalid = false;
};

struct StepResult {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    bool truncated = false;
    StepInfo info;
};

struct TraceRow {
    long long clock = 0;
    std::vector<uint8_t> mask;
    int action = -1;
    double reward = 0.0;
};

double final_reward(long long makespan, const EnvConfig& resolved_cfg);

// Discrete-event job-shop environment. Decision points are exactly the clock
// times with a non-empty eligible set; assigning an operation may re-query
// the agent at the same clock (multi-assignment) or jump the clock to the
// next completion time that exposes new eligibility. Copyable, so searches
// can fork episode states.
class Env {
public:
    Env(Instance inst, EnvConfig cfg);

    Observation reset();
    StepResult step(int job);
    Observation observation() const { return build_observation(); }

    // Eligibility at the current clock: next op exists, job predecessor
    // finished, required machine idle.
    std::vector<uint8_t> eligible_jobs() const { return eligible_; }

    // Smallest future completion time whose eligible set is non-empty;
    // intermediate completion times with empty eligibility are skipped.
    // Requires an empty eligible set now and at least one running operation.
    long long next_decision_time() const;

    // Share of [0, clock) during which machines were busy; 1.0 at clock 0.
    double occupancy() const;

    long long makespan() const;  // throws until all operations are assigned

    long long clock() const { return clock_; }
    bool done() const { return done_; }
    bool truncated() const { return truncated_; }
    long long rollout_budget() const { return budget_; }
    long long invalid_action_limit() const { return invalid_limit_; }
    const EnvConfig& config() const { return resolved_; }
    const Instance& instance() const { return inst_; }
    int n_jobs() const { return inst_.n_jobs; }
    int n_machines() const { return inst_.n_machines; }
    int obs_dim() const { return Observation::dim(inst_.n_jobs, inst_.n_machines); }

    long long episode_step_count() const { return episode_step_count_; }
    long long invalid_action_count() const { return invalid_action_count_; }
    int valid_steps() const { return static_cast<int>(assignments_.size()); }
    const std::vector<Assignment>& assignments() const { return assignments_; }
    Schedule schedule() const;  // completed episodes only

    int job_next_op(int job) const { return job_next_op_[job]; }
    long long job_ready_at(int job) const { return job_ready_at_[job]; }
    long long remaining_work(int job) const;  // includes the next op

    void enable_trace(bool on) { trace_on_ = on; }
    const std::vector<TraceRow>& trace() const { return trace_; }

    // Full mutable-state snapshot (instance and config excluded).
    void save_state(std::ostream& out) const;
    void load_state(std::istream& in);

private:
    void recompute_eligibility();
    void advance_clock();
    Observation build_observation() const;
    StepInfo current_info(bool invalid) const;

    Instance inst_;
    EnvConfig cfg_;
    EnvConfig resolved_;
    long long budget_ = 0;
    long long invalid_limit_ = 0;
    int max_duration_ = 1;

    long long clock_ = 0;
    std::vector<long long> machine_busy_until_;
    std::vector<int> machine_current_job_;  // -1 if never used
    std::vector<int> job_next_op_;
    std::vector<long long> job_ready_at_;
    std::vector<long long> busy_time_accum_;
    std::vector<Assignment> assignments_;
    std::vector<uint8_t> eligible_;
    long long max_end_ = 0;
    long long episode_step_count_ = 0;
    long long invalid_action_count_ = 0;
    bool done_ = false;
    bool truncated_ = false;
    bool started_ = false;

    bool trace_on_ = false;
    std::vector<TraceRow> trace_;
};

}  // namespace jshop
