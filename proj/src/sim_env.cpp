#include "jshop/sim_env.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <stdexcept>

#include "jshop/dispatch.hpp"
#include "jshop/serial.hpp"

namespace jshop {

double final_reward(long long makespan, const EnvConfig& resolved_cfg) {
    return static_cast<double>(resolved_cfg.rollout_budget + resolved_cfg.final_reward_offset -
                               makespan) *
           resolved_cfg.final_reward_scale;
}

Env::Env(Instance inst, EnvConfig cfg) : inst_(std::move(inst)), cfg_(cfg) {
    validate(inst_);
    max_duration_ = inst_.max_duration();
    resolved_ = cfg_;
    if (resolved_.rollout_budget <= 0)
        resolved_.rollout_budget = 2 * best_rule_makespan(inst_);
    budget_ = resolved_.rollout_budget;
    assert(budget_ >= lower_bound(inst_));
    if (resolved_.invalid_action_limit <= 0)
        resolved_.invalid_action_limit = 10LL * inst_.total_ops();
    invalid_limit_ = resolved_.invalid_action_limit;
    reset();
}

Observation Env::reset() {
    const size_t n = static_cast<size_t>(inst_.n_jobs);
    const size_t m = static_cast<size_t>(inst_.n_machines);
    clock_ = 0;
    machine_busy_until_.assign(m, 0);
    machine_current_job_.assign(m, -1);
    job_next_op_.assign(n, 0);
    job_ready_at_.assign(n, 0);
    busy_time_accum_.assign(m, 0);
    assignments_.clear();
    max_end_ = 0;
    episode_step_count_ = 0;
    invalid_action_count_ = 0;
    done_ = false;
    truncated_ = false;
    started_ = true;
    trace_.clear();
    recompute_eligibility();
    return build_observation();
}

namespace {
bool any_set(const std::vector<uint8_t>& mask) {
    return std::any_of(mask.begin(), mask.end(), [](uint8_t b) { return b != 0; });
}
}  // namespace

void Env::recompute_eligibility() {
    const int n = inst_.n_jobs, m = inst_.n_machines;
    eligible_.assign(static_cast<size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
        int k = job_next_op_[static_cast<size_t>(j)];
        if (k >= m) continue;
        if (job_ready_at_[static_cast<size_t>(j)] > clock_) continue;
        int machine = inst_.ops[static_cast<size_t>(j)][static_cast<size_t>(k)].machine;
        if (machine_busy_until_[static_cast<size_t>(machine)] > clock_) continue;
        eligible_[static_cast<size_t>(j)] = 1;
    }
}

long long Env::next_decision_time() const {
    const int n = inst_.n_jobs, m = inst_.n_machines;
    auto eligible_at = [&](long long t) {
        for (int j = 0; j < n; ++j) {
            int k = job_next_op_[static_cast<size_t>(j)];
            if (k >= m) continue;
            if (job_ready_at_[static_cast<size_t>(j)] > t) continue;
            int machine = inst_.ops[static_cast<size_t>(j)][static_cast<size_t>(k)].machine;
            if (machine_busy_until_[static_cast<size_t>(machine)] > t) continue;
            return true;
        }
        return false;
    };
    long long t = clock_;
    while (true) {
        long long next = LLONG_MAX;
        for (long long bu : machine_busy_until_)
            if (bu > t && bu < next) next = bu;
        if (next == LLONG_MAX)
            throw std::logic_error("deadlock: operations remain but nothing is running");
        if (eligible_at(next)) return next;
        t = next;
    }
}

void Env::advance_clock() {
    while (true) {
        long long next = LLONG_MAX;
        for (long long bu : machine_busy_until_)
            if (bu > clock_ && bu < next) next = bu;
        if (next == LLONG_MAX)
            throw std::logic_error("deadlock: operations remain but nothing is running");
        for (size_t i = 0; i < machine_busy_until_.size(); ++i) {
            long long busy_end = std::min(machine_busy_until_[i], next);
            if (busy_end > clock_) busy_time_accum_[i] += busy_end - clock_;
        }
        clock_ = next;
        recompute_eligibility();
        if (clock_ > budget_) {
            truncated_ = true;
            return;
        }
        if (resolved_.occupancy_threshold >= 0.0 && clock_ * 10 >= budget_ &&
            occupancy() < resolved_.occupancy_threshold) {
            truncated_ = true;
            return;
        }
        if (any_set(eligible_)) return;
    }
}

StepResult Env::step(int job) {
    if (!started_) throw std::logic_error("step before reset");
    if (done_ || truncated_) throw std::logic_error("step on a finished episode");
    const long long pre_clock = clock_;
    std::vector<uint8_t> pre_mask;
    if (trace_on_) pre_mask = eligible_;
    ++episode_step_count_;

    double reward = 0.0;
    bool invalid = job < 0 || job >= inst_.n_jobs || !eligible_[static_cast<size_t>(job)];
    if (invalid) {
        ++invalid_action_count_;
        if (invalid_action_count_ > invalid_limit_) truncated_ = true;
    } else {
        int k = job_next_op_[static_cast<size_t>(job)];
        const Op& op = inst_.ops[static_cast<size_t>(job)][static_cast<size_t>(k)];
        Assignment a{job, k, op.machine, clock_, clock_ + op.duration};
        assignments_.push_back(a);
        machine_busy_until_[static_cast<size_t>(op.machine)] = a.end;
        machine_current_job_[static_cast<size_t>(op.machine)] = job;
        job_next_op_[static_cast<size_t>(job)] = k + 1;
        job_ready_at_[static_cast<size_t>(job)] = a.end;
        max_end_ = std::max(max_end_, a.end);
        reward = 1.0;
        if (static_cast<int>(assignments_.size()) == inst_.total_ops()) {
            done_ = true;
            reward += final_reward(max_end_, resolved_);
        } else {
            recompute_eligibility();
            if (!any_set(eligible_)) advance_clock();
        }
    }

    if (trace_on_) trace_.push_back({pre_clock, std::move(pre_mask), job, reward});

    StepResult res;
    res.obs = build_observation();
    res.reward = reward;
    res.done = done_;
    res.truncated = truncated_;
    res.info = current_info(invalid);
    return res;
}

Observation Env::build_observation() const {
    const int n = inst_.n_jobs, m = inst_.n_machines;
    Observation obs;
    obs.vec.reserve(static_cast<size_t>(Observation::dim(n, m)));
    for (int i = 0; i < m; ++i)
        obs.vec.push_back(machine_busy_until_[static_cast<size_t>(i)] > clock_ ? 1.0 : 0.0);
    for (int i = 0; i < m; ++i) {
        long long remaining = machine_busy_until_[static_cast<size_t>(i)] - clock_;
        obs.vec.push_back(remaining > 0 ? static_cast<double>(remaining) / max_duration_ : 0.0);
    }
    for (int j = 0; j < n; ++j)
        obs.vec.push_back(static_cast<double>(m - job_next_op_[static_cast<size_t>(j)]) / m);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k)
            obs.vec.push_back(k < job_next_op_[static_cast<size_t>(j)] ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j)
        obs.vec.push_back(eligible_[static_cast<size_t>(j)] ? 1.0 : 0.0);
    for (int i = 0; i < m; ++i) {
        bool busy = machine_busy_until_[static_cast<size_t>(i)] > clock_;
        obs.vec.push_back(
            busy ? static_cast<double>(machine_current_job_[static_cast<size_t>(i)] + 1) / n
                 : 0.0);
    }
    obs.mask = eligible_;
    return obs;
}

StepInfo Env::current_info(bool invalid) const {
    StepInfo info;
    info.clock = clock_;
    info.makespan_so_far = max_end_;
    info.occupancy = occupancy();
    info.invalid = invalid;
    return info;
}

double Env::occupancy() const {
    if (clock_ == 0) return 1.0;
    long long busy = 0;
    for (long long b : busy_time_accum_) busy += b;
    return static_cast<double>(busy) /
           (static_cast<double>(inst_.n_machines) * static_cast<double>(clock_));
}

long long Env::makespan() const {
    if (static_cast<int>(assignments_.size()) != inst_.total_ops())
        throw std::logic_error("makespan requested before all operations were assigned");
    return max_end_;
}

long long Env::remaining_work(int job) const {
    const auto& ops = inst_.ops[static_cast<size_t>(job)];
    long long sum = 0;
    for (size_t k = static_cast<size_t>(job_next_op_[static_cast<size_t>(job)]); k < ops.size();
         ++k)
        sum += ops[k].duration;
    return sum;
}

Schedule Env::schedule() const {
    if (static_cast<int>(assignments_.size()) != inst_.total_ops())
        throw std::logic_error("schedule requested before all operations were assigned");
    return make_schedule(inst_, assignments_);
}

void Env::save_state(std::ostream& out) const {
    using namespace detail;
    put_i64(out, started_ ? 1 : 0);
    put_i64(out, clock_);
    put_vec_i(out, machine_busy_until_);
    put_vec_i(out, machine_current_job_);
    put_vec_i(out, job_next_op_);
    put_vec_i(out, job_ready_at_);
    put_vec_i(out, busy_time_accum_);
    put_u64(out, assignments_.size());
    for (const auto& a : assignments_) {
        put_i64(out, a.job);
        put_i64(out, a.op);
        put_i64(out, a.machine);
        put_i64(out, a.start);
        put_i64(out, a.end);
    }
    put_i64(out, max_end_);
    put_i64(out, episode_step_count_);
    put_i64(out, invalid_action_count_);
    put_i64(out, done_ ? 1 : 0);
    put_i64(out, truncated_ ? 1 : 0);
}

void Env::load_state(std::istream& in) {
    using namespace detail;
    started_ = get_i64(in) != 0;
    clock_ = get_i64(in);
    get_vec_i(in, machine_busy_until_);
    get_vec_i(in, machine_current_job_);
    get_vec_i(in, job_next_op_);
    get_vec_i(in, job_ready_at_);
    get_vec_i(in, busy_time_accum_);
    assignments_.resize(static_cast<size_t>(get_u64(in)));
    for (auto& a : assignments_) {
        a.job = static_cast<int>(get_i64(in));
        a.op = static_cast<int>(get_i64(in));
        a.machine = static_cast<int>(get_i64(in));
        a.start = get_i64(in);
        a.end = get_i64(in);
    }
    max_end_ = get_i64(in);
    episode_step_count_ = get_i64(in);
    invalid_action_count_ = get_i64(in);
    done_ = get_i64(in) != 0;
    truncated_ = get_i64(in) != 0;
    trace_.clear();
    recompute_eligibility();
}

}  // namespace jshop
