#include "jshop/dispatch.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>

namespace jshop {

RuleKind rule_from_name(const std::string& name) {
    if (name == "spt") return RuleKind::spt;
    if (name == "lpt") return RuleKind::lpt;
    if (name == "fifo") return RuleKind::fifo;
    if (name == "mwkr") return RuleKind::mwkr;
    if (name == "random") return RuleKind::random_pick;
    throw std::invalid_argument("unknown rule: " + name);
}

std::string rule_name(RuleKind kind) {
    switch (kind) {
        case RuleKind::spt: return "spt";
        case RuleKind::lpt: return "lpt";
        case RuleKind::fifo: return "fifo";
        case RuleKind::mwkr: return "mwkr";
        case RuleKind::random_pick: return "random";
    }
    return "?";
}

int rule_pick(const Env& env, const Rule& rule, RngStream* rng) {
    const auto mask = env.eligible_jobs();
    std::vector<int> cand;
    for (int j = 0; j < env.n_jobs(); ++j)
        if (mask[static_cast<size_t>(j)]) cand.push_back(j);
    if (cand.empty()) throw std::logic_error("rule_pick with no eligible job");

    if (rule.kind == RuleKind::random_pick) {
        if (!rng) throw std::invalid_argument("RANDOM rule needs a random stream");
        return cand[rng->bounded(static_cast<uint32_t>(cand.size()))];
    }

    // Priority as a higher-is-better key.
    auto key = [&](int j) -> long long {
        const Op& op =
            env.instance().ops[static_cast<size_t>(j)][static_cast<size_t>(env.job_next_op(j))];
        switch (rule.kind) {
            case RuleKind::spt: return -static_cast<long long>(op.duration);
            case RuleKind::lpt: return op.duration;
            case RuleKind::fifo: return -env.job_ready_at(j);
            case RuleKind::mwkr: return env.remaining_work(j);
            case RuleKind::random_pick: break;
        }
        return 0;
    };

    long long best = LLONG_MIN;
    std::vector<int> ties;
    for (int j : cand) {
        long long k = key(j);
        if (k > best) {
            best = k;
            ties.clear();
        }
        if (k == best) ties.push_back(j);
    }
    if (rule.tie_break == TieBreak::random_choice) {
        if (!rng) throw std::invalid_argument("random tie-break needs a random stream");
        return ties[rng->bounded(static_cast<uint32_t>(ties.size()))];
    }
    return ties.front();  // candidates are in ascending job id order
}

Schedule dispatch(const Instance& inst, const Rule& rule) {
    EnvConfig cfg;
    cfg.rollout_budget = inst.total_duration();  // non-delay episodes never exceed this
    Env env(inst, cfg);
    RngStream rng(rule.seed);
    RngStream* rp =
        (rule.kind == RuleKind::random_pick || rule.tie_break == TieBreak::random_choice)
            ? &rng
            : nullptr;
    while (!env.done()) {
        env.step(rule_pick(env, rule, rp));
        if (env.truncated()) throw std::logic_error("dispatch episode truncated unexpectedly");
    }
    return env.schedule();
}

long long best_rule_makespan(const Instance& inst) {
    long long best = LLONG_MAX;
    for (RuleKind kind : {RuleKind::spt, RuleKind::lpt, RuleKind::fifo, RuleKind::mwkr})
        best = std::min(best, dispatch(inst, {kind, TieBreak::lowest_job_id, 0}).makespan);
    return best;
}

namespace {

// Search state shared by both exhaustive oracles.
struct SearchState {
    long long clock = 0;
    std::vector<long long> machine_free;
    std::vector<long long> machine_rem;
    std::vector<int> next_op;
    std::vector<long long> job_ready;
    std::vector<long long> job_rem;
    int assigned = 0;
};

SearchState initial_state(const Instance& inst) {
    SearchState st;
    st.machine_free.assign(static_cast<size_t>(inst.n_machines), 0);
    st.machine_rem.assign(static_cast<size_t>(inst.n_machines), 0);
    st.next_op.assign(static_cast<size_t>(inst.n_jobs), 0);
    st.job_ready.assign(static_cast<size_t>(inst.n_jobs), 0);
    st.job_rem.assign(static_cast<size_t>(inst.n_jobs), 0);
    for (int j = 0; j < inst.n_jobs; ++j)
        for (const Op& op : inst.ops[static_cast<size_t>(j)]) {
            st.machine_rem[static_cast<size_t>(op.machine)] += op.duration;
            st.job_rem[static_cast<size_t>(j)] += op.duration;
        }
    return st;
}

long long completion_floor(const SearchState& st, long long floor_clock) {
    long long lb = 0;
    for (size_t j = 0; j < st.job_ready.size(); ++j)
        if (st.job_rem[j] > 0)
            lb = std::max(lb, std::max(st.job_ready[j], floor_clock) + st.job_rem[j]);
    for (size_t i = 0; i < st.machine_free.size(); ++i)
        if (st.machine_rem[i] > 0)
            lb = std::max(lb, std::max(st.machine_free[i], floor_clock) + st.machine_rem[i]);
    return lb;
}

struct OracleSearch {
    const Instance& inst;
    long long best_makespan = LLONG_MAX;
    std::vector<Assignment> best;
    std::vector<Assignment> stack;
    long long current_max_end = 0;

    explicit OracleSearch(const Instance& i) : inst(i) {}

    void record_leaf() {
        if (current_max_end < best_makespan) {
            best_makespan = current_max_end;
            best = stack;
        }
    }

    void apply(SearchState& st, int job, long long start) {
        int k = st.next_op[static_cast<size_t>(job)];
        const Op& op = inst.ops[static_cast<size_t>(job)][static_cast<size_t>(k)];
        stack.push_back({job, k, op.machine, start, start + op.duration});
        st.machine_free[static_cast<size_t>(op.machine)] = start + op.duration;
        st.machine_rem[static_cast<size_t>(op.machine)] -= op.duration;
        st.next_op[static_cast<size_t>(job)] = k + 1;
        st.job_ready[static_cast<size_t>(job)] = start + op.duration;
        st.job_rem[static_cast<size_t>(job)] -= op.duration;
        ++st.assigned;
    }

    // Non-delay enumeration: decision points and eligibility mirror the
    // environment semantics.
    void dfs_non_delay(SearchState st, long long max_end) {
        if (st.assigned == inst.total_ops()) {
            current_max_end = max_end;
            record_leaf();
            return;
        }
        auto eligible_at = [&](long long t, std::vector<int>& out) {
            out.clear();
            for (int j = 0; j < inst.n_jobs; ++j) {
                int k = st.next_op[static_cast<size_t>(j)];
                if (k >= inst.n_machines) continue;
                if (st.job_ready[static_cast<size_t>(j)] > t) continue;
                const Op& op = inst.ops[static_cast<size_t>(j)][static_cast<size_t>(k)];
                if (st.machine_free[static_cast<size_t>(op.machine)] > t) continue;
                out.push_back(j);
            }
        };
        std::vector<int> elig;
        eligible_at(st.clock, elig);
        while (elig.empty()) {
            long long next = LLONG_MAX;
            for (long long f : st.machine_free)
                if (f > st.clock && f < next) next = f;
            if (next == LLONG_MAX)
                throw std::logic_error("oracle deadlock: nothing running");
            st.clock = next;
            eligible_at(st.clock, elig);
        }
        if (completion_floor(st, st.clock) >= best_makespan) return;
        // Shortest first gives a decent incumbent on the first descent.
        std::sort(elig.begin(), elig.end(), [&](int a, int b) {
            int da = inst.ops[static_cast<size_t>(a)][static_cast<size_t>(st.next_op[static_cast<size_t>(a)])].duration;
            int db = inst.ops[static_cast<size_t>(b)][static_cast<size_t>(st.next_op[static_cast<size_t>(b)])].duration;
            if (da != db) return da < db;
            return a < b;
        });
        for (int j : elig) {
            SearchState child = st;
            size_t mark = stack.size();
            apply(child, j, st.clock);
            dfs_non_delay(std::move(child),
                          std::max(max_end, stack.back().end));
            stack.resize(mark);
        }
    }

    // Active-schedule enumeration: branch over the conflict set on the
    // machine achieving the earliest possible completion.
    void dfs_active(SearchState st, long long max_end) {
        if (st.assigned == inst.total_ops()) {
            current_max_end = max_end;
            record_leaf();
            return;
        }
        if (completion_floor(st, 0) >= best_makespan) return;
        long long min_completion = LLONG_MAX;
        int pivot_machine = -1;
        for (int j = 0; j < inst.n_jobs; ++j) {
            int k = st.next_op[static_cast<size_t>(j)];
            if (k >= inst.n_machines) continue;
            const Op& op = inst.ops[static_cast<size_t>(j)][static_cast<size_t>(k)];
            long long s = std::max(st.job_ready[static_cast<size_t>(j)],
                                   st.machine_free[static_cast<size_t>(op.machine)]);
            if (s + op.duration < min_completion) {
                min_completion = s + op.duration;
                pivot_machine = op.machine;
            }
        }
        for (int j = 0; j < inst.n_jobs; ++j) {
            int k = st.next_op[static_cast<size_t>(j)];
            if (k >= inst.n_machines) continue;
            const Op& op = inst.ops[static_cast<size_t>(j)][static_cast<size_t>(k)];
            if (op.machine != pivot_machine) continue;
            long long s = std::max(st.job_ready[static_cast<size_t>(j)],
                                   st.machine_free[static_cast<size_t>(op.machine)]);
            if (s >= min_completion) continue;  // outside the conflict set
            SearchState child = st;
            size_t mark = stack.size();
            apply(child, j, s);
            dfs_active(std::move(child), std::max(max_end, stack.back().end));
            stack.resize(mark);
        }
    }
};

}  // namespace

OracleResult brute_force_optimum(const Instance& inst, int limit) {
    if (inst.total_ops() > limit)
        throw std::invalid_argument("instance too large for exhaustive search");
    OracleSearch search(inst);
    search.dfs_non_delay(initial_state(inst), 0);
    OracleResult res;
    res.makespan = search.best_makespan;
    res.schedule = make_schedule(inst, search.best);
    return res;
}

OracleResult active_optimum(const Instance& inst, int limit) {
    if (inst.total_ops() > limit)
        throw std::invalid_argument("instance too large for exhaustive search");
    OracleSearch search(inst);
    search.dfs_active(initial_state(inst), 0);
    OracleResult res;
    res.makespan = search.best_makespan;
    res.schedule = make_schedule(inst, search.best);
    return res;
}

}  // namespace jshop
