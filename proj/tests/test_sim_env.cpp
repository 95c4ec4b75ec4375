#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "jshop/dispatch.hpp"
#include "jshop/instance.hpp"
#include "jshop/schedule.hpp"
#include "jshop/sim_env.hpp"

using namespace jshop;

namespace {
const std::string kWorked = "2 3\n2 10 0 27 1 14\n1 20 2 12 0 12\n";

Instance worked() { return parse_standard(kWorked, "worked"); }

// Runs a full episode picking the lowest eligible job id at every query.
StepResult run_greedy(Env& env, std::vector<long long>* decision_clocks = nullptr,
                      double* dense_total = nullptr) {
    env.reset();
    StepResult sr;
    while (true) {
        auto mask = env.eligible_jobs();
        int pick = -1;
        for (size_t j = 0; j < mask.size(); ++j)
            if (mask[j]) {
                pick = static_cast<int>(j);
                break;
            }
        REQUIRE(pick >= 0);
        if (decision_clocks) decision_clocks->push_back(env.clock());
        sr = env.step(pick);
        if (dense_total && !sr.done) *dense_total += sr.reward;
        if (sr.done || sr.truncated) return sr;
    }
}
}  // namespace

TEST_CASE("reset exposes both first operations of the fixture") {
    Env env(worked(), EnvConfig{});
    Observation o = env.reset();
    CHECK(env.clock() == 0);
    REQUIRE(o.mask.size() == 2);
    CHECK(o.mask[0] == 1);
    CHECK(o.mask[1] == 1);
}

TEST_CASE("reset on a single-op instance") {
    Env env(parse_standard("1 1\n0 5\n", "tiny"), EnvConfig{});
    Observation o = env.reset();
    REQUIRE(o.mask.size() == 1);
    CHECK(o.mask[0] == 1);
    // jobs_remaining component: one op left out of one.
    int m = 1, n = 1;
    CHECK(o.vec[static_cast<size_t>(2 * m)] == 1.0);
}

TEST_CASE("first-op machine collisions resolve by agent order") {
    Instance inst = parse_standard("2 2\n0 3 1 4\n0 5 1 6\n", "clash");
    Env env(inst, EnvConfig{});
    Observation o = env.reset();
    CHECK(o.mask[0] == 1);
    CHECK(o.mask[1] == 1);
    // Assigning job 0 blocks job 1 at the same clock (machine 0 taken), so
    // nothing is assignable at t=0 and the clock advances to the completion.
    StepResult sr = env.step(0);
    CHECK(env.clock() == 3);
    CHECK(sr.obs.mask[0] == 1);
    CHECK(sr.obs.mask[1] == 1);
    env.step(1);
    bool found = false;
    for (const Assignment& a : env.assignments())
        if (a.job == 1 && a.op == 0) {
            CHECK(a.start == 3);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("fixture episode follows the narrative trace") {
    Env env(worked(), EnvConfig{});
    std::vector<long long> clocks;
    double dense = 0.0;
    StepResult last = run_greedy(env, &clocks, &dense);

    CHECK(last.done);
    CHECK_FALSE(last.truncated);
    CHECK(clocks == std::vector<long long>{0, 0, 10, 20, 37, 37});
    CHECK(env.valid_steps() == 6);
    CHECK(dense + last.reward - final_reward(51, env.config()) == doctest::Approx(6.0));
    CHECK(env.makespan() == 51);

    Schedule s = env.schedule();
    CHECK_NOTHROW(check_schedule(s, env.instance()));
    std::vector<Assignment> expect = {
        {0, 1, 0, 10, 37}, {1, 2, 0, 37, 49}, {1, 0, 1, 0, 20},
        {0, 2, 1, 37, 51}, {0, 0, 2, 0, 10},  {1, 1, 2, 20, 32},
    };
    CHECK(s.assignments == expect);
}

TEST_CASE("eligibility narrows to job 0 at clock 10") {
    Env env(worked(), EnvConfig{});
    env.reset();
    env.step(0);
    env.step(1);  // clock jumps 0 -> 10
    CHECK(env.clock() == 10);
    auto mask = env.eligible_jobs();
    CHECK(mask[0] == 1);
    CHECK(mask[1] == 0);
}

TEST_CASE("clock jump skips the completion at 32") {
    Env env(worked(), EnvConfig{});
    env.reset();
    env.step(0);  // J0 op0 on M2 [0,10)
    env.step(1);  // J1 op0 on M1 [0,20); clock -> 10
    env.step(0);  // J0 op1 on M0 [10,37); clock -> 20
    CHECK(env.clock() == 20);
    StepResult sr = env.step(1);  // J1 op1 on M2 [20,32)
    // Nothing is eligible at 32 (M0 busy until 37), so the clock jumps to 37.
    CHECK(env.clock() == 37);
    CHECK(sr.info.clock == 37);
}

TEST_CASE("invalid actions leave the state unchanged and reward 0") {
    Env env(worked(), EnvConfig{});
    env.reset();
    env.step(0);
    env.step(1);
    CHECK(env.clock() == 10);
    auto before = env.eligible_jobs();
    StepResult sr = env.step(1);  // job 1 not eligible at clock 10
    CHECK(sr.reward == 0.0);
    CHECK(sr.info.invalid);
    CHECK(env.clock() == 10);
    CHECK(env.eligible_jobs() == before);
    CHECK(env.invalid_action_count() == 1);
    CHECK(env.valid_steps() == 2);
}

TEST_CASE("stepping a finished episode is a contract violation") {
    Env env(worked(), EnvConfig{});
    run_greedy(env);
    CHECK_THROWS_AS(env.step(0), std::logic_error);
}

TEST_CASE("out-of-range actions count as invalid") {
    Env env(worked(), EnvConfig{});
    env.reset();
    StepResult sr = env.step(-1);
    CHECK(sr.reward == 0.0);
    CHECK(sr.info.invalid);
    sr = env.step(2);
    CHECK(sr.reward == 0.0);
    CHECK(env.invalid_action_count() == 2);
    CHECK(env.clock() == 0);
}

TEST_CASE("final reward follows budget plus offset minus makespan") {
    EnvConfig c;
    c.rollout_budget = 51;
    c.final_reward_scale = 1.0;
    c.final_reward_offset = 100;
    CHECK(final_reward(51, c) == doctest::Approx(100.0));

    c.rollout_budget = 2000;
    CHECK(final_reward(1352, c) == doctest::Approx(748.0));

    c.final_reward_scale = 0.0;
    CHECK(final_reward(1352, c) == 0.0);

    c.final_reward_scale = 2.5;
    CHECK(final_reward(1352, c) == doctest::Approx(2.5 * 748.0));
}

TEST_CASE("default rollout budget is twice the best rule makespan") {
    Env env(worked(), EnvConfig{});
    CHECK(env.rollout_budget() == 2 * best_rule_makespan(worked()));
    CHECK(env.rollout_budget() == 102);
}

TEST_CASE("occupancy is 1 at clock 0 and tracks busy share") {
    Env env(worked(), EnvConfig{});
    env.reset();
    CHECK(env.occupancy() == 1.0);
    env.step(0);
    env.step(1);  // clock 10: M2 and M1 busy the whole window, M0 idle
    CHECK(env.clock() == 10);
    CHECK(env.occupancy() == doctest::Approx(20.0 / 30.0));
}

TEST_CASE("one busy machine of two gives occupancy one half") {
    Instance inst = parse_standard("1 2\n0 4 1 3\n", "half");
    Env env(inst, EnvConfig{});
    env.reset();
    env.step(0);  // [0,4) on machine 0; clock -> 4
    CHECK(env.clock() == 4);
    CHECK(env.occupancy() == doctest::Approx(0.5));
}

TEST_CASE("makespan is rejected before completion") {
    Env env(worked(), EnvConfig{});
    env.reset();
    CHECK_THROWS_AS(env.makespan(), std::logic_error);
}

TEST_CASE("dense reward of a clean episode totals n times m") {
    for (uint64_t s = 1; s <= 10; ++s) {
        Instance inst = generate_random(3, 3, 1, 9, s);
        Env env(inst, EnvConfig{});
        std::vector<long long> clocks;
        double dense = 0.0;
        StepResult last = run_greedy(env, &clocks, &dense);
        REQUIRE(last.done);
        CHECK(dense + last.reward - final_reward(env.makespan(), env.config()) ==
              doctest::Approx(9.0));
        CHECK(env.valid_steps() == 9);
        CHECK_NOTHROW(check_schedule(env.schedule(), inst));
        CHECK(env.makespan() >= lower_bound(inst));
    }
}

TEST_CASE("identical action sequences give bit-identical traces") {
    Instance inst = generate_random(3, 3, 1, 9, 4);
    Env a(inst, EnvConfig{});
    Env b(inst, EnvConfig{});
    a.enable_trace(true);
    b.enable_trace(true);
    std::vector<long long> ca, cb;
    run_greedy(a, &ca);
    run_greedy(b, &cb);
    CHECK(ca == cb);
    REQUIRE(a.trace().size() == b.trace().size());
    for (size_t i = 0; i < a.trace().size(); ++i) {
        CHECK(a.trace()[i].clock == b.trace()[i].clock);
        CHECK(a.trace()[i].action == b.trace()[i].action);
        CHECK(a.trace()[i].reward == b.trace()[i].reward);
        CHECK(a.trace()[i].mask == b.trace()[i].mask);
    }
    CHECK(a.schedule() == b.schedule());
}

TEST_CASE("budget truncation carries no final reward") {
    Instance inst = worked();
    EnvConfig c;
    c.rollout_budget = 15;  // below the 51 needed to finish
    Env env(inst, c);
    env.reset();
    double total = 0.0;
    StepResult sr;
    bool ended = false;
    for (int guard = 0; guard < 100 && !ended; ++guard) {
        auto mask = env.eligible_jobs();
        int pick = -1;
        for (size_t j = 0; j < mask.size(); ++j)
            if (mask[j]) {
                pick = static_cast<int>(j);
                break;
            }
        if (pick < 0) break;
        sr = env.step(pick);
        total += sr.reward;
        ended = sr.done || sr.truncated;
    }
    CHECK(ended);
    CHECK(sr.truncated);
    CHECK_FALSE(sr.done);
    // Only dense rewards were paid out.
    CHECK(total == doctest::Approx(static_cast<double>(env.valid_steps())));
}

TEST_CASE("invalid action limit truncates runaway episodes") {
    EnvConfig c;
    c.invalid_action_limit = 3;
    Env env(worked(), c);
    env.reset();
    env.step(0);
    env.step(1);  // clock 10, job 1 ineligible
    StepResult sr;
    for (int i = 0; i < 4; ++i) sr = env.step(1);
    CHECK(sr.truncated);
    CHECK(env.invalid_action_count() == 4);
}

TEST_CASE("default invalid action limit is ten times the op count") {
    Env env(worked(), EnvConfig{});
    CHECK(env.invalid_action_limit() == 10 * 6);
}

TEST_CASE("occupancy threshold ends sparse episodes after warm-up") {
    // Two jobs confined to disjoint machine pairs of a 4-machine shop keep
    // half the machines idle, so occupancy hovers near 0.5.
    Instance inst = parse_standard("2 4\n0 9 1 9 2 1 3 1\n1 9 0 9 3 1 2 1\n", "sparse");
    EnvConfig c;
    c.occupancy_threshold = 0.9;
    c.rollout_budget = 40;
    Env env(inst, c);
    env.reset();
    StepResult sr;
    bool ended = false;
    for (int guard = 0; guard < 50 && !ended; ++guard) {
        auto mask = env.eligible_jobs();
        int pick = -1;
        for (size_t j = 0; j < mask.size(); ++j)
            if (mask[j]) {
                pick = static_cast<int>(j);
                break;
            }
        REQUIRE(pick >= 0);
        sr = env.step(pick);
        ended = sr.done || sr.truncated;
    }
    CHECK(ended);
    CHECK(sr.truncated);
    CHECK(env.clock() * 10 >= env.rollout_budget());  // only after warm-up
}

TEST_CASE("observation components stay in the unit interval") {
    Instance inst = generate_random(4, 3, 1, 20, 9);
    Env env(inst, EnvConfig{});
    Observation o = env.reset();
    CHECK(static_cast<int>(o.vec.size()) == env.obs_dim());
    while (true) {
        for (double v : o.vec) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        auto mask = env.eligible_jobs();
        int pick = -1;
        for (size_t j = 0; j < mask.size(); ++j)
            if (mask[j]) {
                pick = static_cast<int>(j);
                break;
            }
        REQUIRE(pick >= 0);
        StepResult sr = env.step(pick);
        if (sr.done || sr.truncated) break;
        o = sr.obs;
    }
}

TEST_CASE("observation layout matches the six-component contract") {
    Env env(worked(), EnvConfig{});
    Observation o = env.reset();
    const int n = 2, m = 3;
    // machine_status: all idle at reset.
    for (int i = 0; i < m; ++i) CHECK(o.vec[static_cast<size_t>(i)] == 0.0);
    // operation_progress: nothing running.
    for (int i = 0; i < m; ++i) CHECK(o.vec[static_cast<size_t>(m + i)] == 0.0);
    // jobs_remaining: all m ops left.
    for (int j = 0; j < n; ++j) CHECK(o.vec[static_cast<size_t>(2 * m + j)] == 1.0);
    // operation_matrix: nothing completed or running.
    for (int k = 0; k < n * m; ++k)
        CHECK(o.vec[static_cast<size_t>(2 * m + n + k)] == 0.0);
    // job_available mirrors the mask.
    for (int j = 0; j < n; ++j)
        CHECK(o.vec[static_cast<size_t>(2 * m + n + n * m + j)] == 1.0);
    // machine_processing: all idle.
    for (int i = 0; i < m; ++i)
        CHECK(o.vec[static_cast<size_t>(2 * m + 2 * n + n * m + i)] == 0.0);

    StepResult sr = env.step(0);  // J0 op0 on machine 2, duration 10
    const Observation& o2 = sr.obs;
    CHECK(o2.vec[2] == 1.0);                       // machine 2 busy
    CHECK(o2.vec[static_cast<size_t>(m + 2)] ==    // full remaining time, max duration 27
          doctest::Approx(10.0 / 27.0));
    CHECK(o2.vec[static_cast<size_t>(2 * m + 0)] == doctest::Approx(2.0 / 3.0));
    CHECK(o2.vec[static_cast<size_t>(2 * m + n + 0)] == 1.0);  // J0 op0 running
    CHECK(o2.vec[static_cast<size_t>(2 * m + 2 * n + n * m + 2)] ==
          doctest::Approx((0 + 1.0) / 2.0));  // job 0 on machine 2
}

TEST_CASE("state snapshots resume mid-episode bit-exactly") {
    Instance inst = generate_random(3, 3, 1, 9, 12);
    Env env(inst, EnvConfig{});
    env.reset();
    env.step(0);
    auto m1 = env.eligible_jobs();
    int pick = -1;
    for (size_t j = 0; j < m1.size(); ++j)
        if (m1[j]) pick = static_cast<int>(j);
    env.step(pick);

    std::ostringstream snap;
    env.save_state(snap);

    Env fork(inst, EnvConfig{});
    std::istringstream in(snap.str());
    fork.load_state(in);

    CHECK(fork.clock() == env.clock());
    CHECK(fork.eligible_jobs() == env.eligible_jobs());
    CHECK(fork.observation().vec == env.observation().vec);

    std::vector<long long> ca, cb;
    auto drive = [](Env& e, std::vector<long long>& clocks) {
        while (true) {
            auto mask = e.eligible_jobs();
            int p = -1;
            for (size_t j = 0; j < mask.size(); ++j)
                if (mask[j]) {
                    p = static_cast<int>(j);
                    break;
                }
            REQUIRE(p >= 0);
            clocks.push_back(e.clock());
            StepResult sr = e.step(p);
            if (sr.done || sr.truncated) break;
        }
    };
    drive(env, ca);
    drive(fork, cb);
    CHECK(ca == cb);
    CHECK(env.schedule() == fork.schedule());
}

TEST_CASE("exhaustive sequences on tiny instances always reach done") {
    for (uint64_t s = 1; s <= 5; ++s) {
        Instance inst = generate_random(2, 2, 1, 9, s);
        long long completed = 0;
        auto dfs = [&](auto&& self, Env env) -> void {
            auto mask = env.eligible_jobs();
            bool any = false;
            for (size_t j = 0; j < mask.size(); ++j) {
                if (!mask[j]) continue;
                any = true;
                Env fork = env;
                StepResult sr = fork.step(static_cast<int>(j));
                REQUIRE_FALSE(sr.truncated);
                if (sr.done) {
                    ++completed;
                    CHECK_NOTHROW(check_schedule(fork.schedule(), inst));
                } else {
                    self(self, std::move(fork));
                }
            }
            REQUIRE(any);  // no dead ends
        };
        Env root(inst, EnvConfig{});
        root.reset();
        dfs(dfs, std::move(root));
        CHECK(completed > 0);
    }
}
