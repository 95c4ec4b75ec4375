#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "jshop/instance.hpp"
#include "jshop/osm.hpp"

using namespace jshop;

namespace {
const std::string kWorked = "2 3\n2 10 0 27 1 14\n1 20 2 12 0 12\n";

// Per-job multiset of (machine, duration) pairs, for invariance checks.
std::vector<std::vector<Op>> sorted_ops(const Instance& inst) {
    auto ops = inst.ops;
    for (auto& job : ops)
        std::sort(job.begin(), job.end(), [](const Op& a, const Op& b) {
            return a.machine < b.machine;
        });
    return ops;
}
}  // namespace

TEST_CASE("swap count follows the phase formula") {
    Instance big = generate_random(15, 15, 1, 99, 1);
    OsmConfig cfg;
    cfg.tau = 0.00667;
    CHECK(swap_count(OsmState{100, big}, cfg, big) == 1);
    CHECK(swap_count(OsmState{0, big}, cfg, big) == 0);
    cfg.tau = 0.01;
    CHECK(swap_count(OsmState{1000, big}, cfg, big) == 22);
}

TEST_CASE("swap count is clamped to n times m minus one") {
    Instance small = parse_standard(kWorked, "worked");
    OsmConfig cfg;
    cfg.tau = 1.0;
    CHECK(swap_count(OsmState{100000, small}, cfg, small) == 2 * (3 - 1));
}

TEST_CASE("swap count is zero when disabled") {
    Instance big = generate_random(15, 15, 1, 99, 1);
    OsmConfig cfg;
    cfg.tau = 0.01;
    cfg.enabled = false;
    CHECK(swap_count(OsmState{1000, big}, cfg, big) == 0);
}

TEST_CASE("swap count never decreases with the phase") {
    Instance inst = generate_random(6, 6, 1, 9, 2);
    OsmConfig cfg;
    cfg.tau = 0.00667;
    long long prev = 0;
    for (long long tp = 0; tp <= 20000; tp += 97) {
        long long k = swap_count(OsmState{tp, inst}, cfg, inst);
        CHECK(k >= prev);
        prev = k;
    }
}

TEST_CASE("zero swaps return the base unchanged") {
    Instance base = parse_standard(kWorked, "worked");
    std::vector<SwapRecord> diff;
    Instance out = perturb(base, 0, 123, &diff);
    CHECK(out.same_data(base));
    CHECK(diff.empty());
}

TEST_CASE("perturbation is deterministic per seed") {
    Instance base = generate_random(4, 4, 1, 9, 3);
    Instance a = perturb(base, 3, 55);
    Instance b = perturb(base, 3, 55);
    CHECK(a.same_data(b));
    Instance c = perturb(base, 3, 56);
    // A different seed may coincide on tiny shapes, but not on this one.
    CHECK_FALSE(c.same_data(a));
}

TEST_CASE("perturbation always starts from the pristine base") {
    Instance base = generate_random(4, 4, 1, 9, 3);
    Instance once = perturb(base, 2, 9);
    Instance again = perturb(base, 2, 9);
    CHECK(once.same_data(again));  // not compounded across calls
}

TEST_CASE("a transposition preserves each job's operation multiset") {
    Instance base = parse_standard(kWorked, "worked");
    std::vector<SwapRecord> diff;
    Instance out = perturb(base, 1, 7, &diff);
    REQUIRE(diff.size() == 1);
    CHECK_NOTHROW(validate(out));
    CHECK(sorted_ops(out) == sorted_ops(base));
    const SwapRecord& s = diff[0];
    CHECK(s.pos_a != s.pos_b);
    CHECK(out.ops[static_cast<size_t>(s.job)][static_cast<size_t>(s.pos_a)] ==
          base.ops[static_cast<size_t>(s.job)][static_cast<size_t>(s.pos_b)]);
    CHECK(out.ops[static_cast<size_t>(s.job)][static_cast<size_t>(s.pos_b)] ==
          base.ops[static_cast<size_t>(s.job)][static_cast<size_t>(s.pos_a)]);
}

TEST_CASE("perturbed instances stay valid across many seeds") {
    Instance base = generate_random(5, 4, 1, 30, 17);
    for (uint64_t s = 0; s < 1000; ++s) {
        Instance out = perturb(base, 1 + static_cast<long long>(s % 7), s);
        CHECK_NOTHROW(validate(out));
        CHECK(sorted_ops(out) == sorted_ops(base));
    }
}

TEST_CASE("single-machine instances are returned unchanged") {
    Instance base = generate_random(3, 1, 1, 9, 4);
    std::vector<SwapRecord> diff;
    Instance out = perturb(base, 5, 11, &diff);
    CHECK(out.same_data(base));
    CHECK(diff.empty());
}

TEST_CASE("swapped positions land everywhere, not only adjacently") {
    Instance base = generate_random(1, 8, 1, 9, 21);
    bool non_adjacent = false;
    for (uint64_t s = 0; s < 50 && !non_adjacent; ++s) {
        std::vector<SwapRecord> diff;
        perturb(base, 1, s, &diff);
        REQUIRE(diff.size() == 1);
        if (std::abs(diff[0].pos_a - diff[0].pos_b) > 1) non_adjacent = true;
    }
    CHECK(non_adjacent);
}

TEST_CASE("episode termination advances the phase") {
    OsmState st{0, parse_standard(kWorked, "worked")};
    on_episode_end(st);
    CHECK(st.training_phase == 1);
    for (int i = 0; i < 499; ++i) on_episode_end(st);
    CHECK(st.training_phase == 500);
}

TEST_CASE("high execution rates trigger the warning predicate") {
    OsmConfig cfg;
    cfg.tau = 0.00667;
    CHECK_FALSE(osm_tau_warns(cfg));
    cfg.tau = 0.015;
    CHECK_FALSE(osm_tau_warns(cfg));
    cfg.tau = 0.0151;
    CHECK(osm_tau_warns(cfg));
}
