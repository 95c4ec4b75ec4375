#pragma once

#include <cstdint>
#include <vector>

#include "jshop/instance.hpp"

namespace jshop {

struct OsmConfig {
    double tau = 0.00667;  // execution rate
    bool enabled = true;
};

struct OsmState {
    long long training_phase = 0;  // incremented once per episode termination
    Instance base;                 // pristine instance, never mutated
};

// True when the rate is high enough to risk destabilizing training.
bool osm_tau_warns(const OsmConfig& cfg);

// floor(T_p * (n*m)/100 * tau), clamped to n*(m-1). 0 when disabled.
long long swap_count(const OsmState& state, const OsmConfig& cfg, const Instance& inst);

struct SwapRecord {
    int job = 0;
    int pos_a = 0;
    int pos_b = 0;
};

// Applies k independent swaps to a copy of the pristine base: each picks a
// uniform job and two distinct positions in its routing and exchanges the two
// (machine, duration) pairs. Deterministic for a fixed seed. Single-machine
// instances are returned unchanged.
Instance perturb(const Instance& base, long long k_swaps, uint64_t seed,
                 std::vector<SwapRecord>* diff = nullptr);

void on_episode_end(OsmState& state);

}  // namespace jshop
