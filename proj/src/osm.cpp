#include "jshop/osm.hpp"

#include <algorithm>
#include <cmath>

#include "jshop/rng.hpp"

namespace jshop {

bool osm_tau_warns(const OsmConfig& cfg) {
    return cfg.tau > 0.015;
}

long long swap_count(const OsmState& state, const OsmConfig& cfg, const Instance& inst) {
    if (!cfg.enabled || cfg.tau <= 0.0) return 0;
    double raw = static_cast<double>(state.training_phase) *
                 (static_cast<double>(inst.n_jobs) * inst.n_machines / 100.0) * cfg.tau;
    long long k = static_cast<long long>(std::floor(raw));
    long long cap = static_cast<long long>(inst.n_jobs) * (inst.n_machines - 1);
    return std::clamp(k, 0LL, cap);
}

Instance perturb(const Instance& base, long long k_swaps, uint64_t seed,
                 std::vector<SwapRecord>* diff) {
    if (diff) diff->clear();
    Instance out = base;
    if (base.n_machines < 2 || k_swaps <= 0) return out;
    RngStream rng(seed);
    const uint32_t n = static_cast<uint32_t>(base.n_jobs);
    const uint32_t m = static_cast<uint32_t>(base.n_machines);
    for (long long s = 0; s < k_swaps; ++s) {
        int job = static_cast<int>(rng.bounded(n));
        int pos_a = static_cast<int>(rng.bounded(m));
        int pos_b = static_cast<int>(rng.bounded(m - 1));
        if (pos_b >= pos_a) ++pos_b;  // distinct positions
        std::swap(out.ops[static_cast<size_t>(job)][static_cast<size_t>(pos_a)],
                  out.ops[static_cast<size_t>(job)][static_cast<size_t>(pos_b)]);
        if (diff) diff->push_back({job, pos_a, pos_b});
    }
    validate(out);
    return out;
}

void on_episode_end(OsmState& state) {
    state.training_phase += 1;
}

}  // namespace jshop
