#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace jshop {

// Deterministic random stream. The samplers below are hand-rolled on top of
// mt19937_64 so that a given seed yields the same values on every platform
// and standard library.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n), unbiased. n must be > 0.
    uint32_t bounded(uint32_t n);

    // Uniform double in [0, 1) with 53 random bits.
    double unit();

    // Standard normal deviate (Box-Muller, no cached spare).
    double gaussian();

    std::string save_state() const;
    void load_state(const std::string& text);

    bool operator==(const RngStream& other) const { return gen_ == other.gen_; }

private:
    std::mt19937_64 gen_;
};

// Mixes seed material into a new seed (splitmix64 finalizer applied twice).
uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace jshop
