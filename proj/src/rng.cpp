#include "jshop/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace jshop {

uint32_t RngStream::bounded(uint32_t n) {
    if (n == 0) throw std::invalid_argument("bounded: n must be > 0");
    // Lemire's multiply-shift method with rejection for exact uniformity.
    uint32_t x = static_cast<uint32_t>(gen_() >> 32);
    uint64_t m = static_cast<uint64_t>(x) * n;
    uint32_t l = static_cast<uint32_t>(m);
    if (l < n) {
        uint32_t t = -n % n;
        while (l < t) {
            x = static_cast<uint32_t>(gen_() >> 32);
            m = static_cast<uint64_t>(x) * n;
            l = static_cast<uint32_t>(m);
        }
    }
    return static_cast<uint32_t>(m >> 32);
}

double RngStream::unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
    // u1 in (0, 1] keeps the log finite.
    double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::string RngStream::save_state() const {
    std::ostringstream out;
    out << gen_;
    return out.str();
}

void RngStream::load_state(const std::string& text) {
    std::istringstream in(text);
    in >> gen_;
    if (!in) throw std::invalid_argument("bad RNG state string");
}

static uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
    return splitmix64(splitmix64(a) ^ b);
}

}  // namespace jshop
