#include "stpbp/rng.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace stpbp {

static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

rng::rng(uint64_t seed) {
    uint64_t s = seed;
    for (auto& w : state_)
        w = splitmix64(s);
}

uint64_t rng::derive_seed(uint64_t base_seed, uint64_t run_index) {
    // one splitmix64 step over a mixed word; avoids correlated lanes when
    // run indices are consecutive
    uint64_t x = base_seed ^ (0x632be59bd9b4e019ULL * (run_index + 1));
    return splitmix64(x);
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t rng::next_u64() {
    // xoshiro256**
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double rng::next_double() {
    return (next_u64() >> 11) * 0x1.0p-53;
}

uint64_t rng::next_below(uint64_t bound) {
    if (bound == 0)
        throw std::invalid_argument("rng::next_below: bound must be positive");
    // bitmask rejection keeps the draw unbiased and platform independent
    if (bound == 1)
        return 0;
    const uint64_t mask = ~uint64_t(0) >> std::countl_zero(bound - 1);
    for (;;) {
        uint64_t v = next_u64() & mask;
        if (v < bound)
            return v;
    }
}

bool rng::bernoulli(double p) {
    return next_double() < p;
}

double rng::exponential(double rate) {
    if (!(rate > 0))
        throw std::invalid_argument("rng::exponential: rate must be positive");
    // -log(1-U) with U in [0,1); argument stays in (0,1]
    return -std::log1p(-next_double()) / rate;
}

int64_t rng::poisson(double mean) {
    if (mean < 0)
        throw std::invalid_argument("rng::poisson: mean must be nonnegative");
    if (mean == 0)
        return 0;
    // additivity: split large means into chunks where exp(-chunk) is far
    // from underflow, then sum the partial counts
    int64_t total = 0;
    double remaining = mean;
    const double chunk = 30.0;
    while (remaining > 0) {
        double m = remaining > chunk ? chunk : remaining;
        remaining -= m;
        const double limit = std::exp(-m);
        double prod = next_double();
        int64_t k = 0;
        while (prod > limit) {
            prod *= next_double();
            ++k;
        }
        total += k;
    }
    return total;
}

int64_t rng::binomial(int64_t trials, double p) {
    if (trials < 0)
        throw std::invalid_argument("rng::binomial: trials must be nonnegative");
    if (p <= 0)
        return 0;
    if (p >= 1)
        return trials;
    int64_t count = 0;
    for (int64_t i = 0; i < trials; ++i)
        count += next_double() < p;
    return count;
}

} // namespace stpbp
