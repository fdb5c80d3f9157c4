#include "stpbp/harmonic.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace stpbp {

namespace {

// Cached prefix sums H_1..H_n, grown on demand; past the cap we switch to
// the asymptotic expansion, whose error is far below double precision there.
constexpr uint64_t table_cap = uint64_t(1) << 22;

std::mutex table_mutex;
std::vector<double> table;        // table[i] = H_{i+1}
compensated_sum running;

double harmonic_asymptotic(double n) {
    double inv = 1.0 / n;
    double inv2 = inv * inv;
    return std::log(n) + euler_mascheroni + 0.5 * inv - inv2 / 12.0
        + inv2 * inv2 / 120.0;
}

// callers must hold table_mutex
void grow_table(uint64_t n) {
    table.reserve(n);
    for (uint64_t k = table.size() + 1; k <= n; ++k) {
        running.add(1.0 / double(k));
        table.push_back(running.value());
    }
}

} // namespace

double harmonic_number(uint64_t n) {
    if (n == 0)
        return 0.0;
    if (n > table_cap)
        return harmonic_asymptotic(double(n));
    std::lock_guard<std::mutex> lock(table_mutex);
    if (n > table.size())
        grow_table(n);
    return table[n - 1];
}

uint64_t eta_exact(double t) {
    if (t < 1.0)
        return 0;
    // initial guess from the exponential inverse, then settle on the exact
    // bracket H_n <= t < H_{n+1}; the guess is off by at most a couple steps
    double g = std::exp(t - euler_mascheroni);
    if (g >= 9e18)
        throw std::range_error("eta_exact: t too large for a 64-bit epoch index");
    uint64_t n = g < 1.0 ? 1 : uint64_t(g);
    while (n > 1 && harmonic_number(n) > t)
        --n;
    while (harmonic_number(n + 1) <= t)
        ++n;
    return n;
}

} // namespace stpbp
