#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace stpbp {

/* One realization of the embedded chain. Index n runs from 0 (the seeded
 * state) to the last recorded epoch; forwards[n-1] holds the count added
 * at epoch n, so total[n] - total[n-1] == forwards[n-1] and
 * total[n] - current[n] == n throughout.
 */
struct embedded_trace {
    int64_t seed_count = 0;
    std::vector<int64_t> total;       // A_0..A_N
    std::vector<int64_t> current;     // C_0..C_N
    std::vector<int64_t> forwards;    // per-epoch additions, size N
    std::vector<double> wake_times;   // tau_0..tau_N
    bool truncated = false;           // epoch cap hit while still active

    int64_t epochs() const { return int64_t(total.size()) - 1; }
    bool extinct() const { return !truncated; }

    // exact bookkeeping identity; false only indicates a simulator bug
    bool conserved() const;
};

enum class path_class { extinct, viral };

// viral iff max_n C_n strictly exceeds the threshold
path_class classify_path(const embedded_trace& t, int64_t viral_threshold = 100);

// header "n,A,C,Gamma,tau"; the seed row leaves Gamma empty
void write_trace_csv(const embedded_trace& t, std::ostream& out);

embedded_trace read_trace_csv(std::istream& in);

} // namespace stpbp
