#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stpbp/graph.hpp"
#include "stpbp/trace.hpp"

namespace stpbp {

struct sim_config {
    double rho = 1.0;          // per-friend forwarding probability
    int64_t seed_count = 2;    // a0, distinct seed users
    double lambda = 1.0;       // wake-up rate, only shapes timestamps
    uint64_t rng_seed = 0;
    int64_t max_epochs = 0;    // 0 = derive from node count (graph mode)

    void validate() const;     // throws std::invalid_argument
};

// Single cascade on a graph: seed a0 distinct uniform users, then per epoch
// wake one uniform pending copy, offer the post to each of its neighbors
// independently with probability rho, and record the recipients that have
// never seen it. Wake gaps are exponential with rate lambda * C.
embedded_trace simulate_cascade(const graph& g, const sim_config& cfg);

// cascade with the batch seed derivation applied for run `run_index`
embedded_trace simulate_cascade_run(const graph& g, const sim_config& cfg,
                                    uint64_t run_index);

// Independent runs with per-run derived seeds; results are identical for
// identical (base seed, run index) no matter the job count.
std::vector<embedded_trace> simulate_batch(const graph& g, const sim_config& cfg,
                                           int64_t runs, unsigned jobs = 1);

// Streaming form: consume(run_index, trace) is invoked once per run, in
// run order, without holding the whole batch in memory.
void simulate_batch_apply(const graph& g, const sim_config& cfg, int64_t runs,
                          unsigned jobs,
                          const std::function<void(int64_t, embedded_trace&&)>& consume);

} // namespace stpbp
