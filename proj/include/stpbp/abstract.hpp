#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stpbp/cascade.hpp"
#include "stpbp/tef.hpp"
#include "stpbp/trace.hpp"

namespace stpbp {

class rng;

/* Graph-free offspring law whose mean follows the TeF curve evaluated at
 * the running total population. Poisson is the default; binomial mirrors
 * a thinned neighborhood of trial_count friends.
 */
enum class offspring_kind { poisson, binomial };

struct offspring_model {
    offspring_kind kind = offspring_kind::poisson;
    tef_params tef;
    int64_t trial_count = 0;    // binomial only

    double mean_at(double a) const;           // tef value, floored at 0
    int64_t sample(rng& r, double a) const;
};

// One transition of the embedded chain: C' = C + gamma - 1, A' = A + gamma.
// Stepping a dead chain (C <= 0) is a contract violation.
std::pair<int64_t, int64_t> step_embedded(std::pair<int64_t, int64_t> state_ca,
                                          int64_t gamma);

// Embedded chain driven by the offspring model; cfg.max_epochs must be
// positive since there is no node count to bound the run.
embedded_trace simulate_abstract(const offspring_model& model, const sim_config& cfg);

embedded_trace simulate_abstract_run(const offspring_model& model,
                                     const sim_config& cfg, uint64_t run_index);

/* Per-epoch fractions of the embedded chain: psi_a[n] = A_n/n and
 * psi_c[n] = C_n/n for n >= 1, with the n = 0 slot pinned to a0 for both.
 */
struct fraction_trace {
    std::vector<double> psi_c;
    std::vector<double> psi_a;

    int64_t epochs() const { return int64_t(psi_c.size()) - 1; }
};

fraction_trace fractions(const embedded_trace& t);

/* Piecewise-constant interpolation anchored at epoch n: value_at(t) holds
 * the epoch-k fractions for t in [t_k - t_n, t_{k+1} - t_n), epoch times
 * being exact harmonic sums. Past the last recorded epoch the final value
 * is held.
 */
class step_interpolation {
public:
    step_interpolation(const fraction_trace& frac, int64_t from_epoch);

    // (psi_c, psi_a) at elapsed time t >= 0 measured from t_n
    std::pair<double, double> value_at(double t) const;

    // t_{k+1} - t_n, the boundary after which epoch k+1's value applies
    double boundary(int64_t k) const;

    int64_t from_epoch() const { return from_; }

private:
    std::vector<double> psi_c_, psi_a_;
    int64_t from_;
    int64_t last_;
};

step_interpolation interpolate(const fraction_trace& frac, int64_t from_epoch);

} // namespace stpbp
