#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "stpbp/cascade.hpp"
#include "stpbp/tef.hpp"
#include "stpbp/theory.hpp"
#include "stpbp/trace.hpp"

namespace stpbp {

/* Relative distances between one simulated trace and the closed-form epoch
 * curves: peak current shares against c*, final total shares against the
 * life span, and the sup over recorded epochs of |A_n - a(t_n)| normalized
 * by the largest simulated total (pointwise relative error degenerates at
 * small n where the epoch parameterization is known to be loose).
 */
struct comparison_report {
    double peak_rel_err = 0.0;
    double reach_rel_err = 0.0;
    double sup_rel_err_total = 0.0;
    int64_t epochs_compared = 0;
};

// real-valued curve comparison; A and C are epoch-indexed starting at n=0
comparison_report compare_curves(const std::vector<double>& total,
                                 const std::vector<double>& current,
                                 const theory_model& m);

// throws std::invalid_argument when the trace is not viral under delta
comparison_report compare_trace(const embedded_trace& t, const tef_params& p,
                                int64_t a0, int64_t delta = 100);

struct rho_report {
    double rho = 0.0;
    int64_t runs = 0;
    int64_t viral_runs = 0;
    bool inconclusive = false;   // no viral trace to compare against
    comparison_report worst;     // field-wise max over viral runs
    comparison_report mean;      // field-wise mean over viral runs
};

/* For each rho, scale the reference TeF by rho, simulate `runs` cascades
 * on the graph and aggregate comparison errors over the viral ones.
 */
std::vector<rho_report> rho_sweep(const graph& g, const std::vector<double>& rhos,
                                  const tef_params& p_unit, int64_t runs,
                                  uint64_t base_seed, int64_t a0 = 2,
                                  int64_t delta = 100, unsigned jobs = 1);

// CSV of worst-case rows: "rho,peak_rel_err,reach_rel_err,sup_rel_err_total"
void write_report_csv(const std::vector<rho_report>& rows, std::ostream& out);

// human-oriented per-rho digest (worst and mean)
void write_report_summary(const std::vector<rho_report>& rows, std::ostream& out);

} // namespace stpbp
