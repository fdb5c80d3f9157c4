#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stpbp/trace.hpp"

namespace stpbp {

/* Two-slope expected-forwards curve over the total share count:
 *   m_N(a) = (m_bar - kappa1*a)  for a <= a_bar,
 *            (m_tilde - kappa2*a) past the breakpoint,
 * scaled by rho and floored at 0. m_tilde is pinned by continuity.
 *
 * Plain data on purpose: degenerate shapes (equal or zero slopes) are
 * legitimate inputs for estimation and for constant-mean offspring models.
 * The trajectory formulas in theory.hpp validate the strict two-slope
 * supercritical shape at construction instead.
 */
struct tef_params {
    double m_bar = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double a_bar = 0.0;
    double rho = 1.0;

    double m_tilde() const { return m_bar - a_bar * (kappa1 - kappa2); }
    tef_params with_rho(double r) const {
        tef_params p = *this;
        p.rho = r;
        return p;
    }
};

// rho * m_N(a), clamped below at 0
double tef_eval(const tef_params& p, double a);

// key=value serialization (m_bar, kappa1, kappa2, a_bar, rho); '#' comments
tef_params read_tef_config(std::istream& in);
tef_params read_tef_config_file(const std::string& path);
void write_tef_config(const tef_params& p, std::ostream& out);

/* Accumulator for the binned estimator: every epoch transition contributes
 * its forward count to the bin holding the pre-transition total A_{n-1}.
 * Merging accumulators from disjoint trace sets is exact (integer sums).
 */
struct binned_tef {
    struct bin {
        int64_t transitions = 0;
        int64_t forward_sum = 0;
    };

    int64_t bin_width = 0;
    std::vector<bin> bins;

    explicit binned_tef(int64_t width = 1000);

    void add_transition(int64_t total_before, int64_t gamma);
    void add_trace(const embedded_trace& t);
    void merge(const binned_tef& other);    // widths must match

    double bin_center(size_t b) const;
    std::optional<double> estimate(size_t b) const;
};

binned_tef estimate_tef(const std::vector<embedded_trace>& traces, int64_t bin_width);

// CSV with header "bin_lo,bin_hi,transitions,forward_sum,estimate";
// the estimate field is left empty for empty bins
void write_binned_csv(const binned_tef& b, std::ostream& out);
binned_tef read_binned_csv(std::istream& in);

struct fit_report {
    tef_params params;           // rho = 1; slopes as fitted
    double objective = 0.0;      // weighted squared error at the optimum
    int64_t bins_used = 0;
    int64_t candidates_tried = 0;
    int64_t candidates_feasible = 0;
};

// Raised when no breakpoint candidate yields admissible slopes; carries the
// unconstrained best fit so callers can report what the data looked like.
struct fit_error : std::runtime_error {
    fit_error(const std::string& what, const fit_report& best)
        : std::runtime_error(what), unconstrained_best(best) {}
    fit_report unconstrained_best;
};

/* Breakpoint grid search over bin centers with continuity-constrained
 * weighted least squares per candidate (weights = transition counts).
 * Candidates whose slopes violate kappa1 >= kappa2 > 0 are discarded;
 * objective ties resolve to the smallest breakpoint.
 */
fit_report fit_two_slope(const binned_tef& b, int64_t min_transitions = 30);

} // namespace stpbp
