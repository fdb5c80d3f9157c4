#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "stpbp/abstract.hpp"
#include "stpbp/tef.hpp"

namespace stpbp {

// epoch-count approximation e^{t - gamma}
double eta_approx(double t);

enum class phase_kind { initial, late };

// trajectory constants per phase: a(t) = w1 - w2*exp(-w3*e^t)
struct phase_w {
    double w1 = 0.0;
    double w2 = 0.0;
    double w3 = 0.0;
};

/* Per-phase constant bundle: w drives the total-share trajectory, u and v
 * are the integrating-factor constants of the fraction solutions
 * (start time, start value, scaled intercept, scaled slope). The late
 * phase start values come from the fraction ODE evaluated at the switch.
 */
struct phase_constants {
    phase_kind phase = phase_kind::initial;
    phase_w w;
    std::array<double, 4> u{};
    std::array<double, 4> v{};
};

struct peak_result {
    double c_star = 0.0;
    phase_kind phase = phase_kind::initial;
    bool at_boundary = false;   // current shares monotone over the horizon
};

struct theory_summary {
    double tau_s = 0.0;          // NaN when the breakpoint is never reached
    double tau_e = 0.0;
    int64_t n_s = 0;             // epoch counts at the switch/extinction times
    int64_t n_e = 0;
    double life_span_epochs = 0.0;   // real fixed point of the epoch equation
    double c_star = 0.0;
    double max_reach = 0.0;      // total shares at extinction
    double growth_initial = 0.0; // kappa1*rho
    double growth_late = 0.0;    // kappa2*rho
    bool two_phase = false;
};

/* Closed-form trajectory machinery for a strictly two-slope supercritical
 * parameterization. Construction rejects kappa1 <= kappa2, kappa2 <= 0,
 * rho*m_bar <= 1, and seed counts at or past the breakpoint or the initial
 * ceiling m_bar/kappa1, since the phase structure is undefined there.
 */
class theory_model {
public:
    theory_model(const tef_params& p, int64_t a0);

    const tef_params& params() const { return p_; }
    int64_t seed_count() const { return a0_; }

    bool two_phase() const { return two_phase_; }
    double tau_s() const;        // throws when single phase
    double tau_e() const { return tau_e_; }
    double switch_epoch() const; // real-valued e^{tau_s - gamma}

    // total shares a(t); constant after extinction
    double total_shares(double t) const;

    // current shares c(t); zero from extinction onward
    double current_shares(double t) const;

    // epoch-indexed closed forms; (a(tau_e), 0) past the life span
    std::pair<double, double> shares_at_epoch(int64_t n) const;

    // same formulas on a continuous epoch variable (scan and solver helper)
    std::pair<double, double> shares_at_epoch_real(double n) const;

    peak_result peak_current() const { return peak_; }

    // real n_e solving the epoch fixed-point equation
    double life_span() const { return n_e_; }

    phase_constants constants(phase_kind ph) const;

    theory_summary summary() const;

private:
    const phase_w& phase_for_epoch(double n) const;

    tef_params p_;
    int64_t a0_;
    phase_w initial_, late_;
    bool two_phase_ = false;
    double tau_s_ = 0.0;
    double tau_e_ = 0.0;
    double switch_epoch_ = 0.0;
    double c_at_switch_ = 0.0;
    double n_e_ = 0.0;
    peak_result peak_;
};

// operation-shaped wrappers over a freshly constructed model
double total_shares(double t, const tef_params& p, int64_t a0);
double current_shares(double t, const tef_params& p, int64_t a0);
std::pair<double, double> shares_at_epoch(int64_t n, const tef_params& p, int64_t a0);
peak_result peak_current(const tef_params& p, int64_t a0);
double life_span(const tef_params& p, int64_t a0);

/* Numerical solution of the fraction ODE
 *   d psi_c = (m(a) - 1 - psi_c) I,  d psi_a = (m(a) - psi_a) I,
 * with a(t) = psi_a(t) * eta(t0 + t) on the exact (step-function) epoch
 * clock and I the indicator of psi_c > 0. Integration is classical RK4
 * restarted at every epoch boundary. The accepted solution must agree
 * with its half-step refinement within refine_tol in sup norm.
 */
struct ode_solution {
    double t0 = 0.0;
    std::vector<double> t;       // knots relative to t0, starting at 0
    std::vector<double> psi_c;
    std::vector<double> psi_a;

    std::pair<double, double> at(double time) const;  // linear interpolation
};

ode_solution integrate_fraction_ode(const tef_params& p, int64_t a0, double T,
                                    double step);

// general form: absolute anchor t0 and explicit initial fractions
ode_solution integrate_fraction_ode(const tef_params& p, double T, double step,
                                    double t0, std::pair<double, double> init,
                                    double refine_tol = 1e-6);

// Minimal fixed point of the offspring PGF at total population a0, in
// [0,1); 1 when the mean there is subcritical. Overall extinction for a0
// seeds is p_e^a0.
double pgf_extinction_prob(const offspring_model& model, int64_t a0);

// CSV exports: continuous "t,a,c" and epoch-indexed "n,a_n,c_n"
void write_theory_curves_csv(const theory_model& m, double t_max, int64_t samples,
                             std::ostream& out);
void write_epoch_curve_csv(const theory_model& m, int64_t n_max, std::ostream& out);
void write_summary_kv(const theory_summary& s, std::ostream& out);

} // namespace stpbp
