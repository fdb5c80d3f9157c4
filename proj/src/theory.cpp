#include "stpbp/theory.hpp"
#include "stpbp/harmonic.hpp"
#include "stpbp/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace stpbp {

double eta_approx(double t) {
    return std::exp(t - euler_mascheroni);
}

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

double trajectory(const phase_w& w, double t) {
    return w.w1 - w.w2 * std::exp(-w.w3 * std::exp(t));
}

double epoch_trajectory(const phase_w& w, double n) {
    return w.w1 - w.w2 * std::exp(-n * w.w3 * std::exp(euler_mascheroni));
}

void validate_params(const tef_params& p, int64_t a0) {
    if (!(p.m_bar > 0) || !(p.a_bar > 0))
        throw std::invalid_argument("theory: m_bar and a_bar must be positive");
    if (!(p.kappa2 > 0) || !(p.kappa1 > p.kappa2))
        throw std::invalid_argument("theory: slopes must satisfy kappa1 > kappa2 > 0");
    if (!(p.rho > 0) || p.rho > 1)
        throw std::invalid_argument("theory: rho must be in (0,1]");
    if (!(p.rho * p.m_bar > 1))
        throw std::invalid_argument("theory: rho*m_bar must exceed 1 "
                                    "(subcritical start has no viral trajectory)");
    if (a0 < 1)
        throw std::invalid_argument("theory: seed count must be >= 1");
}

} // namespace

theory_model::theory_model(const tef_params& p, int64_t a0) : p_(p), a0_(a0) {
    validate_params(p, a0);

    initial_.w1 = p.m_bar / p.kappa1;
    initial_.w3 = p.kappa1 * p.rho * std::exp(-euler_mascheroni);
    if (double(a0) >= initial_.w1)
        throw std::invalid_argument("theory: seed count reaches the initial-phase "
                                    "ceiling m_bar/kappa1; expected forwards start "
                                    "nonpositive");
    if (double(a0) >= p.a_bar)
        throw std::invalid_argument("theory: seed count must start below the "
                                    "breakpoint a_bar");
    initial_.w2 = (initial_.w1 - double(a0)) * std::exp(initial_.w3);

    const double e_neg_gamma = std::exp(-euler_mascheroni);

    // does the total-share trajectory reach the breakpoint while alive?
    double tau_s_candidate = nan_value;
    if (initial_.w1 > p.a_bar) {
        tau_s_candidate =
            std::log(std::log(initial_.w2 / (initial_.w1 - p.a_bar)) / initial_.w3);
        double c_switch = p.a_bar + e_neg_gamma
            - std::exp(tau_s_candidate - euler_mascheroni);
        if (c_switch > 0) {
            two_phase_ = true;
            tau_s_ = tau_s_candidate;
            c_at_switch_ = c_switch;
            switch_epoch_ = std::exp(tau_s_ - euler_mascheroni);
        }
    }

    if (two_phase_) {
        late_.w1 = p.m_tilde() / p.kappa2;
        late_.w3 = p.kappa2 * p.rho * e_neg_gamma;
        late_.w2 = (late_.w1 - p.a_bar) * std::exp(late_.w3 * std::exp(tau_s_));
    } else {
        tau_s_ = nan_value;
        switch_epoch_ = nan_value;
        late_ = initial_;
    }

    // extinction time: bisection on the current-share trajectory, which has
    // a single down-crossing of zero past its peak
    {
        double lo, hi;
        auto c_of = [&](double t) {
            const phase_w& w = (two_phase_ && t > tau_s_) ? late_ : initial_;
            return trajectory(w, t) + e_neg_gamma - std::exp(t - euler_mascheroni);
        };
        if (two_phase_) {
            lo = tau_s_;
            hi = tau_s_ + 50.0;
        } else if (!std::isnan(tau_s_candidate)) {
            lo = 0.0;           // died before the breakpoint
            hi = tau_s_candidate;
        } else {
            lo = 0.0;           // ceiling below the breakpoint: one phase only
            hi = euler_mascheroni + std::log(initial_.w1 + double(a0) + 2.0);
        }
        if (!(c_of(lo) > 0) || !(c_of(hi) < 0))
            throw std::runtime_error("theory: no extinction bracket; parameters "
                                     "do not describe a viable cascade");
        for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
            double mid = 0.5 * (lo + hi);
            (c_of(mid) > 0 ? lo : hi) = mid;
        }
        tau_e_ = 0.5 * (lo + hi);
    }

    // life span: epoch fixed point in the terminal phase
    {
        const phase_w& w = two_phase_ ? late_ : initial_;
        const double theta = w.w3 * std::exp(euler_mascheroni);
        auto g = [&](double n) { return epoch_trajectory(w, n) - n; };

        // bracket one unit past the ceiling: exactly at w1 the residual is
        // -w2*exp(-theta*w1), which rounds away to zero inside the curve
        // evaluation once the exponent passes ~36, and the sign test would
        // reject a perfectly healthy parameterization
        double lo, hi = w.w1 + 1.0;
        if (two_phase_) {
            lo = switch_epoch_;
        } else {
            // fall back to the epoch maximizer, clamped into the horizon
            double n_star = std::log(w.w2 * theta) / theta;
            lo = std::max(n_star, 0.0);
        }
        if (!(g(lo) > 0) || !(g(hi) < 0))
            throw std::runtime_error("theory: life-span bisection has no sign "
                                     "change over the expected bracket");
        const double tol = 1e-9 * w.w1;
        double mid = 0.5 * (lo + hi);
        for (int i = 0; i < 300; ++i) {
            mid = 0.5 * (lo + hi);
            double gm = g(mid);
            if (std::abs(gm) < tol)
                break;
            (gm > 0 ? lo : hi) = mid;
        }
        if (std::abs(g(mid)) >= tol)
            throw std::runtime_error("theory: life-span bisection failed to reach "
                                     "the residual tolerance");
        n_e_ = mid;
    }

    // peak of the epoch-indexed current shares; each phase can hold an
    // interior maximizer only where its expected forwards cross 1
    {
        peak_.at_boundary = false;
        bool found = false;
        auto consider = [&](const phase_w& w, phase_kind ph, double lo, double hi) {
            const double theta = w.w3 * std::exp(euler_mascheroni);
            double arg = w.w2 * theta;
            if (!(arg > 0))
                return;
            double n_star = std::log(arg) / theta;
            if (n_star < lo || n_star > hi)
                return;
            double value = w.w1 - (1.0 + std::log(arg)) / theta;
            if (!found || value > peak_.c_star) {
                peak_.c_star = value;
                peak_.phase = ph;
                found = true;
            }
        };
        if (two_phase_) {
            consider(initial_, phase_kind::initial, 0.0, switch_epoch_);
            consider(late_, phase_kind::late, switch_epoch_, n_e_);
        } else {
            consider(initial_, phase_kind::initial, 0.0, n_e_);
        }
        if (!found) {
            // monotone over the horizon: report the first scanned epoch
            peak_.c_star = shares_at_epoch_real(1.0).second;
            peak_.phase = phase_kind::initial;
            peak_.at_boundary = true;
        }
    }
}

double theory_model::tau_s() const {
    if (!two_phase_)
        throw std::logic_error("theory: single-phase trajectory has no switch time");
    return tau_s_;
}

double theory_model::switch_epoch() const {
    if (!two_phase_)
        throw std::logic_error("theory: single-phase trajectory has no switch epoch");
    return switch_epoch_;
}

const phase_w& theory_model::phase_for_epoch(double n) const {
    if (two_phase_ && n > switch_epoch_)
        return late_;
    return initial_;
}

double theory_model::total_shares(double t) const {
    if (t < 0)
        throw std::invalid_argument("total_shares: negative time");
    if (t >= tau_e_)
        t = tau_e_;
    const phase_w& w = (two_phase_ && t > tau_s_) ? late_ : initial_;
    return trajectory(w, t);
}

double theory_model::current_shares(double t) const {
    if (t < 0)
        throw std::invalid_argument("current_shares: negative time");
    if (t >= tau_e_)
        return 0.0;
    // c(t) = c(phi) - a(phi) + a(t) + e^{-gamma}(e^phi - e^t),
    // phi = tau_s once past the switch
    double phi, c_phi, a_phi;
    const phase_w* w;
    if (two_phase_ && t > tau_s_) {
        phi = tau_s_;
        c_phi = c_at_switch_;
        a_phi = p_.a_bar;
        w = &late_;
    } else {
        phi = 0.0;
        c_phi = double(a0_);
        a_phi = double(a0_);
        w = &initial_;
    }
    return c_phi - a_phi + trajectory(*w, t)
        + std::exp(-euler_mascheroni) * (std::exp(phi) - std::exp(t));
}

std::pair<double, double> theory_model::shares_at_epoch_real(double n) const {
    if (n < 0)
        throw std::invalid_argument("shares_at_epoch: negative epoch");
    if (n > n_e_)
        return {trajectory(two_phase_ ? late_ : initial_, tau_e_), 0.0};
    double a = epoch_trajectory(phase_for_epoch(n), n);
    return {a, a - n};
}

std::pair<double, double> theory_model::shares_at_epoch(int64_t n) const {
    return shares_at_epoch_real(double(n));
}

phase_constants theory_model::constants(phase_kind ph) const {
    phase_constants pc;
    pc.phase = ph;
    if (ph == phase_kind::initial) {
        pc.w = initial_;
        pc.u = {0.0, double(a0_), p_.m_bar * p_.rho, p_.kappa1 * p_.rho};
        pc.v = pc.u;
        return pc;
    }
    if (!two_phase_)
        throw std::logic_error("theory: single-phase trajectory has no late constants");
    pc.w = late_;
    // start values of the late-phase fraction solutions are the fraction
    // ODE evaluated at the switch time
    double step = std::min(1e-3, tau_s_ / 64.0);
    ode_solution sol = integrate_fraction_ode(p_, a0_, tau_s_, step);
    auto [psi_c_s, psi_a_s] = sol.at(tau_s_);
    pc.u = {tau_s_, psi_a_s, p_.m_tilde() * p_.rho, p_.kappa2 * p_.rho};
    pc.v = {tau_s_, psi_c_s, p_.m_tilde() * p_.rho, p_.kappa2 * p_.rho};
    return pc;
}

theory_summary theory_model::summary() const {
    theory_summary s;
    s.two_phase = two_phase_;
    s.tau_s = tau_s_;
    s.tau_e = tau_e_;
    s.n_s = two_phase_ ? int64_t(eta_exact(tau_s_)) : 0;
    s.n_e = int64_t(eta_exact(tau_e_));
    s.life_span_epochs = n_e_;
    s.c_star = peak_.c_star;
    s.max_reach = total_shares(tau_e_);
    s.growth_initial = p_.kappa1 * p_.rho;
    s.growth_late = p_.kappa2 * p_.rho;
    return s;
}

double total_shares(double t, const tef_params& p, int64_t a0) {
    return theory_model(p, a0).total_shares(t);
}

double current_shares(double t, const tef_params& p, int64_t a0) {
    return theory_model(p, a0).current_shares(t);
}

std::pair<double, double> shares_at_epoch(int64_t n, const tef_params& p, int64_t a0) {
    return theory_model(p, a0).shares_at_epoch(n);
}

peak_result peak_current(const tef_params& p, int64_t a0) {
    return theory_model(p, a0).peak_current();
}

double life_span(const tef_params& p, int64_t a0) {
    return theory_model(p, a0).life_span();
}

std::pair<double, double> ode_solution::at(double time) const {
    if (t.empty())
        throw std::logic_error("ode_solution: empty solution");
    if (time <= t.front())
        return {psi_c.front(), psi_a.front()};
    if (time >= t.back())
        return {psi_c.back(), psi_a.back()};
    auto it = std::upper_bound(t.begin(), t.end(), time);
    size_t i = size_t(it - t.begin());
    double t0 = t[i - 1], t1 = t[i];
    double f = t1 > t0 ? (time - t0) / (t1 - t0) : 0.0;
    return {psi_c[i - 1] + f * (psi_c[i] - psi_c[i - 1]),
            psi_a[i - 1] + f * (psi_a[i] - psi_a[i - 1])};
}

namespace {

struct ode_state {
    double c;
    double a;
};

ode_state rhs(const tef_params& p, double eta, const ode_state& y) {
    if (y.c <= 0)
        return {0.0, 0.0};
    double m = tef_eval(p, std::max(y.a * eta, 0.0));
    return {m - 1.0 - y.c, m - y.a};
}

// one classical RK4 step with eta frozen (valid within one epoch interval)
ode_state rk4_step(const tef_params& p, double eta, const ode_state& y, double h) {
    ode_state k1 = rhs(p, eta, y);
    ode_state k2 = rhs(p, eta, {y.c + 0.5 * h * k1.c, y.a + 0.5 * h * k1.a});
    ode_state k3 = rhs(p, eta, {y.c + 0.5 * h * k2.c, y.a + 0.5 * h * k2.a});
    ode_state k4 = rhs(p, eta, {y.c + h * k3.c, y.a + h * k3.a});
    return {y.c + h / 6.0 * (k1.c + 2 * k2.c + 2 * k3.c + k4.c),
            y.a + h / 6.0 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a)};
}

ode_solution integrate_raw(const tef_params& p, double T, double step, double t0,
                           std::pair<double, double> init) {
    ode_solution sol;
    sol.t0 = t0;
    ode_state y{init.first, init.second};
    double t = 0.0;
    bool frozen = y.c <= 0;

    sol.t.push_back(0.0);
    sol.psi_c.push_back(y.c);
    sol.psi_a.push_back(y.a);

    uint64_t eta = eta_exact(t0);
    double next_break = harmonic_number(eta + 1) - t0;

    while (t < T) {
        if (frozen) {
            t = T;
            sol.t.push_back(t);
            sol.psi_c.push_back(y.c);
            sol.psi_a.push_back(y.a);
            break;
        }
        while (next_break <= t) {
            ++eta;
            next_break = harmonic_number(eta + 1) - t0;
        }
        double h = std::min({step, next_break - t, T - t});
        if (h <= 0) {
            t = std::min(next_break, T);
            continue;
        }
        ode_state y_next = rk4_step(p, double(eta), y, h);
        if (y_next.c <= 0) {
            // locate the extinction point inside the step, then freeze
            double lo = 0, hi = h;
            for (int i = 0; i < 60 && hi - lo > 1e-15 * std::max(1.0, h); ++i) {
                double mid = 0.5 * (lo + hi);
                (rk4_step(p, double(eta), y, mid).c > 0 ? lo : hi) = mid;
            }
            y_next = rk4_step(p, double(eta), y, lo);
            if (y_next.c < 0)
                y_next.c = 0;
            t += lo;
            frozen = true;
        } else {
            t += h;
        }
        y = y_next;
        sol.t.push_back(t);
        sol.psi_c.push_back(y.c);
        sol.psi_a.push_back(y.a);
    }
    return sol;
}

} // namespace

ode_solution integrate_fraction_ode(const tef_params& p, double T, double step,
                                    double t0, std::pair<double, double> init,
                                    double refine_tol) {
    if (!(step > 0))
        throw std::invalid_argument("integrate_fraction_ode: step must be positive");
    if (!(T >= 0) || !std::isfinite(T))
        throw std::invalid_argument("integrate_fraction_ode: T must be finite "
                                    "and nonnegative");
    if (t0 < 0)
        throw std::invalid_argument("integrate_fraction_ode: t0 must be nonnegative");
    if (p.kappa1 < 0 || p.kappa2 < 0 || !(p.rho > 0) || p.rho > 1)
        throw std::invalid_argument("integrate_fraction_ode: invalid parameters");
    if (T == 0) {
        ode_solution sol;
        sol.t0 = t0;
        sol.t.push_back(0.0);
        sol.psi_c.push_back(init.first);
        sol.psi_a.push_back(init.second);
        return sol;
    }

    ode_solution coarse = integrate_raw(p, T, step, t0, init);
    ode_solution fine = integrate_raw(p, T, step * 0.5, t0, init);
    double worst = 0.0;
    for (size_t i = 0; i < coarse.t.size(); ++i) {
        auto [fc, fa] = fine.at(coarse.t[i]);
        worst = std::max({worst, std::abs(fc - coarse.psi_c[i]),
                          std::abs(fa - coarse.psi_a[i])});
    }
    if (worst > refine_tol)
        throw std::runtime_error("integrate_fraction_ode: halving the step moved "
                                 "the solution by " + g17(worst)
                                 + "; step too large");
    return fine;
}

ode_solution integrate_fraction_ode(const tef_params& p, int64_t a0, double T,
                                    double step) {
    if (a0 < 1)
        throw std::invalid_argument("integrate_fraction_ode: seed count must be >= 1");
    return integrate_fraction_ode(p, T, step, 0.0,
                                  {double(a0), double(a0)}, 1e-6);
}

double pgf_extinction_prob(const offspring_model& model, int64_t a0) {
    if (a0 < 0)
        throw std::invalid_argument("pgf_extinction_prob: negative population");
    double mean = model.mean_at(double(a0));
    if (mean <= 1.0)
        return 1.0;

    auto pgf = [&](double s) {
        switch (model.kind) {
        case offspring_kind::poisson:
            return std::exp(mean * (s - 1.0));
        case offspring_kind::binomial: {
            if (model.trial_count < 1)
                throw std::invalid_argument("pgf_extinction_prob: binomial needs "
                                            "trial_count >= 1");
            double p = std::clamp(mean / double(model.trial_count), 0.0, 1.0);
            return std::pow(1.0 - p + p * s, double(model.trial_count));
        }
        }
        throw std::logic_error("pgf_extinction_prob: unknown offspring kind");
    };

    double s = 0.0;
    for (int i = 0; i < 10000000; ++i) {
        double next = pgf(s);
        if (std::abs(next - s) < 1e-12)
            return next;
        s = next;
    }
    return s;
}

void write_theory_curves_csv(const theory_model& m, double t_max, int64_t samples,
                             std::ostream& out) {
    if (samples < 2)
        throw std::invalid_argument("write_theory_curves_csv: need >= 2 samples");
    out << "t,a,c\n";
    for (int64_t i = 0; i < samples; ++i) {
        double t = t_max * double(i) / double(samples - 1);
        out << g17(t) << ',' << g17(m.total_shares(t)) << ','
            << g17(m.current_shares(t)) << '\n';
    }
    if (!out)
        throw std::runtime_error("curve write failure");
}

void write_epoch_curve_csv(const theory_model& m, int64_t n_max, std::ostream& out) {
    if (n_max < 0)
        throw std::invalid_argument("write_epoch_curve_csv: negative epoch bound");
    out << "n,a_n,c_n\n";
    for (int64_t n = 0; n <= n_max; ++n) {
        auto [a, c] = m.shares_at_epoch(n);
        out << n << ',' << g17(a) << ',' << g17(c) << '\n';
    }
    if (!out)
        throw std::runtime_error("curve write failure");
}

void write_summary_kv(const theory_summary& s, std::ostream& out) {
    out << "two_phase=" << (s.two_phase ? 1 : 0) << '\n';
    out << "tau_s=" << g17(s.tau_s) << '\n';
    out << "tau_e=" << g17(s.tau_e) << '\n';
    out << "n_s=" << s.n_s << '\n';
    out << "n_e=" << s.n_e << '\n';
    out << "life_span=" << g17(s.life_span_epochs) << '\n';
    out << "c_star=" << g17(s.c_star) << '\n';
    out << "max_reach=" << g17(s.max_reach) << '\n';
    out << "growth_initial=" << g17(s.growth_initial) << '\n';
    out << "growth_late=" << g17(s.growth_late) << '\n';
    if (!out)
        throw std::runtime_error("summary write failure");
}

} // namespace stpbp
