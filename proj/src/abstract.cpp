#include "stpbp/abstract.hpp"
#include "stpbp/harmonic.hpp"
#include "stpbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stpbp {

double offspring_model::mean_at(double a) const {
    return tef_eval(tef, a);
}

int64_t offspring_model::sample(rng& r, double a) const {
    double m = mean_at(a);
    switch (kind) {
    case offspring_kind::poisson:
        return r.poisson(m);
    case offspring_kind::binomial: {
        if (trial_count < 1)
            throw std::invalid_argument("offspring_model: binomial needs trial_count >= 1");
        double p = m / double(trial_count);
        return r.binomial(trial_count, std::clamp(p, 0.0, 1.0));
    }
    }
    throw std::logic_error("offspring_model: unknown kind");
}

std::pair<int64_t, int64_t> step_embedded(std::pair<int64_t, int64_t> state_ca,
                                          int64_t gamma) {
    auto [c, a] = state_ca;
    if (c <= 0)
        throw std::logic_error("step_embedded: chain already extinct");
    if (gamma < 0)
        throw std::invalid_argument("step_embedded: negative offspring count");
    return {c + gamma - 1, a + gamma};
}

embedded_trace simulate_abstract(const offspring_model& model, const sim_config& cfg) {
    cfg.validate();
    if (cfg.max_epochs <= 0)
        throw std::invalid_argument("simulate_abstract: max_epochs must be positive "
                                    "(no node count bounds the run)");
    rng r(cfg.rng_seed);

    embedded_trace t;
    t.seed_count = cfg.seed_count;
    int64_t a = cfg.seed_count;
    int64_t c = cfg.seed_count;
    double tau = 0.0;
    t.total.push_back(a);
    t.current.push_back(c);
    t.wake_times.push_back(tau);

    for (int64_t n = 1; c > 0 && n <= cfg.max_epochs; ++n) {
        tau += r.exponential(cfg.lambda * double(c));
        int64_t gamma = model.sample(r, double(a));
        auto [c2, a2] = step_embedded({c, a}, gamma);
        c = c2;
        a = a2;
        t.total.push_back(a);
        t.current.push_back(c);
        t.forwards.push_back(gamma);
        t.wake_times.push_back(tau);
    }
    t.truncated = c > 0;
    return t;
}

embedded_trace simulate_abstract_run(const offspring_model& model,
                                     const sim_config& cfg, uint64_t run_index) {
    sim_config per_run = cfg;
    per_run.rng_seed = rng::derive_seed(cfg.rng_seed, run_index);
    return simulate_abstract(model, per_run);
}

fraction_trace fractions(const embedded_trace& t) {
    if (t.total.empty())
        throw std::invalid_argument("fractions: empty trace");
    fraction_trace f;
    f.psi_c.reserve(t.total.size());
    f.psi_a.reserve(t.total.size());
    f.psi_c.push_back(double(t.seed_count));
    f.psi_a.push_back(double(t.seed_count));
    for (size_t n = 1; n < t.total.size(); ++n) {
        f.psi_c.push_back(double(t.current[n]) / double(n));
        f.psi_a.push_back(double(t.total[n]) / double(n));
    }
    return f;
}

step_interpolation::step_interpolation(const fraction_trace& frac, int64_t from_epoch)
    : from_(from_epoch) {
    if (from_epoch < 1)
        throw std::invalid_argument("interpolate: anchor epoch must be >= 1");
    if (from_epoch > frac.epochs())
        throw std::invalid_argument("interpolate: anchor epoch beyond trace end");
    psi_c_.assign(frac.psi_c.begin() + from_epoch, frac.psi_c.end());
    psi_a_.assign(frac.psi_a.begin() + from_epoch, frac.psi_a.end());
    last_ = frac.epochs();
}

double step_interpolation::boundary(int64_t k) const {
    if (k < from_)
        throw std::invalid_argument("step_interpolation: epoch before anchor");
    return harmonic_number(uint64_t(k + 1)) - harmonic_number(uint64_t(from_));
}

std::pair<double, double> step_interpolation::value_at(double t) const {
    if (t < 0)
        throw std::invalid_argument("step_interpolation: negative elapsed time");
    // past the final recorded interval the last value holds; checking here
    // keeps the epoch lookup off times whose eta would not even fit
    if (t >= boundary(last_))
        return {psi_c_.back(), psi_a_.back()};
    // the value at elapsed time t belongs to epoch eta(t_n + t)
    uint64_t k = eta_exact(harmonic_number(uint64_t(from_)) + t);
    int64_t idx = int64_t(k) - from_;
    if (idx < 0)
        idx = 0;                 // cannot happen for t >= 0; defensive
    if (idx >= int64_t(psi_c_.size()))
        idx = int64_t(psi_c_.size()) - 1;
    return {psi_c_[size_t(idx)], psi_a_[size_t(idx)]};
}

step_interpolation interpolate(const fraction_trace& frac, int64_t from_epoch) {
    return step_interpolation(frac, from_epoch);
}

} // namespace stpbp
