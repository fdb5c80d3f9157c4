#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stpbp/abstract.hpp"
#include "stpbp/harmonic.hpp"
#include "stpbp/rng.hpp"
#include "support/helpers.hpp"

using namespace stpbp;

namespace {

const tef_params cfit{21.321042, 532e-6, 83e-6, 35000.0, 1.0};

offspring_model poisson_const(double mean) {
    offspring_model m;
    m.tef = tef_params{mean, 0.0, 0.0, 1.0, 1.0};
    return m;
}

} // namespace

TEST_CASE("one embedded step") {
    auto [c, a] = step_embedded({2, 2}, 3);
    CHECK(c == 4);
    CHECK(a == 5);
    auto [c2, a2] = step_embedded({1, 7}, 0);
    CHECK(c2 == 0);
    CHECK(a2 == 7);
    CHECK_THROWS_AS(step_embedded({0, 5}, 1), std::logic_error);
    CHECK_THROWS_AS(step_embedded({1, 1}, -1), std::invalid_argument);
}

TEST_CASE("offspring mean follows the curve") {
    offspring_model m;
    m.tef = cfit.with_rho(0.6);
    CHECK(m.mean_at(0.0) == doctest::Approx(0.6 * 21.321042));
    CHECK(m.mean_at(35000.0) == doctest::Approx(0.6 * 2.701042).epsilon(1e-9));
    // far past the root of the late piece the mean clamps to zero
    CHECK(m.mean_at(1e7) == 0.0);
}

TEST_CASE("zero mean dies after exactly a0 epochs") {
    offspring_model m = poisson_const(0.0);
    sim_config cfg;
    cfg.seed_count = 4;
    cfg.max_epochs = 100;
    cfg.rng_seed = 1;
    embedded_trace t = simulate_abstract(m, cfg);
    CHECK(t.epochs() == 4);
    CHECK(t.extinct());
    CHECK(t.total.back() == 4);
    CHECK(t.conserved());
}

TEST_CASE("max epochs is mandatory in abstract mode") {
    offspring_model m = poisson_const(1.0);
    sim_config cfg;
    cfg.max_epochs = 0;
    CHECK_THROWS_AS(simulate_abstract(m, cfg), std::invalid_argument);
}

TEST_CASE("poisson offspring sample mean") {
    rng r(33);
    offspring_model m = poisson_const(2.5);
    const int draws = 40000;
    double sum = 0;
    for (int i = 0; i < draws; ++i) sum += double(m.sample(r, 0.0));
    double mean = sum / draws;
    double se = std::sqrt(2.5 / draws);
    CHECK(std::abs(mean - 2.5) < 3.0 * se);
}

TEST_CASE("binomial offspring sample mean and support") {
    rng r(34);
    offspring_model m;
    m.kind = offspring_kind::binomial;
    m.trial_count = 40;
    m.tef = tef_params{8.0, 0.0, 0.0, 1.0, 1.0};
    const int draws = 40000;
    double sum = 0;
    int64_t max_seen = 0;
    for (int i = 0; i < draws; ++i) {
        int64_t g = m.sample(r, 0.0);
        REQUIRE(g >= 0);
        REQUIRE(g <= 40);
        sum += double(g);
        max_seen = std::max(max_seen, g);
    }
    double p = 8.0 / 40.0;
    double se = std::sqrt(40 * p * (1 - p) / draws);
    CHECK(std::abs(sum / draws - 8.0) < 3.0 * se);
    CHECK(max_seen > 16);  // tail is actually exercised
}

TEST_CASE("subcritical runs all die quickly") {
    offspring_model m = poisson_const(0.5);
    sim_config cfg;
    cfg.seed_count = 1;
    cfg.max_epochs = 100000;
    for (uint64_t run = 0; run < 1000; ++run) {
        cfg.rng_seed = 900 + run;
        embedded_trace t = simulate_abstract(m, cfg);
        REQUIRE(t.extinct());
        REQUIRE(t.conserved());
    }
}

TEST_CASE("saturating curve matches the predicted life span") {
    // strongly supercritical start, so most runs survive to saturation;
    // the epoch count at death then concentrates near the theory value
    offspring_model m;
    m.tef = cfit.with_rho(0.6);
    sim_config cfg;
    cfg.seed_count = 2;
    cfg.max_epochs = 100000;
    int survived = 0;
    for (uint64_t run = 0; run < 5; ++run) {
        cfg.rng_seed = 41 + run;
        embedded_trace t = simulate_abstract(m, cfg);
        REQUIRE(t.conserved());
        if (!t.extinct() || t.epochs() < 1000) continue;
        ++survived;
        CHECK(std::abs(double(t.epochs()) - 65851.4) < 0.01 * 65851.4);
    }
    CHECK(survived >= 4);
}

TEST_CASE("run index determinism") {
    offspring_model m = poisson_const(1.2);
    sim_config cfg;
    cfg.max_epochs = 500;
    cfg.rng_seed = 7;
    embedded_trace a = simulate_abstract_run(m, cfg, 3);
    embedded_trace b = simulate_abstract_run(m, cfg, 3);
    CHECK(a.total == b.total);
    CHECK(a.wake_times == b.wake_times);
    embedded_trace c = simulate_abstract_run(m, cfg, 4);
    CHECK(a.wake_times != c.wake_times);
}

TEST_CASE("fractions divide by the epoch index") {
    embedded_trace t;
    t.seed_count = 2;
    t.total = {2, 5, 6, 6};
    t.current = {2, 4, 4, 3};
    t.forwards = {3, 1, 0};
    t.wake_times = {0, 0.1, 0.2, 0.3};
    fraction_trace f = fractions(t);
    REQUIRE(f.epochs() == 3);
    CHECK(f.psi_a[0] == 2.0);  // seed slot pinned to a0
    CHECK(f.psi_c[0] == 2.0);
    CHECK(f.psi_a[1] == doctest::Approx(5.0));
    CHECK(f.psi_c[2] == doctest::Approx(2.0));
    CHECK(f.psi_a[3] == doctest::Approx(2.0));
    CHECK(f.psi_c[3] == doctest::Approx(1.0));
}

TEST_CASE("interpolation holds fraction values between epoch times") {
    offspring_model m = poisson_const(1.5);
    sim_config cfg;
    cfg.seed_count = 3;
    cfg.max_epochs = 200;
    cfg.rng_seed = 5;
    embedded_trace t = simulate_abstract(m, cfg);
    REQUIRE(t.epochs() >= 20);
    fraction_trace f = fractions(t);
    const int64_t anchor = 10;
    step_interpolation u = interpolate(f, anchor);

    // value_at(0) is the anchor-epoch fraction pair
    auto [c0, a0] = u.value_at(0.0);
    CHECK(c0 == doctest::Approx(f.psi_c[anchor]));
    CHECK(a0 == doctest::Approx(f.psi_a[anchor]));

    // strictly inside the interval before epoch k+1 the value is epoch k's
    for (int64_t k = anchor; k < std::min<int64_t>(t.epochs() - 1, 16); ++k) {
        double lo = harmonic_number(uint64_t(k)) - harmonic_number(uint64_t(anchor));
        double hi = harmonic_number(uint64_t(k) + 1) - harmonic_number(uint64_t(anchor));
        double mid = 0.5 * (lo + hi);
        auto [ck, ak] = u.value_at(mid);
        CHECK(ck == doctest::Approx(f.psi_c[k]));
        CHECK(ak == doctest::Approx(f.psi_a[k]));
    }

    // far past the recorded range the last value holds
    auto [cend, aend] = u.value_at(1e6);
    CHECK(cend == doctest::Approx(f.psi_c.back()));
    CHECK(aend == doctest::Approx(f.psi_a.back()));

    CHECK_THROWS_AS(interpolate(f, 0), std::invalid_argument);
    CHECK_THROWS_AS(interpolate(f, t.epochs() + 1), std::invalid_argument);
}
