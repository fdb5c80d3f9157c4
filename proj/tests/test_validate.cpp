#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "stpbp/abstract.hpp"
#include "stpbp/cascade.hpp"
#include "stpbp/rng.hpp"
#include "stpbp/validate.hpp"
#include "support/helpers.hpp"

using namespace stpbp;

namespace {

const tef_params cfit{21.321042, 532e-6, 83e-6, 35000.0, 1.0};

// discretized closed-form curves, n = 0..n_max
void theory_curves(const theory_model& m, int64_t n_max,
                   std::vector<double>& total, std::vector<double>& current) {
    total.clear();
    current.clear();
    for (int64_t n = 0; n <= n_max; ++n) {
        auto [a, c] = m.shares_at_epoch_real(double(n));
        total.push_back(a);
        current.push_back(c);
    }
}

} // namespace

TEST_CASE("comparing the closed form against itself is near-exact") {
    theory_model m(cfit.with_rho(0.6), 2);
    std::vector<double> total, current;
    theory_curves(m, int64_t(std::ceil(m.life_span())), total, current);
    comparison_report r = compare_curves(total, current, m);
    // the total-share column is sampled from the model, so the sup error
    // vanishes; peak and reach only suffer integer-grid discretization
    CHECK(r.sup_rel_err_total == 0.0);
    CHECK(r.peak_rel_err < 1e-4);
    CHECK(r.reach_rel_err < 1e-4);
    CHECK(r.epochs_compared == int64_t(total.size()));
}

TEST_CASE("curve comparison rejects malformed input") {
    theory_model m(cfit.with_rho(0.6), 2);
    std::vector<double> total{2.0, 3.0}, current{2.0};
    CHECK_THROWS_AS(compare_curves(total, current, m), std::invalid_argument);
    CHECK_THROWS_AS(compare_curves({}, {}, m), std::invalid_argument);
    std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(compare_curves(zeros, zeros, m), std::invalid_argument);
}

TEST_CASE("abstract chain tracks the closed form") {
    offspring_model model;
    model.tef = cfit.with_rho(0.6);

    sim_config cfg;
    cfg.rho = 1.0;                 // forwarding scale already folded into the curve
    cfg.seed_count = 2;
    cfg.max_epochs = 80000;

    theory_model m(model.tef, 2);
    double peak_sum = 0.0, reach_sum = 0.0;
    int64_t compared = 0;
    for (uint64_t run = 0; run < 10; ++run) {
        cfg.rng_seed = 5150 + run;
        embedded_trace t = simulate_abstract(model, cfg);
        if (classify_path(t, 100) != path_class::viral) continue;
        comparison_report r = compare_trace(t, model.tef, 2, 100);
        peak_sum += r.peak_rel_err;
        reach_sum += r.reach_rel_err;
        ++compared;
    }
    REQUIRE(compared >= 8);        // extinction odds are tiny at these means
    CHECK(peak_sum / double(compared) < 0.05);
    CHECK(reach_sum / double(compared) < 0.02);
}

TEST_CASE("non-viral traces are rejected") {
    offspring_model model;
    model.tef = tef_params{0.6, 0.0, 0.0, 1e9, 1.0};   // subcritical, dies fast

    sim_config cfg;
    cfg.rho = 1.0;
    cfg.seed_count = 2;
    cfg.max_epochs = 10000;
    cfg.rng_seed = 77;
    embedded_trace t = simulate_abstract(model, cfg);
    REQUIRE(classify_path(t, 100) == path_class::extinct);
    CHECK_THROWS_AS(compare_trace(t, cfit.with_rho(0.6), 2, 100),
                    std::invalid_argument);
}

TEST_CASE("sweep mechanics on a synthetic network") {
    graph g = testsup::scale_free_graph(2000, 5, 404);
    tef_params p{4.0, 1e-3, 1e-4, 1500.0, 1.0};
    std::vector<double> rhos{0.6, 1.0};

    auto rows = rho_sweep(g, rhos, p, 8, 991, 2, 50, 2);
    REQUIRE(rows.size() == 2);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].rho == rhos[i]);
        CHECK(rows[i].runs == 8);
        CHECK(rows[i].viral_runs >= 1);
        CHECK(!rows[i].inconclusive);
        // the worst case dominates the mean componentwise
        CHECK(rows[i].worst.peak_rel_err >= rows[i].mean.peak_rel_err);
        CHECK(rows[i].worst.reach_rel_err >= rows[i].mean.reach_rel_err);
        CHECK(rows[i].worst.sup_rel_err_total >= rows[i].mean.sup_rel_err_total);
        CHECK(rows[i].mean.epochs_compared > 0);
    }

    // same seed, same report
    auto again = rho_sweep(g, rhos, p, 8, 991, 2, 50, 2);
    std::ostringstream a, b;
    write_report_csv(rows, a);
    write_report_csv(again, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("rho,peak_rel_err,reach_rel_err,sup_rel_err_total\n", 0) == 0);
}

TEST_CASE("sweep flags rho values with no viral run") {
    graph g = testsup::scale_free_graph(300, 3, 11);
    tef_params p{4.0, 1e-3, 1e-4, 1500.0, 1.0};
    // no run can push current shares past the node count
    auto rows = rho_sweep(g, {0.5}, p, 5, 17, 2, 600);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].inconclusive);
    CHECK(rows[0].viral_runs == 0);

    std::ostringstream csv;
    write_report_csv(rows, csv);
    CHECK(csv.str().find("0.5,,,\n") != std::string::npos);
    std::ostringstream digest;
    write_report_summary(rows, digest);
    CHECK(digest.str().find("inconclusive") != std::string::npos);
}

TEST_CASE("sweep validates its arguments") {
    graph g = testsup::scale_free_graph(100, 2, 3);
    tef_params p{4.0, 1e-3, 1e-4, 1500.0, 1.0};
    CHECK_THROWS_AS(rho_sweep(g, {}, p, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(rho_sweep(g, {0.5}, p, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(rho_sweep(g, {1.5}, p, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(rho_sweep(g, {0.1}, p, 5, 1), std::invalid_argument);  // subcritical
}

TEST_CASE("summary digest lists worst and mean per rho") {
    graph g = testsup::scale_free_graph(1000, 4, 21);
    tef_params p{4.0, 1e-3, 1e-4, 1200.0, 1.0};
    auto rows = rho_sweep(g, {1.0}, p, 5, 33, 2, 50);
    std::ostringstream out;
    write_report_summary(rows, out);
    CHECK(out.str().find("rho 1:") != std::string::npos);
    CHECK(out.str().find("worst:") != std::string::npos);
    CHECK(out.str().find("mean:") != std::string::npos);
}
