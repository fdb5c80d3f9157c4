#include "stpbp/validate.hpp"
#include "stpbp/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace stpbp {

comparison_report compare_curves(const std::vector<double>& total,
                                 const std::vector<double>& current,
                                 const theory_model& m) {
    if (total.empty() || total.size() != current.size())
        throw std::invalid_argument("compare_curves: malformed curves");

    double sim_peak = current[0];
    double sim_max_total = total[0];
    for (size_t n = 0; n < total.size(); ++n) {
        sim_peak = std::max(sim_peak, current[n]);
        sim_max_total = std::max(sim_max_total, total[n]);
    }
    if (!(sim_peak > 0) || !(sim_max_total > 0))
        throw std::invalid_argument("compare_curves: degenerate simulated curve");

    comparison_report r;
    r.epochs_compared = int64_t(total.size());
    r.peak_rel_err = std::abs(sim_peak - m.peak_current().c_star) / sim_peak;
    double sim_reach = total.back();
    r.reach_rel_err = std::abs(sim_reach - m.life_span()) / sim_reach;

    double sup = 0.0;
    for (size_t n = 0; n < total.size(); ++n) {
        double a_theory = m.shares_at_epoch_real(double(n)).first;
        sup = std::max(sup, std::abs(total[n] - a_theory));
    }
    r.sup_rel_err_total = sup / sim_max_total;
    return r;
}

namespace {

comparison_report compare_with_model(const embedded_trace& t, const theory_model& m,
                                     int64_t delta) {
    if (classify_path(t, delta) != path_class::viral)
        throw std::invalid_argument("compare_trace: trace is not viral under the "
                                    "given threshold");
    std::vector<double> total(t.total.begin(), t.total.end());
    std::vector<double> current(t.current.begin(), t.current.end());
    return compare_curves(total, current, m);
}

} // namespace

comparison_report compare_trace(const embedded_trace& t, const tef_params& p,
                                int64_t a0, int64_t delta) {
    theory_model m(p, a0);
    return compare_with_model(t, m, delta);
}

std::vector<rho_report> rho_sweep(const graph& g, const std::vector<double>& rhos,
                                  const tef_params& p_unit, int64_t runs,
                                  uint64_t base_seed, int64_t a0, int64_t delta,
                                  unsigned jobs) {
    if (rhos.empty())
        throw std::invalid_argument("rho_sweep: no rho values");
    if (runs < 1)
        throw std::invalid_argument("rho_sweep: runs must be >= 1");

    std::vector<rho_report> rows;
    rows.reserve(rhos.size());
    for (double rho : rhos) {
        if (!(rho > 0) || rho > 1)
            throw std::invalid_argument("rho_sweep: rho values must lie in (0,1]");
        theory_model model(p_unit.with_rho(rho), a0);

        rho_report row;
        row.rho = rho;
        row.runs = runs;

        sim_config cfg;
        cfg.rho = rho;
        cfg.seed_count = a0;
        cfg.rng_seed = base_seed;

        simulate_batch_apply(g, cfg, runs, jobs,
                             [&](int64_t, embedded_trace&& t) {
            if (classify_path(t, delta) != path_class::viral)
                return;
            comparison_report r = compare_with_model(t, model, delta);
            ++row.viral_runs;
            row.worst.peak_rel_err = std::max(row.worst.peak_rel_err, r.peak_rel_err);
            row.worst.reach_rel_err = std::max(row.worst.reach_rel_err, r.reach_rel_err);
            row.worst.sup_rel_err_total = std::max(row.worst.sup_rel_err_total,
                                                   r.sup_rel_err_total);
            row.worst.epochs_compared = std::max(row.worst.epochs_compared,
                                                 r.epochs_compared);
            row.mean.peak_rel_err += r.peak_rel_err;
            row.mean.reach_rel_err += r.reach_rel_err;
            row.mean.sup_rel_err_total += r.sup_rel_err_total;
            row.mean.epochs_compared += r.epochs_compared;
        });

        if (row.viral_runs == 0) {
            row.inconclusive = true;
        } else {
            row.mean.peak_rel_err /= double(row.viral_runs);
            row.mean.reach_rel_err /= double(row.viral_runs);
            row.mean.sup_rel_err_total /= double(row.viral_runs);
            row.mean.epochs_compared /= row.viral_runs;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_report_csv(const std::vector<rho_report>& rows, std::ostream& out) {
    out << "rho,peak_rel_err,reach_rel_err,sup_rel_err_total\n";
    for (const auto& r : rows) {
        out << g17(r.rho) << ',';
        if (r.inconclusive) {
            out << ",,\n";
            continue;
        }
        out << g17(r.worst.peak_rel_err) << ',' << g17(r.worst.reach_rel_err)
            << ',' << g17(r.worst.sup_rel_err_total) << '\n';
    }
    if (!out)
        throw std::runtime_error("report write failure");
}

void write_report_summary(const std::vector<rho_report>& rows, std::ostream& out) {
    for (const auto& r : rows) {
        out << "rho " << g17(r.rho) << ": " << r.viral_runs << "/" << r.runs
            << " viral";
        if (r.inconclusive) {
            out << " -- inconclusive (no viral trace)\n";
            continue;
        }
        out << "\n  worst: peak " << g17(r.worst.peak_rel_err)
            << "  reach " << g17(r.worst.reach_rel_err)
            << "  sup_total " << g17(r.worst.sup_rel_err_total) << '\n';
        out << "  mean:  peak " << g17(r.mean.peak_rel_err)
            << "  reach " << g17(r.mean.reach_rel_err)
            << "  sup_total " << g17(r.mean.sup_rel_err_total) << '\n';
    }
    if (!out)
        throw std::runtime_error("report write failure");
}

} // namespace stpbp
