#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stpbp/abstract.hpp"
#include "stpbp/cascade.hpp"
#include "stpbp/graph.hpp"
#include "stpbp/io_util.hpp"
#include "stpbp/tef.hpp"
#include "stpbp/theory.hpp"
#include "stpbp/trace.hpp"
#include "stpbp/validate.hpp"

namespace fs = std::filesystem;
using namespace stpbp;

namespace {

/* key=value config support. CLI11 only consumes config files on the root
 * app, not on subcommands, so expand the file into long options ourselves:
 * every key becomes --key=value appended after the explicit arguments, and
 * keys already present on the command line are dropped so flags win.
 */
std::vector<std::string> splice_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
        if (key == "config")
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": config files do not nest");
        bool given = false;
        for (const auto& a : args)
            given = given || a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
        if (!given) args.push_back("--" + key + "=" + val);
    }
    return args;
}

// STPBP_OUT_DIR reroots relative output paths; absolute paths win
fs::path out_path(const std::string& p) {
    fs::path path(p);
    const char* base = std::getenv("STPBP_OUT_DIR");
    if (base && *base && path.is_relative()) return fs::path(base) / path;
    return path;
}

void ensure_parent(const fs::path& p) {
    auto dir = p.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
}

graph load_graph_file(const std::string& path, bool directed) {
    load_report rep;
    graph g = load_edge_list_file(path, directed, &rep);
    std::cerr << "loaded " << path << ": " << g.node_count() << " nodes, "
              << g.edge_count() << " edges";
    if (rep.self_loops_dropped || rep.duplicates_dropped)
        std::cerr << " (dropped " << rep.self_loops_dropped << " self loops, "
                  << rep.duplicates_dropped << " duplicates)";
    std::cerr << "\n";
    return g;
}

tef_params tef_from_flags(const std::string& path, const CLI::Option* rho_opt,
                          double rho) {
    tef_params p = read_tef_config_file(path);
    if (rho_opt->count()) p.rho = rho;
    return p;
}

std::string trace_name(int64_t run) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%04lld.csv", (long long)run);
    return buf;
}

struct simulate_args {
    std::string graph_path;
    bool directed = false;
    bool abstract_mode = false;
    std::string offspring = "poisson";
    int64_t trials = 0;
    std::string tef_path;
    double rho = 1.0;
    int64_t seeds = 2;
    double lambda = 1.0;
    uint64_t seed = 0;
    int64_t runs = 1;
    int64_t max_epochs = 0;
    unsigned jobs = 1;
    std::string out_dir = "traces";
};

int cmd_simulate(const simulate_args& a, const CLI::Option* rho_opt) {
    sim_config cfg;
    cfg.rho = a.rho;
    cfg.seed_count = a.seeds;
    cfg.lambda = a.lambda;
    cfg.rng_seed = a.seed;
    cfg.max_epochs = a.max_epochs;
    cfg.validate();

    fs::path dir = out_path(a.out_dir);
    fs::create_directories(dir);

    auto emit = [&](int64_t run, const embedded_trace& t) {
        write_file_atomic((dir / trace_name(run)).string(),
                          [&](std::ostream& os) { write_trace_csv(t, os); });
        if ((run + 1) % 100 == 0 || run + 1 == a.runs)
            std::cerr << (run + 1) << "/" << a.runs << "\n";
    };

    if (a.abstract_mode) {
        if (a.max_epochs <= 0)
            throw CLI::ValidationError("--max-epochs",
                                       "abstract mode needs a positive epoch cap");
        offspring_model model;
        model.tef = tef_from_flags(a.tef_path, rho_opt, a.rho);
        cfg.rho = 1.0;  // forwarding prob lives in the tef scale here
        if (a.offspring == "binomial") {
            if (a.trials <= 0)
                throw CLI::ValidationError("--trials",
                                           "binomial offspring needs --trials > 0");
            model.kind = offspring_kind::binomial;
            model.trial_count = a.trials;
        }
        for (int64_t r = 0; r < a.runs; ++r)
            emit(r, simulate_abstract_run(model, cfg, uint64_t(r)));
    } else {
        graph g = load_graph_file(a.graph_path, a.directed);
        simulate_batch_apply(g, cfg, a.runs, a.jobs,
                             [&](int64_t run, embedded_trace&& t) { emit(run, t); });
    }
    std::cout << "wrote " << a.runs << " trace file" << (a.runs == 1 ? "" : "s")
              << " to " << dir.string() << "\n";
    return 0;
}

struct estimate_args {
    std::string trace_dir;
    int64_t bin_width = 1000;
    int64_t min_transitions = 30;
    std::string out_bins = "bins.csv";
    std::string out_params = "tef_fit.cfg";
};

int cmd_estimate_fit(const estimate_args& a) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.trace_dir))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("no .csv trace files in " + a.trace_dir);

    binned_tef acc(a.bin_width);
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw std::runtime_error("cannot open " + f.string());
        acc.add_trace(read_trace_csv(in));
    }

    int64_t populated = 0, sparse = 0;
    double scale = 0.0;
    for (size_t b = 0; b < acc.bins.size(); ++b) {
        if (acc.bins[b].transitions == 0) continue;
        ++populated;
        if (acc.bins[b].transitions < a.min_transitions) ++sparse;
        else {
            double y = *acc.estimate(b);
            scale += double(acc.bins[b].transitions) * y * y;
        }
    }
    std::cout << files.size() << " traces, " << populated << " populated bins (width "
              << a.bin_width << ")\n";
    if (sparse)
        std::cout << "warning: " << sparse << " populated bins below "
                  << a.min_transitions << " transitions, excluded from the fit\n";

    fs::path bins_path = out_path(a.out_bins);
    ensure_parent(bins_path);
    write_file_atomic(bins_path.string(),
                      [&](std::ostream& os) { write_binned_csv(acc, os); });

    fit_report rep;
    try {
        rep = fit_two_slope(acc, a.min_transitions);
    } catch (const fit_error& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        const tef_params& u = e.unconstrained_best.params;
        std::cerr << "unconstrained best: m_bar=" << g17(u.m_bar)
                  << " kappa1=" << g17(u.kappa1) << " kappa2=" << g17(u.kappa2)
                  << " a_bar=" << g17(u.a_bar)
                  << " objective=" << g17(e.unconstrained_best.objective) << "\n";
        return 1;
    }

    std::cout << "fit over " << rep.bins_used << " bins, " << rep.candidates_feasible
              << "/" << rep.candidates_tried << " feasible breakpoints\n";
    std::cout << "m_bar=" << g17(rep.params.m_bar) << " kappa1=" << g17(rep.params.kappa1)
              << " kappa2=" << g17(rep.params.kappa2) << " a_bar=" << g17(rep.params.a_bar)
              << " objective=" << g17(rep.objective) << "\n";
    if (rep.objective <= 1e-12 * scale)
        std::cout << "fit reproduces the binned estimates exactly\n";

    fs::path params_path = out_path(a.out_params);
    ensure_parent(params_path);
    write_file_atomic(params_path.string(),
                      [&](std::ostream& os) { write_tef_config(rep.params, os); });
    std::cout << "wrote " << bins_path.string() << " and " << params_path.string() << "\n";
    return 0;
}

struct theory_args {
    std::string tef_path;
    double rho = 1.0;
    int64_t a0 = 2;
    double t_max = 0.0;
    int64_t samples = 1000;
    int64_t n_max = 0;
    bool epochs_only = false;
    std::string out_curves = "theory_t.csv";
    std::string out_epochs = "theory_n.csv";
    std::string out_summary = "theory_summary.txt";
};

int cmd_theory(const theory_args& a, const CLI::Option* rho_opt) {
    tef_params p = tef_from_flags(a.tef_path, rho_opt, a.rho);
    theory_model m(p, a.a0);
    theory_summary s = m.summary();

    int64_t n_max = a.n_max > 0 ? a.n_max : int64_t(std::ceil(s.life_span_epochs));
    fs::path epochs_path = out_path(a.out_epochs);
    ensure_parent(epochs_path);
    write_file_atomic(epochs_path.string(),
                      [&](std::ostream& os) { write_epoch_curve_csv(m, n_max, os); });

    if (!a.epochs_only) {
        double t_max = a.t_max > 0 ? a.t_max : s.tau_e;
        fs::path curves_path = out_path(a.out_curves);
        ensure_parent(curves_path);
        write_file_atomic(curves_path.string(), [&](std::ostream& os) {
            write_theory_curves_csv(m, t_max, a.samples, os);
        });
        fs::path summary_path = out_path(a.out_summary);
        ensure_parent(summary_path);
        write_file_atomic(summary_path.string(),
                          [&](std::ostream& os) { write_summary_kv(s, os); });
        std::cout << "wrote " << curves_path.string() << ", " << epochs_path.string()
                  << ", " << summary_path.string() << "\n";
    } else {
        std::cout << "wrote " << epochs_path.string() << "\n";
    }
    write_summary_kv(s, std::cout);
    return 0;
}

struct compare_args {
    std::string graph_path;
    bool directed = false;
    std::string tef_path;
    std::vector<double> rhos{0.4, 0.6, 1.0};
    int64_t runs = 20;
    uint64_t seed = 0;
    int64_t seeds = 2;
    int64_t delta = 100;
    unsigned jobs = 1;
    std::string out = "report.csv";
};

int cmd_compare(const compare_args& a) {
    graph g = load_graph_file(a.graph_path, a.directed);
    tef_params p = read_tef_config_file(a.tef_path);
    auto rows = rho_sweep(g, a.rhos, p, a.runs, a.seed, a.seeds, a.delta, a.jobs);

    fs::path out = out_path(a.out);
    ensure_parent(out);
    write_file_atomic(out.string(),
                      [&](std::ostream& os) { write_report_csv(rows, os); });
    write_report_summary(rows, std::cout);
    std::cout << "wrote " << out.string() << "\n";

    bool any_viral = false;
    for (const auto& r : rows) any_viral = any_viral || !r.inconclusive;
    if (!any_viral) {
        std::cerr << "inconclusive: no viral run at any rho (delta=" << a.delta << ")\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"saturated branching-process cascade toolkit"};
    app.require_subcommand(1);

    simulate_args sa;
    auto* sim = app.add_subcommand("simulate", "run cascades, write one trace CSV per run");
    std::string cfg_path;
    sim->add_option("--config", cfg_path, "key=value file; flags take precedence");
    auto* sim_graph = sim->add_option("--graph", sa.graph_path, "edge list (.gz ok)");
    sim->add_flag("--directed", sa.directed, "treat edges as directed");
    auto* sim_abs = sim->add_flag("--abstract", sa.abstract_mode,
                                  "graph-free offspring-model chain");
    sim->add_option("--offspring", sa.offspring, "poisson|binomial")
        ->check(CLI::IsMember({"poisson", "binomial"}));
    sim->add_option("--trials", sa.trials, "binomial trial count");
    auto* sim_tef = sim->add_option("--tef", sa.tef_path, "TeF params for --abstract")
                        ->check(CLI::ExistingFile);
    auto* sim_rho = sim->add_option("--rho", sa.rho, "forwarding probability")
                        ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
    sim->add_option("--seeds", sa.seeds, "initial share count a0")->check(CLI::PositiveNumber);
    sim->add_option("--lambda", sa.lambda, "wake rate")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sa.seed, "RNG seed");
    sim->add_option("--runs", sa.runs, "independent runs")->check(CLI::PositiveNumber);
    sim->add_option("--max-epochs", sa.max_epochs, "epoch cap (0 = graph size)")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--jobs", sa.jobs, "worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--out", sa.out_dir, "output directory");
    sim_abs->excludes(sim_graph);
    sim_tef->needs(sim_abs);

    estimate_args ea;
    auto* est = app.add_subcommand("estimate-fit",
                                   "bin forward counts from traces and fit the two-slope curve");
    est->add_option("--config", cfg_path, "key=value file; flags take precedence");
    est->add_option("--traces", ea.trace_dir, "directory of trace CSVs")
        ->required()
        ->check(CLI::ExistingDirectory);
    est->add_option("--bin-width", ea.bin_width, "bin width on the total-share axis")
        ->check(CLI::PositiveNumber);
    est->add_option("--min-transitions", ea.min_transitions, "bin occupancy cutoff for the fit")
        ->check(CLI::PositiveNumber);
    est->add_option("--out-bins", ea.out_bins, "binned estimate CSV");
    est->add_option("--out-params", ea.out_params, "fitted params config");

    theory_args ta;
    auto* th = app.add_subcommand("theory", "closed-form trajectories and summary");
    th->add_option("--config", cfg_path, "key=value file; flags take precedence");
    th->add_option("--tef", ta.tef_path, "TeF params config")
        ->required()
        ->check(CLI::ExistingFile);
    auto* th_rho = th->add_option("--rho", ta.rho, "override the config rho")
                       ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
    th->add_option("--a0", ta.a0, "initial share count")->check(CLI::PositiveNumber);
    th->add_option("--t-max", ta.t_max, "curve horizon (default: extinction time)")
        ->check(CLI::PositiveNumber);
    th->add_option("--samples", ta.samples, "points on the time curve")
        ->check(CLI::Range(int64_t(2), int64_t(1) << 30));
    th->add_option("--n-max", ta.n_max, "epoch horizon (default: life span)")
        ->check(CLI::PositiveNumber);
    th->add_flag("--epochs-only", ta.epochs_only, "emit only the epoch CSV");
    th->add_option("--out-curves", ta.out_curves, "t,a,c CSV");
    th->add_option("--out-epochs", ta.out_epochs, "n,a_n,c_n CSV");
    th->add_option("--out-summary", ta.out_summary, "key=value summary");

    compare_args ca;
    auto* cmp = app.add_subcommand("compare", "simulate and score against the theory curves");
    cmp->add_option("--config", cfg_path, "key=value file; flags take precedence");
    cmp->add_option("--graph", ca.graph_path, "edge list (.gz ok)")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_flag("--directed", ca.directed, "treat edges as directed");
    cmp->add_option("--tef", ca.tef_path, "TeF params at rho=1")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("--rho", ca.rhos, "rho values to sweep")
        ->delimiter(',')
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
    cmp->add_option("--runs", ca.runs, "runs per rho")->check(CLI::PositiveNumber);
    cmp->add_option("--seed", ca.seed, "RNG seed");
    cmp->add_option("--seeds", ca.seeds, "initial share count a0")->check(CLI::PositiveNumber);
    cmp->add_option("--delta", ca.delta, "viral threshold on current shares")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--jobs", ca.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmp->add_option("--out", ca.out, "report CSV");

    std::vector<std::string> args;
    try {
        args = splice_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            if (!sa.abstract_mode && sa.graph_path.empty())
                throw CLI::RequiredError("--graph or --abstract");
            if (sa.abstract_mode && sa.tef_path.empty())
                throw CLI::RequiredError("--tef");
            return cmd_simulate(sa, sim_rho);
        }
        if (est->parsed()) return cmd_estimate_fit(ea);
        if (th->parsed()) return cmd_theory(ta, th_rho);
        if (cmp->parsed()) return cmd_compare(ca);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
