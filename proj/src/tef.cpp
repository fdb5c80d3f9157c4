#include "stpbp/tef.hpp"
#include "stpbp/io_util.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace stpbp {

double tef_eval(const tef_params& p, double a) {
    if (a < 0)
        throw std::invalid_argument("tef_eval: total shares must be nonnegative");
    double base = a <= p.a_bar ? p.m_bar - p.kappa1 * a
                               : p.m_tilde() - p.kappa2 * a;
    double v = p.rho * base;
    return v > 0.0 ? v : 0.0;
}

namespace {

std::map<std::string, double> read_kv(std::istream& in) {
    std::map<std::string, double> kv;
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config parse error at line "
                                     + std::to_string(lineno));
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::runtime_error("config parse error at line "
                                     + std::to_string(lineno));
        char* endp = nullptr;
        double x = std::strtod(val.c_str(), &endp);
        if (endp != val.c_str() + val.size())
            throw std::runtime_error("config value is not numeric at line "
                                     + std::to_string(lineno));
        kv[key] = x;
    }
    return kv;
}

} // namespace

tef_params read_tef_config(std::istream& in) {
    auto kv = read_kv(in);
    tef_params p;
    auto take = [&](const char* key, double& out, bool required) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (required)
                throw std::runtime_error(std::string("config is missing key ") + key);
            return;
        }
        out = it->second;
        kv.erase(it);
    };
    take("m_bar", p.m_bar, true);
    take("kappa1", p.kappa1, true);
    take("kappa2", p.kappa2, true);
    take("a_bar", p.a_bar, true);
    take("rho", p.rho, false);
    if (!kv.empty())
        throw std::runtime_error("config has unknown key " + kv.begin()->first);
    return p;
}

tef_params read_tef_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return read_tef_config(in);
}

void write_tef_config(const tef_params& p, std::ostream& out) {
    out << "m_bar=" << g17(p.m_bar) << '\n'
        << "kappa1=" << g17(p.kappa1) << '\n'
        << "kappa2=" << g17(p.kappa2) << '\n'
        << "a_bar=" << g17(p.a_bar) << '\n'
        << "rho=" << g17(p.rho) << '\n';
    if (!out)
        throw std::runtime_error("config write failure");
}

binned_tef::binned_tef(int64_t width) : bin_width(width) {
    if (width < 1)
        throw std::invalid_argument("binned_tef: bin_width must be >= 1");
}

void binned_tef::add_transition(int64_t total_before, int64_t gamma) {
    if (total_before < 0 || gamma < 0)
        throw std::invalid_argument("binned_tef: negative transition data");
    size_t b = size_t(total_before / bin_width);
    if (b >= bins.size())
        bins.resize(b + 1);
    ++bins[b].transitions;
    bins[b].forward_sum += gamma;
}

void binned_tef::add_trace(const embedded_trace& t) {
    for (size_t n = 0; n < t.forwards.size(); ++n)
        add_transition(t.total[n], t.forwards[n]);
}

void binned_tef::merge(const binned_tef& other) {
    if (other.bin_width != bin_width)
        throw std::invalid_argument("binned_tef: merging mismatched bin widths");
    if (other.bins.size() > bins.size())
        bins.resize(other.bins.size());
    for (size_t b = 0; b < other.bins.size(); ++b) {
        bins[b].transitions += other.bins[b].transitions;
        bins[b].forward_sum += other.bins[b].forward_sum;
    }
}

double binned_tef::bin_center(size_t b) const {
    return (double(b) + 0.5) * double(bin_width);
}

std::optional<double> binned_tef::estimate(size_t b) const {
    if (b >= bins.size() || bins[b].transitions == 0)
        return std::nullopt;
    return double(bins[b].forward_sum) / double(bins[b].transitions);
}

binned_tef estimate_tef(const std::vector<embedded_trace>& traces, int64_t bin_width) {
    if (traces.empty())
        throw std::invalid_argument("estimate_tef: no traces");
    binned_tef b(bin_width);
    for (const auto& t : traces)
        b.add_trace(t);
    return b;
}

void write_binned_csv(const binned_tef& b, std::ostream& out) {
    out << "bin_lo,bin_hi,transitions,forward_sum,estimate\n";
    for (size_t i = 0; i < b.bins.size(); ++i) {
        out << i * uint64_t(b.bin_width) << ',' << (i + 1) * uint64_t(b.bin_width)
            << ',' << b.bins[i].transitions << ',' << b.bins[i].forward_sum << ',';
        if (auto est = b.estimate(i))
            out << g17(*est);
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("bin table write failure");
}

binned_tef read_binned_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("bin table is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "bin_lo,bin_hi,transitions,forward_sum,estimate")
        throw std::runtime_error("bin table has unexpected header: " + line);

    std::vector<std::array<int64_t, 4>> rows;
    uint64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::array<int64_t, 4> r{};
        size_t start = 0;
        int nf = 0;
        for (size_t i = 0; i <= line.size(); ++i) {
            if (i != line.size() && line[i] != ',')
                continue;
            std::string field = line.substr(start, i - start);
            start = i + 1;
            if (nf < 4) {
                auto res = std::from_chars(field.data(), field.data() + field.size(), r[size_t(nf)]);
                if (res.ec != std::errc() || res.ptr != field.data() + field.size())
                    throw std::runtime_error("bin table parse error at line "
                                             + std::to_string(lineno));
            }
            // the estimate column is redundant (ratio of two columns); ignored
            ++nf;
        }
        if (nf != 5)
            throw std::runtime_error("bin table parse error at line "
                                     + std::to_string(lineno));
        rows.push_back(r);
    }
    if (rows.empty())
        throw std::runtime_error("bin table has no rows");

    int64_t width = rows[0][1] - rows[0][0];
    binned_tef b(width);
    for (const auto& r : rows) {
        if (r[1] - r[0] != width || r[0] % width != 0)
            throw std::runtime_error("bin table rows have inconsistent bounds");
        size_t idx = size_t(r[0] / width);
        if (idx >= b.bins.size())
            b.bins.resize(idx + 1);
        b.bins[idx].transitions += r[2];
        b.bins[idx].forward_sum += r[3];
    }
    return b;
}

namespace {

// 3x3 linear solve, partial pivoting; returns false on (near) singularity
bool solve3(double a[3][3], double rhs[3], double out[3]) {
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[idx[r]][col]) > std::abs(a[idx[piv]][col]))
                piv = r;
        std::swap(idx[col], idx[piv]);
        double d = a[idx[col]][col];
        if (std::abs(d) < 1e-300)
            return false;
        for (int r = col + 1; r < 3; ++r) {
            double f = a[idx[r]][col] / d;
            for (int c = col; c < 3; ++c)
                a[idx[r]][c] -= f * a[idx[col]][c];
            rhs[idx[r]] -= f * rhs[idx[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double s = rhs[idx[col]];
        for (int c = col + 1; c < 3; ++c)
            s -= a[idx[col]][c] * out[c];
        double d = a[idx[col]][col];
        if (std::abs(d) < 1e-300)
            return false;
        out[col] = s / d;
    }
    return true;
}

struct fit_point {
    double x;
    double y;
    double w;
};

/* Continuity-constrained two-segment weighted least squares with the
 * breakpoint fixed at xb, via the basis
 *   y = b0 + b1*min(x, xb) + b2*max(x - xb, 0),
 * which is continuous at xb by construction. x is rescaled to [0,1] before
 * forming normal equations so the 3x3 solve stays well conditioned.
 */
bool wls_candidate(const std::vector<fit_point>& pts, double xb, double xscale,
                   double beta[3], double* sse) {
    double ata[3][3] = {{0}};
    double atb[3] = {0};
    double xbs = xb / xscale;
    for (const auto& p : pts) {
        double xs = p.x / xscale;
        double phi[3] = {1.0, std::min(xs, xbs), std::max(xs - xbs, 0.0)};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                ata[i][j] += p.w * phi[i] * phi[j];
            atb[i] += p.w * phi[i] * p.y;
        }
    }
    double sol[3];
    if (!solve3(ata, atb, sol))
        return false;
    beta[0] = sol[0];
    beta[1] = sol[1] / xscale;
    beta[2] = sol[2] / xscale;
    double err = 0;
    for (const auto& p : pts) {
        double pred = beta[0] + beta[1] * std::min(p.x, xb)
            + beta[2] * std::max(p.x - xb, 0.0);
        err += p.w * (p.y - pred) * (p.y - pred);
    }
    *sse = err;
    return true;
}

} // namespace

fit_report fit_two_slope(const binned_tef& b, int64_t min_transitions) {
    if (min_transitions < 1)
        throw std::invalid_argument("fit_two_slope: min_transitions must be >= 1");

    std::vector<fit_point> pts;
    for (size_t i = 0; i < b.bins.size(); ++i) {
        if (b.bins[i].transitions < min_transitions)
            continue;
        pts.push_back({b.bin_center(i), *b.estimate(i),
                       double(b.bins[i].transitions)});
    }
    if (pts.size() < 4)
        throw std::invalid_argument("fit_two_slope: need at least 4 bins with "
                                    + std::to_string(min_transitions) + "+ transitions");

    double xscale = pts.back().x;
    for (const auto& p : pts)
        xscale = std::max(xscale, p.x);

    // weighted mean estimate, used to scale the tie tolerance
    double wsum = 0, ysum = 0;
    for (const auto& p : pts) {
        wsum += p.w;
        ysum += p.w * p.y * p.y;
    }
    const double obj_scale = std::max(ysum, 1.0);
    const double tie_tol = 1e-12 * obj_scale;

    fit_report best;
    fit_report best_any;
    bool have_best = false, have_any = false;
    int64_t tried = 0, feasible = 0;

    for (const auto& cand : pts) {
        double xb = cand.x;
        // identifiability: two points on each side, the candidate itself
        // counting toward the left piece
        size_t lo = 0, hi = 0;
        for (const auto& p : pts) {
            lo += p.x <= xb;
            hi += p.x > xb;
        }
        if (lo < 2 || hi < 2)
            continue;
        ++tried;
        double beta[3], sse;
        if (!wls_candidate(pts, xb, xscale, beta, &sse))
            continue;
        tef_params fitted;
        fitted.m_bar = beta[0];
        fitted.kappa1 = -beta[1];
        fitted.kappa2 = -beta[2];
        fitted.a_bar = xb;
        fitted.rho = 1.0;

        if (!have_any || sse < best_any.objective - tie_tol
            || (sse < best_any.objective + tie_tol && xb < best_any.params.a_bar)) {
            best_any.params = fitted;
            best_any.objective = sse;
            have_any = true;
        }

        // admissible shape: both slopes negative, first at least as steep;
        // the relative tolerance admits single-slope data within rounding
        bool ok = fitted.kappa2 > 0.0
            && fitted.kappa1 >= fitted.kappa2 * (1.0 - 1e-9);
        if (!ok)
            continue;
        ++feasible;
        if (!have_best || sse < best.objective - tie_tol
            || (sse < best.objective + tie_tol && xb < best.params.a_bar)) {
            best.params = fitted;
            best.objective = sse;
            have_best = true;
        }
    }

    best.bins_used = int64_t(pts.size());
    best.candidates_tried = tried;
    best.candidates_feasible = feasible;
    best_any.bins_used = best.bins_used;
    best_any.candidates_tried = tried;
    best_any.candidates_feasible = feasible;

    if (!have_best) {
        if (!have_any)
            throw fit_error("fit_two_slope: no identifiable breakpoint candidate",
                            fit_report{});
        throw fit_error("fit_two_slope: no candidate satisfies the slope "
                        "constraints kappa1 >= kappa2 > 0", best_any);
    }
    return best;
}

} // namespace stpbp
