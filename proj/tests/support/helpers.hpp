#pragma once

// shared test helpers: a preferential-attachment graph generator, weighted
// isotonic regression, and a random-parameter source for property tests

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stpbp/graph.hpp"
#include "stpbp/rng.hpp"
#include "stpbp/tef.hpp"

namespace testsup {

/* Barabasi-Albert style growth: start from a clique on m+1 nodes, then each
 * new node attaches to m distinct endpoints drawn from the repeated-endpoint
 * pool, which weights nodes by degree. Mean degree approaches 2m.
 */
inline stpbp::graph scale_free_graph(uint32_t nodes, uint32_t m, uint64_t seed) {
    if (nodes < m + 2) throw std::invalid_argument("scale_free_graph: too few nodes");
    stpbp::rng r(seed);
    std::vector<uint32_t> pool;
    std::ostringstream edges;
    auto emit = [&](uint32_t u, uint32_t v) {
        edges << u << ' ' << v << '\n';
        pool.push_back(u);
        pool.push_back(v);
    };
    for (uint32_t v = 0; v <= m; ++v)
        for (uint32_t u = 0; u < v; ++u) emit(u, v);
    std::vector<uint32_t> chosen;
    for (uint32_t v = m + 1; v < nodes; ++v) {
        chosen.clear();
        while (chosen.size() < m) {
            uint32_t u = pool[r.next_below(pool.size())];
            bool dup = false;
            for (uint32_t c : chosen) dup = dup || c == u;
            if (!dup) chosen.push_back(u);
        }
        for (uint32_t u : chosen) emit(u, v);
    }
    std::istringstream in(edges.str());
    return stpbp::load_edge_list(in, false);
}

// least-squares nonincreasing fit (pool adjacent violators), weights > 0
inline std::vector<double> isotonic_nonincreasing(const std::vector<double>& y,
                                                  const std::vector<double>& w) {
    struct block {
        double sum, weight;
        size_t len;
    };
    std::vector<block> st;
    for (size_t i = 0; i < y.size(); ++i) {
        st.push_back({y[i] * w[i], w[i], 1});
        while (st.size() > 1) {
            const block& prev = st[st.size() - 2];
            const block& cur = st.back();
            if (prev.sum / prev.weight >= cur.sum / cur.weight) break;
            st[st.size() - 2] = {prev.sum + cur.sum, prev.weight + cur.weight,
                                 prev.len + cur.len};
            st.pop_back();
        }
    }
    std::vector<double> out;
    for (const block& b : st) out.insert(out.end(), b.len, b.sum / b.weight);
    return out;
}

/* Parameter grid with dyadic spacing, so curve values at bin centers are
 * exactly representable through integer forward sums.
 */
inline stpbp::tef_params dyadic_params(stpbp::rng& r) {
    stpbp::tef_params p;
    p.m_bar = double(8192 + r.next_below(16384)) / 1024.0;        // [8, 24)
    p.kappa1 = double(420 + r.next_below(3775)) / double(1 << 22);
    p.kappa2 = double(42 + r.next_below(int64_t(p.kappa1 * (1 << 22) / 2))) /
               double(1 << 22);
    p.a_bar = (double(r.next_below(140)) + 20.5) * 250.0;         // on a center
    p.rho = 1.0;
    return p;
}

// bins holding the exact curve values: transitions are a power of two and
// forward_sum = transitions * value, so estimate() reproduces the value
// with zero rounding when the value is a dyadic rational
inline stpbp::binned_tef exact_bins(const stpbp::tef_params& p, int64_t width,
                                    size_t count) {
    stpbp::binned_tef b(width);
    const int64_t w = int64_t(1) << 22;
    for (size_t k = 0; k < count; ++k) {
        double center = (double(k) + 0.5) * double(width);
        double y = stpbp::tef_eval(p, center);
        double fs = y * double(w);
        if (fs != std::floor(fs))
            throw std::logic_error("exact_bins: curve value is not dyadic");
        b.bins.resize(std::max(b.bins.size(), k + 1));
        b.bins[k].transitions = w;
        b.bins[k].forward_sum = int64_t(fs);
    }
    return b;
}

/* Random strictly-two-slope supercritical parameter set. Rejection keeps
 * the peak meaningfully above zero and the saturation ceiling small enough
 * that epoch-wise scans stay cheap.
 */
inline stpbp::tef_params random_viable_params(stpbp::rng& r, int64_t a0) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        stpbp::tef_params p;
        p.kappa1 = 1e-4 + r.next_double() * 9e-4;
        p.kappa2 = p.kappa1 * (0.1 + 0.4 * r.next_double());
        p.a_bar = 5e3 + r.next_double() * 4.5e4;
        p.rho = 0.3 + 0.7 * r.next_double();
        double m_min = (1.5 + p.kappa1 * p.a_bar * p.rho) / p.rho;
        p.m_bar = m_min * (1.0 + r.next_double());
        if (p.m_bar / p.kappa1 > 3e6 || p.m_tilde() / p.kappa2 > 3e6) continue;
        if (double(a0) >= p.a_bar || double(a0) >= p.m_bar / p.kappa1) continue;
        return p;
    }
    throw std::runtime_error("random_viable_params: rejection ran dry");
}

} // namespace testsup
