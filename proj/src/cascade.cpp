#include "stpbp/cascade.hpp"
#include "stpbp/rng.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace stpbp {

void sim_config::validate() const {
    if (!(rho > 0.0) || rho > 1.0)
        throw std::invalid_argument("sim_config: rho must be in (0,1]");
    if (seed_count < 1)
        throw std::invalid_argument("sim_config: seed_count must be >= 1");
    if (!(lambda > 0.0))
        throw std::invalid_argument("sim_config: lambda must be positive");
    if (max_epochs < 0)
        throw std::invalid_argument("sim_config: max_epochs must be nonnegative");
}

namespace {

std::vector<uint32_t> draw_seeds(rng& r, uint32_t node_count, int64_t a0) {
    std::vector<uint32_t> seeds;
    seeds.reserve(size_t(a0));
    if (a0 * 2 >= int64_t(node_count)) {
        // dense case: partial Fisher-Yates over all ids
        std::vector<uint32_t> ids(node_count);
        std::iota(ids.begin(), ids.end(), 0u);
        for (int64_t i = 0; i < a0; ++i) {
            uint64_t j = i + r.next_below(node_count - uint64_t(i));
            std::swap(ids[size_t(i)], ids[size_t(j)]);
            seeds.push_back(ids[size_t(i)]);
        }
        return seeds;
    }
    std::vector<char> taken(node_count, 0);
    while (int64_t(seeds.size()) < a0) {
        uint32_t v = uint32_t(r.next_below(node_count));
        if (!taken[v]) {
            taken[v] = 1;
            seeds.push_back(v);
        }
    }
    return seeds;
}

} // namespace

embedded_trace simulate_cascade(const graph& g, const sim_config& cfg) {
    cfg.validate();
    const uint32_t n_nodes = g.node_count();
    if (cfg.seed_count > int64_t(n_nodes))
        throw std::invalid_argument("simulate_cascade: seed_count exceeds node count");

    const int64_t cap = cfg.max_epochs > 0 ? cfg.max_epochs
                                           : int64_t(n_nodes) + cfg.seed_count;
    rng r(cfg.rng_seed);

    std::vector<char> seen(n_nodes, 0);
    std::vector<uint32_t> pending = draw_seeds(r, n_nodes, cfg.seed_count);
    for (uint32_t v : pending)
        seen[v] = 1;

    embedded_trace t;
    t.seed_count = cfg.seed_count;
    int64_t a = cfg.seed_count;
    int64_t c = cfg.seed_count;
    double tau = 0.0;
    t.total.push_back(a);
    t.current.push_back(c);
    t.wake_times.push_back(tau);

    for (int64_t n = 1; c > 0 && n <= cap; ++n) {
        tau += r.exponential(cfg.lambda * double(c));
        uint64_t idx = r.next_below(pending.size());
        uint32_t waker = pending[idx];
        pending[idx] = pending.back();
        pending.pop_back();

        int64_t gamma = 0;
        for (uint32_t v : g.adjacency[waker]) {
            if (r.bernoulli(cfg.rho) && !seen[v]) {
                seen[v] = 1;
                pending.push_back(v);
                ++gamma;
            }
        }
        a += gamma;
        c += gamma - 1;
        t.total.push_back(a);
        t.current.push_back(c);
        t.forwards.push_back(gamma);
        t.wake_times.push_back(tau);
    }
    t.truncated = c > 0;
    return t;
}

embedded_trace simulate_cascade_run(const graph& g, const sim_config& cfg,
                                    uint64_t run_index) {
    sim_config per_run = cfg;
    per_run.rng_seed = rng::derive_seed(cfg.rng_seed, run_index);
    return simulate_cascade(g, per_run);
}

void simulate_batch_apply(const graph& g, const sim_config& cfg, int64_t runs,
                          unsigned jobs,
                          const std::function<void(int64_t, embedded_trace&&)>& consume) {
    if (runs < 1)
        throw std::invalid_argument("simulate_batch: runs must be >= 1");
    cfg.validate();
    if (jobs <= 1 || runs == 1) {
        for (int64_t i = 0; i < runs; ++i)
            consume(i, simulate_cascade_run(g, cfg, uint64_t(i)));
        return;
    }

    unsigned workers = std::min<unsigned>(jobs, unsigned(std::min<int64_t>(runs, 256)));
    // workers run ahead of the consumer by a bounded window so memory stays
    // flat while the consumer still sees traces in run order
    const int64_t window = int64_t(workers) * 4 + 8;
    std::mutex m;
    std::condition_variable room, ready;
    std::map<int64_t, embedded_trace> finished;
    std::atomic<int64_t> next{0};
    int64_t consumed = 0;
    std::exception_ptr failure;

    auto work = [&]() {
        for (;;) {
            int64_t i = next.fetch_add(1);
            if (i >= runs)
                return;
            try {
                embedded_trace t = simulate_cascade_run(g, cfg, uint64_t(i));
                std::unique_lock<std::mutex> lock(m);
                room.wait(lock, [&] { return failure || i < consumed + window; });
                if (failure)
                    return;
                finished.emplace(i, std::move(t));
                ready.notify_all();
            } catch (...) {
                std::unique_lock<std::mutex> lock(m);
                if (!failure)
                    failure = std::current_exception();
                ready.notify_all();
                room.notify_all();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(work);

    {
        std::unique_lock<std::mutex> lock(m);
        while (consumed < runs) {
            ready.wait(lock, [&] { return failure || finished.count(consumed) > 0; });
            if (failure)
                break;
            embedded_trace t = std::move(finished.begin()->second);
            finished.erase(finished.begin());
            int64_t i = consumed;
            lock.unlock();
            consume(i, std::move(t));
            lock.lock();
            ++consumed;
            room.notify_all();
        }
    }
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

std::vector<embedded_trace> simulate_batch(const graph& g, const sim_config& cfg,
                                           int64_t runs, unsigned jobs) {
    if (runs < 1)
        throw std::invalid_argument("simulate_batch: runs must be >= 1");
    cfg.validate();
    std::vector<embedded_trace> out(static_cast<size_t>(runs));
    if (jobs <= 1) {
        for (int64_t i = 0; i < runs; ++i)
            out[size_t(i)] = simulate_cascade_run(g, cfg, uint64_t(i));
        return out;
    }
    unsigned workers = std::min<unsigned>(jobs, unsigned(std::min<int64_t>(runs, 256)));
    std::atomic<int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        for (;;) {
            int64_t i = next.fetch_add(1);
            if (i >= runs)
                return;
            try {
                out[size_t(i)] = simulate_cascade_run(g, cfg, uint64_t(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

} // namespace stpbp
