#include "drln/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace drln {

namespace {

int initial_thread_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("DRLN_THREADS")) {
        int requested = std::atoi(env);
        if (requested >= 1) return std::min(requested, hw);
    }
    return hw;
}

std::atomic<int> g_threads{initial_thread_count()};

}  // namespace

int thread_count() { return g_threads.load(); }

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    int workers = std::min<std::int64_t>(thread_count(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::int64_t chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
        std::int64_t begin = t * chunk;
        std::int64_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace drln
