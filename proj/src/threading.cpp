#include "classbd/threading.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace classbd {

int worker_threads() {
    static const int cached = [] {
        const char* env = std::getenv("CLASSBD_THREADS");
        if (!env) return 1;
        int n = std::atoi(env);
        if (n < 1) return 1;
        unsigned hw = std::thread::hardware_concurrency();
        if (hw > 0 && n > static_cast<int>(hw)) n = static_cast<int>(hw);
        return n;
    }();
    return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = worker_threads();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

} // namespace classbd
