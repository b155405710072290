#pragma once

// Thread-pool-free parallel_for over an index range.  Each index writes only
// to its own output slot, so results are independent of scheduling.  Worker
// count is capped by the POTTS_THREADS environment variable.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace potts {

inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("POTTS_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v < long(hw)) return int(v);
        if (v >= 1) return int(v);
    }
    return int(hw);
}

inline void parallel_for(size_t n, const std::function<void(size_t)>& body) {
    int workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace potts
