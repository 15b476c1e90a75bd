#pragma once

// Deterministic parallel loop over an index range. Results must be written
// into preallocated per-index slots, so the merge order never depends on
// scheduling. PBM_THREADS caps the worker count.

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace pbm {

inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw > 0 ? static_cast<int>(hw) : 1;
    if (const char* env = std::getenv("PBM_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0 && cap < n) n = cap;
    }
    return n;
}

template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    int workers = worker_count();
    if (workers <= 1 || count < 4) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors;
    std::size_t chunk = (count + workers - 1) / workers;
    errors.resize(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, w, &body, &errors] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace pbm
