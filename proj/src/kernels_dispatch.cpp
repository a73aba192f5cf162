#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kernels_internal.hpp"

namespace stef::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& table(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return scalar_table();
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            if (avx2_available()) return avx2_table();
#endif
            throw std::runtime_error("avx2 kernels requested but not supported on this CPU");
    }
    throw std::logic_error("unknown kernel ISA");
}

namespace {

const KernelTable& resolve() {
    if (const char* env = std::getenv("STEF_KERNEL_ISA")) {
        const std::string want(env);
        if (want == "scalar") return scalar_table();
        if (want == "avx2") return table(Isa::avx2);
        throw std::runtime_error("STEF_KERNEL_ISA must be 'scalar' or 'avx2', got '" + want + "'");
    }
    return avx2_available() ? table(Isa::avx2) : scalar_table();
}

int resolve_threads() {
    if (const char* env = std::getenv("STEF_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& t = resolve();
    return t;
}

int thread_count() {
    static const int n = resolve_threads();
    return n;
}

void parallel_rows(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    const int workers = thread_count();
    // Not worth spawning threads for small row counts.
    if (workers <= 1 || n < 64) {
        if (n > 0) fn(0, n);
        return;
    }
    const int64_t parts = std::min<int64_t>(workers, n);
    const int64_t chunk = (n + parts - 1) / parts;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(parts));
    for (int64_t p = 0; p < parts; ++p) {
        const int64_t lo = p * chunk;
        const int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace stef::kernels
