#ifndef SPHERECIR_UTIL_HPP
#define SPHERECIR_UTIL_HPP

/**
 * @file util.hpp
 * @brief Small shared helpers: thread-count selection, a blocking
 *        parallel-for over an index range, and Gauss-Legendre quadrature.
 */

#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace spherecir {

/// Worker count: SPHERECIR_THREADS if set, else hardware concurrency.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("SPHERECIR_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

/// Runs fn(i) for i in [0, count). Work is split into contiguous blocks, one
/// per worker. Results must not depend on the schedule; callers keep outputs
/// per index (or per worker) so any thread count gives identical results.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
inline std::vector<std::pair<double, double>> gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // upward recurrence for P_n(x) and P_{n-1}(x)
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[static_cast<std::size_t>(i)] = {-x, w};  // nodes ascend from -1
        out[static_cast<std::size_t>(n - 1 - i)] = {x, w};
    }
    if (n % 2 == 1) out[static_cast<std::size_t>(n / 2)].first = 0.0;
    return out;
}

/// Integrate fn over [a, b] with an npts-point Gauss-Legendre rule.
template <typename F>
auto gauss_legendre_integrate(F&& fn, double a, double b, int npts)
    -> decltype(fn(a) * 1.0) {
    auto rule = gauss_legendre(npts);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    decltype(fn(a) * 1.0) acc{};
    for (const auto& [x, w] : rule) acc += w * fn(mid + half * x);
    return acc * half;
}

}  // namespace spherecir

#endif  // SPHERECIR_UTIL_HPP
