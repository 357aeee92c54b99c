// Serial vs OpenMP timings for the data-parallel kernels.
//   kernels_bench [--rows N] [--reps R]

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "ssa/kernels.hpp"
#include "ssa/synthetic.hpp"

namespace k = ssa::kernels;

namespace {

double best_of(int reps, const std::function<void()>& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-24s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t rows = 200000;
    int reps = 5;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--rows")) rows = std::strtoull(argv[i + 1], nullptr, 10);
        if (!std::strcmp(argv[i], "--reps")) reps = std::atoi(argv[i + 1]);
    }
    std::printf("threads: %d  rows: %zu  reps: %d\n", k::max_threads(), rows, reps);

    ssa::SyntheticRng rng(7);
    constexpr std::size_t dim = 30;
    std::vector<double> data(rows * dim), query(dim), weights(dim, 1.0);
    for (auto& v : data) v = rng.uniform();
    for (auto& v : query) v = rng.uniform();

    std::vector<double> a(rows), b(rows);
    const double ts = best_of(reps, [&] { k::serial::weighted_sq_distances(data, dim, query, weights, a); });
    const double tp = best_of(reps, [&] { k::weighted_sq_distances(data, dim, query, weights, b); });
    report("weighted_sq_distances", ts, tp, a == b);

    constexpr std::size_t pdim = 8, centroids = 16;
    std::vector<double> points(rows * pdim), cents(centroids * pdim);
    for (auto& v : points) v = 1.0 + 5.0 * rng.uniform();
    for (auto& v : cents) v = 1.0 + 5.0 * rng.uniform();
    std::vector<std::size_t> as(rows), ap(rows);
    std::vector<double> ds(rows), dp(rows);
    const double cs = best_of(reps, [&] { k::serial::assign_nearest(points, pdim, cents, as, ds); });
    const double cp = best_of(reps, [&] { k::assign_nearest(points, pdim, cents, ap, dp); });
    report("assign_nearest", cs, cp, as == ap && ds == dp);

    const std::size_t meetings = std::min<std::size_t>(rows / 20, 20000);
    std::vector<std::int64_t> starts(meetings), ends(meetings);
    for (std::size_t i = 0; i < meetings; ++i) {
        starts[i] = static_cast<std::int64_t>(rng.below(60 * 24 * 365));
        ends[i] = starts[i] + 15 + static_cast<std::int64_t>(rng.below(180));
    }
    std::vector<std::pair<std::size_t, std::size_t>> ps, pp;
    const double os = best_of(reps, [&] { ps = k::serial::overlapping_pairs(starts, ends); });
    const double op = best_of(reps, [&] { pp = k::overlapping_pairs(starts, ends); });
    report("overlapping_pairs", os, op, ps == pp);
    return 0;
}
