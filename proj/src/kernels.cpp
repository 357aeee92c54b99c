#include "ssa/kernels.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssa::kernels {

namespace {

// Shared by both paths so the per-row arithmetic is literally the same code.
inline double row_distance(const double* row, const double* query, const double* weights, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t f = 0; f < dim; ++f) {
        const double diff = row[f] - query[f];
        acc += weights[f] * diff * diff;
    }
    return acc;
}

inline double plain_distance(const double* a, const double* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t f = 0; f < dim; ++f) {
        const double diff = a[f] - b[f];
        acc += diff * diff;
    }
    return acc;
}

inline void nearest_for_point(const double* point, std::span<const double> centroids, std::size_t dim,
                              std::size_t& best, double& best_d) {
    const std::size_t k = centroids.size() / dim;
    best = 0;
    best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const double d = plain_distance(point, centroids.data() + c * dim, dim);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
}

inline bool overlaps(std::int64_t s1, std::int64_t e1, std::int64_t s2, std::int64_t e2) {
    return std::max(s1, s2) < std::min(e1, e2);
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void weighted_sq_distances(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                           std::span<const double> weights, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(out.size());
    const double* data = rows.data();
    const double* q = query.data();
    const double* w = weights.data();
#pragma omp parallel for schedule(static) if (n > 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = row_distance(data + static_cast<std::size_t>(i) * dim, q, w, dim);
    }
}

void assign_nearest(std::span<const double> points, std::size_t dim, std::span<const double> centroids,
                    std::span<std::size_t> assignment, std::span<double> sq_dist) {
    const auto n = static_cast<std::ptrdiff_t>(assignment.size());
#pragma omp parallel for schedule(static) if (n > 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        std::size_t best;
        double best_d;
        nearest_for_point(points.data() + idx * dim, centroids, dim, best, best_d);
        assignment[idx] = best;
        if (!sq_dist.empty()) sq_dist[idx] = best_d;
    }
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(std::span<const std::int64_t> starts,
                                                                   std::span<const std::int64_t> ends) {
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
    std::vector<std::pair<std::size_t, std::size_t>> result;
#pragma omp parallel if (n > 128)
    {
        std::vector<std::pair<std::size_t, std::size_t>> local;
#pragma omp for schedule(dynamic, 8) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(i);
            for (std::size_t b = a + 1; b < starts.size(); ++b) {
                if (overlaps(starts[a], ends[a], starts[b], ends[b])) local.emplace_back(a, b);
            }
        }
#pragma omp critical
        result.insert(result.end(), local.begin(), local.end());
    }
    std::sort(result.begin(), result.end());
    return result;
}

std::vector<std::size_t> k_smallest(std::span<const double> values, std::size_t k) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, idx.size());
    auto less = [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), less);
    idx.resize(k);
    return idx;
}

namespace serial {

void weighted_sq_distances(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                           std::span<const double> weights, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = row_distance(rows.data() + i * dim, query.data(), weights.data(), dim);
    }
}

void assign_nearest(std::span<const double> points, std::size_t dim, std::span<const double> centroids,
                    std::span<std::size_t> assignment, std::span<double> sq_dist) {
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        std::size_t best;
        double best_d;
        nearest_for_point(points.data() + i * dim, centroids, dim, best, best_d);
        assignment[i] = best;
        if (!sq_dist.empty()) sq_dist[i] = best_d;
    }
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(std::span<const std::int64_t> starts,
                                                                   std::span<const std::int64_t> ends) {
    std::vector<std::pair<std::size_t, std::size_t>> result;
    for (std::size_t a = 0; a < starts.size(); ++a) {
        for (std::size_t b = a + 1; b < starts.size(); ++b) {
            if (overlaps(starts[a], ends[a], starts[b], ends[b])) result.emplace_back(a, b);
        }
    }
    return result;
}

}  // namespace serial

}  // namespace ssa::kernels
