#ifndef SSA_KERNELS_HPP
#define SSA_KERNELS_HPP

// Data-parallel inner loops. Each kernel has an OpenMP version and a serial
// reference in kernels::serial; both produce bit-identical results because
// every per-element reduction keeps the same summation order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ssa::kernels {

/// out[i] = sum_f weights[f] * (rows[i*dim + f] - query[f])^2
void weighted_sq_distances(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                           std::span<const double> weights, std::span<double> out);

/// Nearest centroid for each point; ties go to the lower centroid index.
/// `sq_dist` (optional, may be empty) receives the squared distance.
void assign_nearest(std::span<const double> points, std::size_t dim, std::span<const double> centroids,
                    std::span<std::size_t> assignment, std::span<double> sq_dist);

/// All index pairs (i < j) whose half-open intervals [start, end) intersect,
/// sorted lexicographically.
std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(std::span<const std::int64_t> starts,
                                                                   std::span<const std::int64_t> ends);

/// Indices of the k smallest values, ordered by (value, index).
std::vector<std::size_t> k_smallest(std::span<const double> values, std::size_t k);

int max_threads();

namespace serial {

void weighted_sq_distances(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                           std::span<const double> weights, std::span<double> out);

void assign_nearest(std::span<const double> points, std::size_t dim, std::span<const double> centroids,
                    std::span<std::size_t> assignment, std::span<double> sq_dist);

std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(std::span<const std::int64_t> starts,
                                                                   std::span<const std::int64_t> ends);

}  // namespace serial

}  // namespace ssa::kernels

#endif  // SSA_KERNELS_HPP
