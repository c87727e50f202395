#pragma once

#include "loras/dataset.hpp"
#include "loras/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace loras {

struct Metric {
    enum class Kind { Euclidean, Manhattan, Minkowski };
    Kind kind = Kind::Euclidean;
    double p = 2.0;

    static Metric euclidean() { return {Kind::Euclidean, 2.0}; }
    static Metric manhattan() { return {Kind::Manhattan, 1.0}; }
    /// Throws InvalidArgument unless p is finite and >= 1.
    static Metric minkowski(double p);

    double operator()(std::span<const double> a, std::span<const double> b) const noexcept;
};

using KnnLists = std::vector<std::vector<std::size_t>>;

/// Full m x m distance matrix. Rows are filled in parallel.
Matrix pairwise_distances(const Matrix& points, Metric metric = Metric::euclidean());

/// k nearest other rows per row, ascending by distance, ties by lower index.
KnnLists knn_indices(const Matrix& points, std::size_t k, Metric metric = Metric::euclidean());

/// k nearest reference rows for every query row (no self-exclusion).
KnnLists knn_query(const Matrix& reference, const Matrix& queries, std::size_t k,
                   Metric metric = Metric::euclidean());

namespace serial {
/// Single-threaded references; kept for tests and the benchmark.
Matrix pairwise_distances(const Matrix& points, Metric metric = Metric::euclidean());
KnnLists knn_indices(const Matrix& points, std::size_t k, Metric metric = Metric::euclidean());
}  // namespace serial

enum class EmbeddingChoice { Regular, TEmbedding };

struct Neighborhood {
    /// Original row index of the parent minority point.
    std::size_t parent = 0;
    /// k nearest minority rows of the parent (original row indices), parent last.
    std::vector<std::size_t> members;
};

struct NeighborhoodSet {
    std::vector<Neighborhood> neighborhoods;
    std::size_t effective_k = 0;
    std::vector<std::string> warnings;
};

/// One neighborhood per minority row, in minority_idx order. With
/// TEmbedding the minority rows are first embedded in 2-D by t-SNE and the
/// neighbor search runs (euclidean) in that plane.
NeighborhoodSet minority_neighborhoods(const Dataset& d, const ClassSplit& s, std::size_t k,
                                       EmbeddingChoice embedding, double perplexity,
                                       std::uint64_t seed, Metric metric = Metric::euclidean());

}  // namespace loras
