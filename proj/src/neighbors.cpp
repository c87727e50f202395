#include "loras/neighbors.hpp"

#include "loras/embedding.hpp"
#include "loras/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loras {
namespace {

struct ByDistanceThenIndex {
    const std::vector<double>* dist;
    bool operator()(std::size_t a, std::size_t b) const {
        const double da = (*dist)[a], db = (*dist)[b];
        return da < db || (da == db && a < b);
    }
};

void check_k(std::size_t k, std::size_t available) {
    if (k > available)
        throw Error(ErrorKind::KTooLarge,
                    "k=" + std::to_string(k) + " but only " + std::to_string(available) + " candidates");
}

}  // namespace

Metric Metric::minkowski(double p) {
    if (!std::isfinite(p) || p < 1.0) throw Error(ErrorKind::InvalidArgument, "minkowski p must be finite and >= 1");
    return {Kind::Minkowski, p};
}

double Metric::operator()(std::span<const double> a, std::span<const double> b) const noexcept {
    double acc = 0.0;
    switch (kind) {
        case Kind::Euclidean:
            for (std::size_t j = 0; j < a.size(); ++j) {
                const double diff = a[j] - b[j];
                acc += diff * diff;
            }
            return std::sqrt(acc);
        case Kind::Manhattan:
            for (std::size_t j = 0; j < a.size(); ++j) acc += std::abs(a[j] - b[j]);
            return acc;
        case Kind::Minkowski:
            for (std::size_t j = 0; j < a.size(); ++j) acc += std::pow(std::abs(a[j] - b[j]), p);
            return std::pow(acc, 1.0 / p);
    }
    return acc;
}

Matrix pairwise_distances(const Matrix& points, Metric metric) {
    const std::size_t m = points.rows();
    Matrix out(m, m);
    const auto sm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t si = 0; si < sm; ++si) {
        const auto i = static_cast<std::size_t>(si);
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d = metric(points.row(i), points.row(j));
            out(i, j) = d;
            out(j, i) = d;
        }
    }
    return out;
}

KnnLists knn_query(const Matrix& reference, const Matrix& queries, std::size_t k, Metric metric) {
    check_k(k, reference.rows());
    KnnLists result(queries.rows());
    const auto sq = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel
    {
        std::vector<double> dist(reference.rows());
        std::vector<std::size_t> order(reference.rows());
#pragma omp for schedule(static)
        for (std::ptrdiff_t si = 0; si < sq; ++si) {
            const auto q = static_cast<std::size_t>(si);
            for (std::size_t r = 0; r < reference.rows(); ++r) dist[r] = metric(queries.row(q), reference.row(r));
            std::iota(order.begin(), order.end(), 0);
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                              ByDistanceThenIndex{&dist});
            result[q].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        }
    }
    return result;
}

KnnLists knn_indices(const Matrix& points, std::size_t k, Metric metric) {
    const std::size_t m = points.rows();
    check_k(k, m == 0 ? 0 : m - 1);
    KnnLists result(m);
    const auto sm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel
    {
        std::vector<double> dist(m);
        std::vector<std::size_t> order;
        order.reserve(m);
#pragma omp for schedule(static)
        for (std::ptrdiff_t si = 0; si < sm; ++si) {
            const auto i = static_cast<std::size_t>(si);
            order.clear();
            for (std::size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                dist[j] = metric(points.row(i), points.row(j));
                order.push_back(j);
            }
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                              ByDistanceThenIndex{&dist});
            result[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        }
    }
    return result;
}

namespace serial {

Matrix pairwise_distances(const Matrix& points, Metric metric) {
    const std::size_t m = points.rows();
    Matrix out(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            out(i, j) = i == j ? 0.0 : metric(points.row(i), points.row(j));
    return out;
}

KnnLists knn_indices(const Matrix& points, std::size_t k, Metric metric) {
    const std::size_t m = points.rows();
    check_k(k, m == 0 ? 0 : m - 1);
    const Matrix dist = serial::pairwise_distances(points, metric);
    KnnLists result(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<double, std::size_t>> cand;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) cand.emplace_back(dist(i, j), j);
        std::sort(cand.begin(), cand.end());
        for (std::size_t t = 0; t < k; ++t) result[i].push_back(cand[t].second);
    }
    return result;
}

}  // namespace serial

NeighborhoodSet minority_neighborhoods(const Dataset& d, const ClassSplit& s, std::size_t k,
                                       EmbeddingChoice embedding, double perplexity, std::uint64_t seed,
                                       Metric metric) {
    const std::size_t m = s.minority_idx.size();
    if (m < 2) throw Error(ErrorKind::EmptyMinority, "need at least 2 minority rows for neighborhoods");

    NeighborhoodSet out;
    out.effective_k = k;
    if (k > m - 1) {
        out.effective_k = m - 1;
        out.warnings.push_back("k=" + std::to_string(k) + " clamped to " + std::to_string(m - 1) +
                               " (minority class has " + std::to_string(m) + " rows)");
    }
    if (out.effective_k == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");

    const Matrix minority = d.features.select_rows(s.minority_idx);
    KnnLists lists;
    if (embedding == EmbeddingChoice::TEmbedding) {
        if (!(perplexity < static_cast<double>(m)))
            throw Error(ErrorKind::PerplexityTooLarge, "perplexity " + std::to_string(perplexity) +
                                                           " must be below minority size " + std::to_string(m));
        TsneConfig cfg;
        cfg.perplexity = perplexity;
        cfg.seed = seed;
        Embedding2D emb = tsne_embed(minority, cfg);
        for (auto& w : emb.warnings) out.warnings.push_back(std::move(w));
        lists = knn_indices(emb.coords, out.effective_k, Metric::euclidean());
    } else {
        lists = knn_indices(minority, out.effective_k, metric);
    }

    out.neighborhoods.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Neighborhood nb;
        nb.parent = s.minority_idx[i];
        nb.members.reserve(lists[i].size() + 1);
        for (std::size_t local : lists[i]) nb.members.push_back(s.minority_idx[local]);
        nb.members.push_back(nb.parent);
        out.neighborhoods.push_back(std::move(nb));
    }
    return out;
}

}  // namespace loras
