#pragma once

#include "loras/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace loras {

struct TsneConfig {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    double early_exaggeration = 12.0;
    /// Iteration at which exaggeration stops and momentum switches.
    std::size_t exaggeration_iterations = 250;
    std::uint64_t seed = 42;
};

struct Embedding2D {
    Matrix coords;                  // m x 2
    std::vector<double> kl_trace;   // KL(P||Q) before each update
    std::vector<std::string> warnings;
};

/// Symmetrised input affinities plus the per-row perplexity each bandwidth
/// search reached (2^H with H the row entropy in bits).
struct Affinities {
    Matrix p;
    std::vector<double> row_perplexity;
    /// Gaussian precision 1/(2 sigma_i^2) chosen for each row.
    std::vector<double> beta;
};

Affinities tsne_affinities(const Matrix& points, double perplexity);

/// Exact O(m^2) t-SNE to two dimensions.
Embedding2D tsne_embed(const Matrix& points, const TsneConfig& cfg);

/// KL(P||Q) for a given embedding, Q from the Student-t kernel.
double tsne_kl(const Matrix& p, const Matrix& coords);

/// Principal axes of mean-centred data found by power iteration with deflation.
struct PcaModel {
    std::vector<double> mean;
    Matrix components;                     // dims x d, orthonormal rows
    std::vector<double> explained_variance;

    Matrix transform(const Matrix& points) const;
    /// Maps projected coordinates back to the input space (centred + mean).
    Matrix inverse_transform(const Matrix& projected) const;
};

PcaModel pca_fit(const Matrix& points, std::size_t dims = 2);
Matrix pca_project(const Matrix& points, std::size_t dims = 2);

}  // namespace loras
