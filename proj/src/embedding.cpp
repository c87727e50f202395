#include "loras/embedding.hpp"

#include "loras/error.hpp"
#include "loras/rng.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace loras {
namespace {

constexpr double kAffinityFloor = 1e-12;
constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBandwidthSteps = 50;

Matrix squared_distances(const Matrix& x) {
    const std::size_t m = x.rows();
    Matrix d(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double diff = x(i, c) - x(j, c);
                acc += diff * diff;
            }
            d(i, j) = acc;
            d(j, i) = acc;
        }
    return d;
}

// Conditional p_{j|i} for one row at precision beta; returns the entropy in nats.
double row_conditional(const Matrix& dist, std::size_t i, double beta, std::vector<double>& row) {
    const std::size_t m = dist.rows();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j)
        if (j != i) dmin = std::min(dmin, dist(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * (dist(i, j) - dmin));
        sum += row[j];
    }
    double weighted = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        row[j] /= sum;
        if (j != i) weighted += (dist(i, j) - dmin) * row[j];
    }
    return std::log(sum) + beta * weighted;
}

}  // namespace

Affinities tsne_affinities(const Matrix& points, double perplexity) {
    const std::size_t m = points.rows();
    if (!(perplexity > 0.0)) throw Error(ErrorKind::InvalidArgument, "perplexity must be positive");
    if (!(perplexity < static_cast<double>(m)))
        throw Error(ErrorKind::PerplexityTooLarge,
                    "perplexity " + std::to_string(perplexity) + " must be below point count " + std::to_string(m));

    const Matrix dist = squared_distances(points);
    // Below 1 the target entropy is negative and unreachable; the search then
    // saturates at the tightest bandwidth it reaches.
    const double target = std::log(perplexity);

    Matrix cond(m, m);
    Affinities out;
    out.row_perplexity.resize(m);
    out.beta.resize(m);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) {
        double mean_d = 0.0;
        for (std::size_t j = 0; j < m; ++j) mean_d += dist(i, j);
        mean_d /= static_cast<double>(m - 1);
        double beta = mean_d > 0 ? 1.0 / mean_d : 1.0;
        double lo = -DBL_MAX, hi = DBL_MAX;
        double h = row_conditional(dist, i, beta, row);
        for (int step = 0; step < kMaxBandwidthSteps && std::abs(h - target) > kEntropyTolerance; ++step) {
            if (h > target) {
                lo = beta;
                beta = hi == DBL_MAX ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = lo == -DBL_MAX ? beta / 2.0 : (beta + lo) / 2.0;
            }
            h = row_conditional(dist, i, beta, row);
        }
        out.row_perplexity[i] = std::exp(h);
        out.beta[i] = beta;
        std::copy(row.begin(), row.end(), cond.row(i).begin());
    }

    out.p = Matrix(m, m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double v = std::max((cond(i, j) + cond(j, i)) / (2.0 * static_cast<double>(m)), kAffinityFloor);
            out.p(i, j) = v;
            total += v;
        }
    for (double& v : out.p.values()) v /= total;
    return out;
}

double tsne_kl(const Matrix& p, const Matrix& coords) {
    const std::size_t m = p.rows();
    Matrix num(m, m);
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double dx = coords(i, 0) - coords(j, 0), dy = coords(i, 1) - coords(j, 1);
            num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
            z += num(i, j);
        }
    double kl = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j && p(i, j) > 0) kl += p(i, j) * std::log(p(i, j) / (num(i, j) / z));
    return std::max(kl, 0.0);
}

Embedding2D tsne_embed(const Matrix& points, const TsneConfig& cfg) {
    const std::size_t m = points.rows();
    if (m < 3) throw Error(ErrorKind::InvalidArgument, "t-SNE needs at least 3 points");
    if (cfg.iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 1");
    if (!(cfg.perplexity < static_cast<double>(m)))
        throw Error(ErrorKind::PerplexityTooLarge,
                    "perplexity " + std::to_string(cfg.perplexity) + " must be below point count " + std::to_string(m));

    Embedding2D out;
    out.coords = Matrix(m, 2);
    bool all_same = true;
    for (std::size_t i = 1; i < m && all_same; ++i)
        all_same = std::equal(points.row(i).begin(), points.row(i).end(), points.row(0).begin());
    if (all_same) {
        out.warnings.push_back("DegenerateInput: all points identical, returning zero coordinates");
        return out;
    }

    const Affinities aff = tsne_affinities(points, cfg.perplexity);
    const Matrix& p = aff.p;

    Rng rng = make_stream(cfg.seed, 0x54534E45 /* TSNE */);
    std::normal_distribution<double> init(0.0, 1e-4);
    Matrix& y = out.coords;
    for (double& v : y.values()) v = init(rng);

    Matrix update(m, 2), gains(m, 2, 1.0), grad(m, 2);
    Matrix num(m, m);
    out.kl_trace.reserve(cfg.iterations);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const bool early = it < cfg.exaggeration_iterations;
        const double exaggeration = early ? cfg.early_exaggeration : 1.0;
        const double momentum = early ? cfg.initial_momentum : cfg.final_momentum;

        double z = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
                const double q = 1.0 / (1.0 + dx * dx + dy * dy);
                num(i, j) = q;
                num(j, i) = q;
                z += 2.0 * q;
            }

        double kl = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                const double q = num(i, j) / z;
                kl += p(i, j) * std::log(p(i, j) / q);
                const double mult = (exaggeration * p(i, j) - q) * num(i, j);
                gx += mult * (y(i, 0) - y(j, 0));
                gy += mult * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4.0 * gx;
            grad(i, 1) = 4.0 * gy;
        }
        out.kl_trace.push_back(std::max(kl, 0.0));

        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0) == (update(i, c) > 0);
                gains(i, c) = same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2;
                gains(i, c) = std::max(gains(i, c), 0.01);
                update(i, c) = momentum * update(i, c) - cfg.learning_rate * gains(i, c) * grad(i, c);
                y(i, c) += update(i, c);
            }
        for (std::size_t c = 0; c < 2; ++c) {
            double mean = 0.0;
            for (std::size_t i = 0; i < m; ++i) mean += y(i, c);
            mean /= static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) y(i, c) -= mean;
        }
    }
    return out;
}

Matrix PcaModel::transform(const Matrix& points) const {
    Matrix out(points.rows(), components.rows());
    for (std::size_t i = 0; i < points.rows(); ++i)
        for (std::size_t c = 0; c < components.rows(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < mean.size(); ++j) acc += (points(i, j) - mean[j]) * components(c, j);
            out(i, c) = acc;
        }
    return out;
}

Matrix PcaModel::inverse_transform(const Matrix& projected) const {
    Matrix out(projected.rows(), mean.size());
    for (std::size_t i = 0; i < projected.rows(); ++i)
        for (std::size_t j = 0; j < mean.size(); ++j) {
            double acc = mean[j];
            for (std::size_t c = 0; c < components.rows(); ++c) acc += projected(i, c) * components(c, j);
            out(i, j) = acc;
        }
    return out;
}

PcaModel pca_fit(const Matrix& points, std::size_t dims) {
    const std::size_t m = points.rows(), d = points.cols();
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "PCA needs at least 2 points");
    if (dims < 1 || dims > std::min(m, d))
        throw Error(ErrorKind::InvalidArgument, "PCA dims must be in [1, min(m, d)]");

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += points(i, j);
    for (double& v : model.mean) v /= static_cast<double>(m);

    Matrix cov(d, d);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            const double xa = points(i, a) - model.mean[a];
            for (std::size_t b = a; b < d; ++b) cov(a, b) += xa * (points(i, b) - model.mean[b]);
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= static_cast<double>(m - 1);
            cov(b, a) = cov(a, b);
        }

    double scale = 0.0;
    for (std::size_t a = 0; a < d; ++a) scale = std::max(scale, std::abs(cov(a, a)));

    model.components = Matrix(dims, d);
    Rng rng = make_stream(0x50434100 /* PCA */);
    std::uniform_real_distribution<double> start(0.5, 1.5);
    std::vector<double> v(d), w(d);

    auto orthonormalise = [&](std::vector<double>& vec, std::size_t upto) {
        for (std::size_t c = 0; c < upto; ++c) {
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += vec[j] * model.components(c, j);
            for (std::size_t j = 0; j < d; ++j) vec[j] -= dot * model.components(c, j);
        }
        double norm = 0.0;
        for (double x : vec) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0)
            for (double& x : vec) x /= norm;
        return norm;
    };

    for (std::size_t c = 0; c < dims; ++c) {
        for (double& x : v) x = start(rng);
        orthonormalise(v, c);
        double lambda = 0.0;
        for (int it = 0; it < 1000; ++it) {
            for (std::size_t a = 0; a < d; ++a) {
                double acc = 0.0;
                for (std::size_t b = 0; b < d; ++b) acc += cov(a, b) * v[b];
                w[a] = acc;
            }
            // Deflation: strip the directions already extracted.
            const double norm = orthonormalise(w, c);
            if (norm <= 1e-12 * std::max(scale, 1e-300)) {
                lambda = 0.0;  // remaining variance is numerically zero; keep v
                break;
            }
            double diff = 0.0;
            for (std::size_t j = 0; j < d; ++j) diff = std::max(diff, std::abs(w[j] - v[j]));
            v.swap(w);
            lambda = norm;
            if (diff < 1e-9) break;
        }
        std::size_t big = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(v[j]) > std::abs(v[big])) big = j;
        const double sign = v[big] < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components(c, j) = sign * v[j];
        model.explained_variance.push_back(lambda);
    }
    return model;
}

Matrix pca_project(const Matrix& points, std::size_t dims) { return pca_fit(points, dims).transform(points); }

}  // namespace loras
