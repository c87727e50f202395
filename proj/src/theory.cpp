#include "loras/theory.hpp"

#include "loras/error.hpp"
#include "loras/samplers.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <cmath>
#include <random>

namespace loras::theory {
namespace {

constexpr std::size_t kBlockTrials = 8192;
constexpr std::uint64_t kSmoteStream = 0x5448534D;  // "THSM"
constexpr std::uint64_t kLorasStream = 0x54484C4F;  // "THLO"
constexpr std::uint64_t kSimplexStream = 0x53494D50;  // "SIMP"

// Power sums of deviations from a fixed centre, per coordinate.
struct PowerSums {
    std::vector<double> s1, s2, s3, s4;
    std::size_t n = 0;

    explicit PowerSums(std::size_t dim = 0) : s1(dim), s2(dim), s3(dim), s4(dim) {}

    void add(std::span<const double> x, std::span<const double> centre) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = x[j] - centre[j], d2 = d * d;
            s1[j] += d;
            s2[j] += d2;
            s3[j] += d2 * d;
            s4[j] += d2 * d2;
        }
        ++n;
    }

    void merge(const PowerSums& o) {
        for (std::size_t j = 0; j < s1.size(); ++j) {
            s1[j] += o.s1[j];
            s2[j] += o.s2[j];
            s3[j] += o.s3[j];
            s4[j] += o.s4[j];
        }
        n += o.n;
    }
};

PowerSums pairwise_merge(std::vector<PowerSums>& blocks, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return blocks[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    PowerSums left = pairwise_merge(blocks, lo, mid);
    left.merge(pairwise_merge(blocks, mid, hi));
    return left;
}

// Draw kernel shared by estimate_once and the Monte Carlo loop.
class Drawer {
public:
    Drawer(const LocalDistribution& dist, std::size_t points)
        : dist_(dist), chi2_(dist.dof), draws_(points * dist.mu.size()) {}

    double t_variate(Rng& rng) { return normal_(rng) / std::sqrt(chi2_(rng) / dist_.dof); }

    void local_t(std::span<double> out, Rng& rng) {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = dist_.mu[j] + dist_.sigma * t_variate(rng);
    }

    void estimate(Estimator est, std::size_t f_count, Rng& rng, std::span<double> out,
                  std::optional<std::span<const double>> fixed) {
        const std::size_t dim = dist_.mu.size();
        const std::size_t points = est == Estimator::Smote ? 2 : f_count;
        draws_.resize(points * dim);
        for (std::size_t q = 0; q < points; ++q) {
            std::span<double> row(draws_.data() + q * dim, dim);
            local_t(row, rng);
            if (est == Estimator::Loras && dist_.sigma_b > 0)
                for (double& v : row) v += dist_.sigma_b * normal_(rng);
        }
        std::span<const double> w;
        if (fixed) {
            if (fixed->size() != points) throw Error(ErrorKind::InvalidArgument, "fixed weights length mismatch");
            w = *fixed;
        } else {
            weights_ = draw_simplex_weights(points, rng);
            w = weights_;
        }
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t q = 0; q < points; ++q)
            for (std::size_t j = 0; j < dim; ++j) out[j] += w[q] * draws_[q * dim + j];
    }

private:
    const LocalDistribution& dist_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::chi_squared_distribution<double> chi2_;
    std::vector<double> draws_;
    std::vector<double> weights_;
};

PowerSums run_block(const LocalDistribution& dist, Estimator est, std::size_t f_count, std::size_t trials,
                    std::uint64_t seed, std::size_t block) {
    Rng rng = make_stream(seed, est == Estimator::Smote ? kSmoteStream : kLorasStream, block);
    Drawer drawer(dist, f_count);
    std::vector<double> x(dist.mu.size());
    PowerSums sums(dist.mu.size());
    for (std::size_t t = 0; t < trials; ++t) {
        drawer.estimate(est, f_count, rng, x, std::nullopt);
        sums.add(x, dist.mu);
    }
    return sums;
}

std::size_t block_trials(std::size_t total, std::size_t b) {
    return std::min(kBlockTrials, total - b * kBlockTrials);
}

EstimatorReport summarise(const LocalDistribution& dist, Estimator est, std::size_t f_count,
                          const PowerSums& sums) {
    EstimatorReport r;
    r.estimator = est;
    r.trials = sums.n;
    r.f_count = f_count;
    r.theoretical_mean = dist.mu;
    r.theoretical_var = theoretical_variance(dist, est, f_count);
    const double n = static_cast<double>(sums.n);
    const std::size_t dim = dist.mu.size();
    r.bias_pass = true;
    r.variance_pass = true;
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = sums.s1[j] / n;
        const double m2 = sums.s2[j] / n - d * d;
        const double m4 = sums.s4[j] / n - 4 * d * sums.s3[j] / n + 6 * d * d * sums.s2[j] / n - 3 * d * d * d * d;
        const double var = m2 * n / (n - 1);
        r.empirical_mean.push_back(dist.mu[j] + d);
        r.empirical_var.push_back(var);
        r.var_standard_error.push_back(std::sqrt(std::max(m4 - m2 * m2, 0.0) / n));
        const double z = d / std::sqrt(var / n);
        r.mean_z_scores.push_back(z);
        const double ratio = var / r.theoretical_var[j];
        r.var_ratio.push_back(ratio);
        if (!(std::abs(z) <= kMaxAbsZ)) r.bias_pass = false;
        if (!(std::abs(ratio - 1.0) <= kVarRatioTolerance)) r.variance_pass = false;
    }
    return r;
}

void check_inputs(const LocalDistribution& dist, std::size_t f_count, std::size_t trials) {
    dist.validate();
    if (f_count < 2) throw Error(ErrorKind::InvalidArgument, "f_count must be >= 2");
    if (trials < kMinTrials)
        throw Error(ErrorKind::InvalidArgument,
                    "trials must be >= " + std::to_string(kMinTrials) + ", got " + std::to_string(trials));
}

bool ordering(const EstimatorReport& smote, const EstimatorReport& loras, std::size_t f_count) {
    for (std::size_t j = 0; j < smote.empirical_var.size(); ++j) {
        if (f_count > 2) {
            if (!(loras.empirical_var[j] < smote.empirical_var[j])) return false;
        } else {
            const double se = std::hypot(loras.var_standard_error[j], smote.var_standard_error[j]);
            if (!(std::abs(loras.empirical_var[j] - smote.empirical_var[j]) <= 3.0 * se)) return false;
        }
    }
    return true;
}

}  // namespace

void LocalDistribution::validate() const {
    if (mu.empty()) throw Error(ErrorKind::InvalidArgument, "mu must have at least one coordinate");
    if (!(dof > 2.0)) throw Error(ErrorKind::DofTooSmall, "dof must exceed 2 for a finite variance");
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
    if (!(sigma_b >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma_b must be >= 0");
}

double LocalDistribution::variance() const {
    if (!(dof > 2.0)) throw Error(ErrorKind::DofTooSmall, "dof must exceed 2 for a finite variance");
    return sigma * sigma * dof / (dof - 2.0);
}

std::string_view to_string(Estimator e) noexcept { return e == Estimator::Smote ? "smote" : "loras"; }

std::vector<double> sample_local_t(const LocalDistribution& dist, Rng& rng) {
    Drawer drawer(dist, 1);
    std::vector<double> out(dist.mu.size());
    drawer.local_t(out, rng);
    return out;
}

std::vector<double> estimate_once(const LocalDistribution& dist, Estimator estimator, std::size_t f_count, Rng& rng,
                                  std::optional<std::span<const double>> fixed_weights) {
    if (estimator == Estimator::Loras && f_count < 2)
        throw Error(ErrorKind::InvalidArgument, "LoRAS estimate needs f_count >= 2");
    Drawer drawer(dist, estimator == Estimator::Smote ? 2 : f_count);
    std::vector<double> out(dist.mu.size());
    drawer.estimate(estimator, f_count, rng, out, fixed_weights);
    return out;
}

std::vector<double> theoretical_variance(const LocalDistribution& dist, Estimator estimator, std::size_t f_count) {
    const double s2 = dist.variance();
    const double v = estimator == Estimator::Smote
                         ? 2.0 * s2 / 3.0
                         : 2.0 * (s2 + dist.sigma_b * dist.sigma_b) / (static_cast<double>(f_count) + 1.0);
    return std::vector<double>(dist.mu.size(), v);
}

TheoremValidation validate_theorem(const LocalDistribution& dist, std::size_t f_count, std::size_t trials,
                                   std::uint64_t seed) {
    check_inputs(dist, f_count, trials);
    const std::size_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
    std::vector<PowerSums> smote(blocks), loras(blocks);
    const auto jobs = static_cast<std::ptrdiff_t>(2 * blocks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t job = 0; job < jobs; ++job) {
        const auto b = static_cast<std::size_t>(job) / 2;
        if (job % 2 == 0)
            smote[b] = run_block(dist, Estimator::Smote, f_count, block_trials(trials, b), seed, b);
        else
            loras[b] = run_block(dist, Estimator::Loras, f_count, block_trials(trials, b), seed, b);
    }
    TheoremValidation v;
    v.smote = summarise(dist, Estimator::Smote, f_count, pairwise_merge(smote, 0, blocks));
    v.loras = summarise(dist, Estimator::Loras, f_count, pairwise_merge(loras, 0, blocks));
    v.ordering_pass = ordering(v.smote, v.loras, f_count);
    return v;
}

TheoremValidation serial::validate_theorem(const LocalDistribution& dist, std::size_t f_count, std::size_t trials,
                                           std::uint64_t seed) {
    check_inputs(dist, f_count, trials);
    const std::size_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
    TheoremValidation v;
    for (auto est : {Estimator::Smote, Estimator::Loras}) {
        PowerSums total(dist.mu.size());
        for (std::size_t b = 0; b < blocks; ++b)
            total.merge(run_block(dist, est, f_count, block_trials(trials, b), seed, b));
        (est == Estimator::Smote ? v.smote : v.loras) = summarise(dist, est, f_count, total);
    }
    v.ordering_pass = ordering(v.smote, v.loras, f_count);
    return v;
}

SimplexMoments simplex_moments(std::size_t m, std::size_t draws, std::uint64_t seed) {
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "simplex moments need m >= 2");
    if (draws < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 draws");
    const std::size_t blocks = (draws + kBlockTrials - 1) / kBlockTrials;
    // Per block: sums of a1, a1^2 ... as power sums around the known mean 1/m;
    // column 0 = a1 - 1/m, column 1 = (a1-1/m)^2, column 2 = (a1-1/m)(a2-1/m).
    std::vector<PowerSums> parts(blocks);
    const double centre = 1.0 / static_cast<double>(m);
    const auto sb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t bi = 0; bi < sb; ++bi) {
        const auto b = static_cast<std::size_t>(bi);
        Rng rng = make_stream(seed, kSimplexStream, b);
        PowerSums sums(3);
        const std::array<double, 3> zero{0.0, 0.0, 0.0};
        for (std::size_t t = 0; t < block_trials(draws, b); ++t) {
            const auto w = draw_simplex_weights(m, rng);
            const double d1 = w[0] - centre, d2 = w[1] - centre;
            const std::array<double, 3> x{d1, d1 * d1, d1 * d2};
            sums.add(x, zero);
        }
        parts[b] = std::move(sums);
    }
    const PowerSums total = pairwise_merge(parts, 0, blocks);
    const double n = static_cast<double>(total.n);
    auto mean_and_se = [&](std::size_t col) {
        const double mean = total.s1[col] / n;
        const double var = (total.s2[col] / n - mean * mean) * n / (n - 1);
        return std::pair{mean, std::sqrt(var / n)};
    };
    SimplexMoments out;
    out.m = m;
    out.draws = total.n;
    auto [d_mean, d_se] = mean_and_se(0);
    out.mean = centre + d_mean;
    out.mean_se = d_se;
    std::tie(out.var, out.var_se) = mean_and_se(1);
    std::tie(out.cov, out.cov_se) = mean_and_se(2);
    return out;
}

}  // namespace loras::theory
