#pragma once

#include "loras/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace loras::theory {

/// Shifted Student-t neighborhood model: X_j = mu_j + sigma * T, T ~ t(dof).
struct LocalDistribution {
    std::vector<double> mu;
    double sigma = 1.0;
    double dof = 30.0;
    /// Standard deviation of the shadowsample noise B.
    double sigma_b = 0.0;

    void validate() const;
    /// sigma^2 * dof / (dof - 2)
    double variance() const;
};

enum class Estimator { Smote, Loras };
std::string_view to_string(Estimator e) noexcept;

std::vector<double> sample_local_t(const LocalDistribution& dist, Rng& rng);

/// One synthetic point as an estimate of mu. SMOTE combines two noiseless
/// draws; LoRAS combines f_count noisy (shadow) draws. `fixed_weights`
/// replaces the Dirichlet draw (test hook).
std::vector<double> estimate_once(const LocalDistribution& dist, Estimator estimator, std::size_t f_count, Rng& rng,
                                  std::optional<std::span<const double>> fixed_weights = std::nullopt);

/// Closed-form per-coordinate variance: 2(s'^2 + s_B^2)/(f_count + 1) for
/// LoRAS, 2 s'^2 / 3 for SMOTE.
std::vector<double> theoretical_variance(const LocalDistribution& dist, Estimator estimator, std::size_t f_count);

struct EstimatorReport {
    Estimator estimator = Estimator::Smote;
    std::size_t trials = 0;
    std::size_t f_count = 0;
    std::vector<double> empirical_mean;
    std::vector<double> empirical_var;
    /// Standard error of each empirical variance (from the fourth moment).
    std::vector<double> var_standard_error;
    std::vector<double> theoretical_mean;
    std::vector<double> theoretical_var;
    std::vector<double> mean_z_scores;
    std::vector<double> var_ratio;
    bool bias_pass = false;      // every |z| <= 4
    bool variance_pass = false;  // every ratio in [0.95, 1.05]
};

struct TheoremValidation {
    EstimatorReport smote;
    EstimatorReport loras;
    /// f_count > 2: LoRAS variance below SMOTE on every coordinate.
    /// f_count == 2 (with sigma_b == 0): variances agree within 3 combined SE.
    bool ordering_pass = false;
    bool all_pass() const { return smote.bias_pass && smote.variance_pass && loras.bias_pass && loras.variance_pass && ordering_pass; }
};

inline constexpr std::size_t kMinTrials = 10'000;
inline constexpr double kMaxAbsZ = 4.0;
inline constexpr double kVarRatioTolerance = 0.05;

/// Runs both estimators for `trials` draws. Trials are split into fixed
/// blocks, each with its own substream, so the result does not depend on the
/// thread count.
TheoremValidation validate_theorem(const LocalDistribution& dist, std::size_t f_count, std::size_t trials,
                                   std::uint64_t seed);

namespace serial {
TheoremValidation validate_theorem(const LocalDistribution& dist, std::size_t f_count, std::size_t trials,
                                   std::uint64_t seed);
}

/// Monte Carlo moments of Dirichlet(1,...,1) weights (first coordinate and
/// the first pair), with standard errors.
struct SimplexMoments {
    std::size_t m = 0;
    std::size_t draws = 0;
    double mean = 0, mean_se = 0;
    double var = 0, var_se = 0;
    double cov = 0, cov_se = 0;
};

SimplexMoments simplex_moments(std::size_t m, std::size_t draws, std::uint64_t seed);

}  // namespace loras::theory
