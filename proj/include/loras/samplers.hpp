#pragma once

#include "loras/dataset.hpp"
#include "loras/matrix.hpp"
#include "loras/neighbors.hpp"
#include "loras/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace loras {

enum class SamplerKind { None, Loras, Smote, Borderline1, Borderline2, Adasyn };

std::string_view to_string(SamplerKind kind) noexcept;
/// Parses "none", "loras", "smote", "borderline1", "borderline2", "adasyn".
std::optional<SamplerKind> parse_sampler(std::string_view name) noexcept;

/// Parameter block for LoRAS oversampling.
struct LorasParams {
    std::size_t k = 5;
    std::size_t num_shadow = 40;
    /// Per-feature noise standard deviations.
    std::vector<double> sigma_list;
    /// When set, sigma_list entries are multiplied by the minority-class
    /// standard deviation of the matching feature.
    bool relative_sigma = false;
    std::size_t n_aff = 2;
    /// Generated points per minority neighborhood.
    std::size_t n_gen = 1;
    EmbeddingChoice embedding = EmbeddingChoice::Regular;
    double perplexity = 30.0;
    /// Top up the floor(.) shortfall so the output reaches |C_maj| - |C_min|.
    bool exact_balance = false;
    /// Keep selected shadow points and weights per output (convexity audits).
    bool record_trace = false;

    /// Throws ConstraintViolated / InvalidArgument on broken invariants.
    void validate(std::size_t f_count) const;
};

LorasParams resolve_defaults(const Dataset& d, const ClassSplit& s);

/// Dirichlet(1, ..., 1) weights: m unit exponentials normalised by their sum.
std::vector<double> draw_simplex_weights(std::size_t m, Rng& rng);

struct Shadowsample {
    std::vector<double> vector;
    std::size_t parent = 0;
};

std::vector<Shadowsample> make_shadowsamples(std::span<const double> parent_vec, std::size_t parent_idx,
                                             std::size_t count, std::span<const double> sigma_list, Rng& rng);

struct Provenance {
    SamplerKind algorithm = SamplerKind::None;
    /// Neighborhood id for LoRAS (its parent row); base row for the SMOTE family.
    std::size_t parent = 0;
    /// Interpolation partner row (SMOTE family only).
    std::size_t partner = 0;
    double lambda = 0.0;
};

/// Shadow points and weights behind one LoRAS output.
struct AffineTrace {
    Matrix selected;
    std::vector<double> weights;
};

struct SyntheticSet {
    Matrix samples;
    std::vector<Provenance> provenance;
    std::uint64_t seed = 0;
    std::vector<AffineTrace> trace;  // filled only when requested
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return samples.rows(); }
};

SyntheticSet loras_oversample(const Dataset& d, const ClassSplit& s, const LorasParams& p, std::uint64_t seed);

namespace serial {
SyntheticSet loras_oversample(const Dataset& d, const ClassSplit& s, const LorasParams& p, std::uint64_t seed);
}

/// Knobs shared by the interpolating samplers; the fixed_lambda hook pins
/// the interpolation position for tests.
struct InterpolationOptions {
    std::optional<double> fixed_lambda;
};

SyntheticSet smote_oversample(const Dataset& d, const ClassSplit& s, std::size_t k, std::size_t total,
                              std::uint64_t seed, const InterpolationOptions& opt = {});

enum class PointType { Safe, Danger, Noise };

/// Classifies each minority row (minority_idx order) by the labels of its k
/// nearest rows in the full dataset.
std::vector<PointType> borderline_types(const Dataset& d, const ClassSplit& s, std::size_t k);

SyntheticSet borderline_smote(const Dataset& d, const ClassSplit& s, std::size_t k, int variant,
                              std::size_t total, std::uint64_t seed, const InterpolationOptions& opt = {});

/// Integer allocation of `total` proportional to `ratios`; rounding residue
/// goes to the highest ratios (ties to lower index).
std::vector<std::size_t> adasyn_allocation(std::span<const double> ratios, std::size_t total);

SyntheticSet adasyn(const Dataset& d, const ClassSplit& s, std::size_t k, std::size_t total, std::uint64_t seed,
                    const InterpolationOptions& opt = {});

/// Sampler choice plus everything needed to run it on a training split.
struct SamplerConfig {
    SamplerKind kind = SamplerKind::None;
    /// Overrides applied on top of resolve_defaults for LoRAS.
    std::optional<std::size_t> k;
    std::optional<std::size_t> num_shadow;
    std::optional<double> sigma;
    bool relative_sigma = false;
    std::optional<std::size_t> n_aff;
    std::optional<std::size_t> n_gen;
    EmbeddingChoice embedding = EmbeddingChoice::Regular;
    double perplexity = 30.0;
    bool exact_balance = false;
    /// Target count for SMOTE-family samplers; defaults to |C_maj| - |C_min|.
    std::optional<std::size_t> total;
};

/// Resolved LoRAS parameters for `d` under the config's overrides.
LorasParams loras_params_for(const Dataset& d, const ClassSplit& s, const SamplerConfig& cfg);

/// Runs the configured sampler; SamplerKind::None yields an empty set.
SyntheticSet oversample(const Dataset& d, const ClassSplit& s, const SamplerConfig& cfg, std::uint64_t seed);

}  // namespace loras
