#include "loras/samplers.hpp"

#include "loras/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace loras {
namespace {

constexpr std::uint64_t kLorasStream = 0x4C4F524153;     // "LORAS"
constexpr std::uint64_t kTopUpStream = 0x544F505550;     // "TOPUP"
constexpr std::uint64_t kSmoteStream = 0x534D4F5445;     // "SMOTE"
constexpr std::uint64_t kBorderStream = 0x424F52444552;  // "BORDER"
constexpr std::uint64_t kAdasynStream = 0x414441535953;  // "ADASYS"

void require_minority(const ClassSplit& s) {
    if (s.minority_idx.size() < 2)
        throw Error(ErrorKind::EmptyMinority,
                    "oversampling needs at least 2 minority rows, got " + std::to_string(s.minority_idx.size()));
}

double draw_lambda(Rng& rng, double upper, const InterpolationOptions& opt) {
    if (opt.fixed_lambda) return *opt.fixed_lambda * upper;
    return std::uniform_real_distribution<double>(0.0, upper)(rng);
}

void interpolate_into(std::span<double> out, std::span<const double> base, std::span<const double> toward,
                      double lambda) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = base[j] + lambda * (toward[j] - base[j]);
}

// Minority neighbors within the minority class, as original row indices.
KnnLists minority_knn(const Dataset& d, const ClassSplit& s, std::size_t k) {
    const Matrix minority = d.features.select_rows(s.minority_idx);
    KnnLists local = knn_indices(minority, k);
    for (auto& list : local)
        for (auto& idx : list) idx = s.minority_idx[idx];
    return local;
}

// k nearest rows of the whole dataset for every minority row, self excluded.
KnnLists full_knn_of_minority(const Dataset& d, const ClassSplit& s, std::size_t k) {
    const Matrix queries = d.features.select_rows(s.minority_idx);
    KnnLists lists = knn_query(d.features, queries, std::min(k + 1, d.n()));
    for (std::size_t i = 0; i < lists.size(); ++i) {
        auto& l = lists[i];
        l.erase(std::remove(l.begin(), l.end(), s.minority_idx[i]), l.end());
        if (l.size() > k) l.resize(k);
    }
    return lists;
}

std::size_t clamp_k(std::size_t k, std::size_t available, std::vector<std::string>& warnings) {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    if (k > available) {
        warnings.push_back("k=" + std::to_string(k) + " clamped to " + std::to_string(available));
        return available;
    }
    return k;
}

std::vector<double> minority_label_mask(const Dataset& d, const ClassSplit& s) {
    std::vector<double> is_min(d.n(), 0.0);
    for (auto i : s.minority_idx) is_min[i] = 1.0;
    return is_min;
}

struct LorasPlan {
    NeighborhoodSet hoods;
    std::vector<double> sigma;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
};

LorasPlan plan_loras(const Dataset& d, const ClassSplit& s, const LorasParams& p, std::uint64_t seed) {
    require_minority(s);
    p.validate(d.f_count());
    LorasPlan plan;
    plan.hoods = minority_neighborhoods(d, s, p.k, p.embedding, p.perplexity, seed);
    const std::size_t m = s.minority_idx.size();
    const std::size_t pool = (plan.hoods.effective_k + 1) * p.num_shadow;
    if (p.n_aff > pool)
        throw Error(ErrorKind::ConstraintViolated, "n_aff=" + std::to_string(p.n_aff) +
                                                       " exceeds the neighborhood shadow pool of " + std::to_string(pool));

    plan.sigma = p.sigma_list;
    if (p.relative_sigma) {
        for (std::size_t j = 0; j < d.f_count(); ++j) {
            double mean = 0.0;
            for (auto i : s.minority_idx) mean += d.features(i, j);
            mean /= static_cast<double>(m);
            double ss = 0.0;
            for (auto i : s.minority_idx) ss += (d.features(i, j) - mean) * (d.features(i, j) - mean);
            plan.sigma[j] *= std::sqrt(ss / static_cast<double>(m - 1));
        }
    }

    plan.counts.assign(m, p.n_gen);
    const std::size_t target = s.majority_idx.size() - std::min(s.majority_idx.size(), m);
    const std::size_t base = m * p.n_gen;
    if (p.exact_balance && target > base) {
        const std::size_t shortfall = target - base;
        for (auto& c : plan.counts) c += shortfall / m;
        // Remaining extras go to distinct neighborhoods drawn uniformly.
        Rng rng = make_stream(seed, kTopUpStream);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        const std::size_t rem = shortfall % m;
        for (std::size_t t = 0; t < rem; ++t) {
            std::uniform_int_distribution<std::size_t> pick(t, m - 1);
            std::swap(order[t], order[pick(rng)]);
            ++plan.counts[order[t]];
        }
    }
    plan.offsets.resize(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) plan.offsets[i + 1] = plan.offsets[i] + plan.counts[i];
    plan.total = plan.offsets[m];
    return plan;
}

// One neighborhood's share of the output; consumes only its own substream.
void generate_neighborhood(const Dataset& d, const LorasParams& p, const LorasPlan& plan, std::size_t i,
                           std::uint64_t seed, SyntheticSet& out) {
    const Neighborhood& nb = plan.hoods.neighborhoods[i];
    Rng rng = make_stream(seed, kLorasStream, i);

    Matrix pool(nb.members.size() * p.num_shadow, d.f_count());
    std::size_t row = 0;
    for (std::size_t q : nb.members)
        for (auto& sh : make_shadowsamples(d.features.row(q), q, p.num_shadow, plan.sigma, rng))
            std::copy(sh.vector.begin(), sh.vector.end(), pool.row(row++).begin());

    std::vector<std::size_t> perm(pool.rows());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t g = 0; g < plan.counts[i]; ++g) {
        // Partial Fisher-Yates: first n_aff slots become a uniform draw without replacement.
        for (std::size_t t = 0; t < p.n_aff; ++t) {
            std::uniform_int_distribution<std::size_t> pick(t, perm.size() - 1);
            std::swap(perm[t], perm[pick(rng)]);
        }
        const std::vector<double> w = draw_simplex_weights(p.n_aff, rng);
        const std::size_t out_row = plan.offsets[i] + g;
        auto dst = out.samples.row(out_row);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (std::size_t t = 0; t < p.n_aff; ++t) {
            auto src = pool.row(perm[t]);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w[t] * src[j];
        }
        out.provenance[out_row] = {SamplerKind::Loras, nb.parent, nb.parent, 0.0};
        if (p.record_trace) {
            AffineTrace tr{Matrix(p.n_aff, d.f_count()), w};
            for (std::size_t t = 0; t < p.n_aff; ++t) {
                auto src = pool.row(perm[t]);
                std::copy(src.begin(), src.end(), tr.selected.row(t).begin());
            }
            out.trace[out_row] = std::move(tr);
        }
    }
}

SyntheticSet loras_impl(const Dataset& d, const ClassSplit& s, const LorasParams& p, std::uint64_t seed,
                        bool parallel) {
    const LorasPlan plan = plan_loras(d, s, p, seed);
    SyntheticSet out;
    out.seed = seed;
    out.warnings = plan.hoods.warnings;
    out.samples = Matrix(plan.total, d.f_count());
    out.provenance.resize(plan.total);
    if (p.record_trace) out.trace.resize(plan.total);

    const auto m = static_cast<std::ptrdiff_t>(plan.hoods.neighborhoods.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < m; ++i)
            generate_neighborhood(d, p, plan, static_cast<std::size_t>(i), seed, out);
    } else {
        for (std::ptrdiff_t i = 0; i < m; ++i)
            generate_neighborhood(d, p, plan, static_cast<std::size_t>(i), seed, out);
    }
    return out;
}

}  // namespace

std::string_view to_string(SamplerKind kind) noexcept {
    switch (kind) {
        case SamplerKind::None: return "none";
        case SamplerKind::Loras: return "loras";
        case SamplerKind::Smote: return "smote";
        case SamplerKind::Borderline1: return "borderline1";
        case SamplerKind::Borderline2: return "borderline2";
        case SamplerKind::Adasyn: return "adasyn";
    }
    return "unknown";
}

std::optional<SamplerKind> parse_sampler(std::string_view name) noexcept {
    for (auto k : {SamplerKind::None, SamplerKind::Loras, SamplerKind::Smote, SamplerKind::Borderline1,
                   SamplerKind::Borderline2, SamplerKind::Adasyn})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

void LorasParams::validate(std::size_t f_count) const {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    if (num_shadow < 1) throw Error(ErrorKind::InvalidArgument, "num_shadow must be >= 1");
    if (n_gen < 1) throw Error(ErrorKind::InvalidArgument, "n_gen must be >= 1");
    if (n_aff < 2) throw Error(ErrorKind::ConstraintViolated, "n_aff must be >= 2");
    if (n_aff >= k * num_shadow)
        throw Error(ErrorKind::ConstraintViolated, "n_aff=" + std::to_string(n_aff) + " must be < k*num_shadow=" +
                                                       std::to_string(k * num_shadow));
    if (sigma_list.size() != f_count)
        throw Error(ErrorKind::InvalidArgument, "sigma_list needs one entry per feature");
    for (double sg : sigma_list)
        if (!(sg > 0.0) || !std::isfinite(sg)) throw Error(ErrorKind::InvalidArgument, "sigma entries must be > 0");
    if (!(perplexity > 0.0)) throw Error(ErrorKind::InvalidArgument, "perplexity must be positive");
}

LorasParams resolve_defaults(const Dataset& d, const ClassSplit& s) {
    const std::size_t n_min = s.minority_idx.size();
    const std::size_t n_maj = s.majority_idx.size();
    if (n_min == 0) throw Error(ErrorKind::EmptyMinority, "no minority rows");
    const std::size_t f = d.f_count();

    LorasParams p;
    p.k = n_min >= 100 ? 30 : 5;
    p.num_shadow = std::max<std::size_t>((2 * f + p.k - 1) / p.k, 40);
    p.sigma_list.assign(f, 0.005);
    p.n_aff = std::max<std::size_t>(2, std::min(f, p.k * p.num_shadow - 1));
    p.n_gen = std::max<std::size_t>(1, (n_maj - std::min(n_maj, n_min)) / n_min);
    return p;
}

std::vector<double> draw_simplex_weights(std::size_t m, Rng& rng) {
    if (m == 0) throw Error(ErrorKind::InvalidArgument, "simplex dimension must be >= 1");
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(m);
    double sum = 0.0;
    for (auto& v : w) {
        v = expo(rng);
        sum += v;
    }
    for (auto& v : w) v /= sum;
    return w;
}

std::vector<Shadowsample> make_shadowsamples(std::span<const double> parent_vec, std::size_t parent_idx,
                                             std::size_t count, std::span<const double> sigma_list, Rng& rng) {
    if (sigma_list.size() != parent_vec.size())
        throw Error(ErrorKind::InvalidArgument, "sigma_list length must match the feature count");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Shadowsample> out(count);
    for (auto& sh : out) {
        sh.parent = parent_idx;
        sh.vector.resize(parent_vec.size());
        for (std::size_t j = 0; j < parent_vec.size(); ++j)
            sh.vector[j] = parent_vec[j] + sigma_list[j] * normal(rng);
    }
    return out;
}

SyntheticSet loras_oversample(const Dataset& d, const ClassSplit& s, const LorasParams& p, std::uint64_t seed) {
    return loras_impl(d, s, p, seed, true);
}

SyntheticSet serial::loras_oversample(const Dataset& d, const ClassSplit& s, const LorasParams& p,
                                      std::uint64_t seed) {
    return loras_impl(d, s, p, seed, false);
}

SyntheticSet smote_oversample(const Dataset& d, const ClassSplit& s, std::size_t k, std::size_t total,
                              std::uint64_t seed, const InterpolationOptions& opt) {
    require_minority(s);
    SyntheticSet out;
    out.seed = seed;
    out.samples = Matrix(total, d.f_count());
    out.provenance.resize(total);
    if (total == 0) return out;

    const std::size_t m = s.minority_idx.size();
    k = clamp_k(k, m - 1, out.warnings);
    const KnnLists nn = minority_knn(d, s, k);

    Rng rng = make_stream(seed, kSmoteStream);
    std::uniform_int_distribution<std::size_t> pick_base(0, m - 1), pick_nb(0, k - 1);
    for (std::size_t g = 0; g < total; ++g) {
        const std::size_t bi = pick_base(rng);
        const std::size_t base = s.minority_idx[bi];
        const std::size_t partner = nn[bi][pick_nb(rng)];
        const double lambda = draw_lambda(rng, 1.0, opt);
        interpolate_into(out.samples.row(g), d.features.row(base), d.features.row(partner), lambda);
        out.provenance[g] = {SamplerKind::Smote, base, partner, lambda};
    }
    return out;
}

std::vector<PointType> borderline_types(const Dataset& d, const ClassSplit& s, std::size_t k) {
    const KnnLists full = full_knn_of_minority(d, s, k);
    const auto is_min = minority_label_mask(d, s);
    std::vector<PointType> types;
    types.reserve(full.size());
    for (const auto& list : full) {
        std::size_t maj = 0;
        for (auto r : list) maj += is_min[r] == 0.0 ? 1 : 0;
        const std::size_t kk = list.size();
        if (maj == kk) types.push_back(PointType::Noise);
        else if (2 * maj > kk) types.push_back(PointType::Danger);
        else types.push_back(PointType::Safe);
    }
    return types;
}

SyntheticSet borderline_smote(const Dataset& d, const ClassSplit& s, std::size_t k, int variant, std::size_t total,
                              std::uint64_t seed, const InterpolationOptions& opt) {
    require_minority(s);
    if (variant != 1 && variant != 2) throw Error(ErrorKind::InvalidArgument, "borderline variant must be 1 or 2");
    const SamplerKind kind = variant == 1 ? SamplerKind::Borderline1 : SamplerKind::Borderline2;

    std::vector<std::string> warnings;
    const std::size_t m = s.minority_idx.size();
    const std::size_t k_full = clamp_k(k, d.n() - 1, warnings);
    const std::size_t k_min = clamp_k(k, m - 1, warnings);

    const auto types = borderline_types(d, s, k_full);
    std::vector<std::size_t> danger;
    for (std::size_t i = 0; i < m; ++i)
        if (types[i] == PointType::Danger) danger.push_back(i);
    if (danger.empty()) {
        SyntheticSet out = smote_oversample(d, s, k, total, seed, opt);
        out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
        out.warnings.push_back(std::string(to_string(kind)) + ": no DANGER points, fell back to plain SMOTE");
        return out;
    }

    SyntheticSet out;
    out.seed = seed;
    out.warnings = std::move(warnings);
    out.samples = Matrix(total, d.f_count());
    out.provenance.resize(total);
    if (total == 0) return out;

    const KnnLists min_nn = minority_knn(d, s, k_min);
    KnnLists full_nn;
    if (variant == 2) full_nn = full_knn_of_minority(d, s, k_full);
    const auto is_min = minority_label_mask(d, s);

    Rng rng = make_stream(seed, kBorderStream, static_cast<std::uint64_t>(variant));
    std::uniform_int_distribution<std::size_t> pick_danger(0, danger.size() - 1);
    std::vector<std::size_t> candidates;
    for (std::size_t g = 0; g < total; ++g) {
        const std::size_t bi = danger[pick_danger(rng)];
        const std::size_t base = s.minority_idx[bi];
        candidates = min_nn[bi];
        if (variant == 2)
            for (auto r : full_nn[bi])
                if (is_min[r] == 0.0) candidates.push_back(r);
        const std::size_t partner =
            candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
        // Steps toward a majority row stop at the midpoint.
        const double upper = is_min[partner] != 0.0 ? 1.0 : 0.5;
        const double lambda = draw_lambda(rng, upper, opt);
        interpolate_into(out.samples.row(g), d.features.row(base), d.features.row(partner), lambda);
        out.provenance[g] = {kind, base, partner, lambda};
    }
    return out;
}

std::vector<std::size_t> adasyn_allocation(std::span<const double> ratios, std::size_t total) {
    const double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
    std::vector<std::size_t> g(ratios.size(), 0);
    if (!(sum > 0.0)) return g;
    long long assigned = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        g[i] = static_cast<std::size_t>(std::llround(static_cast<double>(total) * ratios[i] / sum));
        assigned += static_cast<long long>(g[i]);
    }
    std::vector<std::size_t> order(ratios.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ratios[a] > ratios[b]; });

    long long residue = static_cast<long long>(total) - assigned;
    for (std::size_t t = 0; residue > 0; t = (t + 1) % order.size()) {
        if (ratios[order[t]] <= 0.0) {
            t = order.size() - 1;  // only positive ratios take extras; restart
            continue;
        }
        ++g[order[t]];
        --residue;
    }
    for (std::size_t t = 0; residue < 0; t = (t + 1) % order.size()) {
        if (g[order[t]] > 0) {
            --g[order[t]];
            ++residue;
        }
    }
    return g;
}

SyntheticSet adasyn(const Dataset& d, const ClassSplit& s, std::size_t k, std::size_t total, std::uint64_t seed,
                    const InterpolationOptions& opt) {
    require_minority(s);
    std::vector<std::string> warnings;
    const std::size_t m = s.minority_idx.size();
    const std::size_t k_full = clamp_k(k, d.n() - 1, warnings);
    const std::size_t k_min = clamp_k(k, m - 1, warnings);

    const KnnLists full = full_knn_of_minority(d, s, k_full);
    const auto is_min = minority_label_mask(d, s);
    std::vector<double> ratios(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t maj = 0;
        for (auto r : full[i]) maj += is_min[r] == 0.0 ? 1 : 0;
        ratios[i] = static_cast<double>(maj) / static_cast<double>(full[i].size());
    }
    if (std::accumulate(ratios.begin(), ratios.end(), 0.0) <= 0.0) {
        SyntheticSet out = smote_oversample(d, s, k, total, seed, opt);
        out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
        out.warnings.push_back("adasyn: no minority row has majority neighbors, fell back to plain SMOTE");
        return out;
    }

    SyntheticSet out;
    out.seed = seed;
    out.warnings = std::move(warnings);
    out.samples = Matrix(total, d.f_count());
    out.provenance.resize(total);
    const auto alloc = adasyn_allocation(ratios, total);
    if (total == 0) return out;
    const KnnLists nn = minority_knn(d, s, k_min);

    Rng rng = make_stream(seed, kAdasynStream);
    std::uniform_int_distribution<std::size_t> pick_nb(0, k_min - 1);
    std::size_t g = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t base = s.minority_idx[i];
        for (std::size_t c = 0; c < alloc[i]; ++c, ++g) {
            const std::size_t partner = nn[i][pick_nb(rng)];
            const double lambda = draw_lambda(rng, 1.0, opt);
            interpolate_into(out.samples.row(g), d.features.row(base), d.features.row(partner), lambda);
            out.provenance[g] = {SamplerKind::Adasyn, base, partner, lambda};
        }
    }
    return out;
}

LorasParams loras_params_for(const Dataset& d, const ClassSplit& s, const SamplerConfig& cfg) {
    LorasParams p = resolve_defaults(d, s);
    if (cfg.k) p.k = *cfg.k;
    if (cfg.num_shadow) p.num_shadow = *cfg.num_shadow;
    if (cfg.k || cfg.num_shadow) {
        // Re-derive the dependent defaults unless overridden explicitly.
        if (!cfg.num_shadow) p.num_shadow = std::max<std::size_t>((2 * d.f_count() + p.k - 1) / p.k, 40);
        p.n_aff = std::max<std::size_t>(2, std::min(d.f_count(), p.k * p.num_shadow - 1));
    }
    if (cfg.sigma) p.sigma_list.assign(d.f_count(), *cfg.sigma);
    p.relative_sigma = cfg.relative_sigma;
    if (cfg.n_aff) p.n_aff = *cfg.n_aff;
    if (cfg.n_gen) p.n_gen = *cfg.n_gen;
    p.embedding = cfg.embedding;
    p.perplexity = cfg.perplexity;
    p.exact_balance = cfg.exact_balance;
    return p;
}

SyntheticSet oversample(const Dataset& d, const ClassSplit& s, const SamplerConfig& cfg, std::uint64_t seed) {
    const std::size_t gap = s.majority_idx.size() - std::min(s.majority_idx.size(), s.minority_idx.size());
    const std::size_t total = cfg.total.value_or(gap);
    const std::size_t k = cfg.k.value_or(5);
    switch (cfg.kind) {
        case SamplerKind::None: {
            SyntheticSet out;
            out.seed = seed;
            out.samples = Matrix(0, d.f_count());
            return out;
        }
        case SamplerKind::Loras: return loras_oversample(d, s, loras_params_for(d, s, cfg), seed);
        case SamplerKind::Smote: return smote_oversample(d, s, k, total, seed);
        case SamplerKind::Borderline1: return borderline_smote(d, s, k, 1, total, seed);
        case SamplerKind::Borderline2: return borderline_smote(d, s, k, 2, total, seed);
        case SamplerKind::Adasyn: return adasyn(d, s, k, total, seed);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown sampler");
}

}  // namespace loras
