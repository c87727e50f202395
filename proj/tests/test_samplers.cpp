#include "loras/error.hpp"
#include "loras/samplers.hpp"
#include "loras/synthetic_data.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <omp.h>

using namespace loras;

namespace {

ErrorKind error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

// Distance from p to the segment [a, b].
double segment_distance(std::span<const double> p, std::span<const double> a, std::span<const double> b) {
    double ab2 = 0, t = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        ab2 += (b[j] - a[j]) * (b[j] - a[j]);
        t += (p[j] - a[j]) * (b[j] - a[j]);
    }
    t = ab2 > 0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double q = a[j] + t * (b[j] - a[j]);
        d2 += (p[j] - q) * (p[j] - q);
    }
    return std::sqrt(d2);
}

double norm_between(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
}

Dataset abalone_shaped(std::uint64_t seed = 19) { return two_gaussians(4145, 32, 10, 1.0, seed); }

}  // namespace

TEST_CASE("resolve_defaults follows the parameter table") {
    SUBCASE("abalone19: k=5, n_gen=128") {
        const Dataset d = abalone_shaped();
        const LorasParams p = resolve_defaults(d, class_split(d));
        CHECK(p.k == 5);
        CHECK(p.num_shadow == 40);
        CHECK(p.n_aff == 10);
        CHECK(p.n_gen == 128);  // floor(4113 / 32)
        CHECK(p.sigma_list == std::vector<double>(10, 0.005));
        CHECK(p.embedding == EmbeddingChoice::Regular);
        CHECK(p.perplexity == 30.0);
    }
    SUBCASE("arrhythmia: 278 features, k=5 -> 112 shadowsamples") {
        const Dataset d = two_gaussians(427, 25, 278, 1.0, 1);
        const LorasParams p = resolve_defaults(d, class_split(d));
        CHECK(p.k == 5);
        CHECK(p.num_shadow == 112);  // max(ceil(556/5), 40)
        CHECK(p.n_aff == 278);
        CHECK(p.n_gen == 16);
    }
    SUBCASE("100+ minority rows use k=30") {
        const Dataset d = two_gaussians(1000, 100, 3, 1.0, 1);
        const LorasParams p = resolve_defaults(d, class_split(d));
        CHECK(p.k == 30);
        CHECK(p.num_shadow == 40);
        CHECK(p.n_aff == 3);
        CHECK(p.n_gen == 9);
    }
    SUBCASE("a single feature still combines two shadow points") {
        const Dataset d = two_gaussians(30, 10, 1, 1.0, 1);
        CHECK(resolve_defaults(d, class_split(d)).n_aff == 2);
    }
}

TEST_CASE("LorasParams constraint n_aff < k * num_shadow") {
    const Dataset d = two_gaussians(60, 20, 3, 1.0, 4);
    const ClassSplit s = class_split(d);
    LorasParams p = resolve_defaults(d, s);
    p.k = 2;
    p.num_shadow = 3;
    p.n_aff = 6;
    CHECK(error_of([&] { loras_oversample(d, s, p, 1); }) == ErrorKind::ConstraintViolated);
    p.n_aff = 5;
    CHECK_NOTHROW(loras_oversample(d, s, p, 1));
    p.n_aff = 1;
    CHECK(error_of([&] { p.validate(3); }) == ErrorKind::ConstraintViolated);
    p.n_aff = 2;
    p.sigma_list = {0.1, 0.0, 0.1};
    CHECK(error_of([&] { p.validate(3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("draw_simplex_weights") {
    Rng rng = make_stream(1);
    CHECK(draw_simplex_weights(1, rng) == std::vector<double>{1.0});
    for (std::size_t m : {2u, 3u, 10u, 100u, 1000u}) {
        const auto w = draw_simplex_weights(m, rng);
        double sum = 0;
        for (double v : w) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("Dirichlet(1,...,1) moments for m=10 over 1e6 draws") {
    // Closed forms: E = 1/m = 0.1, Var = (m-1)/(m^2 (m+1)) = 9/1100.
    Rng rng = make_stream(2024);
    const std::size_t draws = 1'000'000;
    double s1 = 0, s2 = 0;
    for (std::size_t t = 0; t < draws; ++t) {
        const double a = draw_simplex_weights(10, rng)[0];
        s1 += a;
        s2 += a * a;
    }
    const double mean = s1 / draws;
    const double var = s2 / draws - mean * mean;
    CHECK(std::abs(mean - 0.1) <= 0.001);
    CHECK(std::abs(var / (9.0 / 1100.0) - 1.0) <= 0.05);
}

TEST_CASE("make_shadowsamples") {
    Rng rng = make_stream(3);
    const std::vector<double> parent{1.0, -2.0, 3.5};
    SUBCASE("zero noise reproduces the parent") {
        const std::vector<double> zero(3, 0.0);
        for (const auto& sh : make_shadowsamples(parent, 7, 5, zero, rng)) {
            CHECK(sh.vector == parent);
            CHECK(sh.parent == 7);
        }
    }
    SUBCASE("shape") {
        const std::vector<double> sig(3, 0.01);
        const auto shadows = make_shadowsamples(parent, 0, 4, sig, rng);
        CHECK(shadows.size() == 4);
        for (const auto& sh : shadows) CHECK(sh.vector.size() == 3);
    }
    SUBCASE("40 draws at sigma 0.005 have sample sd in [0.003, 0.007]") {
        // 39 s^2 / sigma^2 ~ chi2(39); the band is chi2 in [14.0, 76.4],
        // outside of which the probability is below 1e-4.
        const std::vector<double> sig(3, 0.005);
        for (int rep = 0; rep < 20; ++rep) {
            const auto shadows = make_shadowsamples(parent, 0, 40, sig, rng);
            for (std::size_t j = 0; j < 3; ++j) {
                double mean = 0;
                for (const auto& sh : shadows) mean += sh.vector[j];
                mean /= 40;
                double ss = 0;
                for (const auto& sh : shadows) ss += (sh.vector[j] - mean) * (sh.vector[j] - mean);
                const double sd = std::sqrt(ss / 39);
                CHECK(sd >= 0.003);
                CHECK(sd <= 0.007);
            }
        }
    }
}

TEST_CASE("LoRAS on a degenerate cluster returns the common point") {
    // Three clones of one minority point plus a distant majority.
    Matrix x{{2.5, -1.0}, {2.5, -1.0}, {2.5, -1.0}, {9, 9}, {8, 9}, {9, 8}, {7, 7}};
    const Dataset d = make_dataset(x, {1, 1, 1, 0, 0, 0, 0});
    const ClassSplit s = class_split(d);
    LorasParams p;
    p.k = 2;
    p.num_shadow = 4;
    p.sigma_list = {1e-15, 1e-15};
    p.n_aff = 2;
    p.n_gen = 1;
    const SyntheticSet out = loras_oversample(d, s, p, 5);
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(std::abs(out.samples(i, 0) - 2.5) <= 1e-9);
        CHECK(std::abs(out.samples(i, 1) + 1.0) <= 1e-9);
    }
}

TEST_CASE("LoRAS count contract on abalone19-shaped data") {
    const Dataset d = abalone_shaped();
    const ClassSplit s = class_split(d);
    LorasParams p = resolve_defaults(d, s);
    const SyntheticSet out = loras_oversample(d, s, p, 42);
    CHECK(out.size() == 32 * 128);
    CHECK(out.size() == 4096);
    const std::size_t gap = s.majority_idx.size() - s.minority_idx.size();
    CHECK(gap == 4113);
    CHECK(gap - out.size() <= s.minority_idx.size());

    p.exact_balance = true;
    const SyntheticSet exact = loras_oversample(d, s, p, 42);
    CHECK(exact.size() == 4113);
    // Each neighborhood receives n_gen or n_gen + 1 points.
    std::map<std::size_t, std::size_t> per_parent;
    for (const auto& pr : exact.provenance) ++per_parent[pr.parent];
    CHECK(per_parent.size() == 32);
    for (const auto& [parent, count] : per_parent) CHECK((count == 128 || count == 129));
}

TEST_CASE("LoRAS outputs are convex combinations of their shadow points") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Dataset d = two_gaussians(300, 40, 4, 2.0, seed);
        const ClassSplit s = class_split(d);
        LorasParams p = resolve_defaults(d, s);
        p.sigma_list.assign(4, 0.05);
        p.n_aff = 3;
        p.record_trace = true;
        const SyntheticSet out = loras_oversample(d, s, p, seed * 7);
        REQUIRE(out.trace.size() == out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const AffineTrace& tr = out.trace[i];
            double wsum = 0;
            for (double w : tr.weights) {
                CHECK(w >= 0.0);
                wsum += w;
            }
            CHECK(std::abs(wsum - 1.0) <= 1e-12);
            for (std::size_t j = 0; j < 4; ++j) {
                double recon = 0, lo = INFINITY, hi = -INFINITY;
                for (std::size_t t = 0; t < tr.weights.size(); ++t) {
                    recon += tr.weights[t] * tr.selected(t, j);
                    lo = std::min(lo, tr.selected(t, j));
                    hi = std::max(hi, tr.selected(t, j));
                }
                CHECK(std::abs(recon - out.samples(i, j)) <= 1e-9);
                CHECK(out.samples(i, j) >= lo - 1e-12);
                CHECK(out.samples(i, j) <= hi + 1e-12);
            }
            CHECK(out.provenance[i].algorithm == SamplerKind::Loras);
        }
    }
}

TEST_CASE("LoRAS shadow points come from the parent's neighborhood") {
    // Two far-apart minority clumps: every output must stay near its own clump.
    Matrix x(0, 1);
    std::vector<int> y;
    for (int i = 0; i < 6; ++i) {
        x.append_row(std::vector<double>{0.1 * i});
        y.push_back(1);
        x.append_row(std::vector<double>{1000.0 + 0.1 * i});
        y.push_back(1);
    }
    for (int i = 0; i < 40; ++i) {
        x.append_row(std::vector<double>{500.0 + i});
        y.push_back(0);
    }
    const Dataset d = make_dataset(x, y);
    const ClassSplit s = class_split(d);
    LorasParams p = resolve_defaults(d, s);
    p.k = 3;
    const SyntheticSet out = loras_oversample(d, s, p, 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double parent = d.features(out.provenance[i].parent, 0);
        CHECK(std::abs(out.samples(i, 0) - parent) < 1.0);
    }
}

TEST_CASE("LoRAS with t-embedding neighborhoods") {
    const Dataset d = two_gaussians(200, 40, 4, 2.0, 6);
    const ClassSplit s = class_split(d);
    LorasParams p = resolve_defaults(d, s);
    p.embedding = EmbeddingChoice::TEmbedding;
    p.perplexity = 10;
    const SyntheticSet a = loras_oversample(d, s, p, 3);
    CHECK(a.size() == 40 * p.n_gen);
    CHECK(a.samples == loras_oversample(d, s, p, 3).samples);
    p.perplexity = 40;
    CHECK(error_of([&] { loras_oversample(d, s, p, 3); }) == ErrorKind::PerplexityTooLarge);
}

TEST_CASE("LoRAS output is independent of thread count and matches the serial reference") {
    const Dataset d = two_gaussians(500, 60, 5, 1.5, 12);
    const ClassSplit s = class_split(d);
    LorasParams p = resolve_defaults(d, s);
    p.exact_balance = true;
    const SyntheticSet ref = serial::loras_oversample(d, s, p, 77);
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        const SyntheticSet par = loras_oversample(d, s, p, 77);
        CHECK(par.samples == ref.samples);
    }
    omp_set_num_threads(1);
    CHECK(loras_oversample(d, s, p, 78).samples != ref.samples);
}

TEST_CASE("SMOTE endpoints via the lambda hook") {
    const Dataset d = two_gaussians(50, 10, 3, 1.0, 2);
    const ClassSplit s = class_split(d);
    for (double lam : {0.0, 1.0}) {
        const SyntheticSet out = smote_oversample(d, s, 3, 30, 9, {lam});
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto& pr = out.provenance[i];
            const auto expect = d.features.row(lam == 0.0 ? pr.parent : pr.partner);
            // a + 1 * (b - a) can differ from b in the last bit.
            for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(out.samples(i, j) - expect[j]) <= 1e-12);
        }
    }
}

TEST_CASE("SMOTE samples are collinear with their pair and on the segment") {
    const Dataset d = two_gaussians(80, 15, 2, 1.0, 3);
    const ClassSplit s = class_split(d);
    const SyntheticSet out = smote_oversample(d, s, 5, 200, 4);
    REQUIRE(out.size() == 200);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& pr = out.provenance[i];
        const auto a = d.features.row(pr.parent), b = d.features.row(pr.partner);
        const auto p = out.samples.row(i);
        const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        CHECK(std::abs(cross) <= 1e-9);
        CHECK(segment_distance(p, a, b) <= 1e-9 * std::max(norm_between(a, b), 1.0));
        CHECK(d.labels[pr.partner] == 1);
        CHECK(pr.parent != pr.partner);
    }
}

TEST_CASE("SMOTE count contract, empty total and errors") {
    const Dataset d = two_gaussians(80, 4, 2, 1.0, 3);
    const ClassSplit s = class_split(d);
    CHECK(smote_oversample(d, s, 5, 0, 1).size() == 0);
    const SyntheticSet out = smote_oversample(d, s, 10, 17, 1);
    CHECK(out.size() == 17);
    CHECK_FALSE(out.warnings.empty());  // k clamped to 3

    const Dataset lonely = make_dataset(Matrix{{0}, {1}, {2}}, {1, 0, 0});
    CHECK(error_of([&] { smote_oversample(lonely, class_split(lonely), 1, 3, 1); }) == ErrorKind::EmptyMinority);
}

TEST_CASE("borderline: NOISE points generate nothing") {
    // Row 0 is boxed in by majority rows, rows 1..3 form a safe clump and
    // row 4 has two majority rows right next to it.
    Matrix x{{0.0, 0.0}, {5.0, 5.0}, {5.5, 5.0}, {6.0, 5.0}, {2.0, 2.0}};
    std::vector<int> y{1, 1, 1, 1, 1};
    for (double a : {-0.5, 0.5}) {
        for (double b : {-0.5, 0.5}) {
            x.append_row(std::vector<double>{a, b});
            y.push_back(0);
        }
    }
    x.append_row(std::vector<double>{2.3, 2.0});
    y.push_back(0);
    x.append_row(std::vector<double>{2.0, 2.3});
    y.push_back(0);
    for (int i = 0; i < 6; ++i) {
        x.append_row(std::vector<double>{-5.0 - i, -5.0});
        y.push_back(0);
    }
    const Dataset d = make_dataset(x, y);
    const ClassSplit s = class_split(d);
    const auto types = borderline_types(d, s, 4);
    CHECK(types[0] == PointType::Noise);
    CHECK(types[1] == PointType::Safe);
    CHECK(types[4] == PointType::Danger);  // 3 of 4 neighbors are majority
    CHECK(types[2] == PointType::Safe);
    CHECK(types[3] == PointType::Safe);

    for (int variant : {1, 2}) {
        const SyntheticSet out = borderline_smote(d, s, 4, variant, 50, 3);
        CHECK(out.size() == 50);
        for (const auto& pr : out.provenance) {
            CHECK(pr.parent != 0);
            CHECK(pr.parent == 4);
        }
    }
}

TEST_CASE("borderline falls back to SMOTE when there are no DANGER points") {
    const Dataset d = two_gaussians(100, 20, 2, 30.0, 5);
    const SyntheticSet out = borderline_smote(d, class_split(d), 5, 1, 40, 6);
    CHECK(out.size() == 40);
    REQUIRE_FALSE(out.warnings.empty());
    CHECK(out.warnings.back().find("fell back") != std::string::npos);
}

TEST_CASE("borderline-2 steps toward majority rows stay in the near half") {
    const Dataset d = two_gaussians(300, 40, 2, 1.0, 7);
    const ClassSplit s = class_split(d);
    const SyntheticSet out = borderline_smote(d, s, 5, 2, 2000, 8);
    std::size_t toward_majority = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& pr = out.provenance[i];
        if (d.labels[pr.partner] == 1) continue;
        ++toward_majority;
        CHECK(pr.lambda < 0.5);
        const auto a = d.features.row(pr.parent), b = d.features.row(pr.partner);
        CHECK(norm_between(out.samples.row(i), a) <= norm_between(out.samples.row(i), b) + 1e-12);
        CHECK(segment_distance(out.samples.row(i), a, b) <= 1e-9 * std::max(norm_between(a, b), 1.0));
    }
    CHECK(toward_majority > 0);
}

TEST_CASE("ADASYN allocation") {
    CHECK(adasyn_allocation(std::vector<double>{0.2, 0.8}, 10) == std::vector<std::size_t>{2, 8});
    CHECK(adasyn_allocation(std::vector<double>{0.0, 1.0, 0.5}, 9) == std::vector<std::size_t>{0, 6, 3});
    // Three equal ratios, 10 samples: 3.33 rounds to 3 each; the leftover goes to the first.
    CHECK(adasyn_allocation(std::vector<double>{0.4, 0.4, 0.4}, 10) == std::vector<std::size_t>{4, 3, 3});
    // Rounding up everywhere: 2.5 -> 3 twice, then one is taken back from the highest.
    CHECK(adasyn_allocation(std::vector<double>{0.5, 0.5}, 5) == std::vector<std::size_t>{2, 3});
    for (std::size_t total : {0u, 1u, 7u, 100u}) {
        const auto g = adasyn_allocation(std::vector<double>{0.1, 0.3, 0.0, 0.6, 0.25}, total);
        CHECK(std::accumulate(g.begin(), g.end(), std::size_t{0}) == total);
        CHECK(g[2] == 0);
    }
}

TEST_CASE("ADASYN end to end") {
    const Dataset d = two_gaussians(300, 30, 3, 1.0, 9);
    const ClassSplit s = class_split(d);
    const SyntheticSet out = adasyn(d, s, 5, 270, 4);
    CHECK(out.size() == 270);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& pr = out.provenance[i];
        CHECK(d.labels[pr.partner] == 1);
        const auto a = d.features.row(pr.parent), b = d.features.row(pr.partner);
        CHECK(segment_distance(out.samples.row(i), a, b) <= 1e-9 * std::max(norm_between(a, b), 1.0));
    }

    const Dataset separated = two_gaussians(100, 20, 2, 40.0, 5);
    const SyntheticSet fb = adasyn(separated, class_split(separated), 5, 30, 1);
    CHECK(fb.size() == 30);
    REQUIRE_FALSE(fb.warnings.empty());
    CHECK(fb.warnings.back().find("fell back") != std::string::npos);
}

TEST_CASE("every sampler is deterministic under its seed") {
    const Dataset d = two_gaussians(200, 25, 3, 1.0, 10);
    const ClassSplit s = class_split(d);
    for (auto kind : {SamplerKind::Loras, SamplerKind::Smote, SamplerKind::Borderline1, SamplerKind::Borderline2,
                      SamplerKind::Adasyn}) {
        SamplerConfig cfg;
        cfg.kind = kind;
        const SyntheticSet a = oversample(d, s, cfg, 5);
        const SyntheticSet b = oversample(d, s, cfg, 5);
        CHECK(a.samples == b.samples);
        if (kind != SamplerKind::Loras) CHECK(a.size() == 175);
        CHECK(oversample(d, s, cfg, 6).samples != a.samples);
    }
    SamplerConfig none;
    CHECK(oversample(d, s, none, 1).size() == 0);
}

TEST_CASE("sampler names round-trip") {
    for (auto kind : {SamplerKind::None, SamplerKind::Loras, SamplerKind::Smote, SamplerKind::Borderline1,
                      SamplerKind::Borderline2, SamplerKind::Adasyn})
        CHECK(parse_sampler(to_string(kind)) == kind);
    CHECK_FALSE(parse_sampler("svm-smote").has_value());
}
