#include "loras/error.hpp"
#include "loras/evaluate.hpp"
#include "loras/synthetic_data.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <omp.h>
#include <set>

using namespace loras;

TEST_CASE("metrics from a confusion matrix") {
    SUBCASE("worked example") {
        const MetricSet m = metrics_from_confusion({3, 2, 4, 1});  // tp fp tn fn
        CHECK(m.precision == doctest::Approx(0.6));
        CHECK(m.recall == doctest::Approx(0.75));
        CHECK(m.f1 == doctest::Approx(2 * 0.6 * 0.75 / 1.35));
        CHECK(m.f1 == doctest::Approx(0.666667).epsilon(1e-5));
        CHECK(m.balanced_accuracy == doctest::Approx((0.75 + 4.0 / 6.0) / 2));
    }
    SUBCASE("all-negative predictions") {
        const MetricSet m = metrics_from_confusion({0, 0, 90, 10});
        CHECK(m.f1 == 0.0);
        CHECK(m.precision == 0.0);
        CHECK(m.balanced_accuracy == doctest::Approx(0.5));
    }
    SUBCASE("perfect") {
        const MetricSet m = metrics_from_confusion({5, 0, 5, 0});
        CHECK(m.f1 == 1.0);
        CHECK(m.balanced_accuracy == 1.0);
    }
    SUBCASE("scaling all counts leaves metrics unchanged") {
        const MetricSet a = metrics_from_confusion({7, 3, 40, 5});
        const MetricSet b = metrics_from_confusion({70, 30, 400, 50});
        CHECK(a.f1 == doctest::Approx(b.f1));
        CHECK(a.balanced_accuracy == doctest::Approx(b.balanced_accuracy));
        CHECK(a.precision == doctest::Approx(b.precision));
    }
}

TEST_CASE("confusion counts") {
    const std::vector<int> truth{1, 1, 0, 0, 1, 0};
    const std::vector<int> pred{1, 0, 1, 0, 1, 0};
    const ConfusionMatrix c = confusion(truth, pred);
    CHECK(c == ConfusionMatrix{2, 1, 2, 1});
    // Positive label 0 swaps the roles.
    CHECK(confusion(truth, pred, 0) == ConfusionMatrix{2, 1, 2, 1});
    CHECK_THROWS_AS(confusion(truth, std::vector<int>{1}), Error);
}

TEST_CASE("kNN classifier") {
    const Matrix train{{0, 0}, {0, 1}, {1, 0}, {10, 10}, {10, 11}, {11, 10}};
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    const Matrix test{{0.2, 0.2}, {10.5, 10.5}, {4, 4}};
    CHECK(knn_classify(train, y, test, 1) == std::vector<int>{0, 1, 0});
    CHECK(knn_classify(train, y, test, 3) == std::vector<int>{0, 1, 0});
    // k=2 at (10.5, 10.5): two minority neighbours, clear win.
    CHECK(knn_classify(train, y, test, 2)[1] == 1);
    // A 1-1 vote goes to label 0.
    const Matrix tie_train{{0.0}, {2.0}};
    CHECK(knn_classify(tie_train, std::vector<int>{1, 0}, Matrix{{1.0}}, 2) == std::vector<int>{0});
    CHECK_THROWS_AS(knn_classify(train, y, test, 7), Error);
    CHECK(default_knn_k(99) == 10);
    CHECK(default_knn_k(100) == 30);
}

TEST_CASE("logistic regression") {
    SUBCASE("separable data is fitted perfectly") {
        const Dataset d = two_gaussians(200, 50, 3, 8.0, 1);
        const LogRegModel m = logreg_fit(d);
        CHECK(m.predict(d.features) == d.labels);
        CHECK(m.weights.size() == 4);
    }
    SUBCASE("loss never increases") {
        const Dataset d = two_gaussians(300, 60, 4, 1.0, 2);
        const LogRegModel m = logreg_fit(d, {300, 5.0, 1e-3});
        REQUIRE(m.loss_trace.size() > 10);
        for (std::size_t t = 1; t < m.loss_trace.size(); ++t) CHECK(m.loss_trace[t] <= m.loss_trace[t - 1] + 1e-15);
        CHECK(m.final_loss < std::log(2.0));
    }
    SUBCASE("zero epochs leaves the prior model") {
        const Dataset d = two_gaussians(30, 10, 2, 1.0, 3);
        const LogRegModel m = logreg_fit(d, {0, 0.1, 0.0});
        CHECK(m.final_loss == doctest::Approx(std::log(2.0)));
        for (std::size_t i = 0; i < d.n(); ++i) CHECK(m.probability(d.features.row(i)) == 0.5);
    }
    SUBCASE("a single class is rejected") {
        const Matrix x{{0.0}, {1.0}};
        try {
            logreg_fit(x, std::vector<int>{1, 1});
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DegenerateLabels);
        }
    }
    SUBCASE("standardisation uses training statistics") {
        const Matrix x{{100.0, 5.0}, {102.0, 5.0}, {104.0, 5.0}, {106.0, 5.0}};
        const LogRegModel m = logreg_fit(x, std::vector<int>{0, 0, 1, 1});
        CHECK(m.mean[0] == doctest::Approx(103.0));
        CHECK(m.scale[0] == doctest::Approx(std::sqrt(5.0)));
        CHECK(m.scale[1] == 1.0);  // constant column
        CHECK(m.predict(x) == std::vector<int>{0, 0, 1, 1});
    }
}

TEST_CASE("cross-validation without oversampling") {
    const Dataset d = two_gaussians(270, 30, 3, 2.0, 4);
    const FoldPlan plan = stratified_folds(d, 2, 5, 8);
    ClassifierConfig knn;
    knn.k = 3;
    const BenchmarkEntry e = cross_validate(d, SamplerConfig{}, knn, plan, {8, true});
    REQUIRE(e.folds.size() == 10);
    CHECK(e.sampler == "none");
    CHECK(e.classifier == "knn");
    CHECK(e.f1.per_repeat.size() == 2);
    for (const auto& f : e.folds) {
        CHECK(f.train_synthetic == 0);
        CHECK(f.train_original + f.confusion.total() == d.n());
        CHECK(f.test_minority == 6);
        CHECK(f.test_majority == 54);
    }
    // Pooled F1 equals the F1 of summed confusion counts.
    for (std::size_t r = 0; r < 2; ++r) {
        ConfusionMatrix sum;
        for (std::size_t f = 0; f < 5; ++f) sum += e.folds[r * 5 + f].confusion;
        CHECK(sum == e.pooled_confusion[r]);
        CHECK(e.f1.per_repeat[r] == doctest::Approx(metrics_from_confusion(sum).f1));
    }
    CHECK(e.f1.mean == doctest::Approx((e.f1.per_repeat[0] + e.f1.per_repeat[1]) / 2));
}

TEST_CASE("leakage audit: only original test-fold rows are scored") {
    const Dataset d = two_gaussians(180, 20, 2, 1.5, 5);
    const FoldPlan plan = stratified_folds(d, 2, 5, 3);
    SamplerConfig cfg;
    cfg.kind = SamplerKind::Loras;
    for (auto kind : {ClassifierKind::Knn, ClassifierKind::LogReg}) {
        ClassifierConfig cls;
        cls.kind = kind;
        const BenchmarkEntry e = cross_validate(d, cfg, cls, plan, {1, true});
        for (std::size_t r = 0; r < 2; ++r) {
            std::multiset<long long> seen;
            for (std::size_t f = 0; f < 5; ++f) {
                const FoldResult& res = e.folds[r * 5 + f];
                CHECK(res.train_synthetic > 0);
                CHECK(res.scored_rows.size() == res.confusion.total());
                const auto test = plan.test_rows(r, f);
                const auto train = plan.train_rows(r, f);
                CHECK(res.train_original == train.size());
                for (long long id : res.scored_rows) {
                    CHECK(id != kSyntheticRow);
                    CHECK(std::binary_search(test.begin(), test.end(), static_cast<std::size_t>(id)));
                    CHECK_FALSE(std::binary_search(train.begin(), train.end(), static_cast<std::size_t>(id)));
                    seen.insert(id);
                }
            }
            CHECK(seen.size() == d.n());
            CHECK(std::set<long long>(seen.begin(), seen.end()).size() == d.n());
        }
    }
}

TEST_CASE("cross-validation is deterministic and thread-count independent") {
    const Dataset d = two_gaussians(300, 30, 4, 1.0, 6);
    const FoldPlan plan = stratified_folds(d, 2, 5, 1);
    SamplerConfig cfg;
    cfg.kind = SamplerKind::Loras;
    ClassifierConfig cls;
    omp_set_num_threads(1);
    const BenchmarkEntry a = cross_validate(d, cfg, cls, plan, {99});
    omp_set_num_threads(4);
    const BenchmarkEntry b = cross_validate(d, cfg, cls, plan, {99});
    omp_set_num_threads(1);
    CHECK(a.pooled_confusion == b.pooled_confusion);
    CHECK(a.f1.per_repeat == b.f1.per_repeat);
}

TEST_CASE("minority label 0 is treated as the positive class") {
    Dataset d = two_gaussians(40, 200, 2, 3.0, 7);  // label 1 is now the majority
    const FoldPlan plan = stratified_folds(d, 1, 5, 2);
    SamplerConfig cfg;
    cfg.kind = SamplerKind::Smote;
    const BenchmarkEntry e = cross_validate(d, cfg, ClassifierConfig{}, plan, {3});
    for (const auto& f : e.folds) {
        CHECK(f.test_minority == 8);
        CHECK(f.train_synthetic == 128);
    }
    CHECK(e.f1.mean > 0.8);
}

TEST_CASE("fold errors carry repeat and fold context") {
    const Dataset d = two_gaussians(100, 10, 2, 1.0, 8);
    const FoldPlan plan = stratified_folds(d, 1, 10, 2);
    SamplerConfig cfg;
    cfg.kind = SamplerKind::Loras;
    cfg.n_aff = 100000;
    try {
        cross_validate(d, cfg, ClassifierConfig{}, plan);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConstraintViolated);
        CHECK(std::string(e.what()).find("repeat 0, fold") != std::string::npos);
    }
}

TEST_CASE("summary statistics") {
    const MetricSummary s = summarise({0.5, 0.7, 0.9});
    CHECK(s.mean == doctest::Approx(0.7));
    CHECK(s.sd == doctest::Approx(0.2));
    CHECK(summarise({0.4}).sd == 0.0);
    CHECK(parse_classifier("logreg") == ClassifierKind::LogReg);
    CHECK_FALSE(parse_classifier("svm").has_value());
}
