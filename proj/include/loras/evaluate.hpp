#pragma once

#include "loras/dataset.hpp"
#include "loras/neighbors.hpp"
#include "loras/samplers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loras {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
        tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
        return *this;
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Positive = `positive_label` (the minority label).
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int positive_label = 1);

struct MetricSet {
    double precision = 0, recall = 0, f1 = 0, balanced_accuracy = 0;
};

MetricSet metrics_from_confusion(const ConfusionMatrix& c);

/// Neighbor count rule for the kNN classifier: 10 below 100 minority rows, else 30.
std::size_t default_knn_k(std::size_t minority_count);

/// Majority vote over the k nearest training rows; ties go to label 0.
std::vector<int> knn_classify(const Dataset& train, const Matrix& test_features, std::size_t k,
                              Metric metric = Metric::euclidean());

/// Plain (non-validating) variant used where the training matrix is built on
/// the fly from original and synthetic rows.
std::vector<int> knn_classify(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_features,
                              std::size_t k, Metric metric = Metric::euclidean());

struct LogRegOptions {
    std::size_t epochs = 500;
    double step = 0.1;
    double l2 = 1e-4;
};

/// Logistic model on z-scored features (train statistics).
struct LogRegModel {
    std::vector<double> mean;
    std::vector<double> scale;
    /// weights[0] is the intercept, then one weight per feature.
    std::vector<double> weights;
    std::vector<double> loss_trace;
    double final_loss = 0.0;

    double probability(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& x) const;
};

LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegOptions& opt = {});
LogRegModel logreg_fit(const Dataset& train, const LogRegOptions& opt = {});

enum class ClassifierKind { Knn, LogReg };
std::string_view to_string(ClassifierKind kind) noexcept;
std::optional<ClassifierKind> parse_classifier(std::string_view name) noexcept;

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::Knn;
    /// kNN neighbors; unset applies default_knn_k to the full dataset's minority size.
    std::optional<std::size_t> k;
    Metric metric = Metric::euclidean();
    LogRegOptions logreg;
};

/// Row identity tag for the leakage audit: original row index, or kSyntheticRow.
inline constexpr long long kSyntheticRow = -1;

struct FoldResult {
    std::size_t repeat = 0, fold = 0;
    ConfusionMatrix confusion;
    std::size_t train_original = 0;
    std::size_t train_synthetic = 0;
    /// Identity tags of every scored row (kept when auditing).
    std::vector<long long> scored_rows;
    /// Minority / majority rows in the test fold.
    std::size_t test_minority = 0, test_majority = 0;
    std::vector<std::string> warnings;
};

struct MetricSummary {
    std::vector<double> per_repeat;
    double mean = 0, sd = 0;
};

struct BenchmarkEntry {
    std::string sampler;
    std::string classifier;
    /// Metrics from confusion counts pooled over each repeat's folds.
    MetricSummary f1, balanced_accuracy, precision, recall;
    /// Same metrics averaged over folds instead of pooled.
    MetricSummary f1_fold_avg, balanced_accuracy_fold_avg;
    std::vector<ConfusionMatrix> pooled_confusion;  // one per repeat
    std::vector<FoldResult> folds;
};

struct BenchmarkReport {
    std::size_t repeats = 0, folds = 0;
    std::uint64_t seed = 0;
    std::vector<BenchmarkEntry> entries;
    std::vector<std::string> warnings;
};

struct CrossValidationOptions {
    std::uint64_t seed = 42;
    /// Record row identity tags of scored rows in each FoldResult.
    bool audit = false;
};

/// Oversamples each training split (never the test fold), fits the
/// classifier, scores the untouched test fold. Folds run in parallel; each
/// fold's sampler seed comes from (seed, repeat, fold).
BenchmarkEntry cross_validate(const Dataset& d, const SamplerConfig& sampler, const ClassifierConfig& classifier,
                              const FoldPlan& plan, const CrossValidationOptions& opt = {});

MetricSummary summarise(std::vector<double> per_repeat);

}  // namespace loras
