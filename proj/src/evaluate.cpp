#include "loras/evaluate.hpp"

#include "loras/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace loras {
namespace {

double safe_ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct Standardised {
    Matrix x;
    std::vector<double> mean, scale;
};

Standardised standardise(const Matrix& x) {
    Standardised s{Matrix(x.rows(), x.cols()), std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 1.0)};
    const double n = static_cast<double>(x.rows());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
        mean /= n;
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        const double sd = std::sqrt(ss / n);
        s.mean[j] = mean;
        s.scale[j] = sd > 0 ? sd : 1.0;
        for (std::size_t i = 0; i < x.rows(); ++i) s.x(i, j) = (x(i, j) - mean) / s.scale[j];
    }
    return s;
}

double logreg_loss(const Matrix& z, std::span<const int> y, std::span<const double> w, double l2,
                   std::vector<double>* grad) {
    const std::size_t n = z.rows(), f = z.cols();
    double loss = 0.0;
    if (grad) grad->assign(f + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = w[0];
        for (std::size_t j = 0; j < f; ++j) s += w[j + 1] * z(i, j);
        // -[y log sig(s) + (1-y) log(1 - sig(s))]
        loss += y[i] == 1 ? softplus(-s) : softplus(s);
        if (grad) {
            const double r = sigmoid(s) - static_cast<double>(y[i]);
            (*grad)[0] += r;
            for (std::size_t j = 0; j < f; ++j) (*grad)[j + 1] += r * z(i, j);
        }
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (std::size_t j = 1; j <= f; ++j) reg += w[j] * w[j];
    loss += 0.5 * l2 * reg;
    if (grad) {
        for (auto& g : *grad) g /= static_cast<double>(n);
        for (std::size_t j = 1; j <= f; ++j) (*grad)[j] += l2 * w[j];
    }
    return loss;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int positive_label) {
    if (truth.size() != predicted.size()) throw Error(ErrorKind::InvalidArgument, "truth/prediction length mismatch");
    ConfusionMatrix c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == positive_label, p = predicted[i] == positive_label;
        if (t && p) ++c.tp;
        else if (!t && p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

MetricSet metrics_from_confusion(const ConfusionMatrix& c) {
    MetricSet m;
    const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    m.precision = safe_ratio(tp, tp + fp);
    m.recall = safe_ratio(tp, tp + fn);
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.balanced_accuracy = (m.recall + safe_ratio(tn, tn + fp)) / 2.0;
    return m;
}

std::size_t default_knn_k(std::size_t minority_count) { return minority_count < 100 ? 10 : 30; }

std::vector<int> knn_classify(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_features,
                              std::size_t k, Metric metric) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    if (k > train_x.rows())
        throw Error(ErrorKind::KTooLarge,
                    "k=" + std::to_string(k) + " exceeds " + std::to_string(train_x.rows()) + " training rows");
    const KnnLists nn = knn_query(train_x, test_features, k, metric);
    std::vector<int> out(test_features.rows(), 0);
    for (std::size_t i = 0; i < nn.size(); ++i) {
        std::size_t ones = 0;
        for (auto r : nn[i]) ones += train_y[r] == 1 ? 1 : 0;
        out[i] = 2 * ones > nn[i].size() ? 1 : 0;
    }
    return out;
}

std::vector<int> knn_classify(const Dataset& train, const Matrix& test_features, std::size_t k, Metric metric) {
    return knn_classify(train.features, train.labels, test_features, k, metric);
}

double LogRegModel::probability(std::span<const double> x) const {
    double s = weights[0];
    for (std::size_t j = 0; j < mean.size(); ++j) s += weights[j + 1] * (x[j] - mean[j]) / scale[j];
    return sigmoid(s);
}

std::vector<int> LogRegModel::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = probability(x.row(i)) > 0.5 ? 1 : 0;
    return out;
}

LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegOptions& opt) {
    if (x.rows() == 0) throw Error(ErrorKind::InvalidArgument, "empty training set");
    if (y.size() != x.rows()) throw Error(ErrorKind::InvalidArgument, "label count mismatch");
    const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
    const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
    if (!has0 || !has1) throw Error(ErrorKind::DegenerateLabels, "logistic regression needs both labels");
    if (!(opt.step > 0) || !(opt.l2 >= 0)) throw Error(ErrorKind::InvalidArgument, "step > 0 and l2 >= 0 required");

    Standardised s = standardise(x);
    LogRegModel model;
    model.mean = std::move(s.mean);
    model.scale = std::move(s.scale);
    model.weights.assign(x.cols() + 1, 0.0);

    std::vector<double> grad, candidate(model.weights.size());
    double loss = logreg_loss(s.x, y, model.weights, opt.l2, &grad);
    double step = opt.step;
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        double next = loss;
        bool accepted = false;
        // Halve the step until the loss does not increase.
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t j = 0; j < candidate.size(); ++j) candidate[j] = model.weights[j] - step * grad[j];
            next = logreg_loss(s.x, y, candidate, opt.l2, nullptr);
            if (!std::isfinite(next)) throw Error(ErrorKind::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch));
            if (next <= loss) {
                accepted = true;
                break;
            }
            step /= 2;
        }
        if (!accepted) break;
        model.weights = candidate;
        loss = logreg_loss(s.x, y, model.weights, opt.l2, &grad);
        model.loss_trace.push_back(loss);
    }
    model.final_loss = loss;
    return model;
}

LogRegModel logreg_fit(const Dataset& train, const LogRegOptions& opt) {
    return logreg_fit(train.features, train.labels, opt);
}

std::string_view to_string(ClassifierKind kind) noexcept { return kind == ClassifierKind::Knn ? "knn" : "logreg"; }

std::optional<ClassifierKind> parse_classifier(std::string_view name) noexcept {
    if (name == "knn") return ClassifierKind::Knn;
    if (name == "logreg") return ClassifierKind::LogReg;
    return std::nullopt;
}

MetricSummary summarise(std::vector<double> per_repeat) {
    MetricSummary s;
    s.per_repeat = std::move(per_repeat);
    if (s.per_repeat.empty()) return s;
    const double n = static_cast<double>(s.per_repeat.size());
    s.mean = std::accumulate(s.per_repeat.begin(), s.per_repeat.end(), 0.0) / n;
    if (s.per_repeat.size() > 1) {
        double ss = 0.0;
        for (double v : s.per_repeat) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (n - 1));
    }
    return s;
}

BenchmarkEntry cross_validate(const Dataset& d, const SamplerConfig& sampler, const ClassifierConfig& classifier,
                              const FoldPlan& plan, const CrossValidationOptions& opt) {
    if (plan.assignments.size() != plan.repeats || (plan.repeats > 0 && plan.assignments[0].size() != d.n()))
        throw Error(ErrorKind::InvalidArgument, "fold plan does not match the dataset");
    const ClassSplit full = class_split(d);
    const int minority_label = full.minority_label();
    const std::size_t knn_k = classifier.k.value_or(default_knn_k(full.minority_idx.size()));

    const std::size_t jobs = plan.repeats * plan.folds_per_repeat;
    std::vector<FoldResult> results(jobs);
    std::vector<std::exception_ptr> errors(jobs);

    const auto sj = static_cast<std::ptrdiff_t>(jobs);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t job = 0; job < sj; ++job) {
        const auto ju = static_cast<std::size_t>(job);
        const std::size_t r = ju / plan.folds_per_repeat, f = ju % plan.folds_per_repeat;
        FoldResult& res = results[ju];
        res.repeat = r;
        res.fold = f;
        try {
            const auto train_idx = plan.train_rows(r, f);
            const auto test_idx = plan.test_rows(r, f);

            Dataset train;
            train.features = d.features.select_rows(train_idx);
            train.feature_names = d.feature_names;
            train.class_names = d.class_names;
            train.labels.reserve(train_idx.size());
            ClassSplit split;
            for (std::size_t i = 0; i < train_idx.size(); ++i) {
                const int y = d.labels[train_idx[i]];
                train.labels.push_back(y);
                (y == minority_label ? split.minority_idx : split.majority_idx).push_back(i);
            }

            const SyntheticSet syn = oversample(train, split, sampler, derive_seed(opt.seed, r, f));
            res.warnings = syn.warnings;
            res.train_original = train_idx.size();
            res.train_synthetic = syn.size();

            const Matrix x = vstack(train.features, syn.samples);
            std::vector<int> y = train.labels;
            y.insert(y.end(), syn.size(), minority_label);
            // Classifiers treat 1 as positive; remap when the minority is label 0.
            if (minority_label == 0)
                for (auto& v : y) v = 1 - v;

            const Matrix test_x = d.features.select_rows(test_idx);
            std::vector<int> truth;
            truth.reserve(test_idx.size());
            for (auto i : test_idx) truth.push_back(d.labels[i] == minority_label ? 1 : 0);

            std::vector<int> predicted;
            if (classifier.kind == ClassifierKind::Knn) {
                predicted = knn_classify(x, y, test_x, std::min(knn_k, x.rows()), classifier.metric);
            } else {
                predicted = logreg_fit(x, y, classifier.logreg).predict(test_x);
            }
            res.confusion = confusion(truth, predicted, 1);
            for (int t : truth) (t == 1 ? res.test_minority : res.test_majority) += 1;
            if (opt.audit)
                for (auto i : test_idx) res.scored_rows.push_back(static_cast<long long>(i));
        } catch (const Error& e) {
            errors[ju] = std::make_exception_ptr(Error(
                e.kind(), "repeat " + std::to_string(r) + ", fold " + std::to_string(f) + ": " + e.what()));
        } catch (...) {
            errors[ju] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    BenchmarkEntry entry;
    entry.sampler = std::string(to_string(sampler.kind));
    entry.classifier = std::string(to_string(classifier.kind));
    std::vector<double> f1, ba, prec, rec, f1_avg, ba_avg;
    for (std::size_t r = 0; r < plan.repeats; ++r) {
        ConfusionMatrix pooled;
        double f1_sum = 0.0, ba_sum = 0.0;
        for (std::size_t f = 0; f < plan.folds_per_repeat; ++f) {
            const auto& res = results[r * plan.folds_per_repeat + f];
            pooled += res.confusion;
            const MetricSet m = metrics_from_confusion(res.confusion);
            f1_sum += m.f1;
            ba_sum += m.balanced_accuracy;
        }
        const MetricSet m = metrics_from_confusion(pooled);
        entry.pooled_confusion.push_back(pooled);
        f1.push_back(m.f1);
        ba.push_back(m.balanced_accuracy);
        prec.push_back(m.precision);
        rec.push_back(m.recall);
        f1_avg.push_back(f1_sum / static_cast<double>(plan.folds_per_repeat));
        ba_avg.push_back(ba_sum / static_cast<double>(plan.folds_per_repeat));
    }
    entry.f1 = summarise(std::move(f1));
    entry.balanced_accuracy = summarise(std::move(ba));
    entry.precision = summarise(std::move(prec));
    entry.recall = summarise(std::move(rec));
    entry.f1_fold_avg = summarise(std::move(f1_avg));
    entry.balanced_accuracy_fold_avg = summarise(std::move(ba_avg));
    entry.folds = std::move(results);
    return entry;
}

}  // namespace loras
