#include "loras/report_io.hpp"

#include <cstdio>

namespace loras {
namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

nlohmann::json summary_json(const MetricSummary& s) {
    return {{"per_repeat", s.per_repeat}, {"mean", s.mean}, {"sd", s.sd}};
}

}  // namespace

void write_augmented_csv(std::ostream& out, const Dataset& d, const SyntheticSet& syn, int minority_label,
                         const std::string& origin, const std::string& label_column, bool include_original) {
    const auto old_precision = out.precision(17);
    for (const auto& name : d.feature_names) out << name << ',';
    out << label_column << ",origin\n";
    if (include_original)
        for (std::size_t i = 0; i < d.n(); ++i) {
            for (double v : d.features.row(i)) out << v << ',';
            out << d.class_names[static_cast<std::size_t>(d.labels[i])] << ",original\n";
        }
    const auto& minority_name = d.class_names[static_cast<std::size_t>(minority_label)];
    for (std::size_t i = 0; i < syn.size(); ++i) {
        for (double v : syn.samples.row(i)) out << v << ',';
        out << minority_name << ',' << origin << '\n';
    }
    out.precision(old_precision);
}

nlohmann::json to_json(const LorasParams& p) {
    return {{"k", p.k},
            {"num_shadow", p.num_shadow},
            {"sigma_list", p.sigma_list},
            {"relative_sigma", p.relative_sigma},
            {"n_aff", p.n_aff},
            {"n_gen", p.n_gen},
            {"embedding", p.embedding == EmbeddingChoice::Regular ? "regular" : "t-embedding"},
            {"perplexity", p.perplexity},
            {"exact_balance", p.exact_balance}};
}

nlohmann::json to_json(const theory::EstimatorReport& r) {
    return {{"estimator", std::string(theory::to_string(r.estimator))},
            {"trials", r.trials},
            {"f_count", r.f_count},
            {"empirical_mean", r.empirical_mean},
            {"empirical_var", r.empirical_var},
            {"var_standard_error", r.var_standard_error},
            {"theoretical_mean", r.theoretical_mean},
            {"theoretical_var", r.theoretical_var},
            {"mean_z_scores", r.mean_z_scores},
            {"var_ratio", r.var_ratio},
            {"bias_pass", r.bias_pass},
            {"variance_pass", r.variance_pass}};
}

nlohmann::json to_json(const theory::TheoremValidation& v) {
    double ratio = 0.0;
    if (!v.smote.empirical_var.empty() && v.smote.empirical_var[0] > 0)
        ratio = v.loras.empirical_var[0] / v.smote.empirical_var[0];
    return {{"smote", to_json(v.smote)},
            {"loras", to_json(v.loras)},
            {"loras_to_smote_variance_ratio", ratio},
            {"ordering_pass", v.ordering_pass},
            {"pass", v.all_pass()}};
}

nlohmann::json to_json(const BenchmarkReport& r) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries) {
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : e.folds)
            folds.push_back({{"repeat", f.repeat},
                             {"fold", f.fold},
                             {"tp", f.confusion.tp},
                             {"fp", f.confusion.fp},
                             {"tn", f.confusion.tn},
                             {"fn", f.confusion.fn},
                             {"train_original", f.train_original},
                             {"train_synthetic", f.train_synthetic}});
        nlohmann::json pooled = nlohmann::json::array();
        for (const auto& c : e.pooled_confusion)
            pooled.push_back({{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}});
        entries.push_back({{"sampler", e.sampler},
                           {"classifier", e.classifier},
                           {"pooled",
                            {{"f1", summary_json(e.f1)},
                             {"balanced_accuracy", summary_json(e.balanced_accuracy)},
                             {"precision", summary_json(e.precision)},
                             {"recall", summary_json(e.recall)}}},
                           {"fold_averaged",
                            {{"f1", summary_json(e.f1_fold_avg)},
                             {"balanced_accuracy", summary_json(e.balanced_accuracy_fold_avg)}}},
                           {"pooled_confusion", pooled},
                           {"folds", folds}});
    }
    return {{"repeats", r.repeats}, {"folds", r.folds}, {"seed", r.seed}, {"warnings", r.warnings},
            {"entries", entries}};
}

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& r) {
    out << "sampler,classifier,metric";
    for (std::size_t i = 1; i <= r.repeats; ++i) out << ",run" << i;
    out << ",mean,sd\n";
    for (const auto& e : r.entries) {
        const std::pair<const char*, const MetricSummary*> rows[] = {
            {"f1", &e.f1}, {"balanced_accuracy", &e.balanced_accuracy}, {"precision", &e.precision},
            {"recall", &e.recall}};
        for (const auto& [name, s] : rows) {
            out << e.sampler << ',' << e.classifier << ',' << name;
            for (double v : s->per_repeat) out << ',' << fixed6(v);
            out << ',' << fixed6(s->mean) << ',' << fixed6(s->sd) << '\n';
        }
    }
}

}  // namespace loras
