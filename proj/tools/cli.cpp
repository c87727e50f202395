#include "cli.hpp"

#include "loras/dataset.hpp"
#include "loras/embedding.hpp"
#include "loras/error.hpp"
#include "loras/evaluate.hpp"
#include "loras/report_io.hpp"
#include "loras/rng.hpp"
#include "loras/samplers.hpp"
#include "loras/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace loras::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An Error tagged with the exit code it should produce.
struct StageError : std::runtime_error {
    StageError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
    int code;
};

/// Flags registered on one subcommand. Parsed values are merged over the
/// --config JSON, so flags always win.
class FlagSet {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto store = std::make_shared<T>();
        CLI::Option* opt = app->add_option(flag, *store, help);
        keys_.insert(key);
        appliers_.emplace_back([store, opt, key](json& j) {
            if (opt->count() > 0) j[key] = *store;
        });
        return opt;
    }

    CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto store = std::make_shared<bool>(false);
        CLI::Option* opt = app->add_flag(flag, *store, help);
        keys_.insert(key);
        appliers_.emplace_back([store, opt, key](json& j) {
            if (opt->count() > 0) j[key] = *store;
        });
        return opt;
    }

    json merge(const std::string& config_path) const {
        json merged = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw StageError(kInputError, "cannot open config " + config_path);
            try {
                merged = json::parse(in);
            } catch (const json::exception& e) {
                throw UsageError("config " + config_path + " is not valid JSON: " + e.what());
            }
            if (!merged.is_object()) throw UsageError("config must be a JSON object");
            for (const auto& [key, _] : merged.items())
                if (!keys_.contains(key) || key == "config") throw UsageError("unknown config key '" + key + "'");
        }
        for (const auto& apply : appliers_) apply(merged);
        return merged;
    }

private:
    std::set<std::string> keys_;
    std::vector<std::function<void(json&)>> appliers_;
};

template <class T>
T get(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

template <class T>
std::optional<T> get_opt(const json& j, const std::string& key) {
    if (!j.contains(key)) return std::nullopt;
    return get<T>(j, key, T{});
}

struct Common {
    std::string input;
    std::string label_column;
    std::string positive_label;
    std::uint64_t seed = 42;
    int threads = 0;
    std::string output;
    bool minmax = false;
};

Common read_common(const json& j) {
    Common c;
    c.input = get<std::string>(j, "input", "");
    c.label_column = get<std::string>(j, "label_column", "label");
    c.positive_label = get<std::string>(j, "positive_label", "1");
    c.seed = get<std::uint64_t>(j, "seed", 42);
    c.threads = get<int>(j, "threads", 0);
    c.output = get<std::string>(j, "output", "");
    c.minmax = get<bool>(j, "minmax", false);
    if (c.threads < 0) throw UsageError("--threads must be >= 0");
    set_thread_count(c.threads);
    return c;
}

Dataset load_input(const Common& c) {
    if (c.input.empty()) throw UsageError("--input is required");
    try {
        Dataset d = load_csv(c.input, c.label_column, c.positive_label);
        return c.minmax ? min_max_scale(d) : d;
    } catch (const Error& e) {
        throw StageError(kInputError, e.what());
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw StageError(kInputError, "cannot write " + path);
    f << text;
}

void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void add_common(FlagSet& fs, CLI::App* app, bool with_minmax) {
    fs.add<std::string>(app, "--input,-i", "input", "Input CSV with a header row");
    fs.add<std::string>(app, "--label-column", "label_column", "Name of the label column (default: label)");
    fs.add<std::string>(app, "--positive-label", "positive_label", "Label value of the minority class (default: 1)");
    fs.add<std::uint64_t>(app, "--seed", "seed", "Random seed (default: 42)");
    fs.add<int>(app, "--threads", "threads", "Worker thread cap; never changes results");
    fs.add<std::string>(app, "--output,-o", "output", "Output path");
    if (with_minmax) fs.add_flag(app, "--minmax", "minmax", "Min-max scale features to [0,1] first");
}

void add_sampler_flags(FlagSet& fs, CLI::App* app) {
    fs.add<std::size_t>(app, "--k", "k", "Neighbor count (LoRAS default: 30 if |C_min|>=100 else 5)");
    fs.add<std::size_t>(app, "--num-shadow", "num_shadow", "LoRAS shadowsamples per parent");
    fs.add<double>(app, "--sigma", "sigma", "LoRAS shadow noise standard deviation (all features)");
    fs.add_flag(app, "--relative-sigma", "relative_sigma", "Scale --sigma by each feature's minority std");
    fs.add<std::size_t>(app, "--n-aff", "n_aff", "LoRAS shadow points per convex combination");
    fs.add<std::size_t>(app, "--n-gen", "n_gen", "LoRAS points generated per neighborhood");
    fs.add<std::string>(app, "--embedding", "embedding", "regular | t-embedding");
    fs.add<double>(app, "--perplexity", "perplexity", "t-SNE perplexity for t-embedding (default 30)");
    fs.add_flag(app, "--exact-balance", "exact_balance", "Top up LoRAS output to |C_maj|-|C_min|");
    fs.add<std::size_t>(app, "--total", "total", "Samples for SMOTE-family samplers (default |C_maj|-|C_min|)");
}

SamplerConfig read_sampler(const json& j, SamplerKind kind) {
    SamplerConfig cfg;
    cfg.kind = kind;
    cfg.k = get_opt<std::size_t>(j, "k");
    cfg.num_shadow = get_opt<std::size_t>(j, "num_shadow");
    cfg.sigma = get_opt<double>(j, "sigma");
    cfg.relative_sigma = get<bool>(j, "relative_sigma", false);
    cfg.n_aff = get_opt<std::size_t>(j, "n_aff");
    cfg.n_gen = get_opt<std::size_t>(j, "n_gen");
    const auto emb = get<std::string>(j, "embedding", "regular");
    if (emb == "regular") cfg.embedding = EmbeddingChoice::Regular;
    else if (emb == "t-embedding" || emb == "tsne") cfg.embedding = EmbeddingChoice::TEmbedding;
    else throw UsageError("unknown embedding '" + emb + "'");
    cfg.perplexity = get<double>(j, "perplexity", 30.0);
    cfg.exact_balance = get<bool>(j, "exact_balance", false);
    cfg.total = get_opt<std::size_t>(j, "total");
    return cfg;
}

SamplerKind sampler_kind(const std::string& name) {
    auto kind = parse_sampler(name);
    if (!kind) throw UsageError("unknown sampler '" + name + "'");
    return *kind;
}

// ---------------------------------------------------------------- stats

int cmd_stats(const json& j, std::ostream& out, std::ostream& err) {
    const Common c = read_common(j);
    const Dataset d = load_input(c);
    const ClassSplit s = class_split(d);
    report_warnings(s.warnings, err);
    const double ratio = imbalance_ratio(s);
    const bool small = is_small_dataset(d.n(), d.f_count());
    const LorasParams p = resolve_defaults(d, s);

    json report = {{"rows", d.n()},
                   {"features", d.f_count()},
                   {"minority", s.minority_idx.size()},
                   {"majority", s.majority_idx.size()},
                   {"minority_label", d.class_names[static_cast<std::size_t>(s.minority_label())]},
                   {"imbalance_ratio", ratio},
                   {"imbalance_ratio_label", imbalance_ratio_label(ratio)},
                   {"small_dataset", small},
                   {"loras_defaults", to_json(p)}};

    std::ostringstream text;
    text << "rows: " << d.n() << '\n'
         << "features: " << d.f_count() << '\n'
         << "minority: " << s.minority_idx.size() << '\n'
         << "majority: " << s.majority_idx.size() << '\n'
         << "imbalance_ratio: " << imbalance_ratio_label(ratio) << '\n'
         << "small_dataset: " << (small ? "true" : "false") << '\n'
         << "loras_defaults: k=" << p.k << " num_shadow=" << p.num_shadow << " n_aff=" << p.n_aff
         << " n_gen=" << p.n_gen << " sigma=" << p.sigma_list.front() << " embedding=regular perplexity=30\n";
    out << text.str();
    if (!c.output.empty()) write_text(c.output, report.dump(2) + "\n", out);
    return kOk;
}

// ----------------------------------------------------------- oversample

int cmd_oversample(const json& j, std::ostream& out, std::ostream& err) {
    const Common c = read_common(j);
    const auto sampler_name = get<std::string>(j, "sampler", "loras");
    const SamplerKind kind = sampler_kind(sampler_name);
    if (kind == SamplerKind::None) throw UsageError("oversample needs a sampler other than 'none'");
    if (c.output.empty()) throw UsageError("--output is required for oversample");
    const auto summary_path = get<std::string>(j, "summary", c.output + ".json");

    const Dataset d = load_input(c);
    const ClassSplit s = class_split(d);
    report_warnings(s.warnings, err);
    const SamplerConfig cfg = read_sampler(j, kind);

    SyntheticSet syn;
    json params;
    try {
        syn = oversample(d, s, cfg, c.seed);
        if (kind == SamplerKind::Loras) params = to_json(loras_params_for(d, s, cfg));
        else params = {{"k", cfg.k.value_or(5)}, {"total", syn.size()}};
    } catch (const Error& e) {
        throw StageError(kSamplerError, e.what());
    }
    report_warnings(syn.warnings, err);

    std::ostringstream csv;
    write_augmented_csv(csv, d, syn, s.minority_label(), sampler_name, c.label_column);
    write_text(c.output, csv.str(), out);

    json summary = {{"sampler", sampler_name},
                    {"seed", c.seed},
                    {"input_rows", d.n()},
                    {"minority", s.minority_idx.size()},
                    {"majority", s.majority_idx.size()},
                    {"synthetic_rows", syn.size()},
                    {"output_rows", d.n() + syn.size()},
                    {"parameters", params},
                    {"warnings", syn.warnings}};
    write_text(summary_path, summary.dump(2) + "\n", out);
    return kOk;
}

// ------------------------------------------------------------ benchmark

std::size_t usable_folds(std::size_t requested, std::size_t minority) {
    if (requested <= minority) return requested;
    for (std::size_t f : {10u, 5u, 3u, 2u})
        if (f <= requested && f <= minority) return f;
    return 1;
}

int cmd_benchmark(const json& j, std::ostream& out, std::ostream& err) {
    const Common c = read_common(j);
    if (c.output.empty()) throw UsageError("--output prefix is required for benchmark");
    const auto sampler_names = get<std::vector<std::string>>(j, "samplers", {"none", "smote", "loras"});
    const auto classifier_names = get<std::vector<std::string>>(j, "classifiers", {"knn"});
    const auto repeats = get<std::size_t>(j, "repeats", 5);
    auto folds = get<std::size_t>(j, "folds", 10);
    if (repeats < 1 || folds < 1) throw UsageError("--repeats and --folds must be >= 1");

    std::vector<SamplerConfig> samplers;
    for (const auto& name : sampler_names) samplers.push_back(read_sampler(j, sampler_kind(name)));
    std::vector<ClassifierConfig> classifiers;
    for (const auto& name : classifier_names) {
        auto kind = parse_classifier(name);
        if (!kind) throw UsageError("unknown classifier '" + name + "'");
        ClassifierConfig cc;
        cc.kind = *kind;
        cc.k = get_opt<std::size_t>(j, "knn_k");
        cc.logreg.epochs = get<std::size_t>(j, "epochs", cc.logreg.epochs);
        classifiers.push_back(cc);
    }

    const Dataset d = load_input(c);
    const ClassSplit s = class_split(d);
    BenchmarkReport report;
    report.warnings = s.warnings;
    const std::size_t reduced = usable_folds(folds, s.minority_idx.size());
    if (reduced != folds) {
        report.warnings.push_back("folds reduced from " + std::to_string(folds) + " to " + std::to_string(reduced) +
                                  " (minority class has " + std::to_string(s.minority_idx.size()) + " rows)");
        folds = reduced;
    }
    report_warnings(report.warnings, err);
    report.repeats = repeats;
    report.folds = folds;
    report.seed = c.seed;

    FoldPlan plan;
    try {
        plan = stratified_folds(d, repeats, folds, c.seed);
    } catch (const Error& e) {
        throw StageError(kInputError, e.what());
    }
    CrossValidationOptions opt;
    opt.seed = c.seed;
    for (const auto& sc : samplers)
        for (const auto& cc : classifiers) {
            try {
                report.entries.push_back(cross_validate(d, sc, cc, plan, opt));
            } catch (const Error& e) {
                throw StageError(kSamplerError, std::string(to_string(sc.kind)) + "/" +
                                                    std::string(to_string(cc.kind)) + ": " + e.what());
            }
        }

    std::ostringstream csv;
    write_benchmark_csv(csv, report);
    write_text(c.output + ".csv", csv.str(), out);
    write_text(c.output + ".json", to_json(report).dump(2) + "\n", out);
    for (const auto& e : report.entries)
        out << e.sampler << '/' << e.classifier << ": f1=" << e.f1.mean
            << " balanced_accuracy=" << e.balanced_accuracy.mean << '\n';
    return kOk;
}

// ------------------------------------------------------ validate-theory

int cmd_validate_theory(const json& j, std::ostream& out, std::ostream&) {
    const Common c = read_common(j);
    const auto f_count = get<std::size_t>(j, "f_count", 10);
    const auto trials = get<std::size_t>(j, "trials", 1'000'000);
    theory::LocalDistribution dist;
    dist.dof = get<double>(j, "dof", 30.0);
    dist.sigma = get<double>(j, "scale", 1.0);
    dist.sigma_b = get<double>(j, "sigma_b", 0.005);
    dist.mu.assign(get<std::size_t>(j, "dims", f_count), get<double>(j, "mu", 0.0));
    if (trials < theory::kMinTrials)
        throw UsageError("--trials must be >= " + std::to_string(theory::kMinTrials));
    if (f_count < 2) throw UsageError("--f-count must be >= 2");

    theory::TheoremValidation v;
    try {
        v = theory::validate_theorem(dist, f_count, trials, c.seed);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    json report = to_json(v);
    report["config"] = {{"f_count", f_count}, {"dof", dist.dof},   {"scale", dist.sigma},
                        {"sigma_b", dist.sigma_b}, {"trials", trials}, {"seed", c.seed}};
    write_text(c.output, report.dump(2) + "\n", out);
    return v.all_pass() ? kOk : kValidationFailed;
}

// -------------------------------------------------------------- project

struct Overlay {
    Matrix features;
    std::vector<std::string> labels;
    std::vector<std::string> origins;
};

Overlay read_overlay(const std::string& path, const Dataset& d, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw StageError(kInputError, "cannot open overlay " + path);
    std::string line;
    if (!std::getline(in, line)) throw StageError(kInputError, "overlay " + path + " is empty");
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            cells.push_back(cell);
        }
        if (!l.empty() && l.back() == ',') cells.emplace_back();
        return cells;
    };
    const auto header = split(line);
    auto find = [&](const std::string& name) -> std::ptrdiff_t {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    std::vector<std::size_t> cols;
    for (const auto& name : d.feature_names) {
        const auto pos = find(name);
        if (pos < 0) throw StageError(kInputError, "overlay " + path + " lacks feature column '" + name + "'");
        cols.push_back(static_cast<std::size_t>(pos));
    }
    const auto label_pos = find(label_column);
    const auto origin_pos = find("origin");

    Overlay ov;
    ov.features = Matrix(0, d.f_count());
    std::vector<double> row(d.f_count());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw StageError(kInputError, "overlay row " + std::to_string(line_no) + " has the wrong cell count");
        const std::string origin = origin_pos >= 0 ? cells[static_cast<std::size_t>(origin_pos)] : "synthetic";
        if (origin == "original") continue;
        for (std::size_t f = 0; f < cols.size(); ++f) {
            const auto& cell = cells[cols[f]];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[f]);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw StageError(kInputError, "overlay row " + std::to_string(line_no) + " has a non-numeric cell");
        }
        ov.features.append_row(row);
        ov.labels.push_back(label_pos >= 0 ? cells[static_cast<std::size_t>(label_pos)]
                                           : d.class_names[static_cast<std::size_t>(class_split(d).minority_label())]);
        ov.origins.push_back(origin);
    }
    return ov;
}

int cmd_project(const json& j, std::ostream& out, std::ostream&) {
    const Common c = read_common(j);
    const auto overlay_path = get<std::string>(j, "overlay", "");
    const Dataset d = load_input(c);
    const std::size_t dims = std::min<std::size_t>(2, d.f_count());
    const PcaModel model = pca_fit(d.features, dims);

    std::ostringstream csv;
    csv.precision(17);
    csv << "x,y,class,origin\n";
    auto emit = [&](const Matrix& proj, std::size_t i, const std::string& cls, const std::string& origin) {
        csv << proj(i, 0) << ',' << (dims > 1 ? proj(i, 1) : 0.0) << ',' << cls << ',' << origin << '\n';
    };
    const Matrix base = model.transform(d.features);
    for (std::size_t i = 0; i < d.n(); ++i)
        emit(base, i, d.class_names[static_cast<std::size_t>(d.labels[i])], "original");
    if (!overlay_path.empty()) {
        const Overlay ov = read_overlay(overlay_path, d, c.label_column);
        const Matrix proj = model.transform(ov.features);
        for (std::size_t i = 0; i < ov.features.rows(); ++i) emit(proj, i, ov.labels[i], ov.origins[i]);
    }
    write_text(c.output, csv.str(), out);
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"LoRAS oversampling toolkit: dataset stats, oversampling, benchmarking, estimator checks"};
    app.name("loras");
    app.require_subcommand(1);

    std::string config_path;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "JSON config; flags override it"); };

    FlagSet stats_fs, over_fs, bench_fs, theory_fs, project_fs;

    auto* stats = app.add_subcommand("stats", "Describe a dataset and the resolved LoRAS defaults");
    add_common(stats_fs, stats, false);
    add_config(stats);

    auto* over = app.add_subcommand("oversample", "Append synthetic minority rows to a dataset");
    add_common(over_fs, over, true);
    add_config(over);
    over_fs.add<std::string>(over, "--sampler", "sampler", "loras | smote | borderline1 | borderline2 | adasyn");
    over_fs.add<std::string>(over, "--summary", "summary", "Summary JSON path (default: <output>.json)");
    add_sampler_flags(over_fs, over);

    auto* bench = app.add_subcommand("benchmark", "Repeated stratified cross-validation of samplers x classifiers");
    add_common(bench_fs, bench, true);
    add_config(bench);
    bench_fs.add<std::vector<std::string>>(bench, "--samplers", "samplers", "Samplers to compare (none included)");
    bench_fs.add<std::vector<std::string>>(bench, "--classifiers", "classifiers", "knn and/or logreg");
    bench_fs.add<std::size_t>(bench, "--repeats", "repeats", "Repeated shuffles (default 5)");
    bench_fs.add<std::size_t>(bench, "--folds", "folds", "Folds per repeat (default 10)");
    bench_fs.add<std::size_t>(bench, "--knn-k", "knn_k", "kNN classifier neighbors (default 10 or 30)");
    bench_fs.add<std::size_t>(bench, "--epochs", "epochs", "Logistic regression epochs (default 500)");
    add_sampler_flags(bench_fs, bench);

    auto* theory_cmd = app.add_subcommand("validate-theory", "Monte Carlo check of the SMOTE/LoRAS estimator moments");
    add_common(theory_fs, theory_cmd, false);
    add_config(theory_cmd);
    theory_fs.add<std::size_t>(theory_cmd, "--f-count", "f_count", "Shadow points per LoRAS combination (default 10)");
    theory_fs.add<std::size_t>(theory_cmd, "--dims", "dims", "Coordinates per sample (default: f-count)");
    theory_fs.add<double>(theory_cmd, "--dof", "dof", "Student-t degrees of freedom (default 30)");
    theory_fs.add<double>(theory_cmd, "--scale", "scale", "Student-t scale sigma (default 1)");
    theory_fs.add<double>(theory_cmd, "--mu", "mu", "Location on every coordinate (default 0)");
    theory_fs.add<double>(theory_cmd, "--sigma-b", "sigma_b", "Shadow noise standard deviation (default 0.005)");
    theory_fs.add<std::size_t>(theory_cmd, "--trials", "trials", "Monte Carlo trials (default 1e6, minimum 1e4)");

    auto* project = app.add_subcommand("project", "2-D PCA projection CSV, optionally with a synthetic overlay");
    add_common(project_fs, project, true);
    add_config(project);
    project_fs.add<std::string>(project, "--overlay", "overlay", "CSV written by 'oversample'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (stats->parsed()) return cmd_stats(stats_fs.merge(config_path), out, err);
        if (over->parsed()) return cmd_oversample(over_fs.merge(config_path), out, err);
        if (bench->parsed()) return cmd_benchmark(bench_fs.merge(config_path), out, err);
        if (theory_cmd->parsed()) return cmd_validate_theory(theory_fs.merge(config_path), out, err);
        if (project->parsed()) return cmd_project(project_fs.merge(config_path), out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const StageError& e) {
        err << "error: " << e.what() << '\n';
        return e.code;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kUsageError;
}

}  // namespace loras::cli
