#include "loras/dataset.hpp"

#include "loras/error.hpp"
#include "loras/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace loras {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

void Dataset::validate() const {
    if (n() < 2) throw Error(ErrorKind::InvalidDataset, "need at least 2 rows");
    if (f_count() < 1) throw Error(ErrorKind::InvalidDataset, "need at least 1 feature");
    if (labels.size() != n()) throw Error(ErrorKind::InvalidDataset, "label count != row count");
    if (feature_names.size() != f_count())
        throw Error(ErrorKind::InvalidDataset, "feature_names length != feature count");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else throw Error(ErrorKind::InvalidDataset, "labels must be 0 or 1");
    }
    if (!has0 || !has1) throw Error(ErrorKind::DegenerateLabels, "both classes must be present");
    for (double v : features.values())
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidDataset, "non-finite feature value");
}

Dataset make_dataset(Matrix features, std::vector<int> labels, std::vector<std::string> names) {
    if (names.empty())
        for (std::size_t j = 0; j < features.cols(); ++j) names.push_back("f" + std::to_string(j));
    Dataset d{std::move(features), std::move(labels), std::move(names)};
    d.validate();
    return d;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw Error(ErrorKind::EmptyFile, path.string() + " has no header row");
    const auto header_views = split_commas(line);
    const std::vector<std::string> header(header_views.begin(), header_views.end());
    auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end())
        throw Error(ErrorKind::MissingColumn, "column '" + label_column + "' not in header of " + path.string());
    const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

    Dataset d;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != label_pos) d.feature_names.emplace_back(header[j]);

    std::vector<std::string> raw_labels;
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << row << " has " << cells.size() << " cells, header has " << header.size();
            throw Error(ErrorKind::InvalidDataset, msg.str());
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == label_pos) {
                raw_labels.emplace_back(cells[j]);
                continue;
            }
            double v = 0.0;
            if (!parse_double(cells[j], v)) {
                std::ostringstream msg;
                msg << "row " << row << ", column '" << header[j] << "': '" << cells[j] << "'";
                throw Error(ErrorKind::NonNumericCell, msg.str());
            }
            values.push_back(v);
        }
    }
    if (row == 0) throw Error(ErrorKind::EmptyFile, path.string() + " has no data rows");

    std::vector<std::string> distinct;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        if (std::find(distinct.begin(), distinct.end(), raw_labels[i]) == distinct.end()) {
            distinct.push_back(raw_labels[i]);
            if (distinct.size() > 2) {
                std::ostringstream msg;
                msg << "column '" << label_column << "' has a third value '" << raw_labels[i]
                    << "' at row " << i + 1;
                throw Error(ErrorKind::MoreThanTwoLabels, msg.str());
            }
        }
    }
    if (std::find(distinct.begin(), distinct.end(), positive_label) == distinct.end())
        throw Error(ErrorKind::DegenerateLabels,
                    "positive label '" + positive_label + "' not present in '" + label_column + "'");
    if (distinct.size() < 2)
        throw Error(ErrorKind::DegenerateLabels, "column '" + label_column + "' has a single value");

    d.class_names[1] = positive_label;
    d.class_names[0] = distinct[0] == positive_label ? distinct[1] : distinct[0];
    d.labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels) d.labels.push_back(l == positive_label ? 1 : 0);

    const std::size_t cols = header.size() - 1;
    d.features = Matrix(row, cols);
    std::copy(values.begin(), values.end(), d.features.values().begin());
    d.validate();
    return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.precision(17);
    for (const auto& name : d.feature_names) out << name << ',';
    out << label_column << '\n';
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (double v : d.features.row(i)) out << v << ',';
        out << d.class_names[static_cast<std::size_t>(d.labels[i])] << '\n';
    }
}

ClassSplit class_split(const Dataset& d) {
    ClassSplit s;
    for (std::size_t i = 0; i < d.n(); ++i)
        (d.labels[i] == 1 ? s.minority_idx : s.majority_idx).push_back(i);
    if (s.minority_idx.size() > s.majority_idx.size()) {
        std::swap(s.minority_idx, s.majority_idx);
        s.swapped = true;
        s.warnings.push_back("label 1 is the larger class; treating label 0 as minority");
    }
    return s;
}

double imbalance_ratio(const ClassSplit& s) {
    if (s.minority_idx.empty()) throw Error(ErrorKind::EmptyMinority, "imbalance ratio of empty minority");
    return static_cast<double>(s.majority_idx.size()) / static_cast<double>(s.minority_idx.size());
}

std::string imbalance_ratio_label(double ratio) {
    return std::to_string(static_cast<long long>(std::llround(ratio))) + ":1";
}

bool is_small_dataset(std::size_t sample_count, std::size_t feature_count) {
    if (sample_count == 0 || feature_count == 0)
        throw Error(ErrorKind::InvalidArgument, "counts must be >= 1");
    // Integer form of log10(n/f) < 1 avoids rounding at the boundary.
    return sample_count < 10 * feature_count;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t repeat, std::size_t fold) const {
    std::vector<std::size_t> rows;
    const auto& a = assignments.at(repeat);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] == fold) rows.push_back(i);
    return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t repeat, std::size_t fold) const {
    std::vector<std::size_t> rows;
    const auto& a = assignments.at(repeat);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != fold) rows.push_back(i);
    return rows;
}

FoldPlan stratified_folds(const Dataset& d, std::size_t repeats, std::size_t folds, std::uint64_t seed) {
    if (repeats < 1 || folds < 1) throw Error(ErrorKind::InvalidArgument, "repeats and folds must be >= 1");
    if (folds > d.n())
        throw Error(ErrorKind::TooManyFolds,
                    std::to_string(folds) + " folds requested for " + std::to_string(d.n()) + " rows");
    const ClassSplit split = class_split(d);
    FoldPlan plan{repeats, folds, seed, {}};
    plan.assignments.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        Rng rng = make_stream(seed, 0x464F4C44 /* FOLD */, r);
        std::vector<std::size_t> assign(d.n(), 0);
        for (const auto* cls : {&split.minority_idx, &split.majority_idx}) {
            std::vector<std::size_t> order = *cls;
            std::shuffle(order.begin(), order.end(), rng);
            // Round-robin: remainders land on the lowest-index folds.
            for (std::size_t pos = 0; pos < order.size(); ++pos) assign[order[pos]] = pos % folds;
        }
        plan.assignments.push_back(std::move(assign));
    }
    return plan;
}

Dataset min_max_scale(const Dataset& d) {
    Dataset out = d;
    for (std::size_t j = 0; j < d.f_count(); ++j) {
        double lo = d.features(0, j), hi = lo;
        for (std::size_t i = 1; i < d.n(); ++i) {
            lo = std::min(lo, d.features(i, j));
            hi = std::max(hi, d.features(i, j));
        }
        const double span = hi - lo;
        for (std::size_t i = 0; i < d.n(); ++i)
            out.features(i, j) = span > 0 ? (d.features(i, j) - lo) / span : 0.0;
    }
    return out;
}

}  // namespace loras
