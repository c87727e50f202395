#pragma once

#include "loras/matrix.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace loras {

/// Binary-labelled numeric table. Label 1 is the minority/positive class.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    /// Original label strings, index 0 -> label 0, index 1 -> label 1.
    std::array<std::string, 2> class_names{"0", "1"};

    std::size_t n() const noexcept { return features.rows(); }
    std::size_t f_count() const noexcept { return features.cols(); }

    /// Throws InvalidDataset when an invariant does not hold.
    void validate() const;
};

Dataset make_dataset(Matrix features, std::vector<int> labels,
                     std::vector<std::string> feature_names = {});

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& positive_label);

/// Writes features with 17 significant digits so load_csv reproduces them exactly.
void save_csv(const Dataset& d, const std::filesystem::path& path,
              const std::string& label_column = "label");

struct ClassSplit {
    std::vector<std::size_t> minority_idx;
    std::vector<std::size_t> majority_idx;
    /// Set when label 1 outnumbered label 0 and the roles were swapped.
    bool swapped = false;
    std::vector<std::string> warnings;

    /// Label value carried by the minority rows (1 unless swapped).
    int minority_label() const noexcept { return swapped ? 0 : 1; }
};

ClassSplit class_split(const Dataset& d);

double imbalance_ratio(const ClassSplit& s);
/// "R:1" with R rounded to the nearest integer.
std::string imbalance_ratio_label(double ratio);

/// Small-dataset test: log10(samples / features) < 1.
bool is_small_dataset(std::size_t sample_count, std::size_t feature_count);

struct FoldPlan {
    std::size_t repeats = 5;
    std::size_t folds_per_repeat = 10;
    std::uint64_t seed = 0;
    /// assignments[r][i] is the fold of row i in repeat r.
    std::vector<std::vector<std::size_t>> assignments;

    /// Row indices of one fold, ascending.
    std::vector<std::size_t> test_rows(std::size_t repeat, std::size_t fold) const;
    std::vector<std::size_t> train_rows(std::size_t repeat, std::size_t fold) const;
};

FoldPlan stratified_folds(const Dataset& d, std::size_t repeats, std::size_t folds,
                          std::uint64_t seed);

/// Optional min-max rescaling of every feature to [0, 1]; constant columns map to 0.
Dataset min_max_scale(const Dataset& d);

}  // namespace loras
