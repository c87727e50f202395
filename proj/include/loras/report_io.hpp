#pragma once

#include "loras/dataset.hpp"
#include "loras/evaluate.hpp"
#include "loras/samplers.hpp"
#include "loras/theory.hpp"

#include <filesystem>
#include <json.hpp>
#include <ostream>
#include <string>

namespace loras {

/// Original rows (origin "original") followed by synthetic rows tagged with
/// `origin`. Values are written with 17 significant digits.
void write_augmented_csv(std::ostream& out, const Dataset& d, const SyntheticSet& syn, int minority_label,
                         const std::string& origin, const std::string& label_column = "label",
                         bool include_original = true);

nlohmann::json to_json(const LorasParams& p);
nlohmann::json to_json(const theory::EstimatorReport& r);
nlohmann::json to_json(const theory::TheoremValidation& v);
nlohmann::json to_json(const BenchmarkReport& r);

/// Table layout: sampler, classifier, metric, run1..runR, mean, sd.
void write_benchmark_csv(std::ostream& out, const BenchmarkReport& r);

}  // namespace loras
