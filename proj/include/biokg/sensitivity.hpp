#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "biokg/evaluate.hpp"
#include "biokg/weights.hpp"

namespace biokg {

enum class VarianceMode { Population, Sample };

std::string_view to_string(VarianceMode mode);
VarianceMode parse_variance_mode(std::string_view text);

// Population: sum((x-mean)^2)/n; sample: /(n-1). Throws ConfigError when
// there are too few points for the mode.
double variance(std::span<const double> xs, VarianceMode mode);

struct SensitivityInput {
    std::vector<std::string> checkpoints;   // e.g. training epochs "0","10","30","50"
    std::vector<std::string> scheme_names;
    std::vector<std::vector<double>> scores;  // [scheme][checkpoint]
};

struct SchemeVariance {
    std::string scheme_name;
    double variance = 0.0;
};

struct SensitivityReport {
    std::vector<SchemeVariance> per_scheme_variance;
    std::string selected_scheme;  // argmax variance, first on ties
    VarianceMode variance_mode = VarianceMode::Population;
};

SensitivityReport scheme_sensitivity(const SensitivityInput& input,
                                     VarianceMode mode = VarianceMode::Population);

// Rebuilds a score matrix from per-checkpoint evaluation reports:
// scores[scheme][checkpoint] = sum_i w_i * mean field-i score. All
// reports must cover the same record ids.
SensitivityInput recompute_from_field_scores(
    const std::vector<std::pair<std::string, EvaluationReport>>& checkpoint_reports,
    const std::vector<WeightScheme>& schemes);

// Tab-separated matrix: header "Scheme" + checkpoint labels, one row per
// scheme.
SensitivityInput load_score_matrix(const std::string& path);

nlohmann::ordered_json sensitivity_to_json(const SensitivityReport& report);
std::string render_sensitivity_table(const SensitivityInput& input, const SensitivityReport& report);

}  // namespace biokg
