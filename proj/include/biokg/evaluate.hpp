#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "biokg/gateway.hpp"
#include "biokg/schema.hpp"
#include "biokg/weights.hpp"

namespace biokg {

struct FieldScore {
    FieldKey key = FieldKey::Name;
    EvalMethod method = EvalMethod::ExactMatch;
    double score = 0.0;  // [0,100]
};

// Trimmed codepoint equality: 100 or 0.
double exact_match_score(std::string_view pred, std::string_view gold);

// Clamped cosine similarity scaled to [0,100]. Both sides empty scores
// 100 (agreement on absence), exactly one empty scores 0; the embedder
// is only consulted when both sides carry text.
double similarity_score(const std::string& pred_text, const std::string& gold_text, Embedder& embedder);

std::array<FieldScore, kFieldCount> score_record(const PersonRecord& pred, const PersonRecord& gold,
                                                 const SchemaDefinition& schema, Embedder& embedder);

std::array<FieldScore, kFieldCount> all_zero_scores(const SchemaDefinition& schema);

// Weighted sum over the 14 fields in schema order.
double aggregate(std::span<const FieldScore> field_scores, const WeightScheme& scheme);

struct RecordEvaluation {
    std::string record_id;
    std::array<FieldScore, kFieldCount> field_scores{};
    double weighted_total = 0.0;
    bool prediction_present = true;
};

struct EvaluationReport {
    std::string scheme_name;
    std::vector<RecordEvaluation> per_record;
    double run_mean = 0.0;
};

struct PredictedRecord {
    std::string record_id;
    std::optional<PersonRecord> record;  // nullopt: parse/validation failed upstream
};

struct GoldRecord {
    std::string record_id;
    PersonRecord record;
};

// Aligns predictions to golds by record_id. A gold without a usable
// prediction scores 0 on all fields. Throws ConfigError on duplicate ids,
// on prediction ids that match no gold, and on an empty gold set.
EvaluationReport evaluate_run(const std::vector<PredictedRecord>& preds, const std::vector<GoldRecord>& golds,
                              const SchemaDefinition& schema, const WeightScheme& scheme, Embedder& embedder);

// Mean score per field across the run, schema order.
std::array<double, kFieldCount> field_means(const EvaluationReport& report);

nlohmann::ordered_json report_to_json(const EvaluationReport& report, const SchemaDefinition& schema);
EvaluationReport report_from_json(const nlohmann::json& doc, const SchemaDefinition& schema);
std::string render_report_table(const EvaluationReport& report, const SchemaDefinition& schema);

}  // namespace biokg
