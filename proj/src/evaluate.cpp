#include "biokg/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "biokg/common.hpp"
#include "biokg/utf8.hpp"

namespace biokg {

double exact_match_score(std::string_view pred, std::string_view gold) {
    return trim(pred) == trim(gold) ? 100.0 : 0.0;
}

double similarity_score(const std::string& pred_text, const std::string& gold_text, Embedder& embedder) {
    const bool pred_empty = trim(pred_text).empty();
    const bool gold_empty = trim(gold_text).empty();
    if (pred_empty && gold_empty) return 100.0;  // agreement on absence
    if (pred_empty != gold_empty) return 0.0;
    const double cos = cosine(embedder.embed(pred_text), embedder.embed(gold_text));
    return std::clamp(cos, 0.0, 1.0) * 100.0;
}

std::array<FieldScore, kFieldCount> score_record(const PersonRecord& pred, const PersonRecord& gold,
                                                 const SchemaDefinition& schema, Embedder& embedder) {
    std::array<FieldScore, kFieldCount> scores{};
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        const FieldSpec& spec = schema.fields[i];
        const std::string pred_text = canonicalize_field_text(pred, spec.key);
        const std::string gold_text = canonicalize_field_text(gold, spec.key);
        double score = spec.eval_method == EvalMethod::ExactMatch
                           ? exact_match_score(pred_text, gold_text)
                           : similarity_score(pred_text, gold_text, embedder);
        scores[i] = {spec.key, spec.eval_method, score};
    }
    return scores;
}

std::array<FieldScore, kFieldCount> all_zero_scores(const SchemaDefinition& schema) {
    std::array<FieldScore, kFieldCount> scores{};
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        scores[i] = {schema.fields[i].key, schema.fields[i].eval_method, 0.0};
    }
    return scores;
}

double aggregate(std::span<const FieldScore> field_scores, const WeightScheme& scheme) {
    if (field_scores.size() != kFieldCount)
        throw ConfigError("aggregate: expected " + std::to_string(kFieldCount) + " field scores, got " +
                          std::to_string(field_scores.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < kFieldCount; ++i) total += scheme.weights[i] * field_scores[i].score;
    return total;
}

EvaluationReport evaluate_run(const std::vector<PredictedRecord>& preds, const std::vector<GoldRecord>& golds,
                              const SchemaDefinition& schema, const WeightScheme& scheme, Embedder& embedder) {
    if (golds.empty()) throw ConfigError("evaluate_run: no records");

    std::set<std::string> gold_ids;
    for (const auto& gold : golds)
        if (!gold_ids.insert(gold.record_id).second)
            throw ConfigError("evaluate_run: duplicate gold record_id: " + gold.record_id);

    std::map<std::string, const PredictedRecord*> by_id;
    std::vector<std::string> unmatched;
    for (const auto& pred : preds) {
        if (!by_id.emplace(pred.record_id, &pred).second)
            throw ConfigError("evaluate_run: duplicate prediction record_id: " + pred.record_id);
        if (!gold_ids.count(pred.record_id)) unmatched.push_back(pred.record_id);
    }
    if (!unmatched.empty()) {
        std::string msg = "evaluate_run: predictions without matching gold ids:";
        for (const auto& id : unmatched) msg += " " + id;
        throw ConfigError(msg);
    }

    EvaluationReport report;
    report.scheme_name = scheme.name;
    double total = 0.0;
    for (const auto& gold : golds) {
        RecordEvaluation eval;
        eval.record_id = gold.record_id;
        auto it = by_id.find(gold.record_id);
        if (it != by_id.end() && it->second->record.has_value()) {
            eval.field_scores = score_record(*it->second->record, gold.record, schema, embedder);
            eval.prediction_present = true;
        } else {
            eval.field_scores = all_zero_scores(schema);
            eval.prediction_present = false;
        }
        eval.weighted_total = aggregate(eval.field_scores, scheme);
        total += eval.weighted_total;
        report.per_record.push_back(std::move(eval));
    }
    report.run_mean = total / static_cast<double>(report.per_record.size());
    return report;
}

std::array<double, kFieldCount> field_means(const EvaluationReport& report) {
    std::array<double, kFieldCount> means{};
    if (report.per_record.empty()) return means;
    for (const auto& record : report.per_record)
        for (std::size_t i = 0; i < kFieldCount; ++i) means[i] += record.field_scores[i].score;
    for (double& m : means) m /= static_cast<double>(report.per_record.size());
    return means;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report, const SchemaDefinition& schema) {
    nlohmann::ordered_json doc;
    doc["scheme"] = report.scheme_name;
    doc["run_mean"] = report.run_mean;
    doc["record_count"] = report.per_record.size();
    nlohmann::ordered_json field_mean_obj;
    const auto means = field_means(report);
    for (std::size_t i = 0; i < kFieldCount; ++i) field_mean_obj[schema.fields[i].id] = means[i];
    doc["field_means"] = std::move(field_mean_obj);
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& record : report.per_record) {
        nlohmann::ordered_json entry;
        entry["record_id"] = record.record_id;
        entry["prediction_present"] = record.prediction_present;
        entry["weighted_total"] = record.weighted_total;
        nlohmann::ordered_json fields = nlohmann::ordered_json::array();
        for (const auto& fs : record.field_scores) {
            fields.push_back({{"field", std::string(to_string(fs.key))},
                              {"method", std::string(to_string(fs.method))},
                              {"score", fs.score}});
        }
        entry["fields"] = std::move(fields);
        records.push_back(std::move(entry));
    }
    doc["records"] = std::move(records);
    return doc;
}

EvaluationReport report_from_json(const nlohmann::json& doc, const SchemaDefinition& schema) {
    EvaluationReport report;
    report.scheme_name = doc.value("scheme", std::string());
    report.run_mean = doc.value("run_mean", 0.0);
    for (const auto& entry : doc.at("records")) {
        RecordEvaluation eval;
        eval.record_id = entry.at("record_id").get<std::string>();
        eval.prediction_present = entry.value("prediction_present", true);
        eval.weighted_total = entry.at("weighted_total").get<double>();
        const auto& fields = entry.at("fields");
        if (fields.size() != kFieldCount)
            throw ConfigError("report: record " + eval.record_id + " has " + std::to_string(fields.size()) +
                              " field scores, expected " + std::to_string(kFieldCount));
        for (std::size_t i = 0; i < kFieldCount; ++i) {
            const std::string field_id = fields[i].at("field").get<std::string>();
            const FieldSpec* spec = schema.find_field(field_id);
            if (!spec || spec->key != schema.fields[i].key)
                throw ConfigError("report: unexpected field '" + field_id + "' at position " + std::to_string(i));
            eval.field_scores[i] = {spec->key, spec->eval_method, fields[i].at("score").get<double>()};
        }
        report.per_record.push_back(std::move(eval));
    }
    return report;
}

std::string render_report_table(const EvaluationReport& report, const SchemaDefinition& schema) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "Scheme: " << report.scheme_name << "\n";
    out << "Records: " << report.per_record.size() << "\n\n";

    std::size_t field_width = 0;
    for (const auto& spec : schema.fields) field_width = std::max(field_width, spec.id.size());
    const auto means = field_means(report);
    out << std::left << std::setw(static_cast<int>(field_width) + 2) << "Field" << std::setw(18) << "Method"
        << std::right << std::setw(10) << "Mean" << "\n";
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        out << std::left << std::setw(static_cast<int>(field_width) + 2) << schema.fields[i].id << std::setw(18)
            << std::string(to_string(schema.fields[i].eval_method)) << std::right << std::setw(10) << means[i]
            << "\n";
    }
    out << "\n";

    std::size_t id_width = std::string("record_id").size();
    for (const auto& record : report.per_record) id_width = std::max(id_width, record.record_id.size());
    out << std::left << std::setw(static_cast<int>(id_width) + 2) << "record_id" << std::right << std::setw(10)
        << "weighted" << "\n";
    for (const auto& record : report.per_record) {
        out << std::left << std::setw(static_cast<int>(id_width) + 2) << record.record_id << std::right
            << std::setw(10) << record.weighted_total;
        if (!record.prediction_present) out << "  (missing prediction)";
        out << "\n";
    }
    out << "\nRun mean: " << report.run_mean << "\n";
    return out.str();
}

}  // namespace biokg
