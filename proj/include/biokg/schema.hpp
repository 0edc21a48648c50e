#pragma once

#include <array>
#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace biokg {

inline constexpr std::size_t kFieldCount = 14;

enum class EvalMethod { ExactMatch, VectorSimilarity };
enum class FieldKind { ScalarText, ObjectList };

// The 14 person-schema components, in canonical order.
enum class FieldKey {
    Name,
    Alias,
    Gender,
    Ethnicity,
    Era,
    Birthplace,
    BirthDate,
    DeathDate,
    Achievements,
    Works,
    SocialRelations,
    FamilyRelations,
    Domain,
    Positions,
};

std::string_view to_string(FieldKey key);
std::string_view to_string(EvalMethod method);

struct FieldSpec {
    FieldKey key;
    std::string id;       // language-neutral identifier, e.g. "BirthDate"
    std::string zh_name;  // key used in model JSON, e.g. "出生日期"
    std::string en_name;  // primary English alias
    FieldKind kind = FieldKind::ScalarText;
    EvalMethod eval_method = EvalMethod::ExactMatch;
    // Every JSON key accepted for this field on input (zh name, English
    // variants seen across the prompt templates and sample outputs).
    std::vector<std::string> input_keys;
};

struct SchemaDefinition {
    std::vector<FieldSpec> fields;  // exactly 14, canonical order
    std::set<std::string> entity_vocab;
    std::set<std::string> attribute_vocab;
    std::set<std::string> relation_vocab;

    const FieldSpec& field(FieldKey key) const;
    // Lookup by id, zh name or any accepted alias; nullptr when unknown.
    const FieldSpec* find_field(std::string_view name) const;
};

// Loads the embedded schema ("builtin") or a JSON schema config file.
// Config files must describe the same 14 components with the same
// evaluation methods; anything else is a ConfigError.
SchemaDefinition load_schema(const std::string& config_path_or_builtin = "builtin");

struct AchievementItem {
    std::string influence;
    std::string location;
    std::string time;
    auto operator<=>(const AchievementItem&) const = default;
};

struct RelationItem {
    std::string person;
    std::string relation;
    auto operator<=>(const RelationItem&) const = default;
};

struct PositionItem {
    std::string title;
    std::string start_time;
    auto operator<=>(const PositionItem&) const = default;
};

// One extracted/annotated person. Scalar fields hold "" (or the literal
// "未知") when the source had nothing; list fields are never absent.
struct PersonRecord {
    std::string name;
    std::string alias;
    std::string gender;
    std::string ethnicity;
    std::string era;
    std::string birthplace;
    std::string birth_date;
    std::string death_date;
    std::vector<AchievementItem> achievements;
    std::string works;
    std::vector<RelationItem> social_relations;
    std::vector<RelationItem> family_relations;
    std::string field_domain;
    std::vector<PositionItem> positions;

    bool operator==(const PersonRecord&) const = default;
};

struct ValidationIssue {
    enum class Severity { Error, Warning };
    std::string field_key;  // field id or "<document>"
    Severity severity = Severity::Error;
    std::string message;
};

struct ValidationResult {
    std::optional<PersonRecord> record;  // set iff no errors
    std::vector<ValidationIssue> issues;

    bool ok() const { return record.has_value(); }
    std::size_t error_count() const;
    std::size_t warning_count() const;
};

struct ValidationOptions {
    // Strict mode treats a missing field key as an error (the full
    // template is expected, as in gold annotations). Lenient mode keeps
    // it a warning and defaults the field to empty, which is what model
    // outputs in the wild need.
    bool require_all_keys = true;
};

ValidationResult validate_record(std::string_view raw_json, const SchemaDefinition& schema,
                                 const ValidationOptions& options = {});

// Canonical Chinese-keyed JSON mirroring the extraction template shape
// (positions re-enumerated as 职务1, 职务2, ...).
nlohmann::ordered_json record_to_json(const PersonRecord& record);
std::string serialize_record(const PersonRecord& record);  // minified

// Stable text view of one field, used by the scorers: scalars verbatim,
// object lists joined with "；" between items and "，" between values.
std::string canonicalize_field_text(const PersonRecord& record, FieldKey key);
// Name-based variant; throws ConfigError on an unknown field name.
std::string canonicalize_field_text(const PersonRecord& record, std::string_view field_name,
                                    const SchemaDefinition& schema);

// "" and the literal "未知" both mean "no information" for graph building.
bool is_unknown_value(std::string_view text);

}  // namespace biokg
