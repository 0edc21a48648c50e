#include "biokg/schema.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "biokg/common.hpp"
#include "biokg/utf8.hpp"

namespace biokg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct FieldDef {
    FieldKey key;
    const char* id;
    const char* zh;
    const char* en;
    FieldKind kind;
    EvalMethod eval;
    std::vector<const char*> extra_keys;
};

// Canonical order and evaluation assignments for the 14 components.
// input aliases cover the Chinese template, the English template and the
// key spellings seen in sample outputs.
const std::vector<FieldDef>& field_defs() {
    static const std::vector<FieldDef> defs = {
        {FieldKey::Name, "Name", "姓名", "Name", FieldKind::ScalarText, EvalMethod::ExactMatch, {}},
        {FieldKey::Alias, "Alias", "别名", "Alias", FieldKind::ScalarText, EvalMethod::VectorSimilarity, {"Aliases"}},
        {FieldKey::Gender, "Gender", "性别", "Gender", FieldKind::ScalarText, EvalMethod::ExactMatch, {}},
        {FieldKey::Ethnicity, "Ethnicity", "民族", "Ethnicity", FieldKind::ScalarText, EvalMethod::ExactMatch, {"Ethnic"}},
        {FieldKey::Era, "Era", "所处时代", "Era", FieldKind::ScalarText, EvalMethod::VectorSimilarity, {}},
        {FieldKey::Birthplace, "Birthplace", "籍贯", "BirthPlace", FieldKind::ScalarText, EvalMethod::VectorSimilarity,
         {"Place of Origin"}},
        {FieldKey::BirthDate, "BirthDate", "出生日期", "BirthDate", FieldKind::ScalarText, EvalMethod::ExactMatch,
         {"Date of Birth"}},
        {FieldKey::DeathDate, "DeathDate", "逝世日期", "DeathDate", FieldKind::ScalarText, EvalMethod::ExactMatch,
         {"Date of Death"}},
        {FieldKey::Achievements, "Achievements", "主要成就", "MajorAchievements", FieldKind::ObjectList,
         EvalMethod::VectorSimilarity, {"Major Achievements"}},
        {FieldKey::Works, "Works", "主要作品", "MajorWorks", FieldKind::ScalarText, EvalMethod::VectorSimilarity,
         {"Major Works"}},
        {FieldKey::SocialRelations, "SocialRelations", "主要社会关系", "MajorSocialRelations", FieldKind::ObjectList,
         EvalMethod::VectorSimilarity, {"Major Social Relations", "Social Relations"}},
        {FieldKey::FamilyRelations, "FamilyRelations", "主要家族关系", "MajorFamilyRelations", FieldKind::ObjectList,
         EvalMethod::VectorSimilarity, {"Major Family Relations", "Family Relations"}},
        {FieldKey::Domain, "Domain", "领域", "Field", FieldKind::ScalarText, EvalMethod::VectorSimilarity, {}},
        {FieldKey::Positions, "Positions", "历任职务", "OfficialPositions", FieldKind::ObjectList,
         EvalMethod::VectorSimilarity, {"Official Positions", "Positions Held"}},
    };
    return defs;
}

SchemaDefinition make_builtin() {
    SchemaDefinition schema;
    for (const auto& def : field_defs()) {
        FieldSpec spec;
        spec.key = def.key;
        spec.id = def.id;
        spec.zh_name = def.zh;
        spec.en_name = def.en;
        spec.kind = def.kind;
        spec.eval_method = def.eval;
        spec.input_keys = {def.zh, def.id};
        if (spec.en_name != spec.id) spec.input_keys.push_back(spec.en_name);
        for (const char* k : def.extra_keys) spec.input_keys.push_back(k);
        schema.fields.push_back(std::move(spec));
    }
    schema.entity_vocab = {"Person", "Achievements", "Works", "Relationships", "Positions"};
    schema.attribute_vocab = {"hasName",      "hasAlias",     "hasGender", "hasBirthPlace",
                              "hasEthnic",    "hasBirthDate", "hasDeathDate", "hasFiled"};
    schema.relation_vocab = {"hasSpouse",     "hasParent",   "hasStudent",     "hasColleague",
                             "hasSupervisor", "hasSubordinate", "workFor",     "Found",
                             "belongTo",      "ParticipateIn",  "WinAward",    "Create"};
    return schema;
}

FieldKind parse_kind(const std::string& text) {
    if (text == "scalar-text") return FieldKind::ScalarText;
    if (text == "object-list") return FieldKind::ObjectList;
    throw ConfigError("schema config: unknown field kind '" + text + "'");
}

EvalMethod parse_eval(const std::string& text) {
    if (text == "exact-match") return EvalMethod::ExactMatch;
    if (text == "vector-similarity") return EvalMethod::VectorSimilarity;
    throw ConfigError("schema config: unknown evaluation method '" + text + "'");
}

const char* kind_name(FieldKind kind) {
    return kind == FieldKind::ScalarText ? "scalar-text" : "object-list";
}

const char* eval_name(EvalMethod method) {
    return method == EvalMethod::ExactMatch ? "exact-match" : "vector-similarity";
}

std::set<std::string> parse_vocab(const json& arr, const std::set<std::string>& expected,
                                  const std::string& section) {
    std::set<std::string> out;
    for (const auto& item : arr) {
        if (!item.is_string()) throw ConfigError("schema config: " + section + " entries must be strings");
        std::string name = item.get<std::string>();
        if (section == "attributes" && name == "hasField") name = "hasFiled";  // accepted alias
        if (!out.insert(name).second)
            throw ConfigError("schema config: duplicate " + section + " entry '" + name + "'");
    }
    if (out != expected) {
        std::ostringstream msg;
        msg << "schema config: " << section << " vocabulary mismatch;";
        for (const auto& name : expected)
            if (!out.count(name)) msg << " missing '" << name << "'";
        for (const auto& name : out)
            if (!expected.count(name)) msg << " unexpected '" << name << "'";
        throw ConfigError(msg.str());
    }
    return out;
}

SchemaDefinition load_from_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("schema config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("schema config: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("fields") || !doc["fields"].is_array())
        throw ConfigError("schema config: expected an object with a 'fields' array");

    SchemaDefinition builtin = make_builtin();
    std::map<std::string, json> by_id;
    for (const auto& entry : doc["fields"]) {
        if (!entry.is_object()) throw ConfigError("schema config: field entries must be objects");
        std::vector<std::string> offending;
        for (const auto& [k, v] : entry.items()) {
            (void)v;
            if (k != "key" && k != "zh" && k != "en" && k != "kind" && k != "eval") offending.push_back(k);
        }
        if (!offending.empty()) {
            std::ostringstream msg;
            msg << "schema config: unknown keys:";
            for (const auto& k : offending) msg << " '" << k << "'";
            throw ConfigError(msg.str());
        }
        if (!entry.contains("key") || !entry["key"].is_string())
            throw ConfigError("schema config: every field entry needs a string 'key'");
        std::string id = entry["key"].get<std::string>();
        if (by_id.count(id)) throw ConfigError("schema config: duplicate field: " + id);
        by_id[id] = entry;
    }

    std::vector<std::string> missing;
    for (const auto& spec : builtin.fields)
        if (!by_id.count(spec.id)) missing.push_back(spec.id);
    if (!missing.empty()) {
        std::ostringstream msg;
        for (std::size_t i = 0; i < missing.size(); ++i)
            msg << (i ? "; " : "") << "missing field: " << missing[i];
        throw ConfigError(msg.str());
    }
    for (const auto& [id, entry] : by_id) {
        (void)entry;
        bool known = std::any_of(builtin.fields.begin(), builtin.fields.end(),
                                 [&](const FieldSpec& s) { return s.id == id; });
        if (!known) throw ConfigError("schema config: unknown field: " + id);
    }

    // Field set matches; apply the config rows onto the canonical order
    // and check the frozen kind/eval assignments.
    for (auto& spec : builtin.fields) {
        const json& entry = by_id.at(spec.id);
        if (entry.contains("zh")) spec.zh_name = entry["zh"].get<std::string>();
        if (entry.contains("en")) spec.en_name = entry["en"].get<std::string>();
        if (entry.contains("kind") && parse_kind(entry["kind"].get<std::string>()) != spec.kind)
            throw ConfigError("schema config: field " + spec.id + ": kind must be " +
                              std::string(kind_name(spec.kind)));
        if (entry.contains("eval") && parse_eval(entry["eval"].get<std::string>()) != spec.eval_method)
            throw ConfigError("schema config: field " + spec.id + ": evaluation method must be " +
                              std::string(eval_name(spec.eval_method)));
    }

    if (doc.contains("entities")) builtin.entity_vocab = parse_vocab(doc["entities"], builtin.entity_vocab, "entities");
    if (doc.contains("attributes"))
        builtin.attribute_vocab = parse_vocab(doc["attributes"], builtin.attribute_vocab, "attributes");
    if (doc.contains("relations"))
        builtin.relation_vocab = parse_vocab(doc["relations"], builtin.relation_vocab, "relations");
    return builtin;
}

// ---- record validation -------------------------------------------------

struct ItemKeyMap {
    std::vector<std::string> primary;    // main text slot
    std::vector<std::string> secondary;  // second slot
    std::vector<std::string> tertiary;   // third slot (achievements only)
};

const ItemKeyMap& achievement_keys() {
    static const ItemKeyMap m{{"成就影响", "Achievement", "influence", "Influence"},
                              {"发生地点", "Location", "location"},
                              {"发生时间", "Time", "time", "Date"}};
    return m;
}

const ItemKeyMap& relation_keys() {
    static const ItemKeyMap m{{"人物", "Person", "person"}, {"关系", "Relation", "relation"}, {}};
    return m;
}

bool is_position_title_key(const std::string& key) {
    static const std::vector<std::string> prefixes = {"职务", "Position"};
    for (const auto& prefix : prefixes) {
        if (key.rfind(prefix, 0) != 0) continue;
        std::string rest = key.substr(prefix.size());
        if (std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) return true;
    }
    return key == "title" || key == "Title";
}

bool is_position_time_key(const std::string& key) {
    return key == "时间" || key == "Time" || key == "time" || key == "start_time" || key == "StartTime";
}

class RecordValidator {
public:
    RecordValidator(const SchemaDefinition& schema, const ValidationOptions& options)
        : schema_(schema), options_(options) {}

    ValidationResult run(std::string_view raw_json) {
        json doc;
        try {
            doc = json::parse(raw_json);
        } catch (const json::parse_error& e) {
            error("<document>", std::string("not valid JSON: ") + e.what());
            return finish();
        }
        if (!doc.is_object()) {
            error("<document>", "top-level JSON value must be an object");
            return finish();
        }

        std::set<std::string> consumed;
        for (const auto& spec : schema_.fields) read_field(doc, spec, consumed);

        for (const auto& [key, value] : doc.items()) {
            (void)value;
            if (!consumed.count(key)) warn("<document>", "unknown key: " + key);
        }

        if (trim(record_.name).empty() && !has_error_for("Name"))
            error("Name", "must be non-empty");
        return finish();
    }

private:
    void read_field(const json& doc, const FieldSpec& spec, std::set<std::string>& consumed) {
        std::vector<std::string> present;
        for (const auto& alias : spec.input_keys)
            if (doc.contains(alias)) present.push_back(alias);
        if (present.empty()) {
            if (options_.require_all_keys) {
                error(spec.id, "missing field: " + spec.id);
            } else {
                warn(spec.id, "missing field: " + spec.id + ", defaulting to empty");
            }
            return;
        }
        if (present.size() > 1) warn(spec.id, "multiple keys present for the same field, using '" + present[0] + "'");
        for (const auto& alias : present) consumed.insert(alias);
        const json& value = doc.at(present[0]);

        if (spec.kind == FieldKind::ScalarText) {
            std::string text;
            if (!read_scalar(value, spec.id, text)) return;
            assign_scalar(spec.key, text);
        } else {
            read_list(value, spec);
        }
    }

    bool read_scalar(const json& value, const std::string& field_id, std::string& out) {
        if (value.is_string()) {
            out = value.get<std::string>();
            return true;
        }
        if (value.is_null()) {
            warn(field_id, "null value, defaulting to empty");
            out.clear();
            return true;
        }
        if (value.is_number() || value.is_boolean()) {
            out = value.dump();
            warn(field_id, "non-text value coerced to \"" + out + "\"");
            return true;
        }
        error(field_id, "expected text, got " + std::string(value.type_name()));
        return false;
    }

    void read_list(const json& value, const FieldSpec& spec) {
        json items = json::array();
        if (value.is_array()) {
            items = value;
        } else if (value.is_object()) {
            items.push_back(value);
            warn(spec.id, "single object wrapped into a one-item list");
        } else if (value.is_null()) {
            warn(spec.id, "null value treated as an empty list");
        } else {
            error(spec.id, "expected a list, got " + std::string(value.type_name()));
            return;
        }
        std::size_t index = 0;
        for (const auto& item : items) {
            read_item(item, spec, index++);
        }
    }

    void read_item(const json& item, const FieldSpec& spec, std::size_t index) {
        const std::string where = spec.id + "[" + std::to_string(index) + "]";
        if (item.is_string()) {
            warn(spec.id, where + ": bare text item, stored in its primary slot");
            append_item(spec.key, item.get<std::string>(), "", "");
            return;
        }
        if (!item.is_object()) {
            error(spec.id, where + ": list items must be objects");
            return;
        }
        std::string primary, secondary, tertiary;
        if (spec.key == FieldKey::Positions) {
            for (const auto& [k, v] : item.items()) {
                std::string text;
                if (!read_scalar(v, where, text)) continue;
                if (is_position_title_key(k)) {
                    primary = text;
                } else if (is_position_time_key(k)) {
                    secondary = text;
                } else {
                    warn(spec.id, where + ": unknown item key: " + k);
                }
            }
        } else {
            const ItemKeyMap& keys = spec.key == FieldKey::Achievements ? achievement_keys() : relation_keys();
            for (const auto& [k, v] : item.items()) {
                std::string text;
                if (!read_scalar(v, where, text)) continue;
                if (std::count(keys.primary.begin(), keys.primary.end(), k)) {
                    primary = text;
                } else if (std::count(keys.secondary.begin(), keys.secondary.end(), k)) {
                    secondary = text;
                } else if (std::count(keys.tertiary.begin(), keys.tertiary.end(), k)) {
                    tertiary = text;
                } else {
                    warn(spec.id, where + ": unknown item key: " + k);
                }
            }
        }
        append_item(spec.key, primary, secondary, tertiary);
    }

    void assign_scalar(FieldKey key, std::string text) {
        switch (key) {
            case FieldKey::Name: record_.name = std::move(text); break;
            case FieldKey::Alias: record_.alias = std::move(text); break;
            case FieldKey::Gender: record_.gender = std::move(text); break;
            case FieldKey::Ethnicity: record_.ethnicity = std::move(text); break;
            case FieldKey::Era: record_.era = std::move(text); break;
            case FieldKey::Birthplace: record_.birthplace = std::move(text); break;
            case FieldKey::BirthDate: record_.birth_date = std::move(text); break;
            case FieldKey::DeathDate: record_.death_date = std::move(text); break;
            case FieldKey::Works: record_.works = std::move(text); break;
            case FieldKey::Domain: record_.field_domain = std::move(text); break;
            default: break;
        }
    }

    void append_item(FieldKey key, std::string primary, std::string secondary, std::string tertiary) {
        switch (key) {
            case FieldKey::Achievements:
                record_.achievements.push_back({std::move(primary), std::move(secondary), std::move(tertiary)});
                break;
            case FieldKey::SocialRelations:
                record_.social_relations.push_back({std::move(primary), std::move(secondary)});
                break;
            case FieldKey::FamilyRelations:
                record_.family_relations.push_back({std::move(primary), std::move(secondary)});
                break;
            case FieldKey::Positions:
                record_.positions.push_back({std::move(primary), std::move(secondary)});
                break;
            default: break;
        }
    }

    bool has_error_for(const std::string& field_id) const {
        return std::any_of(issues_.begin(), issues_.end(), [&](const ValidationIssue& issue) {
            return issue.field_key == field_id && issue.severity == ValidationIssue::Severity::Error;
        });
    }

    void error(const std::string& field, const std::string& message) {
        issues_.push_back({field, ValidationIssue::Severity::Error, message});
    }
    void warn(const std::string& field, const std::string& message) {
        issues_.push_back({field, ValidationIssue::Severity::Warning, message});
    }

    ValidationResult finish() {
        ValidationResult result;
        result.issues = std::move(issues_);
        bool has_error = std::any_of(result.issues.begin(), result.issues.end(), [](const ValidationIssue& issue) {
            return issue.severity == ValidationIssue::Severity::Error;
        });
        if (!has_error) result.record = std::move(record_);
        return result;
    }

    const SchemaDefinition& schema_;
    ValidationOptions options_;
    PersonRecord record_;
    std::vector<ValidationIssue> issues_;
};

}  // namespace

std::string_view to_string(FieldKey key) {
    return field_defs()[static_cast<std::size_t>(key)].id;
}

std::string_view to_string(EvalMethod method) {
    return method == EvalMethod::ExactMatch ? "ExactMatch" : "VectorSimilarity";
}

const FieldSpec& SchemaDefinition::field(FieldKey key) const {
    return fields[static_cast<std::size_t>(key)];
}

const FieldSpec* SchemaDefinition::find_field(std::string_view name) const {
    for (const auto& spec : fields) {
        if (spec.id == name || spec.zh_name == name || spec.en_name == name) return &spec;
        if (std::find(spec.input_keys.begin(), spec.input_keys.end(), name) != spec.input_keys.end()) return &spec;
    }
    return nullptr;
}

SchemaDefinition load_schema(const std::string& config_path_or_builtin) {
    if (config_path_or_builtin == "builtin") return make_builtin();
    return load_from_config(config_path_or_builtin);
}

std::size_t ValidationResult::error_count() const {
    return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const ValidationIssue& issue) {
        return issue.severity == ValidationIssue::Severity::Error;
    }));
}

std::size_t ValidationResult::warning_count() const {
    return issues.size() - error_count();
}

ValidationResult validate_record(std::string_view raw_json, const SchemaDefinition& schema,
                                 const ValidationOptions& options) {
    return RecordValidator(schema, options).run(raw_json);
}

nlohmann::ordered_json record_to_json(const PersonRecord& record) {
    ordered_json doc;
    doc["姓名"] = record.name;
    doc["别名"] = record.alias;
    doc["性别"] = record.gender;
    doc["民族"] = record.ethnicity;
    doc["所处时代"] = record.era;
    doc["籍贯"] = record.birthplace;
    doc["出生日期"] = record.birth_date;
    doc["逝世日期"] = record.death_date;
    ordered_json achievements = ordered_json::array();
    for (const auto& item : record.achievements) {
        achievements.push_back({{"成就影响", item.influence}, {"发生地点", item.location}, {"发生时间", item.time}});
    }
    doc["主要成就"] = std::move(achievements);
    doc["主要作品"] = record.works;
    auto relations_json = [](const std::vector<RelationItem>& items) {
        ordered_json arr = ordered_json::array();
        for (const auto& item : items) arr.push_back({{"人物", item.person}, {"关系", item.relation}});
        return arr;
    };
    doc["主要社会关系"] = relations_json(record.social_relations);
    doc["主要家族关系"] = relations_json(record.family_relations);
    doc["领域"] = record.field_domain;
    ordered_json positions = ordered_json::array();
    for (std::size_t i = 0; i < record.positions.size(); ++i) {
        positions.push_back({{"职务" + std::to_string(i + 1), record.positions[i].title},
                             {"时间", record.positions[i].start_time}});
    }
    doc["历任职务"] = std::move(positions);
    return doc;
}

std::string serialize_record(const PersonRecord& record) {
    return record_to_json(record).dump();
}

namespace {

constexpr const char* kItemSeparator = "；";
constexpr const char* kValueSeparator = "，";

template <typename Item, typename Fn>
std::string join_items(const std::vector<Item>& items, Fn&& values) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += kItemSeparator;
        out += values(items[i]);
    }
    return out;
}

}  // namespace

std::string canonicalize_field_text(const PersonRecord& record, FieldKey key) {
    switch (key) {
        case FieldKey::Name: return record.name;
        case FieldKey::Alias: return record.alias;
        case FieldKey::Gender: return record.gender;
        case FieldKey::Ethnicity: return record.ethnicity;
        case FieldKey::Era: return record.era;
        case FieldKey::Birthplace: return record.birthplace;
        case FieldKey::BirthDate: return record.birth_date;
        case FieldKey::DeathDate: return record.death_date;
        case FieldKey::Works: return record.works;
        case FieldKey::Domain: return record.field_domain;
        case FieldKey::Achievements:
            return join_items(record.achievements, [](const AchievementItem& item) {
                return item.influence + kValueSeparator + item.location + kValueSeparator + item.time;
            });
        case FieldKey::SocialRelations:
            return join_items(record.social_relations, [](const RelationItem& item) {
                return item.person + kValueSeparator + item.relation;
            });
        case FieldKey::FamilyRelations:
            return join_items(record.family_relations, [](const RelationItem& item) {
                return item.person + kValueSeparator + item.relation;
            });
        case FieldKey::Positions:
            return join_items(record.positions, [](const PositionItem& item) {
                return item.title + kValueSeparator + item.start_time;
            });
    }
    throw ConfigError("canonicalize_field_text: invalid field key");
}

std::string canonicalize_field_text(const PersonRecord& record, std::string_view field_name,
                                    const SchemaDefinition& schema) {
    const FieldSpec* spec = schema.find_field(field_name);
    if (!spec) throw ConfigError("unknown field: " + std::string(field_name));
    return canonicalize_field_text(record, spec->key);
}

bool is_unknown_value(std::string_view text) {
    std::string trimmed = trim(text);
    return trimmed.empty() || trimmed == "未知";
}

}  // namespace biokg
