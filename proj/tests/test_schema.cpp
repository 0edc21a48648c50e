#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "json.hpp"

#include "biokg/common.hpp"
#include "biokg/schema.hpp"
#include "support.hpp"

using namespace biokg;

namespace {

std::size_t errors_of(const ValidationResult& result) { return result.error_count(); }

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string("/tmp/biokg_schema_") + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("builtin schema matches the component table") {
    const SchemaDefinition schema = load_schema();
    REQUIRE(schema.fields.size() == kFieldCount);

    CHECK(schema.fields[0].id == "Name");
    CHECK(schema.fields[0].eval_method == EvalMethod::ExactMatch);
    CHECK(schema.fields[8].id == "Achievements");
    CHECK(schema.fields[8].eval_method == EvalMethod::VectorSimilarity);

    // Exact match on rows 1, 3, 4, 7, 8; vector similarity elsewhere.
    const std::vector<EvalMethod> expected = {
        EvalMethod::ExactMatch,       EvalMethod::VectorSimilarity, EvalMethod::ExactMatch,
        EvalMethod::ExactMatch,       EvalMethod::VectorSimilarity, EvalMethod::VectorSimilarity,
        EvalMethod::ExactMatch,       EvalMethod::ExactMatch,       EvalMethod::VectorSimilarity,
        EvalMethod::VectorSimilarity, EvalMethod::VectorSimilarity, EvalMethod::VectorSimilarity,
        EvalMethod::VectorSimilarity, EvalMethod::VectorSimilarity,
    };
    for (std::size_t i = 0; i < kFieldCount; ++i) CHECK(schema.fields[i].eval_method == expected[i]);

    CHECK(schema.entity_vocab == std::set<std::string>{"Person", "Achievements", "Works", "Relationships",
                                                       "Positions"});
    CHECK(schema.attribute_vocab == std::set<std::string>{"hasName", "hasAlias", "hasGender", "hasBirthPlace",
                                                          "hasEthnic", "hasBirthDate", "hasDeathDate", "hasFiled"});
    CHECK(schema.relation_vocab.size() == 12);
    CHECK(schema.relation_vocab.count("hasSpouse") == 1);
    CHECK(schema.relation_vocab.count("Create") == 1);

    // Reloading yields an identical definition.
    const SchemaDefinition again = load_schema("builtin");
    REQUIRE(again.fields.size() == schema.fields.size());
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        CHECK(again.fields[i].id == schema.fields[i].id);
        CHECK(again.fields[i].zh_name == schema.fields[i].zh_name);
        CHECK(again.fields[i].eval_method == schema.fields[i].eval_method);
        CHECK(again.fields[i].kind == schema.fields[i].kind);
    }
}

TEST_CASE("sample person json validates leniently") {
    const SchemaDefinition schema = load_schema();
    const auto result = validate_record(testsupport::sample_person_json(), schema, {.require_all_keys = false});
    REQUIRE(result.ok());
    const PersonRecord& rec = *result.record;
    CHECK(rec.name == "Zeng Guofan");
    CHECK(rec.alias == "Courtesy name Bohan, pseudonym Disheng");
    CHECK(rec.gender == "Male");
    CHECK(rec.era == "Mid-to-late Qing Dynasty");
    CHECK(rec.birth_date == "November 26, 1811");
    CHECK(rec.death_date == "March 12, 1872");
    REQUIRE(rec.achievements.size() == 1);
    CHECK(rec.achievements[0].influence ==
          "Founded the Xiang Army; his military philosophy influenced subsequent generations");
    CHECK(rec.achievements[0].location == "Hunan");
    CHECK(rec.achievements[0].time == "1853");
    // Absent fields default to empty, lists stay present.
    CHECK(rec.ethnicity == "");
    CHECK(rec.works == "");
    CHECK(rec.social_relations.empty());
    CHECK(rec.positions.empty());
}

TEST_CASE("empty object strictly yields 14 missing-key errors") {
    const SchemaDefinition schema = load_schema();
    const auto result = validate_record("{}", schema);
    CHECK(!result.ok());
    CHECK(errors_of(result) == kFieldCount);
    for (const auto& issue : result.issues) {
        if (issue.severity == ValidationIssue::Severity::Error)
            CHECK(issue.message.rfind("missing field:", 0) == 0);
    }
}

TEST_CASE("scalar where a list is expected is a shape error") {
    const SchemaDefinition schema = load_schema();
    nlohmann::json doc = nlohmann::json::parse(testsupport::sample_person_json());
    doc.erase("Major Achievements");
    doc["主要成就"] = "建立湘军";
    const auto result = validate_record(doc.dump(), schema, {.require_all_keys = false});
    CHECK(!result.ok());
    bool found = false;
    for (const auto& issue : result.issues) {
        if (issue.field_key == "Achievements" && issue.severity == ValidationIssue::Severity::Error) found = true;
    }
    CHECK(found);
}

TEST_CASE("non-json and non-object inputs are parse errors") {
    const SchemaDefinition schema = load_schema();
    CHECK(!validate_record("好的，我无法帮助。", schema).ok());
    CHECK(!validate_record("[1,2,3]", schema).ok());
}

TEST_CASE("serialize/validate round trip is the identity") {
    const SchemaDefinition schema = load_schema();
    std::mt19937_64 rng(20240817);
    for (int i = 0; i < 200; ++i) {
        const PersonRecord rec = testsupport::random_record(rng);
        const auto result = validate_record(serialize_record(rec), schema);
        REQUIRE(result.ok());
        CHECK(errors_of(result) == 0);
        CHECK(*result.record == rec);
    }
}

TEST_CASE("chinese keys and english aliases yield identical records") {
    const SchemaDefinition schema = load_schema();
    const char* zh = R"({"姓名":"曾国藩","别名":"伯涵","性别":"男","民族":"汉族","所处时代":"晚清",
        "籍贯":"湖南湘乡","出生日期":"1811年11月26日","逝世日期":"1872年3月12日",
        "主要成就":[{"成就影响":"创立湘军","发生地点":"湖南","发生时间":"1853"}],
        "主要作品":"《曾国藩家书》",
        "主要社会关系":[{"人物":"左宗棠","关系":"同僚"}],
        "主要家族关系":[{"人物":"曾麟书","关系":"父亲"}],
        "领域":"军事家",
        "历任职务":[{"职务1":"两江总督","时间":"1860"},{"职务2":"直隶总督","时间":"1868"}]})";
    const char* en = R"({"Name":"曾国藩","Alias":"伯涵","Gender":"男","Ethnicity":"汉族","Era":"晚清",
        "BirthPlace":"湖南湘乡","BirthDate":"1811年11月26日","DeathDate":"1872年3月12日",
        "MajorAchievements":[{"Achievement":"创立湘军","Location":"湖南","Time":"1853"}],
        "MajorWorks":"《曾国藩家书》",
        "MajorSocialRelations":[{"Person":"左宗棠","Relation":"同僚"}],
        "MajorFamilyRelations":[{"Person":"曾麟书","Relation":"父亲"}],
        "Field":"军事家",
        "OfficialPositions":[{"Position1":"两江总督","Time":"1860"},{"Position2":"直隶总督","Time":"1868"}]})";
    const auto from_zh = validate_record(zh, schema);
    const auto from_en = validate_record(en, schema);
    REQUIRE(from_zh.ok());
    REQUIRE(from_en.ok());
    CHECK(*from_zh.record == *from_en.record);
    REQUIRE(from_zh.record->positions.size() == 2);
    CHECK(from_zh.record->positions[0].title == "两江总督");
    CHECK(from_zh.record->positions[0].start_time == "1860");
    CHECK(from_zh.record->positions[1].title == "直隶总督");
}

TEST_CASE("canonical field text") {
    const SchemaDefinition schema = load_schema();
    const auto result = validate_record(testsupport::sample_person_json(), schema, {.require_all_keys = false});
    REQUIRE(result.ok());
    const PersonRecord& rec = *result.record;

    CHECK(canonicalize_field_text(rec, FieldKey::Achievements) ==
          "Founded the Xiang Army; his military philosophy influenced subsequent generations，Hunan，1853");
    CHECK(canonicalize_field_text(rec, FieldKey::SocialRelations) == "");
    CHECK(canonicalize_field_text(rec, FieldKey::Name) == "Zeng Guofan");

    PersonRecord two = rec;
    two.achievements.push_back({"平定太平天国", "南京", "1864"});
    CHECK(canonicalize_field_text(two, FieldKey::Achievements) ==
          "Founded the Xiang Army; his military philosophy influenced subsequent generations，Hunan，1853；"
          "平定太平天国，南京，1864");

    CHECK(canonicalize_field_text(rec, "姓名", schema) == "Zeng Guofan");
    CHECK_THROWS_AS(canonicalize_field_text(rec, "NoSuchField", schema), ConfigError);

    // Deterministic and total over random valid records.
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const PersonRecord r = testsupport::random_record(rng);
        for (std::size_t f = 0; f < kFieldCount; ++f) {
            const FieldKey key = schema.fields[f].key;
            CHECK(canonicalize_field_text(r, key) == canonicalize_field_text(r, key));
        }
    }
}

TEST_CASE("schema config files") {
    const SchemaDefinition builtin = load_schema();

    SUBCASE("full mirror loads and matches builtin") {
        nlohmann::ordered_json doc;
        doc["fields"] = nlohmann::ordered_json::array();
        for (const auto& spec : builtin.fields) {
            doc["fields"].push_back({{"key", spec.id},
                                     {"zh", spec.zh_name},
                                     {"en", spec.en_name},
                                     {"kind", spec.kind == FieldKind::ScalarText ? "scalar-text" : "object-list"},
                                     {"eval", spec.eval_method == EvalMethod::ExactMatch ? "exact-match"
                                                                                         : "vector-similarity"}});
        }
        const std::string path = write_temp("full.json", doc.dump());
        const SchemaDefinition loaded = load_schema(path);
        REQUIRE(loaded.fields.size() == kFieldCount);
        for (std::size_t i = 0; i < kFieldCount; ++i) {
            CHECK(loaded.fields[i].id == builtin.fields[i].id);
            CHECK(loaded.fields[i].eval_method == builtin.fields[i].eval_method);
        }
        std::remove(path.c_str());
    }

    SUBCASE("missing component is named") {
        nlohmann::ordered_json doc;
        doc["fields"] = nlohmann::ordered_json::array();
        for (const auto& spec : builtin.fields) {
            if (spec.id == "Era") continue;
            doc["fields"].push_back({{"key", spec.id}});
        }
        const std::string path = write_temp("missing.json", doc.dump());
        CHECK_THROWS_WITH_AS(load_schema(path), "missing field: Era", ConfigError);
        std::remove(path.c_str());
    }

    SUBCASE("frozen evaluation methods are enforced") {
        nlohmann::ordered_json doc;
        doc["fields"] = nlohmann::ordered_json::array();
        for (const auto& spec : builtin.fields) {
            nlohmann::ordered_json entry = {{"key", spec.id}};
            if (spec.id == "Name") entry["eval"] = "vector-similarity";
            doc["fields"].push_back(entry);
        }
        const std::string path = write_temp("badeval.json", doc.dump());
        CHECK_THROWS_AS(load_schema(path), ConfigError);
        std::remove(path.c_str());
    }

    SUBCASE("unknown entry keys are listed") {
        const std::string path = write_temp("badkeys.json", R"({"fields":[{"key":"Name","wat":1}]})");
        try {
            load_schema(path);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("wat") != std::string::npos);
        }
        std::remove(path.c_str());
    }

    SUBCASE("not json at all") {
        const std::string path = write_temp("garbage.json", "not json");
        CHECK_THROWS_AS(load_schema(path), ConfigError);
        std::remove(path.c_str());
    }
}

TEST_CASE("unknown-value normalization") {
    CHECK(is_unknown_value(""));
    CHECK(is_unknown_value("  "));
    CHECK(is_unknown_value("未知"));
    CHECK(is_unknown_value(" 未知 "));
    CHECK(!is_unknown_value("汉族"));
}
