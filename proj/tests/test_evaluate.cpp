#include "doctest.h"

#include <cmath>
#include <random>

#include "biokg/common.hpp"
#include "biokg/evaluate.hpp"
#include "support.hpp"

using namespace biokg;

namespace {

PersonRecord sample_record() {
    const SchemaDefinition schema = load_schema();
    const auto result = validate_record(testsupport::sample_person_json(), schema, {.require_all_keys = false});
    REQUIRE(result.ok());
    return *result.record;
}

std::array<FieldScore, kFieldCount> constant_scores(const SchemaDefinition& schema, double value) {
    auto scores = all_zero_scores(schema);
    for (auto& fs : scores) fs.score = value;
    return scores;
}

}  // namespace

TEST_CASE("exact match trims then compares codepoints") {
    CHECK(exact_match_score("曾国藩", "曾国藩") == 100.0);
    CHECK(exact_match_score("男", "女") == 0.0);
    CHECK(exact_match_score(" 1811年11月26日", "1811年11月26日") == 100.0);
    CHECK(exact_match_score("", "") == 100.0);
    CHECK(exact_match_score("a", "") == 0.0);
}

TEST_CASE("similarity scoring") {
    MockEmbedder embedder;
    SUBCASE("identical non-empty texts score 100") {
        CHECK(similarity_score("创立湘军", "创立湘军", embedder) == doctest::Approx(100.0).epsilon(1e-9));
    }
    SUBCASE("both empty scores 100, one empty scores 0") {
        CHECK(similarity_score("", "", embedder) == 100.0);
        CHECK(similarity_score("  ", "", embedder) == 100.0);
        CHECK(similarity_score("", "有内容", embedder) == 0.0);
        CHECK(similarity_score("有内容", "", embedder) == 0.0);
    }
    SUBCASE("disjoint-bigram texts score 0") { CHECK(similarity_score("ab", "cd", embedder) == 0.0); }
    SUBCASE("bigram-count oracle") {
        CHECK(similarity_score("abab", "ab", embedder) ==
              doctest::Approx(100.0 * 2.0 / std::sqrt(5.0)).epsilon(1e-12));
    }
    SUBCASE("symmetry over random texts") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 200; ++i) {
            const std::string a = testsupport::random_text(rng);
            const std::string b = testsupport::random_text(rng);
            CHECK(similarity_score(a, b, embedder) == similarity_score(b, a, embedder));
        }
    }
}

TEST_CASE("record scoring per the component table") {
    const SchemaDefinition schema = load_schema();
    MockEmbedder embedder;
    const PersonRecord gold = sample_record();

    SUBCASE("identical records score 100 on all fields") {
        const auto scores = score_record(gold, gold, schema, embedder);
        for (const auto& fs : scores) CHECK(fs.score == doctest::Approx(100.0).epsilon(1e-9));
    }

    SUBCASE("an all-empty prediction scores 0 against a populated gold") {
        PersonRecord empty;
        empty.name = "x";  // records must carry a name; gold name differs
        const auto scores = score_record(empty, gold, schema, embedder);
        for (std::size_t i = 0; i < kFieldCount; ++i) {
            const FieldKey key = schema.fields[i].key;
            const std::string gold_text = canonicalize_field_text(gold, key);
            if (gold_text.empty()) {
                CHECK(scores[i].score == 100.0);  // agreement on absence
            } else {
                CHECK(scores[i].score == 0.0);
            }
        }
    }

    SUBCASE("a single wrong field only affects itself") {
        PersonRecord pred = gold;
        pred.gender = "Female";
        const auto scores = score_record(pred, gold, schema, embedder);
        for (std::size_t i = 0; i < kFieldCount; ++i) {
            if (schema.fields[i].key == FieldKey::Gender) {
                CHECK(scores[i].score == 0.0);
            } else {
                CHECK(scores[i].score == doctest::Approx(100.0).epsilon(1e-9));
            }
        }
        CHECK(scores[2].method == EvalMethod::ExactMatch);
    }
}

TEST_CASE("aggregation is the weighted sum in schema order") {
    const SchemaDefinition schema = load_schema();
    const auto& schemes = builtin_weight_schemes();

    SUBCASE("perfect fields aggregate to 100 under every scheme") {
        const auto scores = constant_scores(schema, 100.0);
        for (const auto& scheme : schemes)
            CHECK(aggregate(scores, scheme) == doctest::Approx(100.0).epsilon(2e-4));
    }

    SUBCASE("constant scores are weight-invariant") {
        std::mt19937_64 rng(3);
        for (int i = 0; i < 50; ++i) {
            const double value = static_cast<double>(rng() % 101);
            const auto scores = constant_scores(schema, value);
            for (const auto& scheme : schemes)
                CHECK(aggregate(scores, scheme) == doctest::Approx(value).epsilon(2e-4));
        }
    }

    SUBCASE("a single populated field picks up exactly its weight") {
        auto scores = all_zero_scores(schema);
        scores[0].score = 100.0;  // Name only
        const WeightScheme* random1 = find_scheme(schemes, "Random 1");
        REQUIRE(random1 != nullptr);
        CHECK(aggregate(scores, *random1) == doctest::Approx(3.46).epsilon(1e-9));
    }

    SUBCASE("average distribution equals the unweighted mean within 3e-3") {
        std::mt19937_64 rng(5);
        const WeightScheme* avg = find_scheme(schemes, "Average Distribution");
        REQUIRE(avg != nullptr);
        for (int i = 0; i < 200; ++i) {
            auto scores = all_zero_scores(schema);
            double sum = 0.0;
            for (auto& fs : scores) {
                fs.score = static_cast<double>(rng() % 1001) / 10.0;
                sum += fs.score;
            }
            CHECK(std::abs(aggregate(scores, *avg) - sum / 14.0) <= 3e-3);
        }
    }

    SUBCASE("monotone in every field under positive weights") {
        std::mt19937_64 rng(8);
        for (const auto& scheme : schemes) {
            auto scores = all_zero_scores(schema);
            for (auto& fs : scores) fs.score = static_cast<double>(rng() % 101);
            const double before = aggregate(scores, scheme);
            const std::size_t bump = rng() % kFieldCount;
            auto bumped = scores;
            bumped[bump].score = std::min(100.0, bumped[bump].score + 10.0);
            const double after = aggregate(bumped, scheme);
            if (scheme.weights[bump] > 0.0 && bumped[bump].score > scores[bump].score) {
                CHECK(after > before);
            } else {
                CHECK(after >= before);
            }
        }
    }
}

TEST_CASE("run evaluation aligns by record id") {
    const SchemaDefinition schema = load_schema();
    MockEmbedder embedder;
    const auto& scheme = *find_scheme(builtin_weight_schemes(), "Average Distribution");
    const PersonRecord rec = sample_record();

    SUBCASE("all-perfect predictions mean 100") {
        std::vector<GoldRecord> golds;
        std::vector<PredictedRecord> preds;
        for (int i = 0; i < 30; ++i) {
            const std::string id = "r" + std::to_string(i);
            golds.push_back({id, rec});
            preds.push_back({id, rec});
        }
        const auto report = evaluate_run(preds, golds, schema, scheme, embedder);
        CHECK(report.run_mean == doctest::Approx(100.0).epsilon(2e-4));
        CHECK(report.per_record.size() == 30);
    }

    SUBCASE("missing predictions score zero and halve the mean") {
        std::vector<GoldRecord> golds;
        std::vector<PredictedRecord> preds;
        for (int i = 0; i < 30; ++i) {
            const std::string id = "r" + std::to_string(i);
            golds.push_back({id, rec});
            if (i < 15) preds.push_back({id, rec});
        }
        const auto report = evaluate_run(preds, golds, schema, scheme, embedder);
        CHECK(report.run_mean == doctest::Approx(50.0).epsilon(2e-4));
        std::size_t missing = 0;
        for (const auto& record : report.per_record)
            if (!record.prediction_present) ++missing;
        CHECK(missing == 15);
    }

    SUBCASE("failed parses count as zero rather than being dropped") {
        std::vector<GoldRecord> golds = {{"a", rec}, {"b", rec}};
        std::vector<PredictedRecord> preds = {{"a", rec}, {"b", std::nullopt}};
        const auto report = evaluate_run(preds, golds, schema, scheme, embedder);
        CHECK(report.run_mean == doctest::Approx(50.0).epsilon(2e-4));
    }

    SUBCASE("duplicate ids, unmatched ids, empty runs are errors") {
        std::vector<GoldRecord> golds = {{"a", rec}, {"a", rec}};
        std::vector<PredictedRecord> preds = {{"a", rec}};
        CHECK_THROWS_AS(evaluate_run(preds, golds, schema, scheme, embedder), ConfigError);

        std::vector<GoldRecord> golds2 = {{"a", rec}};
        std::vector<PredictedRecord> preds2 = {{"a", rec}, {"zzz", rec}};
        CHECK_THROWS_AS(evaluate_run(preds2, golds2, schema, scheme, embedder), ConfigError);

        CHECK_THROWS_AS(evaluate_run({}, {}, schema, scheme, embedder), ConfigError);
    }

    SUBCASE("rerunning yields an identical report") {
        std::vector<GoldRecord> golds = {{"a", rec}};
        PersonRecord pred = rec;
        pred.works = "《家书》";
        std::vector<PredictedRecord> preds = {{"a", pred}};
        const auto r1 = evaluate_run(preds, golds, schema, scheme, embedder);
        const auto r2 = evaluate_run(preds, golds, schema, scheme, embedder);
        CHECK(r1.run_mean == r2.run_mean);
        CHECK(report_to_json(r1, schema).dump() == report_to_json(r2, schema).dump());
    }
}

TEST_CASE("report serialization round trip") {
    const SchemaDefinition schema = load_schema();
    MockEmbedder embedder;
    const auto& scheme = *find_scheme(builtin_weight_schemes(), "Random 1");
    const PersonRecord rec = sample_record();
    PersonRecord other = rec;
    other.gender = "Female";
    other.works = "《奏稿》";

    const std::vector<GoldRecord> golds = {{"a", rec}, {"b", rec}};
    const std::vector<PredictedRecord> preds = {{"a", rec}, {"b", other}};
    const auto report = evaluate_run(preds, golds, schema, scheme, embedder);

    const auto doc = report_to_json(report, schema);
    const auto restored = report_from_json(doc, schema);
    CHECK(restored.scheme_name == report.scheme_name);
    CHECK(restored.run_mean == doctest::Approx(report.run_mean).epsilon(1e-12));
    REQUIRE(restored.per_record.size() == report.per_record.size());
    for (std::size_t i = 0; i < restored.per_record.size(); ++i) {
        CHECK(restored.per_record[i].record_id == report.per_record[i].record_id);
        for (std::size_t f = 0; f < kFieldCount; ++f)
            CHECK(restored.per_record[i].field_scores[f].score ==
                  doctest::Approx(report.per_record[i].field_scores[f].score).epsilon(1e-12));
    }

    const std::string table = render_report_table(report, schema);
    CHECK(table.find("Run mean:") != std::string::npos);
    CHECK(table.find("Random 1") != std::string::npos);
}
