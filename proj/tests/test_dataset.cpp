#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "json.hpp"

#include "biokg/common.hpp"
#include "biokg/dataset.hpp"
#include "support.hpp"

using namespace biokg;

namespace {

GoldPair make_pair_for(const std::string& id, const std::string& tag, const SchemaDefinition& schema) {
    const auto base = validate_record(testsupport::sample_person_json(), schema, {.require_all_keys = false});
    REQUIRE(base.ok());
    GoldPair pair;
    pair.record_id = id;
    pair.person_name = "曾国藩";
    pair.character_text = "曾国藩，字伯涵，湖南湘乡人。";
    pair.tags = {tag};
    pair.gold = *base.record;
    return pair;
}

std::vector<InstructionSample> two_strata_samples(std::size_t military, std::size_t culture,
                                                  const SchemaDefinition& schema) {
    std::vector<GoldPair> pairs;
    for (std::size_t i = 0; i < military; ++i)
        pairs.push_back(make_pair_for("m" + std::to_string(i), "military", schema));
    for (std::size_t i = 0; i < culture; ++i)
        pairs.push_back(make_pair_for("c" + std::to_string(i), "culture", schema));
    const auto built = build_samples(pairs, builtin_template_zh(), schema);
    REQUIRE(built.errors.empty());
    return built.samples;
}

}  // namespace

TEST_CASE("build_samples renders prompts and keeps gold json as output") {
    const SchemaDefinition schema = load_schema();
    std::vector<GoldPair> pairs;
    for (int i = 0; i < 150; ++i) pairs.push_back(make_pair_for("r" + std::to_string(i), "military", schema));

    const auto built = build_samples(pairs, builtin_template_zh(), schema);
    REQUIRE(built.samples.size() == 150);
    CHECK(built.errors.empty());
    for (const auto& sample : built.samples) {
        CHECK(sample.input == "");
        CHECK(sample.instruction.find("****** \n曾国藩，字伯涵，湖南湘乡人。\n******") != std::string::npos);
        // Output re-validates with zero errors (dataset hygiene).
        const auto check = validate_record(sample.output, schema);
        CHECK(check.ok());
        // Minified: no newlines in the serialized gold.
        CHECK(sample.output.find('\n') == std::string::npos);
    }

    CHECK(build_samples({}, builtin_template_zh(), schema).samples.empty());
}

TEST_CASE("a gold without a name is skipped and reported") {
    const SchemaDefinition schema = load_schema();
    GoldPair bad = make_pair_for("bad", "military", schema);
    bad.gold.name = "";
    const auto built = build_samples({bad}, builtin_template_zh(), schema);
    CHECK(built.samples.empty());
    REQUIRE(built.errors.size() == 1);
    CHECK(built.errors[0].record_id == "bad");
}

TEST_CASE("stratified sampling follows largest-remainder quotas") {
    const SchemaDefinition schema = load_schema();

    SUBCASE("90/60 split at n=50 yields exactly 30/20") {
        // Brute-force quota oracle: floor the exact shares, then hand out
        // the remainder by largest fraction.
        const double exact_military = 50.0 * 90.0 / 150.0;
        const double exact_culture = 50.0 * 60.0 / 150.0;
        CHECK(exact_military == doctest::Approx(30.0));
        CHECK(exact_culture == doctest::Approx(20.0));

        const auto samples = two_strata_samples(90, 60, schema);
        const auto chosen = stratified_sample(samples, 50, 7);
        REQUIRE(chosen.size() == 50);
        std::map<std::string, std::size_t> counts;
        for (const auto& sample : chosen) counts[*sample.meta.strata_labels.begin()]++;
        CHECK(counts["military"] == 30);
        CHECK(counts["culture"] == 20);
    }

    SUBCASE("n equal to the population returns everything") {
        const auto samples = two_strata_samples(9, 6, schema);
        const auto chosen = stratified_sample(samples, 15, 1);
        CHECK(chosen.size() == 15);
    }

    SUBCASE("the published ablation sizes 50/100/150 are all expressible") {
        const auto samples = two_strata_samples(90, 60, schema);
        for (const std::size_t n : {std::size_t{50}, std::size_t{100}, std::size_t{150}}) {
            const auto chosen = stratified_sample(samples, n, 9);
            CHECK(chosen.size() == n);
            std::map<std::string, std::size_t> counts;
            for (const auto& sample : chosen) counts[*sample.meta.strata_labels.begin()]++;
            CHECK(counts["military"] == n * 90 / 150);
            CHECK(counts["culture"] == n * 60 / 150);
        }
    }

    SUBCASE("deterministic per seed, varies across seeds") {
        const auto samples = two_strata_samples(40, 20, schema);
        const auto a = stratified_sample(samples, 20, 123);
        const auto b = stratified_sample(samples, 20, 123);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].meta.record_id == b[i].meta.record_id);

        const auto c = stratified_sample(samples, 20, 124);
        bool differs = false;
        for (std::size_t i = 0; i < a.size() && !differs; ++i)
            if (a[i].meta.record_id != c[i].meta.record_id) differs = true;
        CHECK(differs);
    }

    SUBCASE("per-stratum deviation from exact proportionality stays below 1") {
        std::mt19937_64 rng(2025);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t military = 10 + rng() % 80;
            const std::size_t culture = 10 + rng() % 80;
            const auto samples = two_strata_samples(military, culture, schema);
            const std::size_t n = 5 + rng() % (samples.size() - 5);
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const auto chosen = stratified_sample(samples, n, seed);
                REQUIRE(chosen.size() == n);
                std::map<std::string, double> counts;
                for (const auto& sample : chosen) counts[*sample.meta.strata_labels.begin()] += 1.0;
                const double total = static_cast<double>(samples.size());
                CHECK(std::abs(counts["military"] -
                               static_cast<double>(n) * static_cast<double>(military) / total) < 1.0);
                CHECK(std::abs(counts["culture"] -
                               static_cast<double>(n) * static_cast<double>(culture) / total) < 1.0);
            }
        }
    }

    SUBCASE("error paths") {
        const auto samples = two_strata_samples(3, 2, schema);
        CHECK_THROWS_AS(stratified_sample(samples, 6, 1), ConfigError);

        auto unlabeled = samples;
        unlabeled[2].meta.strata_labels.clear();
        CHECK_THROWS_AS(stratified_sample(unlabeled, 2, 1), ConfigError);
    }

    SUBCASE("multi-label samples count toward their first label") {
        const SchemaDefinition sch = load_schema();
        auto samples = two_strata_samples(4, 4, sch);
        // Tag two military samples with an additional later label; quota
        // arithmetic must not change.
        samples[0].meta.strata_labels.insert("politics");
        samples[1].meta.strata_labels.insert("politics");
        const auto chosen = stratified_sample(samples, 4, 3);
        std::map<std::string, std::size_t> counts;
        for (const auto& sample : chosen) counts[*sample.meta.strata_labels.begin()]++;
        CHECK(counts["culture"] == 2);
        CHECK(counts["military"] == 2);
    }
}

TEST_CASE("alpaca export and import") {
    const SchemaDefinition schema = load_schema();
    const std::string path = "/tmp/biokg_alpaca_test.json";

    SUBCASE("round trip preserves the triples") {
        const auto samples = two_strata_samples(5, 3, schema);
        export_alpaca(samples, path);
        const auto loaded = import_alpaca(path);
        REQUIRE(loaded.size() == samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            CHECK(loaded[i].instruction == samples[i].instruction);
            CHECK(loaded[i].input == samples[i].input);
            CHECK(loaded[i].output == samples[i].output);
            CHECK(loaded[i].meta.record_id == samples[i].meta.record_id);
            CHECK(loaded[i].meta.strata_labels == samples[i].meta.strata_labels);
        }
    }

    SUBCASE("empty export is an empty array") {
        export_alpaca({}, path);
        const auto loaded = import_alpaca(path);
        CHECK(loaded.empty());
    }

    SUBCASE("exact key set is enforced on import") {
        std::ofstream(path, std::ios::binary)
            << R"([{"instrcution": "x", "input": "", "output": "{}"}])";
        CHECK_THROWS_WITH_AS(import_alpaca(path),
                             "import_alpaca: element 0: unexpected key \"instrcution\"", ConfigError);

        std::ofstream(path, std::ios::binary) << R"([{"instruction": "x", "output": "{}"}])";
        CHECK_THROWS_AS(import_alpaca(path), ConfigError);

        std::ofstream(path, std::ios::binary) << "not json";
        CHECK_THROWS_AS(import_alpaca(path), ConfigError);
    }

    std::remove(path.c_str());
    std::remove((path + ".meta.jsonl").c_str());
}
