#include "biokg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

#include "biokg/common.hpp"

namespace biokg {

BuildResult build_samples(const std::vector<GoldPair>& pairs, const PromptTemplate& tmpl,
                          const SchemaDefinition& schema) {
    BuildResult result;
    for (const auto& pair : pairs) {
        const std::string gold_json = serialize_record(pair.gold);
        const ValidationResult check = validate_record(gold_json, schema);
        if (!check.ok()) {
            std::string message = "gold record failed validation:";
            for (const auto& issue : check.issues) {
                if (issue.severity == ValidationIssue::Severity::Error)
                    message += " [" + issue.field_key + "] " + issue.message + ";";
            }
            result.errors.push_back({pair.record_id, message});
            continue;
        }
        InstructionSample sample;
        sample.instruction = render_prompt(tmpl, pair.character_text);
        sample.input = "";
        sample.output = gold_json;
        sample.meta.record_id = pair.record_id;
        sample.meta.person_name = pair.person_name;
        sample.meta.strata_labels = pair.tags;
        result.samples.push_back(std::move(sample));
    }
    return result;
}

namespace {

// Deterministic Fisher-Yates draw of k indices out of pool, independent
// of the standard library's distribution implementations.
std::vector<std::size_t> draw_k(std::vector<std::size_t> pool, std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

std::vector<InstructionSample> stratified_sample(const std::vector<InstructionSample>& samples, std::size_t n,
                                                 std::uint64_t seed) {
    if (n > samples.size())
        throw ConfigError("stratified_sample: n=" + std::to_string(n) + " exceeds available samples (" +
                          std::to_string(samples.size()) + ")");

    // Stratum of a sample = its first label in lexicographic order.
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& labels = samples[i].meta.strata_labels;
        if (labels.empty())
            throw ConfigError("stratified_sample: sample '" + samples[i].meta.record_id +
                              "' has no strata labels");
        strata[*labels.begin()].push_back(i);
    }

    // Largest-remainder quotas proportional to stratum frequency.
    const double total = static_cast<double>(samples.size());
    struct Quota {
        std::string label;
        std::size_t base = 0;
        double remainder = 0.0;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    for (const auto& [label, members] : strata) {
        const double exact = static_cast<double>(n) * static_cast<double>(members.size()) / total;
        Quota q;
        q.label = label;
        q.base = static_cast<std::size_t>(std::floor(exact));
        q.remainder = exact - std::floor(exact);
        assigned += q.base;
        quotas.push_back(std::move(q));
    }
    std::vector<std::size_t> order(quotas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) quotas[order[i]].base += 1;

    std::mt19937_64 rng(seed);
    std::vector<bool> selected(samples.size(), false);
    for (const auto& quota : quotas) {
        const auto& members = strata.at(quota.label);
        for (std::size_t idx : draw_k(members, quota.base, rng)) selected[idx] = true;
    }

    std::vector<InstructionSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (selected[i]) out.push_back(samples[i]);
    return out;
}

void export_alpaca(const std::vector<InstructionSample>& samples, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& sample : samples) {
        arr.push_back({{"instruction", sample.instruction}, {"input", sample.input}, {"output", sample.output}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("export_alpaca: cannot write " + path);
    out << arr.dump(2) << '\n';

    std::ofstream meta(path + ".meta.jsonl", std::ios::binary);
    if (!meta) throw ConfigError("export_alpaca: cannot write " + path + ".meta.jsonl");
    for (const auto& sample : samples) {
        nlohmann::ordered_json line;
        line["record_id"] = sample.meta.record_id;
        line["person_name"] = sample.meta.person_name;
        line["strata_labels"] = sample.meta.strata_labels;
        meta << line.dump() << '\n';
    }
}

std::vector<InstructionSample> import_alpaca(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("import_alpaca: cannot open " + path);
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("import_alpaca: " + std::string(e.what()));
    }
    if (!arr.is_array()) throw ConfigError("import_alpaca: top-level value must be an array");

    std::vector<InstructionSample> samples;
    std::size_t index = 0;
    for (const auto& entry : arr) {
        if (!entry.is_object()) throw ConfigError("import_alpaca: element " + std::to_string(index) + " not an object");
        for (const auto& [key, value] : entry.items()) {
            (void)value;
            if (key != "instruction" && key != "input" && key != "output")
                throw ConfigError("import_alpaca: element " + std::to_string(index) + ": unexpected key \"" + key +
                                  "\"");
        }
        for (const char* key : {"instruction", "input", "output"}) {
            if (!entry.contains(key))
                throw ConfigError("import_alpaca: element " + std::to_string(index) + ": missing key \"" +
                                  std::string(key) + "\"");
        }
        InstructionSample sample;
        sample.instruction = entry["instruction"].get<std::string>();
        sample.input = entry["input"].get<std::string>();
        sample.output = entry["output"].get<std::string>();
        samples.push_back(std::move(sample));
        ++index;
    }

    std::ifstream meta(path + ".meta.jsonl", std::ios::binary);
    if (meta) {
        std::string line;
        std::size_t i = 0;
        while (std::getline(meta, line) && i < samples.size()) {
            if (line.empty()) continue;
            try {
                const nlohmann::json doc = nlohmann::json::parse(line);
                samples[i].meta.record_id = doc.value("record_id", std::string());
                samples[i].meta.person_name = doc.value("person_name", std::string());
                if (doc.contains("strata_labels"))
                    for (const auto& tag : doc["strata_labels"])
                        samples[i].meta.strata_labels.insert(tag.get<std::string>());
            } catch (const nlohmann::json::parse_error&) {
                // Sidecar is best-effort; the triples are the contract.
            }
            ++i;
        }
    }
    return samples;
}

}  // namespace biokg
