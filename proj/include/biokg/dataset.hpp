#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "biokg/prompt.hpp"
#include "biokg/schema.hpp"

namespace biokg {

struct SampleMeta {
    std::string record_id;
    std::string person_name;
    std::set<std::string> strata_labels;
};

// One Alpaca-format training triple. input stays "" — the character text
// is folded into the instruction.
struct InstructionSample {
    std::string instruction;
    std::string input;
    std::string output;  // minified gold JSON, Chinese keys
    SampleMeta meta;
};

struct GoldPair {
    std::string record_id;
    std::string person_name;
    std::string character_text;
    std::set<std::string> tags;
    PersonRecord gold;
};

struct BuildError {
    std::string record_id;
    std::string message;
};

struct BuildResult {
    std::vector<InstructionSample> samples;
    std::vector<BuildError> errors;  // pairs whose gold failed validation
};

// One sample per pair, in order; pairs with invalid golds are skipped
// and reported.
BuildResult build_samples(const std::vector<GoldPair>& pairs, const PromptTemplate& tmpl,
                          const SchemaDefinition& schema);

// Proportional stratified subsample: quotas by largest-remainder over the
// first (lexicographic) label of each sample, uniform selection within a
// stratum under the seed. Deterministic per seed; result keeps input
// order. Throws ConfigError on n > |samples| or a sample without labels.
std::vector<InstructionSample> stratified_sample(const std::vector<InstructionSample>& samples, std::size_t n,
                                                 std::uint64_t seed);

// JSON array of {"instruction","input","output"}; meta goes to the
// sidecar at path + ".meta.jsonl".
void export_alpaca(const std::vector<InstructionSample>& samples, const std::string& path);
std::vector<InstructionSample> import_alpaca(const std::string& path);

}  // namespace biokg
