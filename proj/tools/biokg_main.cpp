// biokg: biographical text -> person knowledge graph pipeline.
// Subcommands cover corpus cleaning, instruction dataset construction,
// model extraction, evaluation, weight sensitivity analysis and graph
// export. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "biokg/common.hpp"
#include "biokg/corpus.hpp"
#include "biokg/utf8.hpp"
#include "biokg/dataset.hpp"
#include "biokg/evaluate.hpp"
#include "biokg/gateway.hpp"
#include "biokg/graph.hpp"
#include "biokg/prompt.hpp"
#include "biokg/schema.hpp"
#include "biokg/sensitivity.hpp"
#include "biokg/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::uint64_t seed = 42;
    std::string schema = "builtin";
    std::string template_name = "zh";
    std::string templates_dir;
    std::string think_suffix;
    std::string variance_mode = "population";
    std::size_t max_segment_chars = 500;
    bool near_duplicates = false;
    double jaccard_threshold = 0.9;
    std::size_t min_chars = 0;
    std::string schemes_file;
    std::string embedding_provider = "mock";  // mock | http
    biokg::ChatEndpointConfig chat;
    biokg::EmbeddingEndpointConfig embedding;
};

// Effective configuration as JSON; load_config(config_to_json(cfg)) is
// the identity, and run manifests embed this snapshot.
ordered_json config_to_json(const RunConfig& cfg) {
    ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["schema"] = cfg.schema;
    doc["template"] = cfg.template_name;
    doc["templates_dir"] = cfg.templates_dir;
    doc["think_suffix"] = cfg.think_suffix;
    doc["variance_mode"] = cfg.variance_mode;
    doc["max_segment_chars"] = cfg.max_segment_chars;
    doc["near_duplicates"] = cfg.near_duplicates;
    doc["jaccard_threshold"] = cfg.jaccard_threshold;
    doc["min_chars"] = cfg.min_chars;
    doc["schemes_file"] = cfg.schemes_file;
    doc["chat"] = {{"base_url", cfg.chat.base_url},
                   {"model_name", cfg.chat.model_name},
                   {"api_key_env", cfg.chat.api_key_env},
                   {"temperature", cfg.chat.temperature},
                   {"max_output_tokens", cfg.chat.max_output_tokens},
                   {"request_timeout_s", cfg.chat.request_timeout_s},
                   {"max_parallel", cfg.chat.max_parallel},
                   {"strip_think_blocks", cfg.chat.strip_think_blocks},
                   {"retry_attempts", cfg.chat.retry_attempts},
                   {"retry_base_delay_ms", cfg.chat.retry_base_delay_ms}};
    doc["embedding"] = {{"provider", cfg.embedding_provider},
                        {"base_url", cfg.embedding.base_url},
                        {"model_name", cfg.embedding.model_name},
                        {"api_key_env", cfg.embedding.api_key_env},
                        {"request_timeout_s", cfg.embedding.request_timeout_s},
                        {"retry_attempts", cfg.embedding.retry_attempts},
                        {"retry_base_delay_ms", cfg.embedding.retry_base_delay_ms},
                        {"expected_dims", cfg.embedding.expected_dims},
                        {"cache_path", cfg.embedding.cache_path}};
    return doc;
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw biokg::ConfigError("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw biokg::ConfigError("config: " + std::string(e.what()));
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.schema = doc.value("schema", cfg.schema);
    cfg.template_name = doc.value("template", cfg.template_name);
    cfg.templates_dir = doc.value("templates_dir", cfg.templates_dir);
    cfg.think_suffix = doc.value("think_suffix", cfg.think_suffix);
    cfg.variance_mode = doc.value("variance_mode", cfg.variance_mode);
    cfg.max_segment_chars = doc.value("max_segment_chars", cfg.max_segment_chars);
    cfg.near_duplicates = doc.value("near_duplicates", cfg.near_duplicates);
    cfg.jaccard_threshold = doc.value("jaccard_threshold", cfg.jaccard_threshold);
    cfg.min_chars = doc.value("min_chars", cfg.min_chars);
    cfg.schemes_file = doc.value("schemes_file", cfg.schemes_file);
    if (doc.contains("chat")) {
        const json& c = doc["chat"];
        cfg.chat.base_url = c.value("base_url", cfg.chat.base_url);
        cfg.chat.model_name = c.value("model_name", cfg.chat.model_name);
        cfg.chat.api_key_env = c.value("api_key_env", cfg.chat.api_key_env);
        cfg.chat.temperature = c.value("temperature", cfg.chat.temperature);
        cfg.chat.max_output_tokens = c.value("max_output_tokens", cfg.chat.max_output_tokens);
        cfg.chat.request_timeout_s = c.value("request_timeout_s", cfg.chat.request_timeout_s);
        cfg.chat.max_parallel = c.value("max_parallel", cfg.chat.max_parallel);
        cfg.chat.strip_think_blocks = c.value("strip_think_blocks", cfg.chat.strip_think_blocks);
        cfg.chat.retry_attempts = c.value("retry_attempts", cfg.chat.retry_attempts);
        cfg.chat.retry_base_delay_ms = c.value("retry_base_delay_ms", cfg.chat.retry_base_delay_ms);
    }
    if (doc.contains("embedding")) {
        const json& e = doc["embedding"];
        cfg.embedding_provider = e.value("provider", cfg.embedding_provider);
        cfg.embedding.base_url = e.value("base_url", cfg.embedding.base_url);
        cfg.embedding.model_name = e.value("model_name", cfg.embedding.model_name);
        cfg.embedding.api_key_env = e.value("api_key_env", cfg.embedding.api_key_env);
        cfg.embedding.request_timeout_s = e.value("request_timeout_s", cfg.embedding.request_timeout_s);
        cfg.embedding.retry_attempts = e.value("retry_attempts", cfg.embedding.retry_attempts);
        cfg.embedding.retry_base_delay_ms = e.value("retry_base_delay_ms", cfg.embedding.retry_base_delay_ms);
        cfg.embedding.expected_dims = e.value("expected_dims", cfg.embedding.expected_dims);
        cfg.embedding.cache_path = e.value("cache_path", cfg.embedding.cache_path);
    }
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw biokg::ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw biokg::ConfigError("cannot write " + path.string());
    out << content;
}

// Input digests, the effective configuration and output names; no
// timestamps, and outputs are recorded relative to the manifest so
// reruns stay byte-identical.
void write_run_manifest(const fs::path& path, const std::string& command,
                        const std::map<std::string, std::string>& inputs,
                        const std::vector<std::string>& outputs, const RunConfig& cfg) {
    ordered_json doc;
    doc["command"] = command;
    doc["seed"] = cfg.seed;
    doc["config"] = config_to_json(cfg);
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto relativize = [&](const std::string& file) {
        std::error_code ec;
        const fs::path rel = fs::relative(file, base, ec);
        return ec || rel.empty() ? file : rel.string();
    };
    std::map<std::string, std::string> in_rel;
    for (const auto& [file, digest] : inputs) in_rel[relativize(file)] = digest;
    ordered_json in_obj;
    for (const auto& [file, digest] : in_rel) in_obj[file] = digest;
    doc["inputs"] = std::move(in_obj);
    std::vector<std::string> relative_outputs;
    for (const auto& out : outputs) relative_outputs.push_back(relativize(out));
    doc["outputs"] = relative_outputs;
    write_file(path, doc.dump(2) + "\n");
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (c == '/' || c == '\\' || c == ':' || c == '\0') {
            out.push_back('_');
        } else {
            out.push_back(c);
        }
    }
    if (out.empty() || out == "<unassigned>") out = "_unassigned";
    return out;
}

biokg::PromptTemplate select_template(const RunConfig& cfg, const std::string& override_name) {
    const std::string wanted = override_name.empty() ? cfg.template_name : override_name;
    biokg::TemplateListing listing = biokg::list_templates(cfg.templates_dir);
    for (const auto& warning : listing.warnings) std::cerr << "warning: " << warning << "\n";
    const biokg::PromptTemplate* tmpl = biokg::find_template(listing.templates, wanted);
    if (!tmpl) throw biokg::ConfigError("unknown template: " + wanted);
    biokg::PromptTemplate out = *tmpl;
    out.think_suffix = cfg.think_suffix;
    return out;
}

std::unique_ptr<biokg::Embedder> make_embedder(const RunConfig& cfg, const std::string& override_provider) {
    const std::string provider = override_provider.empty() ? cfg.embedding_provider : override_provider;
    if (provider == "mock") return std::make_unique<biokg::MockEmbedder>();
    if (provider == "http") {
        if (cfg.embedding.base_url.empty())
            throw biokg::ConfigError("embedding.base_url required for the http embedder");
        return std::make_unique<biokg::HttpEmbedder>(cfg.embedding);
    }
    throw biokg::ConfigError("unknown embedder provider: " + provider);
}

std::vector<biokg::WeightScheme> load_all_schemes(const RunConfig& cfg, const std::string& schemes_file_flag) {
    std::vector<biokg::WeightScheme> schemes = biokg::builtin_weight_schemes();
    const std::string file = schemes_file_flag.empty() ? cfg.schemes_file : schemes_file_flag;
    if (!file.empty()) {
        for (auto& scheme : biokg::load_weight_schemes(file)) schemes.push_back(std::move(scheme));
    }
    return schemes;
}

struct GoldLine {
    std::string record_id;
    std::string person_name;
    std::string text;
    std::set<std::string> tags;
    std::string gold_json;
};

std::vector<GoldLine> load_gold_lines(const std::string& path) {
    std::vector<GoldLine> lines;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (biokg::is_blank(line)) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw biokg::ConfigError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        GoldLine out;
        out.record_id = doc.value("record_id", std::string());
        out.person_name = doc.value("person_name", std::string());
        out.text = doc.value("text", std::string());
        if (doc.contains("tags"))
            for (const auto& tag : doc["tags"]) out.tags.insert(tag.get<std::string>());
        if (doc.contains("gold")) out.gold_json = doc["gold"].dump();
        if (out.record_id.empty())
            throw biokg::ConfigError(path + " line " + std::to_string(line_no) + ": missing record_id");
        lines.push_back(std::move(out));
    }
    return lines;
}

// Per-person text assembled from the cleaned corpus files (segments
// joined in file order).
std::map<std::string, std::string> corpus_person_text(const std::string& corpus_dir) {
    std::map<std::string, std::string> by_person;
    if (corpus_dir.empty()) return by_person;
    if (!fs::is_directory(corpus_dir)) throw biokg::ConfigError("corpus dir not found: " + corpus_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        for (const auto& line : biokg::parse_corpus_jsonl(read_file(file.string()))) {
            by_person[line.person_name] += line.text;
        }
    }
    return by_person;
}

struct PredLine {
    std::string record_id;
    std::string status;
    std::optional<biokg::PersonRecord> record;
};

std::vector<PredLine> load_pred_lines(const std::string& path, const biokg::SchemaDefinition& schema) {
    std::vector<PredLine> lines;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (biokg::is_blank(line)) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw biokg::ConfigError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        PredLine out;
        out.record_id = doc.value("record_id", std::string());
        out.status = doc.value("status", std::string("ok"));
        if (out.status == "ok" && doc.contains("record")) {
            const auto check = biokg::validate_record(doc["record"].dump(), schema, {.require_all_keys = false});
            if (check.ok()) {
                out.record = check.record;
            } else {
                out.status = "validation_error";
            }
        }
        lines.push_back(std::move(out));
    }
    return lines;
}

std::vector<biokg::GoldRecord> validate_golds(const std::vector<GoldLine>& lines,
                                              const biokg::SchemaDefinition& schema) {
    std::vector<biokg::GoldRecord> golds;
    for (const auto& line : lines) {
        if (line.gold_json.empty())
            throw biokg::ConfigError("gold record " + line.record_id + ": missing 'gold' object");
        const auto check = biokg::validate_record(line.gold_json, schema);
        if (!check.ok()) {
            std::string msg = "gold record " + line.record_id + " failed validation:";
            for (const auto& issue : check.issues)
                if (issue.severity == biokg::ValidationIssue::Severity::Error)
                    msg += " [" + issue.field_key + "] " + issue.message + ";";
            throw biokg::ConfigError(msg);
        }
        golds.push_back({line.record_id, *check.record});
    }
    return golds;
}

// ---- subcommands ----------------------------------------------------------

int cmd_clean(const RunConfig& cfg, const std::string& manifest_path, const std::string& out_dir,
              std::size_t max_segment_chars, bool near_dup, double jaccard, std::size_t min_chars) {
    const auto entries = biokg::load_manifest(manifest_path);
    std::map<std::string, std::string> input_digests;
    input_digests[manifest_path] = biokg::content_digest(read_file(manifest_path));

    std::vector<biokg::CorpusDocument> docs;
    std::size_t unreadable = 0;
    for (const auto& entry : entries) {
        std::ifstream in(entry.path, std::ios::binary);
        if (!in) {
            std::cerr << "warning: cannot read " << entry.path << ", skipped\n";
            ++unreadable;
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        biokg::CorpusDocument doc;
        doc.doc_id = biokg::content_digest(entry.person_name + "\x1f" + entry.path);
        doc.person_name = entry.person_name;
        doc.source_kind = entry.source_kind;
        if (!entry.source_kind.empty() &&
            std::find(biokg::kKnownSourceKinds.begin(), biokg::kKnownSourceKinds.end(), entry.source_kind) ==
                biokg::kKnownSourceKinds.end())
            std::cerr << "warning: " << entry.path << ": unknown source_kind '" << entry.source_kind << "'\n";
        doc.raw_text = buf.str();
        docs.push_back(std::move(doc));
        input_digests[entry.path] = biokg::content_digest(docs.back().raw_text);
    }
    if (!entries.empty() && docs.empty()) {
        std::cerr << "error: no readable documents in manifest\n";
        return 1;
    }

    biokg::DedupOptions dd;
    dd.near_duplicates = near_dup || cfg.near_duplicates;
    dd.jaccard_threshold = jaccard > 0 ? jaccard : cfg.jaccard_threshold;
    dd.min_chars = min_chars > 0 ? min_chars : cfg.min_chars;
    auto deduped = biokg::dedupe(docs, dd);

    const std::size_t seg_max = max_segment_chars > 0 ? max_segment_chars : cfg.max_segment_chars;
    for (auto& doc : deduped.docs) doc.segments = biokg::segment(doc.raw_text, seg_max);

    auto groups = biokg::group_by_person(deduped.docs);
    if (groups.count(biokg::kUnassignedGroup))
        std::cerr << "warning: " << groups.at(biokg::kUnassignedGroup).size()
                  << " document(s) without person_name routed to " << biokg::kUnassignedGroup << "\n";

    const fs::path corpus_dir = fs::path(out_dir) / "corpus";
    fs::create_directories(corpus_dir);
    std::vector<std::string> outputs;
    for (const auto& [person, group] : groups) {
        std::vector<biokg::CorpusLine> lines;
        for (const auto& doc : group) {
            for (std::size_t i = 0; i < doc.segments.size(); ++i)
                lines.push_back({doc.doc_id, doc.person_name, doc.source_kind, i, doc.segments[i]});
        }
        const fs::path file = corpus_dir / (sanitize_filename(person) + ".jsonl");
        write_file(file, biokg::corpus_lines_to_jsonl(lines));
        outputs.push_back(file.string());
    }
    write_run_manifest(fs::path(out_dir) / "run_manifest.json", "clean", input_digests, outputs, cfg);

    std::cout << entries.size() << " in, " << deduped.docs.size() << " kept (" << deduped.removed_exact
              << " exact duplicates, " << deduped.removed_near << " near duplicates, " << deduped.removed_short
              << " below min length, " << unreadable << " unreadable)\n";
    return 0;
}

int cmd_build_dataset(const RunConfig& cfg, const std::string& golds_path, const std::string& corpus_dir,
                      const std::string& manifest_path, std::size_t n, std::uint64_t seed,
                      const std::string& template_name, const std::string& out_path, bool split_input) {
    RunConfig effective = cfg;
    effective.seed = seed;
    const biokg::SchemaDefinition schema = biokg::load_schema(cfg.schema);
    const biokg::PromptTemplate tmpl = select_template(cfg, template_name);
    const auto gold_lines = load_gold_lines(golds_path);
    const auto person_text = corpus_person_text(corpus_dir);

    std::map<std::string, std::set<std::string>> manifest_tags;
    if (!manifest_path.empty()) {
        for (const auto& entry : biokg::load_manifest(manifest_path))
            manifest_tags[entry.person_name].insert(entry.tags.begin(), entry.tags.end());
    }

    std::vector<biokg::GoldPair> pairs;
    for (const auto& line : gold_lines) {
        biokg::GoldPair pair;
        pair.record_id = line.record_id;
        pair.person_name = line.person_name;
        pair.tags = line.tags;
        if (auto it = manifest_tags.find(line.person_name); it != manifest_tags.end())
            pair.tags.insert(it->second.begin(), it->second.end());
        if (!line.text.empty()) {
            pair.character_text = line.text;
        } else if (auto it = person_text.find(line.person_name); it != person_text.end()) {
            pair.character_text = it->second;
        } else {
            throw biokg::ConfigError("record " + line.record_id + ": no text given and person '" +
                                     line.person_name + "' not found in corpus");
        }
        if (line.gold_json.empty())
            throw biokg::ConfigError("record " + line.record_id + ": missing 'gold' object");
        const auto check = biokg::validate_record(line.gold_json, schema);
        if (!check.ok()) {
            // build_samples re-checks; pass through so the error lands in
            // its report instead of aborting the run.
            pair.gold = biokg::PersonRecord{};
        } else {
            pair.gold = *check.record;
        }
        pairs.push_back(std::move(pair));
    }

    auto built = biokg::build_samples(pairs, tmpl, schema);
    for (const auto& error : built.errors)
        std::cerr << "warning: skipped " << error.record_id << ": " << error.message << "\n";

    std::vector<biokg::InstructionSample> chosen;
    if (n == 0 || n == built.samples.size()) {
        chosen = built.samples;
    } else {
        chosen = biokg::stratified_sample(built.samples, n, seed);
    }
    if (split_input) {
        for (auto& sample : chosen) {
            const auto text = biokg::recover_character_text(tmpl, sample.instruction);
            if (text) {
                sample.input = *text;
                sample.instruction = biokg::render_prompt(tmpl, "");
            }
        }
    }
    if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
    biokg::export_alpaca(chosen, out_path);

    std::map<std::string, std::string> inputs;
    inputs[golds_path] = biokg::content_digest(read_file(golds_path));
    write_run_manifest(fs::path(out_path).string() + ".manifest.json", "build-dataset", inputs,
                       {out_path, out_path + ".meta.jsonl"}, effective);

    std::cout << "built " << built.samples.size() << " samples (" << built.errors.size() << " skipped), wrote "
              << chosen.size() << " to " << out_path << "\n";
    return 0;
}

int cmd_extract(const RunConfig& cfg, const std::string& input_path, const std::string& corpus_dir,
                const std::string& template_name, const std::string& replay_path, const std::string& out_path) {
    const biokg::SchemaDefinition schema = biokg::load_schema(cfg.schema);
    const biokg::PromptTemplate tmpl = select_template(cfg, template_name);
    const auto person_text = corpus_person_text(corpus_dir);

    struct TestItem {
        std::string record_id;
        std::string text;
    };
    std::vector<TestItem> items;
    {
        std::istringstream in(read_file(input_path));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (biokg::is_blank(line)) continue;
            json doc;
            try {
                doc = json::parse(line);
            } catch (const json::parse_error& e) {
                throw biokg::ConfigError(input_path + " line " + std::to_string(line_no) + ": " + e.what());
            }
            TestItem item;
            item.record_id = doc.value("record_id", std::string());
            if (item.record_id.empty())
                throw biokg::ConfigError(input_path + " line " + std::to_string(line_no) + ": missing record_id");
            item.text = doc.value("text", std::string());
            if (item.text.empty()) {
                const std::string person = doc.value("person_name", std::string());
                if (auto it = person_text.find(person); it != person_text.end()) item.text = it->second;
            }
            if (item.text.empty())
                throw biokg::ConfigError(input_path + " line " + std::to_string(line_no) +
                                         ": no text and no corpus entry");
            items.push_back(std::move(item));
        }
    }

    std::vector<std::string> raw_texts(items.size());
    std::vector<std::string> chat_errors(items.size());
    if (!replay_path.empty()) {
        std::map<std::string, std::string> replay;
        std::istringstream in(read_file(replay_path));
        std::string line;
        while (std::getline(in, line)) {
            if (biokg::is_blank(line)) continue;
            const json doc = json::parse(line);
            replay[doc.at("record_id").get<std::string>()] = doc.at("text").get<std::string>();
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto it = replay.find(items[i].record_id);
            if (it == replay.end()) {
                chat_errors[i] = "no replay entry for record";
            } else {
                raw_texts[i] = it->second;
            }
        }
    } else {
        if (cfg.chat.base_url.empty())
            throw biokg::ConfigError("chat.base_url required (or use --replay for offline runs)");
        biokg::ChatClient client(cfg.chat);
        std::vector<std::string> prompts;
        prompts.reserve(items.size());
        for (const auto& item : items) prompts.push_back(biokg::render_prompt(tmpl, item.text));
        const auto results = client.chat_batch(prompts);
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].ok) {
                raw_texts[i] = results[i].response.text;
            } else {
                chat_errors[i] = results[i].error;
            }
        }
    }

    std::ostringstream out;
    std::map<std::string, std::size_t> status_counts;
    for (std::size_t i = 0; i < items.size(); ++i) {
        ordered_json line;
        line["record_id"] = items[i].record_id;
        if (!chat_errors[i].empty()) {
            line["status"] = "chat_error";
            line["error"] = chat_errors[i];
        } else {
            const auto parsed = biokg::parse_model_output(raw_texts[i], cfg.chat.strip_think_blocks);
            if (!parsed.ok()) {
                line["status"] = "parse_error";
                line["error"] = parsed.error;
                line["raw"] = parsed.raw;
            } else {
                const auto check = biokg::validate_record(*parsed.json_text, schema, {.require_all_keys = false});
                if (!check.ok()) {
                    std::string message;
                    for (const auto& issue : check.issues)
                        if (issue.severity == biokg::ValidationIssue::Severity::Error)
                            message += "[" + issue.field_key + "] " + issue.message + "; ";
                    line["status"] = "validation_error";
                    line["error"] = message;
                    line["raw"] = *parsed.json_text;
                } else {
                    line["status"] = "ok";
                    line["record"] = biokg::record_to_json(*check.record);
                }
            }
        }
        status_counts[line["status"].get<std::string>()]++;
        out << line.dump() << '\n';
    }
    write_file(out_path, out.str());

    std::map<std::string, std::string> inputs;
    inputs[input_path] = biokg::content_digest(read_file(input_path));
    write_run_manifest(out_path + ".manifest.json", "extract", inputs, {out_path}, cfg);

    std::cout << items.size() << " records:";
    for (const auto& [status, count] : status_counts) std::cout << " " << count << " " << status;
    std::cout << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& preds_path, const std::string& golds_path,
                 const std::string& scheme_name, const std::string& schemes_file, const std::string& embedder_name,
                 const std::string& out_dir) {
    const biokg::SchemaDefinition schema = biokg::load_schema(cfg.schema);
    const auto schemes = load_all_schemes(cfg, schemes_file);
    const std::string wanted = scheme_name.empty() ? "Average Distribution" : scheme_name;
    const biokg::WeightScheme* scheme = biokg::find_scheme(schemes, wanted);
    if (!scheme) throw biokg::ConfigError("unknown weight scheme: " + wanted);

    const auto golds = validate_golds(load_gold_lines(golds_path), schema);
    std::vector<biokg::PredictedRecord> preds;
    for (const auto& line : load_pred_lines(preds_path, schema))
        preds.push_back({line.record_id, line.status == "ok" ? line.record : std::nullopt});

    auto embedder = make_embedder(cfg, embedder_name);
    const auto report = biokg::evaluate_run(preds, golds, schema, *scheme, *embedder);

    const fs::path dir(out_dir);
    write_file(dir / "report.json", biokg::report_to_json(report, schema).dump(2) + "\n");
    write_file(dir / "report.txt", biokg::render_report_table(report, schema));
    std::map<std::string, std::string> inputs;
    inputs[preds_path] = biokg::content_digest(read_file(preds_path));
    inputs[golds_path] = biokg::content_digest(read_file(golds_path));
    write_run_manifest(dir / "run_manifest.json", "evaluate", inputs,
                       {(dir / "report.json").string(), (dir / "report.txt").string()}, cfg);

    std::cout << std::fixed << std::setprecision(4) << "run_mean " << report.run_mean << " (scheme: " << scheme->name
              << ", records: " << report.per_record.size() << ")\n";
    return 0;
}

int cmd_analyze_weights(const RunConfig& cfg, const std::string& matrix_path, const std::string& reports_dir,
                        const std::string& mode_name, const std::string& schemes_file, const std::string& out_dir) {
    const biokg::VarianceMode mode =
        biokg::parse_variance_mode(mode_name.empty() ? cfg.variance_mode : mode_name);

    biokg::SensitivityInput input;
    std::map<std::string, std::string> inputs;
    if (!matrix_path.empty()) {
        input = biokg::load_score_matrix(matrix_path);
        inputs[matrix_path] = biokg::content_digest(read_file(matrix_path));
    } else if (!reports_dir.empty()) {
        const biokg::SchemaDefinition schema = biokg::load_schema(cfg.schema);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(reports_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.size() < 2) throw biokg::ConfigError("analyze-weights: need at least 2 checkpoint reports");
        std::vector<std::pair<std::string, biokg::EvaluationReport>> reports;
        for (const auto& file : files) {
            const std::string content = read_file(file.string());
            inputs[file.string()] = biokg::content_digest(content);
            reports.emplace_back(file.stem().string(), biokg::report_from_json(json::parse(content), schema));
        }
        input = biokg::recompute_from_field_scores(reports, load_all_schemes(cfg, schemes_file));
    } else {
        throw biokg::ConfigError("analyze-weights: pass --matrix or --reports");
    }

    const auto report = biokg::scheme_sensitivity(input, mode);
    const fs::path dir(out_dir);
    write_file(dir / "sensitivity.json", biokg::sensitivity_to_json(report).dump(2) + "\n");
    write_file(dir / "sensitivity.txt", biokg::render_sensitivity_table(input, report));
    write_run_manifest(dir / "run_manifest.json", "analyze-weights", inputs,
                       {(dir / "sensitivity.json").string(), (dir / "sensitivity.txt").string()}, cfg);

    std::cout << "selected scheme: " << report.selected_scheme << " (mode: " << to_string(mode) << ")\n";
    return 0;
}

int cmd_export_graph(const RunConfig& cfg, const std::string& records_path, const std::string& out_prefix,
                     const std::string& push_url, const std::string& push_auth_env) {
    const biokg::SchemaDefinition schema = biokg::load_schema(cfg.schema);

    // Accepts either gold files ({"gold": ...}) or extraction output
    // ({"status","record"}); failed extractions are skipped.
    std::vector<biokg::GraphDocument> docs;
    std::istringstream in(read_file(records_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (biokg::is_blank(line)) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw biokg::ConfigError(records_path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        std::string record_id = doc.value("record_id", "line " + std::to_string(line_no));
        json record_json;
        if (doc.contains("gold")) {
            record_json = doc["gold"];
        } else if (doc.contains("record")) {
            if (doc.value("status", "ok") != "ok") continue;
            record_json = doc["record"];
        } else {
            record_json = doc;  // a bare person JSON per line also works
        }
        const auto check = biokg::validate_record(record_json.dump(), schema, {.require_all_keys = false});
        if (!check.ok()) {
            std::cerr << "warning: " << record_id << " failed validation, skipped\n";
            continue;
        }
        docs.push_back(biokg::record_to_graph(*check.record, schema, record_id));
    }

    const biokg::GraphDocument merged = biokg::merge_graphs(docs);
    const std::string cypher = biokg::export_cypher(merged);
    const std::string jsonl = biokg::export_jsonl(merged);
    write_file(out_prefix + ".cypher", cypher);
    write_file(out_prefix + ".jsonl", jsonl);

    std::map<std::string, std::string> inputs;
    inputs[records_path] = biokg::content_digest(read_file(records_path));
    write_run_manifest(out_prefix + ".manifest.json", "export-graph", inputs,
                       {out_prefix + ".cypher", out_prefix + ".jsonl"}, cfg);

    std::cout << merged.nodes.size() << " nodes, " << merged.edges.size() << " edges, " << merged.conflicts.size()
              << " conflicts -> " << out_prefix << ".cypher\n";

    if (!push_url.empty()) {
        const auto result = biokg::push_cypher(cypher, push_url, push_auth_env);
        if (!result.ok) {
            std::cerr << "error: graph push failed: " << result.error << "\n";
            return 1;
        }
        std::cout << "pushed to " << push_url << " (HTTP " << result.status << ")\n";
    }
    return 0;
}

int cmd_templates(const RunConfig& cfg, const std::string& dir_flag) {
    const std::string dir = dir_flag.empty() ? cfg.templates_dir : dir_flag;
    const biokg::TemplateListing listing = biokg::list_templates(dir);
    for (const auto& warning : listing.warnings) std::cerr << "warning: " << warning << "\n";
    for (const auto& tmpl : listing.templates) {
        std::cout << tmpl.name << "\t" << tmpl.language << "\t"
                  << (tmpl.language == "custom" ? "user" : "builtin") << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biographical text -> person knowledge graph pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "run configuration file (JSON)");

    // clean
    auto* clean = app.add_subcommand("clean", "clean, dedupe, group and segment a raw corpus");
    std::string clean_manifest, clean_out = "runs/clean";
    std::size_t clean_max_seg = 0, clean_min_chars = 0;
    bool clean_near = false;
    double clean_jaccard = 0.0;
    clean->add_option("--manifest", clean_manifest, "JSONL manifest of {path, person_name, source_kind, tags}")
        ->required();
    clean->add_option("--out-dir", clean_out, "output directory");
    clean->add_option("--max-segment-chars", clean_max_seg, "segment size limit (codepoints, >= 50)");
    clean->add_flag("--near-dup", clean_near, "drop 5-gram Jaccard near-duplicates");
    clean->add_option("--jaccard", clean_jaccard, "near-duplicate threshold (default 0.9)");
    clean->add_option("--min-chars", clean_min_chars, "drop documents shorter than this many codepoints");

    // build-dataset
    auto* build = app.add_subcommand("build-dataset", "build an Alpaca-format instruction dataset");
    std::string build_golds, build_corpus, build_manifest, build_template, build_out = "runs/dataset/train.json";
    std::size_t build_n = 0;
    std::uint64_t build_seed = 0;
    bool build_seed_set = false, build_split_input = false;
    build->add_option("--golds", build_golds, "JSONL gold annotations")->required();
    build->add_option("--corpus-dir", build_corpus, "cleaned corpus directory (for text lookup)");
    build->add_option("--manifest", build_manifest, "ingestion manifest (tag source)");
    build->add_option("--n", build_n, "stratified sample size (default: all)");
    build->add_option("--seed", build_seed, "sampling seed")->each([&](const std::string&) { build_seed_set = true; });
    build->add_option("--template", build_template, "prompt template name (zh, en, or user template)");
    build->add_option("--out", build_out, "output Alpaca JSON file");
    build->add_flag("--split-input", build_split_input, "put the character text in 'input' instead of 'instruction'");

    // extract
    auto* extract = app.add_subcommand("extract", "run schema-guided extraction through a chat endpoint");
    std::string ex_input, ex_corpus, ex_template, ex_replay, ex_out = "runs/extract/preds.jsonl";
    extract->add_option("--input", ex_input, "JSONL test records {record_id, person_name?, text?}")->required();
    extract->add_option("--corpus-dir", ex_corpus, "cleaned corpus directory (for text lookup)");
    extract->add_option("--template", ex_template, "prompt template name");
    extract->add_option("--replay", ex_replay, "offline replay file {record_id, text} instead of HTTP");
    extract->add_option("--out", ex_out, "predictions JSONL");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against golds");
    std::string ev_preds, ev_golds, ev_scheme, ev_schemes_file, ev_embedder, ev_out = "runs/evaluate";
    evaluate->add_option("--preds", ev_preds, "predictions JSONL (extract output)")->required();
    evaluate->add_option("--golds", ev_golds, "gold annotations JSONL")->required();
    evaluate->add_option("--scheme", ev_scheme, "weight scheme name (default: Average Distribution)");
    evaluate->add_option("--schemes-file", ev_schemes_file, "extra weight schemes (TSV)");
    evaluate->add_option("--embedder", ev_embedder, "mock | http");
    evaluate->add_option("--out-dir", ev_out, "report directory");

    // analyze-weights
    auto* analyze = app.add_subcommand("analyze-weights", "weight scheme sensitivity across checkpoints");
    std::string an_matrix, an_reports, an_mode, an_schemes_file, an_out = "runs/analyze";
    analyze->add_option("--matrix", an_matrix, "score matrix TSV (schemes x checkpoints)");
    analyze->add_option("--reports", an_reports, "directory of per-checkpoint report.json files");
    analyze->add_option("--mode", an_mode, "population | sample");
    analyze->add_option("--schemes-file", an_schemes_file, "extra weight schemes (TSV)");
    analyze->add_option("--out-dir", an_out, "output directory");

    // export-graph
    auto* graph = app.add_subcommand("export-graph", "build and export the property graph");
    std::string gr_records, gr_prefix = "runs/graph/graph", gr_push_url, gr_push_env;
    graph->add_option("--records", gr_records, "gold JSONL or extract output JSONL")->required();
    graph->add_option("--out-prefix", gr_prefix, "output prefix (.cypher / .jsonl)");
    graph->add_option("--push-url", gr_push_url, "optional Cypher HTTP endpoint (transaction commit URL)");
    graph->add_option("--push-auth-env", gr_push_env, "env var holding the bearer token for --push-url");

    // templates
    auto* templates = app.add_subcommand("templates", "list available prompt templates");
    std::string tp_dir;
    templates->add_option("--dir", tp_dir, "user templates directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = load_config(config_path);
        if (clean->parsed())
            return cmd_clean(cfg, clean_manifest, clean_out, clean_max_seg, clean_near, clean_jaccard,
                             clean_min_chars);
        if (build->parsed())
            return cmd_build_dataset(cfg, build_golds, build_corpus, build_manifest, build_n,
                                     build_seed_set ? build_seed : cfg.seed, build_template, build_out,
                                     build_split_input);
        if (extract->parsed()) return cmd_extract(cfg, ex_input, ex_corpus, ex_template, ex_replay, ex_out);
        if (evaluate->parsed())
            return cmd_evaluate(cfg, ev_preds, ev_golds, ev_scheme, ev_schemes_file, ev_embedder, ev_out);
        if (analyze->parsed())
            return cmd_analyze_weights(cfg, an_matrix, an_reports, an_mode, an_schemes_file, an_out);
        if (graph->parsed()) return cmd_export_graph(cfg, gr_records, gr_prefix, gr_push_url, gr_push_env);
        if (templates->parsed()) return cmd_templates(cfg, tp_dir);
    } catch (const biokg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
