#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace biokg {

struct CorpusDocument {
    std::string doc_id;
    std::string person_name;  // may be empty before grouping
    std::string source_kind;  // encyclopedia | news | thematic-site | book
    std::string raw_text;     // cleaned text once clean_text has run
    std::vector<std::string> segments;
};

// Noise removal: control characters and zero-width characters dropped,
// decorative symbols (geometric shapes, dingbats) stripped, whitespace
// runs collapsed to single spaces, ends trimmed. Total and idempotent.
std::string clean_text(std::string_view raw);

// Character 5-gram Jaccard similarity over codepoints.
double jaccard_5gram(std::string_view a, std::string_view b);

struct DedupOptions {
    bool near_duplicates = false;
    double jaccard_threshold = 0.9;
    std::size_t min_chars = 0;  // optional min-length filter, 0 = off
};

struct DedupResult {
    std::vector<CorpusDocument> docs;
    std::size_t removed_exact = 0;
    std::size_t removed_near = 0;
    std::size_t removed_short = 0;
};

// Keeps the first occurrence of each cleaned text; optionally drops
// near-duplicates against the kept set. Order-stable.
DedupResult dedupe(const std::vector<CorpusDocument>& docs, const DedupOptions& options = {});

// Greedy sentence packing into units of at most max_segment_chars
// codepoints; an oversize sentence is hard-split. Concatenating the
// returned segments reproduces the input exactly.
std::vector<std::string> segment(std::string_view text, std::size_t max_segment_chars);

inline constexpr char kUnassignedGroup[] = "<unassigned>";

// Partition by person_name; docs with an empty name land in "<unassigned>".
std::map<std::string, std::vector<CorpusDocument>> group_by_person(const std::vector<CorpusDocument>& docs);

struct ManifestEntry {
    std::string path;
    std::string person_name;
    std::string source_kind;
    std::set<std::string> tags;
};

// JSONL manifest: one {"path","person_name","source_kind","tags"?} per line.
std::vector<ManifestEntry> load_manifest(const std::string& path);

extern const std::vector<std::string> kKnownSourceKinds;

// Line format of per-person corpus files.
struct CorpusLine {
    std::string doc_id;
    std::string person_name;
    std::string source_kind;
    std::size_t segment_index = 0;
    std::string text;
};

std::string corpus_lines_to_jsonl(const std::vector<CorpusLine>& lines);
std::vector<CorpusLine> parse_corpus_jsonl(std::string_view content);

}  // namespace biokg
