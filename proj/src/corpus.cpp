#include "biokg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "json.hpp"

#include "biokg/common.hpp"
#include "biokg/utf8.hpp"

namespace biokg {

namespace {

bool is_control_cp(char32_t cp) {
    return cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F);
}

bool is_zero_width_cp(char32_t cp) {
    switch (cp) {
        case 0x200B:  // zero width space
        case 0x200C:
        case 0x200D:
        case 0x2060:
        case 0xFEFF:
            return true;
        default:
            return false;
    }
}

// Decorative symbol blocks: box drawing/blocks/geometric shapes, misc
// symbols and dingbats, misc symbols and arrows.
bool is_decorative_cp(char32_t cp) {
    return (cp >= 0x2500 && cp <= 0x25FF) || (cp >= 0x2600 && cp <= 0x27BF) || (cp >= 0x2B00 && cp <= 0x2BFF);
}

const std::set<char32_t>& sentence_terminators() {
    static const std::set<char32_t> terms = {U'。', U'！', U'？', U'；', U'.', U'!', U'?'};
    return terms;
}

}  // namespace

const std::vector<std::string> kKnownSourceKinds = {"encyclopedia", "news", "thematic-site", "book"};

std::string clean_text(std::string_view raw) {
    std::vector<char32_t> cps = u8_decode(raw);
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    bool emitted = false;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            pending_space = true;
            continue;
        }
        if (is_control_cp(cp) || is_zero_width_cp(cp) || is_decorative_cp(cp)) continue;
        if (pending_space && emitted) out.push_back(' ');
        pending_space = false;
        u8_encode(cp, out);
        emitted = true;
    }
    return out;
}

double jaccard_5gram(std::string_view a, std::string_view b) {
    auto grams = [](std::string_view text) {
        std::unordered_set<std::string> out;
        std::vector<char32_t> cps = u8_decode(text);
        if (cps.size() < 5) {
            if (!cps.empty()) out.insert(u8_encode(cps));
            return out;
        }
        for (std::size_t i = 0; i + 5 <= cps.size(); ++i) {
            std::string gram;
            for (std::size_t k = 0; k < 5; ++k) u8_encode(cps[i + k], gram);
            out.insert(std::move(gram));
        }
        return out;
    };
    auto ga = grams(a);
    auto gb = grams(b);
    if (ga.empty() && gb.empty()) return 1.0;
    if (ga.empty() || gb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& g : ga)
        if (gb.count(g)) ++inter;
    const std::size_t uni = ga.size() + gb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

DedupResult dedupe(const std::vector<CorpusDocument>& docs, const DedupOptions& options) {
    DedupResult result;
    std::unordered_set<std::uint64_t> seen_hashes;
    for (const auto& doc : docs) {
        const std::string cleaned = clean_text(doc.raw_text);
        if (options.min_chars > 0 && u8_length(cleaned) < options.min_chars) {
            ++result.removed_short;
            continue;
        }
        if (!seen_hashes.insert(fnv1a64(cleaned)).second) {
            ++result.removed_exact;
            continue;
        }
        if (options.near_duplicates) {
            bool near = false;
            for (const auto& kept : result.docs) {
                if (jaccard_5gram(cleaned, kept.raw_text) >= options.jaccard_threshold) {
                    near = true;
                    break;
                }
            }
            if (near) {
                ++result.removed_near;
                continue;
            }
        }
        CorpusDocument kept = doc;
        kept.raw_text = cleaned;
        result.docs.push_back(std::move(kept));
    }
    return result;
}

std::vector<std::string> segment(std::string_view text, std::size_t max_segment_chars) {
    if (max_segment_chars < 50) throw ConfigError("segment: max_segment_chars must be >= 50");
    std::vector<char32_t> cps = u8_decode(text);
    if (cps.empty()) return {};

    // Sentences keep their terminators, so concatenation is lossless.
    std::vector<std::vector<char32_t>> sentences;
    std::vector<char32_t> current;
    for (char32_t cp : cps) {
        current.push_back(cp);
        if (sentence_terminators().count(cp)) {
            sentences.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(std::move(current));

    std::vector<std::string> segments;
    std::vector<char32_t> unit;
    auto flush = [&]() {
        if (!unit.empty()) {
            segments.push_back(u8_encode(unit));
            unit.clear();
        }
    };
    for (auto& sentence : sentences) {
        if (sentence.size() > max_segment_chars) {
            flush();
            for (std::size_t i = 0; i < sentence.size(); i += max_segment_chars) {
                const std::size_t len = std::min(max_segment_chars, sentence.size() - i);
                segments.push_back(u8_encode({sentence.begin() + static_cast<std::ptrdiff_t>(i),
                                              sentence.begin() + static_cast<std::ptrdiff_t>(i + len)}));
            }
            continue;
        }
        if (unit.size() + sentence.size() > max_segment_chars) flush();
        unit.insert(unit.end(), sentence.begin(), sentence.end());
    }
    flush();
    return segments;
}

std::map<std::string, std::vector<CorpusDocument>> group_by_person(const std::vector<CorpusDocument>& docs) {
    std::map<std::string, std::vector<CorpusDocument>> groups;
    for (const auto& doc : docs) {
        const std::string key = trim(doc.person_name).empty() ? kUnassignedGroup : doc.person_name;
        groups[key].push_back(doc);
    }
    return groups;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("manifest: cannot open " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!doc.is_object() || !doc.contains("path"))
            throw ConfigError("manifest line " + std::to_string(line_no) + ": expected an object with 'path'");
        ManifestEntry entry;
        entry.path = doc["path"].get<std::string>();
        entry.person_name = doc.value("person_name", std::string());
        entry.source_kind = doc.value("source_kind", std::string());
        if (doc.contains("tags")) {
            for (const auto& tag : doc["tags"]) entry.tags.insert(tag.get<std::string>());
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::string corpus_lines_to_jsonl(const std::vector<CorpusLine>& lines) {
    std::string out;
    for (const auto& line : lines) {
        nlohmann::ordered_json doc;
        doc["doc_id"] = line.doc_id;
        doc["person_name"] = line.person_name;
        doc["source_kind"] = line.source_kind;
        doc["segment_index"] = line.segment_index;
        doc["text"] = line.text;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

std::vector<CorpusLine> parse_corpus_jsonl(std::string_view content) {
    std::vector<CorpusLine> lines;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
        CorpusLine out;
        out.doc_id = doc.value("doc_id", std::string());
        out.person_name = doc.value("person_name", std::string());
        out.source_kind = doc.value("source_kind", std::string());
        out.segment_index = doc.value("segment_index", std::size_t{0});
        out.text = doc.value("text", std::string());
        lines.push_back(std::move(out));
    }
    return lines;
}

}  // namespace biokg
