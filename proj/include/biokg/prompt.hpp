#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biokg {

struct PromptTemplate {
    std::string name;
    std::string language;  // "zh", "en", or "custom"
    std::string preamble;
    std::string delimiter = "******";
    std::string schema_block;
    std::string think_suffix;  // appended verbatim when non-empty
};

// The two embedded extraction templates.
const PromptTemplate& builtin_template_zh();
const PromptTemplate& builtin_template_en();

// preamble, opening delimiter line, character text, closing delimiter
// line, schema block. Throws ConfigError when the text contains the
// delimiter (the frame would be unrecoverable).
std::string render_prompt(const PromptTemplate& tmpl, std::string_view character_text);

// Inverse of render_prompt for a fixed template; nullopt if the text was
// not produced by it.
std::optional<std::string> recover_character_text(const PromptTemplate& tmpl, std::string_view prompt);

// User template files: plain text with one {{character_text}} placeholder;
// {{schema_block}} / {{schema_block:en}} expand to the embedded blocks.
std::optional<PromptTemplate> load_template_file(const std::string& path, std::string* error = nullptr);

struct TemplateListing {
    std::vector<PromptTemplate> templates;
    std::vector<std::string> warnings;
};

// Builtins plus every loadable file in templates_dir (sorted by name).
TemplateListing list_templates(const std::string& templates_dir = "");

// Find by name among the listing ("zh"/"en" plus user template stems).
const PromptTemplate* find_template(const std::vector<PromptTemplate>& templates, std::string_view name);

}  // namespace biokg
