#include "biokg/prompt.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "biokg/common.hpp"

namespace biokg {

namespace {

const char* kZhPreamble =
    "你是人物领域的知识抽取专家，******内是你需要进行抽取的文本内容，请你根据所给的文本信息，"
    "全面准确地对人物信息进行抽取，并按照JSON格式进行输出，如有模糊或者不确定的地方请说明，"
    "输出模板及各字段说明附后。";

const char* kZhSchemaBlock =
    R"(固定输出的JSON格式如下：
{"姓名":"该人物的姓名",
 "别名":"该人物的别名，如字号，别名等",
 "性别":"该人物的性别",
 "民族":"该人物属于哪个民族",
 "所处时代":"该人物所处的时代",
 "籍贯":"该人物的籍贯信息",
 "出生日期":"该人物的出生日期",
 "逝世日期":"该人物的逝世日期",
 "主要成就":[
 {"成就影响":"事件1","发生地点":"地点","发生时间":"时间"},...],
 "主要作品":"个人作品",
 "主要社会关系":[
 {"人物":"人物名字1","关系":"人物名字1与被信息抽取人物的关系，如同僚、上级、下级等"},...],
 "主要家族关系":[
 {"人物":"人物名字1","关系":"人物名字1与被信息抽取人物的关系，如父亲、儿子等"},...],
 "领域":"人物所在领域，如军事家、教育家、思想家等对于个人的概括性描述",
 "历任职务":[
 {"职务1":"职务岗位描述","时间":"担任该职务的开始时间，以年为单位"},
 {"职务2":"职务岗位描述","时间":"担任该职务的开始时间，以年为单位"}]})";

const char* kEnPreamble =
    "You are an expert in knowledge extraction within the domain of historical and biographical figures. "
    "The content enclosed within ****** is the text from which you need to extract information. "
    "Based on the provided text, please comprehensively and accurately extract all relevant information "
    "about the individual and output the results in JSON format. If there are any ambiguous or uncertain "
    "details, please indicate them explicitly. The output template and field descriptions are provided below.";

const char* kEnSchemaBlock =
    R"(The fixed JSON output format is as follows:
{"Name": "The person's full name",
 "Alias": "Any alternate names, such as courtesy names or pseudonyms",
 "Gender": "The person's gender",
 "Ethnicity": "The ethnic group to which the person belongs",
 "Era": "The historical period or dynasty in which the person lived",
 "BirthPlace": "The person's place of origin",
 "BirthDate": "The person's date of birth",
 "DeathDate": "The person's date of death",
 "MajorAchievements": [
 {"Achievement": "Event 1", "Location": "Place", "Time": "Time"}, ...],
 "MajorWorks": "The person's notable works or publications",
 "MajorSocialRelations": [
 {"Person": "Name of Person 1", "Relation": "Relationship between Person 1 and the extracted individual, e.g., colleague, superior, subordinate"}, ...],
 "MajorFamilyRelations": [
 {"Person": "Name of Person 1", "Relation": "Family relationship between Person 1 and the extracted individual, e.g., father, son"}, ...],
 "Field": "The domain or field the person is known for, e.g., military leader, educator, philosopher, etc.",
 "OfficialPositions": [
 {"Position1": "Description of the post or title", "Time": "The year or period when the person assumed this position"},
 {"Position2": "Description of the post or title", "Time": "The year or period when the person assumed this position"}]})";

constexpr const char* kTextPlaceholder = "{{character_text}}";

}  // namespace

const PromptTemplate& builtin_template_zh() {
    static const PromptTemplate tmpl{"zh", "zh", kZhPreamble, "******", kZhSchemaBlock, ""};
    return tmpl;
}

const PromptTemplate& builtin_template_en() {
    static const PromptTemplate tmpl{"en", "en", kEnPreamble, "******", kEnSchemaBlock, ""};
    return tmpl;
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view character_text) {
    if (character_text.find(tmpl.delimiter) != std::string_view::npos)
        throw ConfigError("character text contains the frame delimiter \"" + tmpl.delimiter + "\"");
    std::string out = tmpl.preamble;
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += tmpl.delimiter;
    out += " \n";
    out += character_text;
    out += '\n';
    out += tmpl.delimiter;
    out += '\n';
    out += tmpl.schema_block;
    if (!tmpl.think_suffix.empty()) {
        if (out.empty() || out.back() != '\n') out += '\n';
        out += tmpl.think_suffix;
    }
    return out;
}

std::optional<std::string> recover_character_text(const PromptTemplate& tmpl, std::string_view prompt) {
    const std::string open = tmpl.delimiter + " \n";
    const std::string close = "\n" + tmpl.delimiter + "\n";
    const std::size_t start = prompt.find(open);
    if (start == std::string_view::npos) return std::nullopt;
    const std::size_t text_begin = start + open.size();
    const std::size_t end = prompt.find(close, text_begin);
    if (end == std::string_view::npos) return std::nullopt;
    return std::string(prompt.substr(text_begin, end - text_begin));
}

std::optional<PromptTemplate> load_template_file(const std::string& path, std::string* error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (error) *error = "cannot open " + path;
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();

    auto replace_all = [](std::string& text, std::string_view from, std::string_view to) {
        std::size_t pos = 0;
        while ((pos = text.find(from, pos)) != std::string::npos) {
            text.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all(content, "{{schema_block:en}}", kEnSchemaBlock);
    replace_all(content, "{{schema_block}}", kZhSchemaBlock);

    const std::size_t slot = content.find(kTextPlaceholder);
    if (slot == std::string::npos) {
        if (error) *error = path + ": missing " + std::string(kTextPlaceholder) + " placeholder";
        return std::nullopt;
    }
    if (content.find(kTextPlaceholder, slot + 1) != std::string::npos) {
        if (error) *error = path + ": more than one " + std::string(kTextPlaceholder) + " placeholder";
        return std::nullopt;
    }

    PromptTemplate tmpl;
    tmpl.name = std::filesystem::path(path).stem().string();
    tmpl.language = "custom";
    tmpl.preamble = content.substr(0, slot);
    tmpl.schema_block = content.substr(slot + std::string(kTextPlaceholder).size());
    // The renderer supplies the newlines around the frame.
    while (!tmpl.preamble.empty() && (tmpl.preamble.back() == '\n' || tmpl.preamble.back() == '\r'))
        tmpl.preamble.pop_back();
    if (!tmpl.preamble.empty()) tmpl.preamble += '\n';
    while (!tmpl.schema_block.empty() && (tmpl.schema_block.front() == '\n' || tmpl.schema_block.front() == '\r'))
        tmpl.schema_block.erase(tmpl.schema_block.begin());
    return tmpl;
}

TemplateListing list_templates(const std::string& templates_dir) {
    TemplateListing listing;
    listing.templates.push_back(builtin_template_zh());
    listing.templates.push_back(builtin_template_en());
    if (templates_dir.empty()) return listing;

    std::error_code ec;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(templates_dir, ec)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    if (ec) {
        listing.warnings.push_back("templates dir: " + ec.message());
        return listing;
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::string error;
        if (auto tmpl = load_template_file(file.string(), &error)) {
            listing.templates.push_back(std::move(*tmpl));
        } else {
            listing.warnings.push_back(error);
        }
    }
    return listing;
}

const PromptTemplate* find_template(const std::vector<PromptTemplate>& templates, std::string_view name) {
    for (const auto& tmpl : templates)
        if (tmpl.name == name) return &tmpl;
    return nullptr;
}

}  // namespace biokg
