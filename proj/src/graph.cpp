#include "biokg/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"

#include "biokg/common.hpp"
#include "biokg/gateway.hpp"
#include "biokg/utf8.hpp"

namespace biokg {

std::string_view to_string(NodeLabel label) {
    switch (label) {
        case NodeLabel::Person: return "Person";
        case NodeLabel::Achievement: return "Achievement";
        case NodeLabel::Work: return "Work";
        case NodeLabel::Position: return "Position";
        case NodeLabel::Organization: return "Organization";
        case NodeLabel::Event: return "Event";
    }
    return "Person";
}

namespace {

NodeLabel label_from_string(std::string_view text) {
    for (NodeLabel label : {NodeLabel::Person, NodeLabel::Achievement, NodeLabel::Work, NodeLabel::Position,
                            NodeLabel::Organization, NodeLabel::Event}) {
        if (to_string(label) == text) return label;
    }
    throw ConfigError("unknown node label: " + std::string(text));
}

}  // namespace

std::string canonical_entity_name(std::string_view name) {
    std::vector<char32_t> cps = u8_decode(name);
    std::string out;
    bool pending_space = false;
    bool emitted = false;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && emitted) out.push_back(' ');
        pending_space = false;
        u8_encode(cp, out);
        emitted = true;
    }
    return out;
}

std::string node_id_for(NodeLabel label, std::string_view canonical_name) {
    std::string blob(to_string(label));
    blob.push_back('\x1f');
    blob.append(canonical_name);
    return content_digest(blob);
}

RelationMapping map_relation_string(std::string_view raw) {
    static const std::map<std::string, RelationMapping, std::less<>> table = {
        {"配偶", {"hasSpouse", false}},    {"妻", {"hasSpouse", false}},      {"夫", {"hasSpouse", false}},
        {"父亲", {"hasParent", false}},    {"母亲", {"hasParent", false}},    {"父", {"hasParent", false}},
        {"母", {"hasParent", false}},      {"学生", {"hasStudent", false}},   {"弟子", {"hasStudent", false}},
        {"同僚", {"hasColleague", false}}, {"同事", {"hasColleague", false}}, {"上级", {"hasSupervisor", false}},
        {"上司", {"hasSupervisor", false}},{"下级", {"hasSubordinate", false}},
        {"下属", {"hasSubordinate", false}},{"幕僚", {"hasSubordinate", false}},
        {"导师", {"hasStudent", true}},    {"老师", {"hasStudent", true}},
    };
    auto it = table.find(trim(raw));
    if (it != table.end()) return it->second;
    return {"relatedTo", false};
}

namespace {

// Accumulates nodes/edges with first-writer-wins properties and a
// conflict log; emits documents in canonical order.
class GraphAccumulator {
public:
    GraphNode& upsert_node(NodeLabel label, std::string_view raw_name, const std::string& source) {
        const std::string name = canonical_entity_name(raw_name);
        const std::string id = node_id_for(label, name);
        auto it = nodes_.find(id);
        if (it == nodes_.end()) {
            GraphNode node;
            node.node_id = id;
            node.label = label;
            node.canonical_name = name;
            it = nodes_.emplace(id, std::move(node)).first;
            order_.push_back(id);
        }
        (void)source;
        return it->second;
    }

    void set_property(GraphNode& node, const std::string& key, const std::string& value, const std::string& source) {
        auto [it, inserted] = node.properties.emplace(key, value);
        if (!inserted && it->second != value)
            conflicts_.push_back({node.node_id, key, it->second, value, source});
    }

    void add_edge(GraphEdge edge) {
        const std::string key = edge.from_id + '\x1f' + edge.to_id + '\x1f' + edge.predicate;
        if (edge_keys_.emplace(key).second) edges_.push_back(std::move(edge));
    }

    void append_conflicts(const std::vector<PropertyConflict>& conflicts) {
        conflicts_.insert(conflicts_.end(), conflicts.begin(), conflicts.end());
    }

    GraphDocument finish() {
        GraphDocument doc;
        for (const auto& id : order_) doc.nodes.push_back(nodes_.at(id));
        doc.edges = std::move(edges_);
        doc.conflicts = std::move(conflicts_);
        sort_document(doc);
        return doc;
    }

    static void sort_document(GraphDocument& doc) {
        auto node_rank = [](const GraphNode& node) {
            return std::pair<std::string, std::string>(std::string(to_string(node.label)), node.canonical_name);
        };
        std::sort(doc.nodes.begin(), doc.nodes.end(),
                  [&](const GraphNode& a, const GraphNode& b) { return node_rank(a) < node_rank(b); });
        std::unordered_map<std::string, std::pair<std::string, std::string>> rank_by_id;
        for (const auto& node : doc.nodes) rank_by_id[node.node_id] = node_rank(node);
        auto edge_rank = [&](const GraphEdge& e) {
            return std::tuple(rank_by_id.at(e.from_id), rank_by_id.at(e.to_id), e.predicate);
        };
        std::sort(doc.edges.begin(), doc.edges.end(),
                  [&](const GraphEdge& a, const GraphEdge& b) { return edge_rank(a) < edge_rank(b); });
    }

private:
    std::map<std::string, GraphNode> nodes_;
    std::vector<std::string> order_;
    std::vector<GraphEdge> edges_;
    std::set<std::string> edge_keys_;
    std::vector<PropertyConflict> conflicts_;
};

std::vector<std::string> split_works(const std::string& works) {
    static const std::set<char32_t> separators = {U'、', U'，', U'；', U',', U';'};
    std::vector<std::string> parts;
    std::string current;
    for (char32_t cp : u8_decode(works)) {
        if (separators.count(cp)) {
            parts.push_back(current);
            current.clear();
        } else {
            u8_encode(cp, current);
        }
    }
    parts.push_back(current);
    return parts;
}

}  // namespace

GraphDocument record_to_graph(const PersonRecord& record, const SchemaDefinition& schema,
                              const std::string& source_record) {
    (void)schema;
    GraphAccumulator acc;
    if (is_unknown_value(record.name)) return acc.finish();

    const std::string source = source_record.empty() ? canonical_entity_name(record.name) : source_record;
    GraphNode& person = acc.upsert_node(NodeLabel::Person, record.name, source);
    const std::string person_id = person.node_id;

    auto set_attr = [&](const std::string& key, const std::string& value) {
        if (is_unknown_value(value)) return;
        acc.set_property(acc.upsert_node(NodeLabel::Person, record.name, source), key, value, source);
    };
    set_attr("hasName", canonical_entity_name(record.name));
    set_attr("hasAlias", record.alias);
    set_attr("hasGender", record.gender);
    set_attr("hasEthnic", record.ethnicity);
    // Table-style attribute names; the era attribute has no counterpart
    // there but the field is part of the record, so it ships as hasEra.
    set_attr("hasEra", record.era);
    set_attr("hasBirthPlace", record.birthplace);
    set_attr("hasBirthDate", record.birth_date);
    set_attr("hasDeathDate", record.death_date);
    set_attr("hasFiled", record.field_domain);

    for (const auto& item : record.achievements) {
        if (is_unknown_value(item.influence)) continue;
        GraphNode& node = acc.upsert_node(NodeLabel::Achievement, item.influence, source);
        acc.set_property(node, "influence", item.influence, source);
        if (!is_unknown_value(item.location)) acc.set_property(node, "location", item.location, source);
        if (!is_unknown_value(item.time)) acc.set_property(node, "time", item.time, source);
        acc.add_edge({person_id, node.node_id, "ParticipateIn", {}});
    }

    for (const auto& part : split_works(record.works)) {
        if (is_unknown_value(part)) continue;
        GraphNode& node = acc.upsert_node(NodeLabel::Work, trim(part), source);
        acc.add_edge({person_id, node.node_id, "Create", {}});
    }

    for (const auto& item : record.positions) {
        if (is_unknown_value(item.title)) continue;
        GraphNode& node = acc.upsert_node(NodeLabel::Position, item.title, source);
        if (!is_unknown_value(item.start_time)) acc.set_property(node, "start_time", item.start_time, source);
        acc.add_edge({person_id, node.node_id, "workFor", {}});
    }

    auto add_relations = [&](const std::vector<RelationItem>& items) {
        for (const auto& item : items) {
            if (is_unknown_value(item.person)) continue;
            GraphNode& target = acc.upsert_node(NodeLabel::Person, item.person, source);
            const RelationMapping mapping = map_relation_string(item.relation);
            GraphEdge edge;
            edge.from_id = mapping.reversed ? target.node_id : person_id;
            edge.to_id = mapping.reversed ? person_id : target.node_id;
            edge.predicate = mapping.predicate;
            if (!is_unknown_value(item.relation)) edge.properties["relation"] = item.relation;
            acc.add_edge(std::move(edge));
        }
    };
    add_relations(record.social_relations);
    add_relations(record.family_relations);

    return acc.finish();
}

GraphDocument merge_graphs(std::span<const GraphDocument> docs) {
    GraphAccumulator acc;
    std::size_t index = 0;
    for (const auto& doc : docs) {
        const std::string source = "doc[" + std::to_string(index++) + "]";
        for (const auto& node : doc.nodes) {
            GraphNode& merged = acc.upsert_node(node.label, node.canonical_name, source);
            for (const auto& [key, value] : node.properties) acc.set_property(merged, key, value, source);
        }
        for (const auto& edge : doc.edges) acc.add_edge(edge);
        acc.append_conflicts(doc.conflicts);
    }
    return acc.finish();
}

namespace {

std::string cypher_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string export_cypher(const GraphDocument& doc) {
    std::ostringstream out;
    out << "// person knowledge graph import script: " << doc.nodes.size() << " nodes, " << doc.edges.size()
        << " edges\n";
    std::unordered_map<std::string, const GraphNode*> by_id;
    for (const auto& node : doc.nodes) by_id[node.node_id] = &node;

    for (const auto& node : doc.nodes) {
        out << "MERGE (:" << to_string(node.label) << " {name: \"" << cypher_escape(node.canonical_name)
            << "\"});\n";
        if (node.properties.empty()) continue;
        out << "MATCH (n:" << to_string(node.label) << " {name: \"" << cypher_escape(node.canonical_name)
            << "\"}) SET ";
        bool first = true;
        for (const auto& [key, value] : node.properties) {
            if (!first) out << ", ";
            first = false;
            out << "n." << key << " = \"" << cypher_escape(value) << "\"";
        }
        out << ";\n";
    }
    for (const auto& edge : doc.edges) {
        const GraphNode* from = by_id.at(edge.from_id);
        const GraphNode* to = by_id.at(edge.to_id);
        out << "MATCH (a:" << to_string(from->label) << " {name: \"" << cypher_escape(from->canonical_name)
            << "\"}), (b:" << to_string(to->label) << " {name: \"" << cypher_escape(to->canonical_name) << "\"}) "
            << "MERGE (a)-[r:" << edge.predicate << "]->(b)";
        if (!edge.properties.empty()) {
            out << " SET ";
            bool first = true;
            for (const auto& [key, value] : edge.properties) {
                if (!first) out << ", ";
                first = false;
                out << "r." << key << " = \"" << cypher_escape(value) << "\"";
            }
        }
        out << ";\n";
    }
    return out.str();
}

std::string export_jsonl(const GraphDocument& doc) {
    std::string out;
    for (const auto& node : doc.nodes) {
        nlohmann::ordered_json line;
        line["type"] = "node";
        line["id"] = node.node_id;
        line["label"] = std::string(to_string(node.label));
        line["name"] = node.canonical_name;
        line["properties"] = node.properties;
        out += line.dump();
        out += '\n';
    }
    for (const auto& edge : doc.edges) {
        nlohmann::ordered_json line;
        line["type"] = "edge";
        line["from"] = edge.from_id;
        line["to"] = edge.to_id;
        line["predicate"] = edge.predicate;
        line["properties"] = edge.properties;
        out += line.dump();
        out += '\n';
    }
    for (const auto& conflict : doc.conflicts) {
        nlohmann::ordered_json line;
        line["type"] = "conflict";
        line["node_id"] = conflict.node_id;
        line["property"] = conflict.property;
        line["kept"] = conflict.kept;
        line["discarded"] = conflict.discarded;
        line["source_record"] = conflict.source_record;
        out += line.dump();
        out += '\n';
    }
    return out;
}

GraphDocument import_jsonl(std::string_view content) {
    GraphDocument doc;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) continue;
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("graph jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string type = parsed.value("type", std::string());
        if (type == "node") {
            GraphNode node;
            node.node_id = parsed.at("id").get<std::string>();
            node.label = label_from_string(parsed.at("label").get<std::string>());
            node.canonical_name = parsed.at("name").get<std::string>();
            node.properties = parsed.value("properties", std::map<std::string, std::string>{});
            doc.nodes.push_back(std::move(node));
        } else if (type == "edge") {
            GraphEdge edge;
            edge.from_id = parsed.at("from").get<std::string>();
            edge.to_id = parsed.at("to").get<std::string>();
            edge.predicate = parsed.at("predicate").get<std::string>();
            edge.properties = parsed.value("properties", std::map<std::string, std::string>{});
            doc.edges.push_back(std::move(edge));
        } else if (type == "conflict") {
            doc.conflicts.push_back({parsed.at("node_id").get<std::string>(),
                                     parsed.at("property").get<std::string>(), parsed.at("kept").get<std::string>(),
                                     parsed.at("discarded").get<std::string>(),
                                     parsed.at("source_record").get<std::string>()});
        } else {
            throw ConfigError("graph jsonl line " + std::to_string(line_no) + ": unknown type '" + type + "'");
        }
    }
    return doc;
}

PushResult push_cypher(const std::string& cypher_script, const std::string& base_url, const std::string& auth_env) {
    PushResult result;
    nlohmann::json statements = nlohmann::json::array();
    std::istringstream in(cypher_script);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("//", 0) == 0) continue;
        if (!line.empty() && line.back() == ';') line.pop_back();
        statements.push_back({{"statement", line}});
    }
    nlohmann::json body;
    body["statements"] = std::move(statements);

    const std::size_t scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        result.error = "endpoint url must include a scheme";
        return result;
    }
    const std::size_t path_start = base_url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : base_url.substr(path_start);

    httplib::Client cli(origin);
    httplib::Headers headers;
    if (!auth_env.empty()) {
        const std::string token = api_key_from_env(auth_env);
        if (token.empty()) {
            result.error = "environment variable " + auth_env + " is not set";
            return result;
        }
        headers.emplace("Authorization", "Bearer " + token);
    }
    httplib::Result res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        result.error = "transport: " + httplib::to_string(res.error());
        return result;
    }
    result.status = res->status;
    result.ok = res->status >= 200 && res->status < 300;
    if (!result.ok) result.error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    return result;
}

}  // namespace biokg
