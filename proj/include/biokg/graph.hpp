#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biokg/schema.hpp"

namespace biokg {

enum class NodeLabel { Person, Achievement, Work, Position, Organization, Event };

std::string_view to_string(NodeLabel label);

struct GraphNode {
    std::string node_id;  // stable hash of (label, canonical_name)
    NodeLabel label = NodeLabel::Person;
    std::string canonical_name;
    std::map<std::string, std::string> properties;

    bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
    std::string from_id;
    std::string to_id;
    std::string predicate;
    std::map<std::string, std::string> properties;

    bool operator==(const GraphEdge&) const = default;
};

struct PropertyConflict {
    std::string node_id;
    std::string property;
    std::string kept;
    std::string discarded;
    std::string source_record;

    bool operator==(const PropertyConflict&) const = default;
};

struct GraphDocument {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    std::vector<PropertyConflict> conflicts;

    bool operator==(const GraphDocument&) const = default;
};

std::string node_id_for(NodeLabel label, std::string_view canonical_name);

// Trimmed, internal whitespace collapsed — the entity-alignment key.
std::string canonical_entity_name(std::string_view name);

struct RelationMapping {
    std::string predicate;
    bool reversed = false;  // edge runs target -> subject (teacher -> student)
};

// Free-text relation strings to graph predicates; unmatched strings fall
// back to relatedTo with the raw text preserved on the edge.
RelationMapping map_relation_string(std::string_view raw);

// One record becomes: a Person node with its attribute properties,
// Achievement nodes via ParticipateIn, Work nodes via Create, Position
// nodes via workFor, and Person nodes for relation targets. Empty and
// "未知" values emit nothing.
GraphDocument record_to_graph(const PersonRecord& record, const SchemaDefinition& schema,
                              const std::string& source_record = "");

// Merge on (label, canonical name): first writer wins per property and
// every discarded value is logged; edges deduplicated.
GraphDocument merge_graphs(std::span<const GraphDocument> docs);

// Deterministic MERGE-based import script, idempotent on re-import.
std::string export_cypher(const GraphDocument& doc);

std::string export_jsonl(const GraphDocument& doc);
GraphDocument import_jsonl(std::string_view content);

struct PushResult {
    bool ok = false;
    int status = 0;
    std::string error;
};

// POSTs the script to a Cypher-over-HTTP endpoint (transactional commit
// API shape). Credentials travel via the named env var as a bearer token.
PushResult push_cypher(const std::string& cypher_script, const std::string& base_url,
                       const std::string& auth_env = "");

}  // namespace biokg
