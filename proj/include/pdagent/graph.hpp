#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdagent/extraction.hpp"
#include "pdagent/taxonomy.hpp"

namespace pdagent {

struct GraphNode {
    std::string label;
    double importance = 0.0;  // in [0, 1]; max over nodes is exactly 1 when edges exist
};

struct GraphEdge {
    std::string source;
    std::string target;
    RelationType type;
    std::size_t provenance = 0;  // index into the relation list the edge came from
};

struct RelationTypeStats {
    std::size_t count = 0;
    double fraction = 0.0;
};

/// Directed labeled semantic graph over canonical concepts. Immutable after
/// construction; nodes and edges are kept sorted so exports are canonical.
class SemanticGraph {
public:
    /// Nodes are the union of anchors and anaphors; one edge per distinct
    /// (source, target, type) triple, anchor -> anaphor. Importance is the
    /// normalized total degree (in + out) per node; 0 everywhere when the
    /// graph has no edges.
    static SemanticGraph build(const std::vector<BridgingRelation>& relations);

    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    bool has_node(const std::string& label) const;

    /// Throws ValidationError for labels not in the graph.
    double importance(const std::string& label) const;

    /// Edge counts and fractions per relation type; fractions sum to 1 when
    /// edges exist, all zero otherwise. Every type is present in the map.
    std::map<RelationType, RelationTypeStats> relation_distribution() const;

    /// Top-k nodes by importance, ties broken lexicographically by label.
    std::vector<std::pair<std::string, double>> top_hubs(std::size_t k) const;

    /// Byte-deterministic canonical JSON: sorted nodes and edges.
    std::string export_json() const;
    nlohmann::json to_json() const;
    static SemanticGraph from_json(const nlohmann::json& doc);

    /// Graphviz rendering; one `->` line per edge, nodes annotated with their
    /// importance.
    std::string export_dot() const;

private:
    std::vector<GraphNode> nodes_;  // sorted by label
    std::vector<GraphEdge> edges_;  // sorted by (source, target, type)
};

}  // namespace pdagent
