#include "pdagent/graph.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/json_io.hpp"

namespace pdagent {

SemanticGraph SemanticGraph::build(const std::vector<BridgingRelation>& relations) {
    SemanticGraph graph;

    // Repeated identical assertions carry no extra weight: dedup on the full
    // (source, target, type) triple, keeping the first occurrence's provenance.
    std::set<std::tuple<std::string, std::string, RelationType>> seen;
    for (std::size_t i = 0; i < relations.size(); ++i) {
        const BridgingRelation& relation = relations[i];
        if (relation.anchor == relation.anaphor) {
            throw ValidationError("self-loop relation reached graph construction: '" +
                                  relation.anchor + "'");
        }
        if (seen.insert({relation.anchor, relation.anaphor, relation.relation_type}).second) {
            graph.edges_.push_back(
                {relation.anchor, relation.anaphor, relation.relation_type, i});
        }
    }
    std::sort(graph.edges_.begin(), graph.edges_.end(),
              [](const GraphEdge& a, const GraphEdge& b) {
                  return std::tie(a.source, a.target, a.type) <
                         std::tie(b.source, b.target, b.type);
              });

    std::map<std::string, std::size_t> degree;
    for (const GraphEdge& edge : graph.edges_) {
        ++degree[edge.source];
        ++degree[edge.target];
    }
    std::size_t max_degree = 0;
    for (const auto& [label, deg] : degree) {
        max_degree = std::max(max_degree, deg);
    }
    for (const auto& [label, deg] : degree) {
        const double importance =
            max_degree == 0 ? 0.0
                            : static_cast<double>(deg) / static_cast<double>(max_degree);
        graph.nodes_.push_back({label, importance});
    }
    // degree map is label-sorted already, so nodes_ is too.
    return graph;
}

bool SemanticGraph::has_node(const std::string& label) const {
    const auto it = std::lower_bound(
        nodes_.begin(), nodes_.end(), label,
        [](const GraphNode& node, const std::string& value) { return node.label < value; });
    return it != nodes_.end() && it->label == label;
}

double SemanticGraph::importance(const std::string& label) const {
    const auto it = std::lower_bound(
        nodes_.begin(), nodes_.end(), label,
        [](const GraphNode& node, const std::string& value) { return node.label < value; });
    if (it == nodes_.end() || it->label != label) {
        throw ValidationError("unknown node: '" + label + "'");
    }
    return it->importance;
}

std::map<RelationType, RelationTypeStats> SemanticGraph::relation_distribution() const {
    std::map<RelationType, RelationTypeStats> out;
    for (RelationType type : kAllRelationTypes) {
        out[type] = RelationTypeStats{};
    }
    for (const GraphEdge& edge : edges_) {
        ++out[edge.type].count;
    }
    if (!edges_.empty()) {
        const double total = static_cast<double>(edges_.size());
        for (auto& [type, stats] : out) {
            stats.fraction = static_cast<double>(stats.count) / total;
        }
    }
    return out;
}

std::vector<std::pair<std::string, double>> SemanticGraph::top_hubs(std::size_t k) const {
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(nodes_.size());
    for (const GraphNode& node : nodes_) {
        ranked.emplace_back(node.label, node.importance);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

nlohmann::json SemanticGraph::to_json() const {
    nlohmann::json nodes_json = nlohmann::json::array();
    for (const GraphNode& node : nodes_) {
        nodes_json.push_back({{"label", node.label}, {"importance", node.importance}});
    }
    nlohmann::json edges_json = nlohmann::json::array();
    for (const GraphEdge& edge : edges_) {
        edges_json.push_back({{"source", edge.source},
                              {"target", edge.target},
                              {"type", std::string(relation_type_name(edge.type))}});
    }
    return {{"nodes", nodes_json}, {"edges", edges_json}};
}

std::string SemanticGraph::export_json() const {
    return canonical_dump(to_json());
}

SemanticGraph SemanticGraph::from_json(const nlohmann::json& doc) {
    SemanticGraph graph;
    for (const auto& node_json : doc.value("nodes", nlohmann::json::array())) {
        graph.nodes_.push_back({node_json.at("label").get<std::string>(),
                                node_json.at("importance").get<double>()});
    }
    for (const auto& edge_json : doc.value("edges", nlohmann::json::array())) {
        graph.edges_.push_back({edge_json.at("source").get<std::string>(),
                                edge_json.at("target").get<std::string>(),
                                parse_relation_type(edge_json.at("type").get<std::string>()),
                                0});
    }
    std::sort(graph.nodes_.begin(), graph.nodes_.end(),
              [](const GraphNode& a, const GraphNode& b) { return a.label < b.label; });
    std::sort(graph.edges_.begin(), graph.edges_.end(),
              [](const GraphEdge& a, const GraphEdge& b) {
                  return std::tie(a.source, a.target, a.type) <
                         std::tie(b.source, b.target, b.type);
              });
    for (const GraphEdge& edge : graph.edges_) {
        if (!graph.has_node(edge.source) || !graph.has_node(edge.target)) {
            throw ValidationError("graph document edge endpoint missing from nodes");
        }
    }
    return graph;
}

std::string SemanticGraph::export_dot() const {
    std::ostringstream out;
    out << "digraph semantic_graph {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=ellipse, style=filled, fillcolor=\"#e8f0fe\"];\n";
    for (const GraphNode& node : nodes_) {
        std::ostringstream importance;
        importance << std::fixed << std::setprecision(2) << node.importance;
        // Scale node emphasis by importance.
        const double width = 1.0 + node.importance;
        out << "  \"" << node.label << "\" [label=\"" << node.label << "\\n("
            << importance.str() << ")\", width=" << std::fixed << std::setprecision(2)
            << width << "];\n";
    }
    for (const GraphEdge& edge : edges_) {
        out << "  \"" << edge.source << "\" -> \"" << edge.target << "\" [label=\""
            << relation_type_name(edge.type) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace pdagent
