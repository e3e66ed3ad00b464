#include "pdagent/inference.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/prompt_assets.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

namespace {

// Compact English stop list; enough to keep frequency tables about content words.
const std::set<std::string>& stop_words() {
    static const std::set<std::string> words = {
        "a",     "about", "after", "again",  "all",   "also",  "am",    "an",    "and",
        "any",   "are",   "as",    "at",     "be",    "been",  "being", "but",   "by",
        "can",   "could", "did",   "do",     "does",  "doing", "don",   "down",  "for",
        "from",  "get",   "got",   "had",    "has",   "have",  "having","he",    "her",
        "here",  "hers",  "him",   "his",    "how",   "i",     "if",    "in",    "into",
        "is",    "it",    "its",   "just",   "like",  "ll",    "m",     "me",    "more",
        "most",  "my",    "myself","no",     "not",   "now",   "of",    "off",   "on",
        "once",  "only",  "or",    "our",    "out",   "over",  "own",   "re",    "s",
        "she",   "so",    "some",  "such",   "t",     "than",  "that",  "the",   "their",
        "them",  "then",  "there", "these",  "they",  "this",  "those", "though","through",
        "to",    "too",   "under", "until",  "up",    "ve",    "very",  "was",   "we",
        "were",  "what",  "when",  "where",  "which", "while", "who",   "why",   "will",
        "with",  "would", "you",   "your",   "yours",
    };
    return words;
}

std::string format_fraction_percent(double fraction) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << fraction * 100.0 << "%";
    return out.str();
}

/// Finds the first allowed value matching the reply text case-insensitively,
/// or nullptr.
const std::string* snap_value(const std::string& reply_value,
                              const std::vector<std::string>& allowed) {
    const std::string needle = to_lower(trim(reply_value));
    for (const std::string& candidate : allowed) {
        if (to_lower(candidate) == needle) return &candidate;
    }
    return nullptr;
}

std::string strip_code_fences(const std::string& raw) {
    const std::string trimmed = trim(raw);
    if (trimmed.rfind("```", 0) != 0) return trimmed;
    std::size_t body_start = trimmed.find('\n');
    if (body_start == std::string::npos) return trimmed;
    ++body_start;
    const std::size_t fence_end = trimmed.rfind("```");
    if (fence_end <= body_start) return trimmed;
    return trim(trimmed.substr(body_start, fence_end - body_start));
}

/// Case-insensitive lookup of an object member.
const nlohmann::json* find_member_ci(const nlohmann::json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    if (obj.contains(key)) return &obj[key];
    const std::string lowered = to_lower(key);
    for (const auto& [name, value] : obj.items()) {
        if (to_lower(name) == lowered) return &value;
    }
    return nullptr;
}

PersonaPrediction parse_prediction_reply(const std::string& reply, const PersonaSchema& schema,
                                         std::string prompt) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(strip_code_fences(reply));
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("inference reply is not valid JSON: ") + ex.what());
    }
    if (!doc.is_object()) {
        throw ParseError("inference reply must be a JSON object keyed by dimension");
    }

    PersonaPrediction prediction;
    prediction.prompt = std::move(prompt);
    for (const Dimension& dim : schema.dimensions) {
        const nlohmann::json* dim_obj = find_member_ci(doc, dim.name);
        for (const Subcategory& sub : dim.subcategories) {
            const nlohmann::json* value_json =
                dim_obj ? find_member_ci(*dim_obj, sub.name) : nullptr;
            const std::string* snapped = nullptr;
            if (value_json != nullptr && value_json->is_string()) {
                snapped = snap_value(value_json->get<std::string>(), sub.values);
            }
            if (snapped != nullptr) {
                prediction.profile.assignments.push_back({dim.name, sub.name, *snapped});
            } else {
                // Keep the run scoreable: default to the first listed value, flagged.
                prediction.profile.assignments.push_back({dim.name, sub.name, sub.values.front()});
                prediction.unresolved.emplace_back(dim.name, sub.name);
            }
        }
    }
    return prediction;
}

PersonaPrediction run_inference(const std::string& prompt, const PersonaSchema& schema,
                                ChatProvider& pd, const ChatRequestParams& params) {
    const std::string reply = pd.complete({{Role::User, prompt}}, params);
    return parse_prediction_reply(reply, schema, prompt);
}

}  // namespace

std::string_view strategy_name(InferenceStrategy strategy) {
    switch (strategy) {
        case InferenceStrategy::Vanilla: return "vanilla";
        case InferenceStrategy::FrequencyAware: return "frequency-aware";
        case InferenceStrategy::PDAgent: return "pd-agent";
    }
    throw ValidationError("invalid InferenceStrategy value");
}

InferenceStrategy parse_strategy(std::string_view name) {
    std::string normalized = to_lower(trim(name));
    for (char& c : normalized) {
        if (c == '_' || c == ' ') c = '-';
    }
    if (normalized == "vanilla") return InferenceStrategy::Vanilla;
    if (normalized == "frequency-aware" || normalized == "freq-aware") {
        return InferenceStrategy::FrequencyAware;
    }
    if (normalized == "pd-agent" || normalized == "pd") return InferenceStrategy::PDAgent;
    throw ConfigError("unknown inference strategy: '" + std::string(name) + "'");
}

std::string GraphSummary::render() const {
    std::ostringstream out;
    out << "Nodes: " << node_count << ", Edges: " << edge_count << "\n";
    out << "Top concept hubs by importance:\n";
    if (top_hubs.empty()) {
        out << "  (none)\n";
    }
    for (std::size_t i = 0; i < top_hubs.size(); ++i) {
        std::ostringstream importance;
        importance << std::fixed << std::setprecision(2) << top_hubs[i].second;
        out << "  " << (i + 1) << ". " << top_hubs[i].first << " (" << importance.str()
            << ")\n";
    }
    out << "Relation type distribution:\n";
    for (const auto& [type, stats] : distribution) {
        out << "  " << relation_type_name(type) << ": " << stats.count << " ("
            << format_fraction_percent(stats.fraction) << ")\n";
    }
    out << "Relation class balance: mereological "
        << format_fraction_percent(mereological_fraction) << " / frame-related "
        << format_fraction_percent(frame_related_fraction) << "\n";
    return out.str();
}

GraphSummary summarize_graph(const SemanticGraph& graph, std::size_t top_k) {
    GraphSummary summary;
    summary.top_hubs = graph.top_hubs(top_k);
    summary.distribution = graph.relation_distribution();
    summary.node_count = graph.nodes().size();
    summary.edge_count = graph.edges().size();
    for (const auto& [type, stats] : summary.distribution) {
        if (relation_class(type) == RelationClass::Mereological) {
            summary.mereological_fraction += stats.fraction;
        } else {
            summary.frame_related_fraction += stats.fraction;
        }
    }
    return summary;
}

nlohmann::json PersonaPrediction::to_json() const {
    nlohmann::json doc = profile.to_json();
    nlohmann::json unresolved_json = nlohmann::json::array();
    for (const auto& [dim, sub] : unresolved) {
        unresolved_json.push_back({{"dimension", dim}, {"subcategory", sub}});
    }
    doc["unresolved"] = unresolved_json;
    doc["warnings"] = warnings;
    return doc;
}

std::vector<std::pair<std::string, int>> token_frequency_table(
    const DialogueTranscript& transcript, std::size_t top_n) {
    if (top_n < 1) {
        throw ValidationError("top_n must be at least 1");
    }
    std::map<std::string, int> counts;
    for (const DialogueTurn& turn : transcript.turns) {
        for (const std::string& token : word_tokens(turn.response)) {
            if (stop_words().count(token) == 0) {
                ++counts[token];
            }
        }
    }
    std::vector<std::pair<std::string, int>> table(counts.begin(), counts.end());
    std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (table.size() > top_n) table.resize(top_n);
    return table;
}

std::string render_schema_vocabulary(const PersonaSchema& schema) {
    std::ostringstream out;
    for (const Dimension& dim : schema.dimensions) {
        for (const Subcategory& sub : dim.subcategories) {
            out << "- " << dim.name << " / " << sub.name << ": ";
            for (std::size_t i = 0; i < sub.values.size(); ++i) {
                if (i > 0) out << " | ";
                out << sub.values[i];
            }
            out << "\n";
        }
    }
    std::string block = out.str();
    if (!block.empty()) block.pop_back();
    return block;
}

PersonaPrediction infer_vanilla(const DialogueTranscript& transcript,
                                const PersonaSchema& schema, ChatProvider& pd,
                                const ChatRequestParams& params) {
    schema.validate();
    const std::string prompt = render_template(
        prompts::kInferVanilla, {{"schema_vocabulary", render_schema_vocabulary(schema)},
                                 {"transcript", trim(transcript.render_history())}});
    return run_inference(prompt, schema, pd, params);
}

PersonaPrediction infer_frequency_aware(const DialogueTranscript& transcript,
                                        const PersonaSchema& schema, ChatProvider& pd,
                                        const ChatRequestParams& params) {
    schema.validate();
    constexpr std::size_t kTopTokens = 30;
    std::ostringstream table;
    const auto frequencies = token_frequency_table(transcript, kTopTokens);
    if (frequencies.empty()) {
        table << "(no content tokens)";
    }
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (i > 0) table << "\n";
        table << frequencies[i].first << ": " << frequencies[i].second;
    }
    const std::string prompt = render_template(
        prompts::kInferFrequency, {{"schema_vocabulary", render_schema_vocabulary(schema)},
                                   {"transcript", trim(transcript.render_history())},
                                   {"frequency_table", table.str()}});
    return run_inference(prompt, schema, pd, params);
}

PersonaPrediction infer_persona_pd(const SemanticGraph& graph, const PersonaSchema& schema,
                                   ChatProvider& pd, const ChatRequestParams& params) {
    schema.validate();
    const GraphSummary summary = summarize_graph(graph);
    const std::string prompt = render_template(
        prompts::kInferGraph, {{"schema_vocabulary", render_schema_vocabulary(schema)},
                               {"graph_summary", trim(summary.render())}});
    PersonaPrediction prediction = run_inference(prompt, schema, pd, params);
    if (graph.edges().empty()) {
        prediction.warnings.push_back(
            "degraded input: semantic graph has no edges; inference ran on an empty summary");
    }
    return prediction;
}

}  // namespace pdagent
