#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdagent/embedding.hpp"
#include "pdagent/evaluation.hpp"
#include "pdagent/inference.hpp"
#include "pdagent/providers.hpp"

namespace pdagent {

enum class Stage { Sample, Interview, Extract, Graph, Infer, Evaluate };

std::string_view stage_name(Stage stage);
const std::vector<Stage>& all_stages();

struct ProviderSpec {
    std::string kind = "sim";  // sim | scripted | http
    std::string model;
    std::string base_url;
    std::string api_key;  // http only; falls back to $PB_API_KEY
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<long> seed;
    std::filesystem::path fixture;   // scripted only
    std::filesystem::path scenario;  // sim only; empty -> built-in scenario

    ChatRequestParams params() const;
    nlohmann::json to_json() const;
    static ProviderSpec from_json(const nlohmann::json& doc);
};

struct EmbedderSpec {
    std::string kind = "deterministic";  // deterministic | http
    std::string model;
    std::string base_url;
    std::string api_key;

    nlohmann::json to_json() const;
    static EmbedderSpec from_json(const nlohmann::json& doc);
};

struct RunConfig {
    std::uint64_t seed = 42;
    int n_turns = 4;
    bool paper_protocol = true;
    std::filesystem::path out_dir = "run";
    std::optional<std::filesystem::path> schema_path;
    std::vector<InferenceStrategy> strategies = {InferenceStrategy::Vanilla,
                                                 InferenceStrategy::FrequencyAware,
                                                 InferenceStrategy::PDAgent};
    ProviderSpec pd;
    ProviderSpec target;
    EmbedderSpec embedder;
    std::string topic;  // empty -> seed-picked default topic
    std::optional<std::filesystem::path> record_fixtures_dir;
    std::string backbone_id = "backbone";
    std::string target_id = "target";

    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig from_file(const std::filesystem::path& path);
};

std::shared_ptr<ChatProvider> make_chat_provider(const ProviderSpec& spec);
std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec);

/// Executes sample -> interview -> extract -> graph -> infer -> evaluate,
/// persisting every artifact under config.out_dir and resuming from the last
/// completed stage recorded in manifest.json. Stage failures persist partial
/// state and surface as StageError.
std::filesystem::path run_pipeline(const RunConfig& config);

/// Executes exactly one stage; its predecessors must already be done in the
/// run directory's manifest.
void run_single_stage(const RunConfig& config, Stage stage);

struct ExperimentTarget {
    std::string id;
    std::string group;  // optional, e.g. "small" / "large"
    ProviderSpec spec;
};

struct ExperimentBackbone {
    std::string id;
    ProviderSpec spec;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int n_turns = 4;
    bool paper_protocol = true;
    int runs_per_cell = 5;
    int concurrency = 4;
    double stability_threshold = 0.03;
    std::filesystem::path out_dir = "experiment";
    std::vector<InferenceStrategy> strategies = {InferenceStrategy::Vanilla,
                                                 InferenceStrategy::FrequencyAware,
                                                 InferenceStrategy::PDAgent};
    std::vector<ExperimentBackbone> backbones;
    std::vector<ExperimentTarget> targets;
    EmbedderSpec embedder;
    std::optional<std::filesystem::path> schema_path;

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct StabilityRow {
    std::string backbone;
    std::string target;
    std::string strategy;
    StabilityResult result;
};

struct ExperimentReport {
    MatrixReport matrix;
    std::vector<StabilityRow> stability_rows;

    nlohmann::json to_json() const;
};

/// Runs runs_per_cell pipelines for every (backbone, target) pair, scoring
/// every configured strategy, with at most config.concurrency cells in
/// flight. Individual cell failures are recorded and the matrix completes
/// with gaps flagged. Writes report.json and report.md under out_dir.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Exit code classification used by the CLI: 2 config, 3 provider,
/// 4 validation/parse, 1 anything else.
int exit_code_for_error(const std::exception& error);

}  // namespace pdagent
