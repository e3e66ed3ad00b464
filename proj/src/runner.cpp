#include "pdagent/runner.hpp"

#include <atomic>
#include <ctime>
#include <mutex>
#include <sstream>
#include <thread>

#include "pdagent/errors.hpp"
#include "pdagent/extraction.hpp"
#include "pdagent/graph.hpp"
#include "pdagent/interview.hpp"
#include "pdagent/json_io.hpp"
#include "pdagent/schema.hpp"
#include "pdagent/sim.hpp"
#include "pdagent/text.hpp"

namespace fs = std::filesystem;

namespace pdagent {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

}  // namespace

std::string_view stage_name(Stage stage) {
    switch (stage) {
        case Stage::Sample: return "sample";
        case Stage::Interview: return "interview";
        case Stage::Extract: return "extract";
        case Stage::Graph: return "graph";
        case Stage::Infer: return "infer";
        case Stage::Evaluate: return "evaluate";
    }
    throw ValidationError("invalid Stage value");
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = {Stage::Sample, Stage::Interview, Stage::Extract,
                                              Stage::Graph,  Stage::Infer,     Stage::Evaluate};
    return stages;
}

ChatRequestParams ProviderSpec::params() const {
    ChatRequestParams out;
    out.model_id = model;
    out.temperature = temperature;
    out.max_tokens = max_tokens;
    out.seed = seed;
    return out;
}

nlohmann::json ProviderSpec::to_json() const {
    nlohmann::json out = {
        {"kind", kind},
        {"model", model},
        {"temperature", temperature},
        {"max_tokens", max_tokens},
    };
    if (!base_url.empty()) out["base_url"] = base_url;
    if (seed) out["seed"] = *seed;
    if (!fixture.empty()) out["fixture"] = fixture.string();
    if (!scenario.empty()) out["scenario"] = scenario.string();
    return out;
}

ProviderSpec ProviderSpec::from_json(const nlohmann::json& doc) {
    ProviderSpec spec;
    spec.kind = doc.value("kind", "sim");
    spec.model = doc.value("model", "");
    spec.base_url = doc.value("base_url", "");
    spec.api_key = doc.value("api_key", "");
    spec.temperature = doc.value("temperature", 0.0);
    spec.max_tokens = doc.value("max_tokens", 1024);
    if (doc.contains("seed")) spec.seed = doc["seed"].get<long>();
    spec.fixture = doc.value("fixture", "");
    spec.scenario = doc.value("scenario", "");
    return spec;
}

nlohmann::json EmbedderSpec::to_json() const {
    nlohmann::json out = {{"kind", kind}};
    if (!model.empty()) out["model"] = model;
    if (!base_url.empty()) out["base_url"] = base_url;
    return out;
}

EmbedderSpec EmbedderSpec::from_json(const nlohmann::json& doc) {
    EmbedderSpec spec;
    spec.kind = doc.value("kind", "deterministic");
    spec.model = doc.value("model", "");
    spec.base_url = doc.value("base_url", "");
    spec.api_key = doc.value("api_key", "");
    return spec;
}

namespace {

void validate_provider_spec(const ProviderSpec& spec, const std::string& role) {
    if (spec.kind == "sim") return;
    if (spec.kind == "scripted") {
        if (spec.fixture.empty()) {
            throw ConfigError("offline (scripted) " + role + " provider needs a fixture path");
        }
        return;
    }
    if (spec.kind == "http") {
        if (spec.base_url.empty() || spec.model.empty()) {
            throw ConfigError("http " + role + " provider needs base_url and model");
        }
        return;
    }
    throw ConfigError("unknown provider kind '" + spec.kind + "' for " + role);
}

}  // namespace

void RunConfig::validate() const {
    if (n_turns < 1) throw ConfigError("n_turns must be positive");
    if (strategies.empty()) throw ConfigError("at least one inference strategy is required");
    if (out_dir.empty()) throw ConfigError("out_dir must be set");
    validate_provider_spec(pd, "pd");
    validate_provider_spec(target, "target");
    if (embedder.kind != "deterministic" && embedder.kind != "http") {
        throw ConfigError("unknown embedder kind '" + embedder.kind + "'");
    }
    if (embedder.kind == "http" && (embedder.base_url.empty() || embedder.model.empty())) {
        throw ConfigError("http embedder needs base_url and model");
    }
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json strategies_json = nlohmann::json::array();
    for (InferenceStrategy strategy : strategies) {
        strategies_json.push_back(std::string(strategy_name(strategy)));
    }
    nlohmann::json out = {
        {"seed", seed},
        {"n_turns", n_turns},
        {"paper_protocol", paper_protocol},
        {"out_dir", out_dir.string()},
        {"strategies", strategies_json},
        {"pd", pd.to_json()},
        {"target", target.to_json()},
        {"embedder", embedder.to_json()},
        {"backbone_id", backbone_id},
        {"target_id", target_id},
    };
    if (schema_path) out["schema"] = schema_path->string();
    if (!topic.empty()) out["topic"] = topic;
    if (record_fixtures_dir) out["record_fixtures_dir"] = record_fixtures_dir->string();
    return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    RunConfig config;
    config.seed = doc.value("seed", 42ull);
    config.n_turns = doc.value("n_turns", 4);
    config.paper_protocol = doc.value("paper_protocol", true);
    config.out_dir = doc.value("out_dir", "run");
    if (doc.contains("schema")) config.schema_path = fs::path(doc["schema"].get<std::string>());
    if (doc.contains("strategies")) {
        config.strategies.clear();
        for (const auto& name : doc["strategies"]) {
            config.strategies.push_back(parse_strategy(name.get<std::string>()));
        }
    }
    if (doc.contains("pd")) config.pd = ProviderSpec::from_json(doc["pd"]);
    if (doc.contains("target")) config.target = ProviderSpec::from_json(doc["target"]);
    if (doc.contains("embedder")) config.embedder = EmbedderSpec::from_json(doc["embedder"]);
    config.topic = doc.value("topic", "");
    if (doc.contains("record_fixtures_dir")) {
        config.record_fixtures_dir = fs::path(doc["record_fixtures_dir"].get<std::string>());
    }
    config.backbone_id = doc.value("backbone_id", "backbone");
    config.target_id = doc.value("target_id", "target");
    config.validate();
    return config;
}

RunConfig RunConfig::from_file(const fs::path& path) {
    return from_json(read_json(path));
}

std::shared_ptr<ChatProvider> make_chat_provider(const ProviderSpec& spec) {
    if (spec.kind == "sim") {
        SimScenario scenario = spec.scenario.empty()
                                   ? default_sim_scenario()
                                   : SimScenario::from_json(read_json(spec.scenario));
        return std::make_shared<SimChatProvider>(std::move(scenario));
    }
    if (spec.kind == "scripted") {
        return std::make_shared<ScriptedChatProvider>(spec.fixture);
    }
    if (spec.kind == "http") {
        std::string key = spec.api_key.empty() ? api_key_from_env() : spec.api_key;
        if (key.empty()) {
            throw ConfigError("http provider needs an api key (config or $PB_API_KEY)");
        }
        return std::make_shared<HttpChatProvider>(spec.base_url, std::move(key));
    }
    throw ConfigError("unknown provider kind '" + spec.kind + "'");
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
    if (spec.kind == "deterministic") {
        return std::make_unique<DeterministicEmbedder>();
    }
    if (spec.kind == "http") {
        std::string key = spec.api_key.empty() ? api_key_from_env() : spec.api_key;
        return std::make_unique<HttpEmbedder>(spec.base_url, std::move(key), spec.model);
    }
    throw ConfigError("unknown embedder kind '" + spec.kind + "'");
}

int exit_code_for_error(const std::exception& error) {
    if (const auto* stage = dynamic_cast<const StageError*>(&error)) {
        return stage->exit_code();
    }
    if (dynamic_cast<const ConfigError*>(&error) != nullptr) return 2;
    if (dynamic_cast<const ProviderError*>(&error) != nullptr) return 3;
    if (dynamic_cast<const ValidationError*>(&error) != nullptr) return 4;
    if (dynamic_cast<const ParseError*>(&error) != nullptr) return 4;
    return 1;
}

namespace {

/// Stage ledger for one run directory; rewritten atomically at every
/// boundary so a crash leaves a consistent view of completed work.
class Manifest {
public:
    explicit Manifest(fs::path run_dir) : path_(run_dir / "manifest.json") {
        if (fs::exists(path_)) {
            doc_ = read_json(path_);
        }
    }

    void init(const RunConfig& config) {
        if (doc_.is_null()) {
            doc_ = {{"config", config.to_json()},
                    {"hidden_prompt_version", hidden_prompt_version()},
                    {"created_at", utc_timestamp()},
                    {"stages", nlohmann::json::object()}};
            save();
        }
    }

    bool stage_done(Stage stage) const {
        const std::string name(stage_name(stage));
        if (!doc_.contains("stages") || !doc_["stages"].contains(name)) return false;
        const auto& entry = doc_["stages"][name];
        if (entry.value("status", "") != "done") return false;
        // A stage only counts as done while its artifacts are still present.
        const fs::path dir = path_.parent_path();
        for (const auto& [artifact, checksum] :
             entry.value("artifacts", nlohmann::json::object()).items()) {
            if (!fs::exists(dir / artifact)) return false;
        }
        return true;
    }

    void mark_running(Stage stage) { set_status(stage, "running", {}, {}); }

    void mark_done(Stage stage, const std::vector<fs::path>& artifacts) {
        nlohmann::json checksums = nlohmann::json::object();
        const fs::path dir = path_.parent_path();
        for (const fs::path& artifact : artifacts) {
            checksums[artifact.string()] = file_content_hash(dir / artifact);
        }
        set_status(stage, "done", checksums, {});
    }

    void mark_failed(Stage stage, const std::string& error) {
        set_status(stage, "failed", {}, error);
    }

private:
    void set_status(Stage stage, const std::string& status, const nlohmann::json& artifacts,
                    const std::string& error) {
        auto& entry = doc_["stages"][std::string(stage_name(stage))];
        entry["status"] = status;
        if (status == "done") {
            entry["artifacts"] = artifacts;
            entry["completed_at"] = utc_timestamp();
            entry.erase("error");
        }
        if (!error.empty()) entry["error"] = error;
        save();
    }

    void save() {
        doc_["updated_at"] = utc_timestamp();
        write_json_atomic(path_, doc_);
    }

    fs::path path_;
    nlohmann::json doc_;
};

class PipelineExecution {
public:
    explicit PipelineExecution(const RunConfig& config)
        : config_(config), run_dir_(config.out_dir), manifest_(run_dir_) {
        config_.validate();
        fs::create_directories(run_dir_);
        manifest_.init(config_);
    }

    void execute_all() {
        for (Stage stage : all_stages()) {
            if (manifest_.stage_done(stage)) continue;
            execute(stage);
        }
        save_fixtures();
    }

    void execute_single(Stage stage) {
        for (Stage prior : all_stages()) {
            if (prior == stage) break;
            if (!manifest_.stage_done(prior)) {
                throw ConfigError("stage '" + std::string(stage_name(stage)) +
                                  "' needs completed stage '" +
                                  std::string(stage_name(prior)) + "' in " + run_dir_.string());
            }
        }
        execute(stage);
        save_fixtures();
    }

    const fs::path& run_dir() const { return run_dir_; }

private:
    void execute(Stage stage) {
        manifest_.mark_running(stage);
        try {
            switch (stage) {
                case Stage::Sample: stage_sample(); break;
                case Stage::Interview: stage_interview(); break;
                case Stage::Extract: stage_extract(); break;
                case Stage::Graph: stage_graph(); break;
                case Stage::Infer: stage_infer(); break;
                case Stage::Evaluate: stage_evaluate(); break;
            }
        } catch (const std::exception& ex) {
            manifest_.mark_failed(stage, ex.what());
            flush_logs();
            throw StageError(std::string(stage_name(stage)), ex.what(), exit_code_for_error(ex));
        }
    }

    // --- lazy inputs -----------------------------------------------------

    const PersonaSchema& schema() {
        if (!schema_) load_truth();
        return *schema_;
    }

    const PersonaProfile& truth() {
        if (!truth_) load_truth();
        return *truth_;
    }

    void load_truth() {
        const auto [schema, profile] = load_persona_document(read_json(run_dir_ / "persona.truth.json"));
        schema_ = schema;
        truth_ = profile;
    }

    const DialogueTranscript& transcript() {
        if (!transcript_) {
            transcript_ = DialogueTranscript::from_json(read_json(run_dir_ / "transcript.json"));
            if (transcript_->failure) {
                throw ValidationError("transcript carries a failure marker: " +
                                      *transcript_->failure);
            }
        }
        return *transcript_;
    }

    const std::vector<BridgingRelation>& relations() {
        if (!relations_) {
            relations_ = relations_from_json(read_json(run_dir_ / "relations.json"));
        }
        return *relations_;
    }

    const SemanticGraph& graph() {
        if (!graph_) {
            graph_ = SemanticGraph::from_json(read_json(run_dir_ / "graph.json"));
        }
        return *graph_;
    }

    ChatProvider& pd_provider() {
        if (!pd_) pd_ = wrap(make_chat_provider(config_.pd), "pd.fixture.json", pd_recorder_);
        return *pd_;
    }

    ChatProvider& target_provider() {
        if (!target_) {
            target_ = wrap(make_chat_provider(config_.target), "target.fixture.json",
                           target_recorder_);
        }
        return *target_;
    }

    std::shared_ptr<ChatProvider> wrap(std::shared_ptr<ChatProvider> inner,
                                       const std::string& fixture_name,
                                       std::shared_ptr<RecordingChatProvider>& recorder_out) {
        if (!config_.record_fixtures_dir) return inner;
        auto recorder = std::make_shared<RecordingChatProvider>(std::move(inner));
        recorder_out = recorder;
        fixture_names_[recorder.get()] = fixture_name;
        return recorder;
    }

    void save_fixtures() {
        if (!config_.record_fixtures_dir) return;
        fs::create_directories(*config_.record_fixtures_dir);
        for (const auto& recorder : {pd_recorder_, target_recorder_}) {
            if (recorder) {
                recorder->save_fixture(*config_.record_fixtures_dir /
                                       fixture_names_.at(recorder.get()));
            }
        }
    }

    void flush_logs() {
        const fs::path log = run_dir_ / "provider_log.jsonl";
        if (pd_) pd_->flush_new_records(log);
        if (target_) target_->flush_new_records(log);
    }

    // --- stages ----------------------------------------------------------

    void stage_sample() {
        PersonaSchema schema =
            config_.schema_path ? PersonaSchema::from_json(read_json(*config_.schema_path))
                                : default_schema();
        schema.validate();
        const PersonaProfile profile = sample_persona(schema, config_.seed);
        write_json_atomic(run_dir_ / "persona.truth.json", persona_document(schema, profile));
        schema_ = std::move(schema);
        truth_ = profile;
        manifest_.mark_done(Stage::Sample, {"persona.truth.json"});
    }

    void stage_interview() {
        const std::string hidden_prompt = render_hidden_prompt(truth());
        InterviewOptions options;
        options.pd_params = config_.pd.params();
        options.target_params = config_.target.params();
        options.topic = config_.topic.empty() ? pick_topic(config_.seed) : config_.topic;
        options.paper_protocol = config_.paper_protocol;
        options.persist_dir = run_dir_;
        transcript_ = run_interview(pd_provider(), target_provider(), hidden_prompt,
                                    config_.n_turns, options);
        flush_logs();
        manifest_.mark_done(Stage::Interview, {"transcript.json"});
    }

    void stage_extract() {
        const ExtractionReport report =
            extract_bridging_relations(transcript(), pd_provider(), config_.pd.params());
        write_json_atomic(run_dir_ / "relations.json", relations_to_json(report.accepted));
        write_json_atomic(run_dir_ / "extraction_report.json", report.to_json());
        relations_ = report.accepted;
        flush_logs();
        manifest_.mark_done(Stage::Extract, {"relations.json", "extraction_report.json"});
    }

    void stage_graph() {
        const SemanticGraph built = SemanticGraph::build(relations());
        write_text_atomic(run_dir_ / "graph.json", built.export_json());
        write_text_atomic(run_dir_ / "graph.dot", built.export_dot());
        graph_ = built;
        manifest_.mark_done(Stage::Graph, {"graph.json", "graph.dot"});
    }

    void stage_infer() {
        std::vector<fs::path> artifacts;
        for (InferenceStrategy strategy : config_.strategies) {
            PersonaPrediction prediction;
            switch (strategy) {
                case InferenceStrategy::Vanilla:
                    prediction =
                        infer_vanilla(transcript(), schema(), pd_provider(), config_.pd.params());
                    break;
                case InferenceStrategy::FrequencyAware:
                    prediction = infer_frequency_aware(transcript(), schema(), pd_provider(),
                                                       config_.pd.params());
                    break;
                case InferenceStrategy::PDAgent:
                    prediction =
                        infer_persona_pd(graph(), schema(), pd_provider(), config_.pd.params());
                    break;
            }
            const std::string name(strategy_name(strategy));
            write_json_atomic(run_dir_ / ("prediction." + name + ".json"), prediction.to_json());
            write_text_atomic(run_dir_ / ("prompt." + name + ".txt"), prediction.prompt);
            artifacts.emplace_back("prediction." + name + ".json");
            artifacts.emplace_back("prompt." + name + ".txt");
        }
        flush_logs();
        manifest_.mark_done(Stage::Infer, artifacts);
    }

    void stage_evaluate() {
        const std::unique_ptr<Embedder> embedder = make_embedder(config_.embedder);
        nlohmann::json strategies_json = nlohmann::json::object();
        for (InferenceStrategy strategy : config_.strategies) {
            const std::string name(strategy_name(strategy));
            const nlohmann::json prediction_doc =
                read_json(run_dir_ / ("prediction." + name + ".json"));
            const PersonaProfile prediction =
                align_profile_to_schema(PersonaProfile::from_json(prediction_doc), schema());
            const int unresolved = static_cast<int>(
                prediction_doc.value("unresolved", nlohmann::json::array()).size());
            const EvaluationReport report =
                score_prediction(prediction, truth(), *embedder, unresolved);
            strategies_json[name] = report.to_json();
        }
        write_json_atomic(run_dir_ / "report.json", {{"strategies", strategies_json}});
        manifest_.mark_done(Stage::Evaluate, {"report.json"});
    }

    RunConfig config_;
    fs::path run_dir_;
    Manifest manifest_;

    std::optional<PersonaSchema> schema_;
    std::optional<PersonaProfile> truth_;
    std::optional<DialogueTranscript> transcript_;
    std::optional<std::vector<BridgingRelation>> relations_;
    std::optional<SemanticGraph> graph_;

    std::shared_ptr<ChatProvider> pd_;
    std::shared_ptr<ChatProvider> target_;
    std::shared_ptr<RecordingChatProvider> pd_recorder_;
    std::shared_ptr<RecordingChatProvider> target_recorder_;
    std::map<const RecordingChatProvider*, std::string> fixture_names_;
};

}  // namespace

fs::path run_pipeline(const RunConfig& config) {
    PipelineExecution execution(config);
    execution.execute_all();
    return execution.run_dir();
}

void run_single_stage(const RunConfig& config, Stage stage) {
    PipelineExecution execution(config);
    execution.execute_single(stage);
}

void ExperimentConfig::validate() const {
    if (backbones.empty()) throw ConfigError("experiment needs at least one backbone");
    if (targets.empty()) throw ConfigError("experiment needs at least one target");
    if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
    if (runs_per_cell < 1) throw ConfigError("runs_per_cell must be positive");
    if (concurrency < 1) throw ConfigError("concurrency must be positive");
    for (const ExperimentBackbone& backbone : backbones) {
        if (backbone.id.empty()) throw ConfigError("backbone id must not be empty");
        validate_provider_spec(backbone.spec, "backbone " + backbone.id);
    }
    for (const ExperimentTarget& target : targets) {
        if (target.id.empty()) throw ConfigError("target id must not be empty");
        validate_provider_spec(target.spec, "target " + target.id);
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
    ExperimentConfig config;
    config.seed = doc.value("seed", 1ull);
    config.n_turns = doc.value("n_turns", 4);
    config.paper_protocol = doc.value("paper_protocol", true);
    config.runs_per_cell = doc.value("runs_per_cell", 5);
    config.concurrency = doc.value("concurrency", 4);
    config.stability_threshold = doc.value("stability_threshold", 0.03);
    config.out_dir = doc.value("out_dir", "experiment");
    if (doc.contains("strategies")) {
        config.strategies.clear();
        for (const auto& name : doc["strategies"]) {
            config.strategies.push_back(parse_strategy(name.get<std::string>()));
        }
    }
    for (const auto& backbone_json : doc.value("backbones", nlohmann::json::array())) {
        config.backbones.push_back({backbone_json.value("id", ""),
                                    ProviderSpec::from_json(backbone_json)});
    }
    for (const auto& target_json : doc.value("targets", nlohmann::json::array())) {
        config.targets.push_back({target_json.value("id", ""), target_json.value("group", ""),
                                  ProviderSpec::from_json(target_json)});
    }
    if (doc.contains("embedder")) config.embedder = EmbedderSpec::from_json(doc["embedder"]);
    if (doc.contains("schema")) config.schema_path = fs::path(doc["schema"].get<std::string>());
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
    return from_json(read_json(path));
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json stability_json = nlohmann::json::array();
    for (const StabilityRow& row : stability_rows) {
        stability_json.push_back({{"backbone", row.backbone},
                                  {"target", row.target},
                                  {"strategy", row.strategy},
                                  {"mean", row.result.mean},
                                  {"stddev", row.result.stddev},
                                  {"threshold", row.result.threshold},
                                  {"passed", row.result.passed}});
    }
    nlohmann::json out = matrix.to_json();
    out["stability"] = stability_json;
    return out;
}

namespace {

std::uint64_t derive_seed(std::uint64_t base, const std::string& backbone,
                          const std::string& target, int run_index) {
    return fnv1a64(std::to_string(base) + "|" + backbone + "|" + target + "|" +
                   std::to_string(run_index));
}

struct CellJob {
    ExperimentBackbone backbone;
    ExperimentTarget target;
    int run_index = 0;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);

    std::vector<CellJob> jobs;
    for (const ExperimentBackbone& backbone : config.backbones) {
        for (const ExperimentTarget& target : config.targets) {
            for (int run = 1; run <= config.runs_per_cell; ++run) {
                jobs.push_back({backbone, target, run});
            }
        }
    }

    std::vector<std::vector<RunResult>> per_job(jobs.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= jobs.size()) return;
            const CellJob& job = jobs[index];

            RunConfig run_config;
            run_config.seed =
                derive_seed(config.seed, job.backbone.id, job.target.id, job.run_index);
            run_config.n_turns = config.n_turns;
            run_config.paper_protocol = config.paper_protocol;
            run_config.out_dir = config.out_dir / "cells" /
                                 (job.backbone.id + "__" + job.target.id + "__run" +
                                  std::to_string(job.run_index));
            run_config.schema_path = config.schema_path;
            run_config.strategies = config.strategies;
            run_config.pd = job.backbone.spec;
            run_config.target = job.target.spec;
            run_config.embedder = config.embedder;
            run_config.backbone_id = job.backbone.id;
            run_config.target_id = job.target.id;

            std::vector<RunResult>& results = per_job[index];
            try {
                const fs::path run_dir = run_pipeline(run_config);
                const nlohmann::json report = read_json(run_dir / "report.json");
                for (InferenceStrategy strategy : config.strategies) {
                    const std::string name(strategy_name(strategy));
                    RunResult result;
                    result.backbone = job.backbone.id;
                    result.target = job.target.id;
                    result.strategy = name;
                    result.run_index = job.run_index;
                    result.overall = report.at("strategies").at(name).at("overall").get<double>();
                    results.push_back(std::move(result));
                }
            } catch (const std::exception& ex) {
                for (InferenceStrategy strategy : config.strategies) {
                    RunResult result;
                    result.backbone = job.backbone.id;
                    result.target = job.target.id;
                    result.strategy = std::string(strategy_name(strategy));
                    result.run_index = job.run_index;
                    result.failed = true;
                    result.error = ex.what();
                    results.push_back(std::move(result));
                }
            }
        }
    };

    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), jobs.size());
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (std::size_t i = 0; i < worker_count; ++i) {
        threads.emplace_back(worker);
    }
    for (std::thread& thread : threads) {
        thread.join();
    }

    std::vector<RunResult> all_results;
    for (const auto& results : per_job) {
        all_results.insert(all_results.end(), results.begin(), results.end());
    }

    ExperimentReport report;
    report.matrix = aggregate_matrix(all_results);
    for (const MatrixCell& cell : report.matrix.cells) {
        if (static_cast<int>(cell.run_scores.size()) == config.runs_per_cell) {
            report.stability_rows.push_back(
                {cell.backbone, cell.target, cell.strategy,
                 stability(cell.run_scores, config.runs_per_cell, config.stability_threshold)});
        } else {
            report.matrix.warnings.push_back(
                "stability skipped (incomplete runs): " + cell.backbone + " / " + cell.target +
                " / " + cell.strategy);
        }
    }

    std::vector<std::pair<std::string, std::string>> groups;
    for (const ExperimentTarget& target : config.targets) {
        if (!target.group.empty()) groups.emplace_back(target.id, target.group);
    }

    write_json_atomic(config.out_dir / "report.json", report.to_json());

    std::ostringstream markdown;
    markdown << "# Persona discovery experiment\n\n";
    markdown << report.matrix.render_markdown(groups) << "\n";
    if (!report.stability_rows.empty()) {
        markdown << "## Stability (" << config.runs_per_cell << " runs per cell)\n\n";
        markdown << "| Backbone | Target | Method | Mean | Std | Pass |\n";
        markdown << "|---|---|---|---|---|---|\n";
        for (const StabilityRow& row : report.stability_rows) {
            std::ostringstream mean, stddev;
            mean.precision(4);
            mean << std::fixed << row.result.mean;
            stddev.precision(4);
            stddev << std::fixed << row.result.stddev;
            markdown << "| " << row.backbone << " | " << row.target << " | " << row.strategy
                     << " | " << mean.str() << " | " << stddev.str() << " | "
                     << (row.result.passed ? "yes" : "no") << " |\n";
        }
        markdown << "\n";
    }
    if (!report.matrix.failures.empty()) {
        markdown << "## Failed runs\n\n";
        for (const RunResult& failure : report.matrix.failures) {
            markdown << "- " << failure.backbone << " / " << failure.target << " / "
                     << failure.strategy << " run " << failure.run_index << ": "
                     << failure.error << "\n";
        }
    }
    write_text_atomic(config.out_dir / "report.md", markdown.str());

    return report;
}

}  // namespace pdagent
