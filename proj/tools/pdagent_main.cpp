#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdagent/errors.hpp"
#include "pdagent/evaluation.hpp"
#include "pdagent/graph.hpp"
#include "pdagent/json_io.hpp"
#include "pdagent/runner.hpp"
#include "pdagent/schema.hpp"

namespace fs = std::filesystem;
using namespace pdagent;

namespace {

RunConfig load_config(const std::string& path, const std::string& record_fixtures) {
    RunConfig config = RunConfig::from_file(path);
    if (!record_fixtures.empty()) {
        config.record_fixtures_dir = fs::path(record_fixtures);
    }
    return config;
}

void print_run_summary(const fs::path& run_dir) {
    const fs::path report_path = run_dir / "report.json";
    if (!fs::exists(report_path)) return;
    const nlohmann::json report = read_json(report_path);
    std::cout << "run directory: " << run_dir.string() << "\n";
    for (const auto& [strategy, body] : report.at("strategies").items()) {
        std::cout << "  " << strategy << ": overall similarity "
                  << body.at("overall").get<double>() << "\n";
    }
}

int dispatch(CLI::App& app) {
    // --- sample ---
    auto* sample_cmd = app.get_subcommand("sample");
    if (sample_cmd->parsed()) {
        const std::string schema_path = sample_cmd->get_option("--schema")->as<std::string>();
        const std::uint64_t seed = sample_cmd->get_option("--seed")->as<std::uint64_t>();
        const std::string out = sample_cmd->get_option("--out")->as<std::string>();

        PersonaSchema schema = schema_path.empty()
                                   ? default_schema()
                                   : PersonaSchema::from_json(read_json(schema_path));
        const PersonaProfile profile = sample_persona(schema, seed);
        const nlohmann::json doc = persona_document(schema, profile);
        if (!out.empty()) {
            write_json_atomic(out, doc);
            std::cout << "wrote " << out << "\n";
        }
        for (const SlotAssignment& a : profile.assignments) {
            std::cout << a.dimension << " / " << a.subcategory << ": " << a.value << "\n";
        }
        return 0;
    }

    // --- stage subcommands ---
    const std::pair<const char*, Stage> stage_commands[] = {
        {"interview", Stage::Interview}, {"extract", Stage::Extract},
        {"graph", Stage::Graph},         {"infer", Stage::Infer},
        {"eval", Stage::Evaluate},
    };
    for (const auto& [name, stage] : stage_commands) {
        auto* cmd = app.get_subcommand(name);
        if (!cmd->parsed()) continue;
        const RunConfig config =
            load_config(cmd->get_option("--config")->as<std::string>(),
                        cmd->get_option("--record-fixtures")->as<std::string>());
        run_single_stage(config, stage);
        std::cout << "stage " << stage_name(stage) << " done: " << config.out_dir.string()
                  << "\n";
        if (stage == Stage::Evaluate) print_run_summary(config.out_dir);
        return 0;
    }

    // --- run ---
    auto* run_cmd = app.get_subcommand("run");
    if (run_cmd->parsed()) {
        const RunConfig config =
            load_config(run_cmd->get_option("--config")->as<std::string>(),
                        run_cmd->get_option("--record-fixtures")->as<std::string>());
        const fs::path run_dir = run_pipeline(config);
        print_run_summary(run_dir);
        return 0;
    }

    // --- experiment ---
    auto* experiment_cmd = app.get_subcommand("experiment");
    if (experiment_cmd->parsed()) {
        const ExperimentConfig config =
            ExperimentConfig::from_file(experiment_cmd->get_option("--config")->as<std::string>());
        const ExperimentReport report = run_experiment(config);
        std::cout << "experiment report: " << (config.out_dir / "report.md").string() << "\n";
        std::cout << report.matrix.render_markdown();
        return 0;
    }

    // --- export-dot ---
    auto* dot_cmd = app.get_subcommand("export-dot");
    if (dot_cmd->parsed()) {
        const std::string graph_path = dot_cmd->get_option("--graph")->as<std::string>();
        const std::string out = dot_cmd->get_option("--out")->as<std::string>();
        const SemanticGraph graph = SemanticGraph::from_json(read_json(graph_path));
        if (out.empty()) {
            std::cout << graph.export_dot();
        } else {
            write_text_atomic(out, graph.export_dot());
            std::cout << "wrote " << out << "\n";
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persona discovery through bridging-inference graphs"};
    app.require_subcommand(1);

    auto* sample_cmd = app.add_subcommand("sample", "Sample a hidden persona from the schema");
    sample_cmd->add_option("--schema", "Schema JSON (default: built-in)");
    sample_cmd->add_option("--seed", "Sampling seed")->default_val("42");
    sample_cmd->add_option("--out", "Output .persona.json path")->default_val("");

    for (const char* name : {"interview", "extract", "graph", "infer", "eval"}) {
        auto* cmd = app.add_subcommand(
            name, std::string("Run only the ") + name + " stage of a run directory");
        cmd->add_option("--config", "Run config JSON")->required();
        cmd->add_option("--record-fixtures", "Capture provider replies into this fixture dir")
            ->default_val("");
    }

    auto* run_cmd = app.add_subcommand("run", "Run the full discovery pipeline");
    run_cmd->add_option("--config", "Run config JSON")->required();
    run_cmd->add_option("--record-fixtures", "Capture provider replies into this fixture dir")
        ->default_val("");

    auto* experiment_cmd =
        app.add_subcommand("experiment", "Run a backbone x target x strategy matrix");
    experiment_cmd->add_option("--config", "Experiment config JSON")->required();

    auto* dot_cmd = app.add_subcommand("export-dot", "Render a graph.json as Graphviz dot");
    dot_cmd->add_option("--graph", "graph.json path")->required();
    dot_cmd->add_option("--out", "Output .dot path (default: stdout)")->default_val("");

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(app);
    } catch (const StageError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return ex.exit_code();
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_code_for_error(ex);
    }
}
