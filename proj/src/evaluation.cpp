#include "pdagent/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "pdagent/errors.hpp"

namespace pdagent {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine_similarity: dimension mismatch (" +
                              std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                              ")");
    }
    if (a.empty()) {
        throw ValidationError("cosine_similarity: empty vectors");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw ValidationError("cosine_similarity: undefined for zero vector");
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json dims = nlohmann::json::array();
    for (const DimensionScore& score : dimension_scores) {
        dims.push_back({{"dimension", score.dimension}, {"cosine", score.cosine}});
    }
    nlohmann::json mismatch_json = nlohmann::json::array();
    for (const SlotMismatch& m : mismatches) {
        mismatch_json.push_back({{"dimension", m.dimension},
                                 {"subcategory", m.subcategory},
                                 {"mismatch", m.mismatch}});
    }
    return {
        {"dimension_scores", dims},
        {"overall", overall},
        {"unresolved_slots", unresolved_slots},
        {"mismatches", mismatch_json},
    };
}

EvaluationReport score_prediction(const PersonaProfile& prediction, const PersonaProfile& truth,
                                  Embedder& embedder, int unresolved_slots) {
    if (prediction.assignments.size() != truth.assignments.size()) {
        throw ValidationError("profiles do not share a schema: slot counts differ");
    }
    // Dimension texts are the subcategory values concatenated in schema order.
    std::vector<std::string> dimension_order;
    std::map<std::string, std::string> pred_text, truth_text;
    for (std::size_t i = 0; i < truth.assignments.size(); ++i) {
        const SlotAssignment& t = truth.assignments[i];
        const SlotAssignment& p = prediction.assignments[i];
        if (t.dimension != p.dimension || t.subcategory != p.subcategory) {
            throw ValidationError("profiles do not share a schema: slot " + t.dimension + "/" +
                                  t.subcategory + " vs " + p.dimension + "/" + p.subcategory);
        }
        if (truth_text.find(t.dimension) == truth_text.end()) {
            dimension_order.push_back(t.dimension);
        } else {
            truth_text[t.dimension] += " ";
            pred_text[t.dimension] += " ";
        }
        truth_text[t.dimension] += t.value;
        pred_text[t.dimension] += p.value;
    }

    std::vector<std::string> texts;
    for (const std::string& dim : dimension_order) {
        texts.push_back(pred_text[dim]);
        texts.push_back(truth_text[dim]);
    }
    const auto vectors = embedder.embed(texts);

    EvaluationReport report;
    report.unresolved_slots = unresolved_slots;
    double sum = 0.0;
    for (std::size_t i = 0; i < dimension_order.size(); ++i) {
        const double cosine = cosine_similarity(vectors[2 * i], vectors[2 * i + 1]);
        report.dimension_scores.push_back({dimension_order[i], cosine});
        sum += cosine;
    }
    report.overall = sum / static_cast<double>(dimension_order.size());
    for (std::size_t i = 0; i < truth.assignments.size(); ++i) {
        const SlotAssignment& t = truth.assignments[i];
        report.mismatches.push_back(
            {t.dimension, t.subcategory, prediction.assignments[i].value != t.value});
    }
    return report;
}

namespace {

std::pair<double, double> mean_and_sample_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    if (values.size() < 2) return {mean, 0.0};
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / (n - 1.0))};
}

}  // namespace

nlohmann::json MatrixReport::to_json() const {
    nlohmann::json cells_json = nlohmann::json::array();
    for (const MatrixCell& cell : cells) {
        cells_json.push_back({{"backbone", cell.backbone},
                              {"target", cell.target},
                              {"strategy", cell.strategy},
                              {"run_scores", cell.run_scores},
                              {"mean", cell.mean},
                              {"stddev", cell.stddev}});
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [backbone, strategy, avg] : row_averages) {
        rows.push_back({{"backbone", backbone}, {"strategy", strategy}, {"average", avg}});
    }
    nlohmann::json failures_json = nlohmann::json::array();
    for (const RunResult& failure : failures) {
        failures_json.push_back({{"backbone", failure.backbone},
                                 {"target", failure.target},
                                 {"strategy", failure.strategy},
                                 {"run_index", failure.run_index},
                                 {"error", failure.error}});
    }
    return {{"cells", cells_json},
            {"row_averages", rows},
            {"failures", failures_json},
            {"warnings", warnings}};
}

MatrixReport aggregate_matrix(const std::vector<RunResult>& results) {
    MatrixReport report;

    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
    std::set<std::tuple<std::string, std::string, std::string>> failed_only;
    for (const RunResult& result : results) {
        if (result.failed) {
            report.failures.push_back(result);
            failed_only.insert({result.backbone, result.strategy, result.target});
            continue;
        }
        groups[{result.backbone, result.strategy, result.target}].push_back(result.overall);
    }
    for (const auto& key : failed_only) {
        if (groups.find(key) == groups.end()) {
            report.warnings.push_back("cell omitted, all runs failed: " + std::get<0>(key) +
                                      " / " + std::get<2>(key) + " / " + std::get<1>(key));
        }
    }

    std::map<std::pair<std::string, std::string>, std::vector<double>> row_means;
    for (auto& [key, scores] : groups) {
        std::sort(scores.begin(), scores.end());
        MatrixCell cell;
        cell.backbone = std::get<0>(key);
        cell.strategy = std::get<1>(key);
        cell.target = std::get<2>(key);
        cell.run_scores = scores;
        std::tie(cell.mean, cell.stddev) = mean_and_sample_std(scores);
        row_means[{cell.backbone, cell.strategy}].push_back(cell.mean);
        report.cells.push_back(std::move(cell));
    }
    for (const auto& [key, means] : row_means) {
        const auto [mean, _] = mean_and_sample_std(means);
        report.row_averages.emplace_back(key.first, key.second, mean);
    }
    return report;
}

double round_display(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::copysign(std::floor(std::abs(value) * scale + 0.5), value) / scale;
}

namespace {

std::string format_display(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << round_display(value, 2);
    return out.str();
}

std::string display_strategy(const std::string& strategy) {
    if (strategy == "vanilla") return "Vanilla";
    if (strategy == "frequency-aware") return "+ Freq-Aware";
    if (strategy == "pd-agent") return "+ PD-Agent";
    return strategy;
}

}  // namespace

std::string MatrixReport::render_markdown(
    const std::vector<std::pair<std::string, std::string>>& target_groups) const {
    // Column order: grouped targets first (in group order), then ungrouped.
    std::vector<std::string> targets;
    std::map<std::string, std::string> group_of;
    for (const auto& [target, group] : target_groups) {
        group_of[target] = group;
    }
    auto add_target = [&targets](const std::string& target) {
        if (std::find(targets.begin(), targets.end(), target) == targets.end()) {
            targets.push_back(target);
        }
    };
    for (const auto& [target, group] : target_groups) add_target(target);
    for (const MatrixCell& cell : cells) add_target(cell.target);

    std::vector<std::string> backbones;
    std::vector<std::string> strategies;
    for (const MatrixCell& cell : cells) {
        if (std::find(backbones.begin(), backbones.end(), cell.backbone) == backbones.end()) {
            backbones.push_back(cell.backbone);
        }
        if (std::find(strategies.begin(), strategies.end(), cell.strategy) ==
            strategies.end()) {
            strategies.push_back(cell.strategy);
        }
    }
    std::sort(backbones.begin(), backbones.end());
    std::sort(strategies.begin(), strategies.end());

    auto cell_lookup = [this](const std::string& backbone, const std::string& strategy,
                              const std::string& target) -> const MatrixCell* {
        for (const MatrixCell& cell : cells) {
            if (cell.backbone == backbone && cell.strategy == strategy &&
                cell.target == target) {
                return &cell;
            }
        }
        return nullptr;
    };
    auto row_average = [this](const std::string& backbone,
                              const std::string& strategy) -> const double* {
        for (const auto& [b, s, avg] : row_averages) {
            if (b == backbone && s == strategy) return &avg;
        }
        return nullptr;
    };

    std::ostringstream out;
    out << "| Backbone | Method |";
    for (const std::string& target : targets) {
        out << " " << target;
        const auto group = group_of.find(target);
        if (group != group_of.end()) out << " (" << group->second << ")";
        out << " |";
    }
    out << " Avg. |\n";
    out << "|---|---|";
    for (std::size_t i = 0; i < targets.size(); ++i) out << "---|";
    out << "---|\n";

    for (const std::string& backbone : backbones) {
        for (const std::string& strategy : strategies) {
            out << "| " << backbone << " | " << display_strategy(strategy) << " |";
            for (const std::string& target : targets) {
                const MatrixCell* cell = cell_lookup(backbone, strategy, target);
                out << " " << (cell ? format_display(cell->mean) : "-") << " |";
            }
            const double* avg = row_average(backbone, strategy);
            out << " " << (avg ? format_display(*avg) : "-") << " |\n";
        }
    }
    return out.str();
}

StabilityResult stability(const std::vector<double>& run_scores, int expected_runs,
                          double threshold) {
    if (static_cast<int>(run_scores.size()) < expected_runs) {
        throw ValidationError("insufficient runs: expected " + std::to_string(expected_runs) +
                              ", got " + std::to_string(run_scores.size()));
    }
    if (static_cast<int>(run_scores.size()) > expected_runs) {
        throw ValidationError("too many runs: expected " + std::to_string(expected_runs) +
                              ", got " + std::to_string(run_scores.size()));
    }
    StabilityResult result;
    result.threshold = threshold;
    std::tie(result.mean, result.stddev) = mean_and_sample_std(run_scores);
    result.passed = result.stddev < threshold;
    return result;
}

nlohmann::json ErrorBreakdown::to_json() const {
    return {{"by_dimension", by_dimension}, {"by_subcategory", by_subcategory}};
}

ErrorBreakdown error_breakdown(const std::vector<EvaluationReport>& reports,
                               const std::vector<PersonaProfile>& truths) {
    if (reports.size() != truths.size()) {
        throw ValidationError("error_breakdown: report and truth lists are misaligned (" +
                              std::to_string(reports.size()) + " vs " +
                              std::to_string(truths.size()) + ")");
    }
    ErrorBreakdown breakdown;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const EvaluationReport& report = reports[i];
        if (report.mismatches.size() != truths[i].assignments.size()) {
            throw ValidationError("error_breakdown: report " + std::to_string(i) +
                                  " does not match its truth profile's slots");
        }
        for (const SlotMismatch& m : report.mismatches) {
            breakdown.by_dimension.try_emplace(m.dimension, 0);
            breakdown.by_subcategory[m.dimension].try_emplace(m.subcategory, 0);
            if (m.mismatch) {
                ++breakdown.by_dimension[m.dimension];
                ++breakdown.by_subcategory[m.dimension][m.subcategory];
            }
        }
    }
    return breakdown;
}

}  // namespace pdagent
