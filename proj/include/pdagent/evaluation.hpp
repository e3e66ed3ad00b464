#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdagent/embedding.hpp"
#include "pdagent/schema.hpp"

namespace pdagent {

/// dot(a,b) / (|a||b|). Throws ValidationError on dimension mismatch or a
/// zero-norm input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct DimensionScore {
    std::string dimension;
    double cosine = 0.0;
};

struct SlotMismatch {
    std::string dimension;
    std::string subcategory;
    bool mismatch = false;
};

struct EvaluationReport {
    std::vector<DimensionScore> dimension_scores;
    double overall = 0.0;  // arithmetic mean of the dimension scores
    int unresolved_slots = 0;
    std::vector<SlotMismatch> mismatches;

    nlohmann::json to_json() const;
};

/// Per dimension: concatenate that dimension's assigned values in schema
/// order, embed prediction and truth, take the cosine. Overall is the mean
/// across dimensions. Profiles must come from the same schema.
EvaluationReport score_prediction(const PersonaProfile& prediction, const PersonaProfile& truth,
                                  Embedder& embedder, int unresolved_slots = 0);

/// One pipeline outcome feeding the aggregation matrix.
struct RunResult {
    std::string backbone;
    std::string target;
    std::string strategy;
    int run_index = 0;
    double overall = 0.0;
    bool failed = false;
    std::string error;
};

struct MatrixCell {
    std::string backbone;
    std::string target;
    std::string strategy;
    std::vector<double> run_scores;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1); 0 for a single run
};

struct MatrixReport {
    std::vector<MatrixCell> cells;  // sorted by (backbone, strategy, target)
    /// The Avg. column: per (backbone, strategy), mean of cell means over targets.
    std::vector<std::tuple<std::string, std::string, double>> row_averages;
    std::vector<RunResult> failures;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    /// Table rendering grouped by backbone with one row per strategy; targets
    /// can be grouped (e.g. small/large) via the optional grouping.
    std::string render_markdown(
        const std::vector<std::pair<std::string, std::string>>& target_groups = {}) const;
};

/// Groups run results into cells, computes means (4-decimal internal
/// precision is preserved; rounding happens only in rendering) and row
/// averages. Permutation-invariant in its input. Failed runs are excluded
/// from the arithmetic and reported; empty cells are omitted with a warning.
MatrixReport aggregate_matrix(const std::vector<RunResult>& results);

struct StabilityResult {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, n-1 denominator
    double threshold = 0.0;
    bool passed = false;
};

/// Run-to-run stability over exactly expected_runs scores. Fewer (or more)
/// scores than expected raise ValidationError.
StabilityResult stability(const std::vector<double>& run_scores, int expected_runs = 5,
                          double threshold = 0.03);

struct ErrorBreakdown {
    /// Exact-value mismatch counts.
    std::map<std::string, int> by_dimension;
    std::map<std::string, std::map<std::string, int>> by_subcategory;

    nlohmann::json to_json() const;
};

/// Sums slot mismatches across aligned (report, truth) pairs.
ErrorBreakdown error_breakdown(const std::vector<EvaluationReport>& reports,
                               const std::vector<PersonaProfile>& truths);

/// Display rounding used in markdown tables: half away from zero.
double round_display(double value, int decimals);

}  // namespace pdagent
