#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "multigroup/prepend.hpp"
#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Experiment configuration
//===----------------------------------------------------------------------===//

enum class AlgorithmKind { Prepend, Experts, Realizable };

std::string to_string(AlgorithmKind kind);
AlgorithmKind algorithm_from_string(const std::string& name);

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_from_string(const std::string& name);

// Versioned JSON schema (field "schema", currently "1"):
//   {"schema": "1", "algorithm": "prepend", "fixture": "prop45",
//    "n": 1000, "seed": 7, "delta": 0.1, "gamma": 0.2,
//    "schedule": "small", "trials": 1, "out_dir": "out"}
// Instance source is either "fixture" or the triple "dist"/"hypotheses"/
// "groups" of file paths. Optional: "eps" (constant schedule and the
// calibrated-gap fixture), "d" (pseudo-dimension schedule), "catch_all"
// (experts), "min_satisfaction" (assertion threshold over trials).
struct ExperimentConfig {
    std::string schema = "1";
    AlgorithmKind algorithm = AlgorithmKind::Prepend;

    std::string fixture;  // empty when loading from files
    std::filesystem::path dist_file;
    std::filesystem::path hyp_file;
    std::filesystem::path group_file;

    std::int64_t n = 1000;
    std::uint64_t seed = 0;
    double delta = 0.1;
    double gamma = 1.0;
    ScheduleKind schedule = ScheduleKind::SmallGroups;
    double eps = 0.1;  // constant-schedule slack; also the gap fixture's parameter
    std::optional<double> d;
    int trials = 1;
    bool catch_all = false;
    // Two-stage recipe: pick each group's empirical risk minimizer on the
    // holdout half, then run the online reduction over those hypotheses
    // only. Shrinks the effective class; the bound column still uses the
    // standard formula and no sharper constant is claimed.
    bool per_group_erm = false;
    double min_satisfaction = 1.0;
    std::filesystem::path out_dir;  // empty: do not write files

    void validate() const;  // throws std::invalid_argument with the offending field
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

//===----------------------------------------------------------------------===//
// Instance resolution
//===----------------------------------------------------------------------===//

// Known fixture tokens: prop45, prop45-scenario2, prop52, propC2, overlap.
extern const std::vector<std::string> kFixtureNames;

struct InstanceBundle {
    FiniteDistribution dist;
    HypothesisClass H;
    GroupFamily G;
    LossSpec loss;       // zero-one over the distribution's labels
    std::string source;  // fixture token or file list, for the report header
};

InstanceBundle resolve_instance(const ExperimentConfig& cfg);

//===----------------------------------------------------------------------===//
// Reports
//===----------------------------------------------------------------------===//

struct ReportRow {
    std::string group;
    std::int64_t count = 0;             // #_n(g)
    double weight = 0.0;                // P_n(g)
    double empirical_risk = 0.0;        // L_n(f|g)
    double population_risk = 0.0;       // L(f|g), exact on the finite distribution
    double empirical_benchmark = 0.0;   // min_h L_n(h|g)
    double population_benchmark = 0.0;  // min_h L(h|g)
    double empirical_excess = 0.0;
    double population_excess = 0.0;
    double bound = 0.0;             // guarantee value; +inf when not applicable
    bool bound_applicable = false;  // e.g. group outside G_{n,gamma}
    bool satisfied = true;          // vacuously true when the bound is not applicable
};

struct TrialReport {
    int trial = 0;
    std::vector<ReportRow> rows;
    std::vector<std::string> excluded_groups;  // no sample points this trial
    int rounds = 0;                            // prepend rounds / online rounds
    double overall_empirical_risk = 0.0;
    bool all_satisfied = true;
    nlohmann::json detail;  // algorithm-specific artifacts (list, regret table, ...)
};

struct ExperimentResult {
    ExperimentConfig cfg;
    std::string instance_source;
    std::vector<TrialReport> trials;
    double satisfaction_frequency = 0.0;  // fraction of trials with all bounds satisfied
    std::string bound_description;        // what the bound column means for this run
    bool all_pass = false;                // satisfaction_frequency >= min_satisfaction
    double elapsed_ms = 0.0;  // excluded from determinism comparisons
};

// MULTIGROUP_THREADS when set (minimum 1), else hardware concurrency.
int thread_budget();

// Runs cfg.trials independent trials (concurrently up to thread_budget()),
// aggregates, and writes report.json / report.csv under cfg.out_dir when it
// is nonempty. Identical configs and seeds produce byte-identical reports
// except for the elapsed_ms field.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

nlohmann::json report_json(const ExperimentResult& result);
std::string report_csv(const ExperimentResult& result);

//===----------------------------------------------------------------------===//
// Side-by-side comparison
//===----------------------------------------------------------------------===//

struct ComparisonCell {
    bool refused = false;  // consistency fit refused (not group-realizable)
    double empirical_excess = 0.0;
    double population_excess = 0.0;
    double bound = 0.0;
    bool bound_applicable = false;
};

struct ComparisonResult {
    std::vector<std::string> groups;
    std::vector<AlgorithmKind> algorithms;
    std::vector<std::vector<ComparisonCell>> cells;  // [group][algorithm]
    std::string instance_source;
};

// Runs every algorithm on the same single-trial sample; a refused
// consistency fit marks that column refused while the others proceed.
ComparisonResult compare_algorithms(const ExperimentConfig& cfg);

nlohmann::json comparison_json(const ComparisonResult& result);
std::string comparison_csv(const ComparisonResult& result);

//===----------------------------------------------------------------------===//
// Dataset ingestion
//===----------------------------------------------------------------------===//

// Column schema for ingest_csv. Points come either from an integer id
// column or from feature columns discretized onto a per-axis grid (each
// feature is min-max normalized from the file contents, then bucketed).
// Group-membership columns are the 0/1 columns whose names start with
// group_prefix, in header order, duplicates preserved.
struct IngestSchema {
    std::vector<std::string> label_names;  // declared label set, required
    std::string label_column = "label";
    std::string point_column = "point_id";
    std::vector<std::string> feature_columns;  // used when point_column is empty
    int grid = 2;                              // cells per feature axis
    std::string group_prefix = "group";
};

struct IngestResult {
    Sample sample;
    GroupFamily groups;
    int num_points = 0;
    std::vector<std::string> excluded_groups;  // empty groups, dropped with a warning
    std::vector<std::string> warnings;
};

// Reads a headered CSV; malformed rows and labels outside the declared set
// raise std::runtime_error naming the line. A point belongs to a group when
// any of its rows does.
IngestResult ingest_csv(const std::filesystem::path& path, const IngestSchema& schema);

}  // namespace multigroup
