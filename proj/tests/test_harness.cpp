// Experiment orchestration: config parsing and rejection, instance
// resolution from fixtures and files, report-column consistency, byte-level
// determinism across runs and thread budgets, multi-trial aggregation, the
// side-by-side comparison with a refused column, and CSV ingestion.

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "multigroup/harness.hpp"
#include "multigroup/majority.hpp"
#include "multigroup/risk.hpp"
#include "multigroup/serialize.hpp"

#include "desk_instances.hpp"

using namespace multigroup;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "multigroup_harness_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

ExperimentConfig fixture_config(const std::string& fixture, AlgorithmKind algorithm) {
    ExperimentConfig cfg;
    cfg.algorithm = algorithm;
    cfg.fixture = fixture;
    cfg.n = 400;
    cfg.seed = 5;
    cfg.delta = 0.1;
    cfg.schedule = ScheduleKind::Constant;
    cfg.eps = 0.05;
    return cfg;
}

nlohmann::json strip_timing(nlohmann::json j) {
    j.erase("elapsed_ms");
    return j;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("enum names round-trip and unknown names fail before any compute") {
    for (const AlgorithmKind a :
         {AlgorithmKind::Prepend, AlgorithmKind::Experts, AlgorithmKind::Realizable}) {
        CHECK(algorithm_from_string(to_string(a)) == a);
    }
    for (const ScheduleKind s : {ScheduleKind::Constant, ScheduleKind::SmallGroups,
                                 ScheduleKind::LargeGroupsFinite,
                                 ScheduleKind::LargeGroupsPseudodim}) {
        CHECK(schedule_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(algorithm_from_string("boosting"), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("warp"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"algorithm", "boosting"}}),
                    std::invalid_argument);
}

TEST_CASE("config validation pins the documented ranges") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Prepend);
    CHECK_NOTHROW(cfg.validate());

    ExperimentConfig both = cfg;
    both.dist_file = "d.json";
    CHECK_THROWS_AS(both.validate(), std::invalid_argument);  // two instance sources

    ExperimentConfig neither = cfg;
    neither.fixture.clear();
    CHECK_THROWS_AS(neither.validate(), std::invalid_argument);

    ExperimentConfig unknown = cfg;
    unknown.fixture = "prop99";
    CHECK_THROWS_WITH_AS(unknown.validate(), doctest::Contains("prop99"),
                         std::invalid_argument);

    ExperimentConfig bad_delta = cfg;
    bad_delta.delta = 1.0;
    CHECK_THROWS_AS(bad_delta.validate(), std::invalid_argument);

    ExperimentConfig bad_gamma = cfg;
    bad_gamma.gamma = 0.0;
    CHECK_THROWS_AS(bad_gamma.validate(), std::invalid_argument);

    ExperimentConfig no_trials = cfg;
    no_trials.trials = 0;
    CHECK_THROWS_AS(no_trials.validate(), std::invalid_argument);

    ExperimentConfig pseudodim_without_d = cfg;
    pseudodim_without_d.schedule = ScheduleKind::LargeGroupsPseudodim;
    CHECK_THROWS_AS(pseudodim_without_d.validate(), std::invalid_argument);
}

TEST_CASE("config JSON applies defaults and survives a round trip") {
    const nlohmann::json j{{"algorithm", "prepend"}, {"fixture", "prop45"}};
    const ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.n == 1000);
    CHECK(cfg.seed == 0);
    CHECK(cfg.delta == 0.1);
    CHECK(cfg.schedule == ScheduleKind::SmallGroups);
    CHECK(cfg.trials == 1);
    CHECK_FALSE(cfg.d.has_value());

    const ExperimentConfig back = config_from_json(to_json(cfg));
    CHECK(to_json(back).dump() == to_json(cfg).dump());

    const nlohmann::json with_d{{"algorithm", "prepend"},
                                {"fixture", "prop45"},
                                {"schedule", "pseudodim"},
                                {"d", 2.5}};
    CHECK(config_from_json(with_d).d == 2.5);
}

TEST_CASE("every fixture token resolves to a valid instance") {
    for (const std::string& name : kFixtureNames) {
        ExperimentConfig cfg = fixture_config(name, AlgorithmKind::Prepend);
        cfg.eps = 0.25;  // the calibrated-gap fixture reads this as its parameter
        const InstanceBundle bundle = resolve_instance(cfg);
        CHECK_NOTHROW(bundle.dist.validate());
        CHECK(bundle.H.size() >= 1);
        CHECK(bundle.G.size() >= 1);
        CHECK_FALSE(bundle.source.empty());
        CHECK(bundle.loss.num_labels() >= bundle.dist.num_labels());
    }
    // The planar fixture folds the seed into its source string.
    ExperimentConfig overlap = fixture_config("overlap", AlgorithmKind::Prepend);
    overlap.seed = 12;
    CHECK(resolve_instance(overlap).source == "overlap(seed=12)");
}

TEST_CASE("instances load from the three-file form with validation") {
    const desk::Instance inst = desk::eight_point();
    const auto dir = temp_dir();
    save_json(to_json(inst.dist), dir / "dist.json");
    save_json(to_json(inst.H), dir / "hyps.json");
    save_json(to_json(inst.G), dir / "groups.json");

    ExperimentConfig cfg;
    cfg.algorithm = AlgorithmKind::Prepend;
    cfg.dist_file = dir / "dist.json";
    cfg.hyp_file = dir / "hyps.json";
    cfg.group_file = dir / "groups.json";
    const InstanceBundle bundle = resolve_instance(cfg);
    CHECK(bundle.H.size() == 3);
    CHECK(bundle.G.size() == 3);
    CHECK(bundle.loss.num_predictions() == 2);

    // A hypothesis of the wrong arity is named in the rejection.
    HypothesisClass short_hyp;
    short_hyp.hypotheses = {Hypothesis{{0, 1}}};
    short_hyp.names = {"stubby"};
    save_json(to_json(short_hyp), dir / "short.json");
    ExperimentConfig bad = cfg;
    bad.hyp_file = dir / "short.json";
    CHECK_THROWS_WITH_AS(resolve_instance(bad), doctest::Contains("stubby"),
                         std::invalid_argument);
}

TEST_CASE("report rows are internally consistent on a single trial") {
    const ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Prepend);
    const ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.trials.size() == 1);
    const TrialReport& trial = result.trials[0];
    REQUIRE(trial.rows.size() == 2);  // both pair-groups are sampled at n = 400

    const InstanceBundle bundle = resolve_instance(cfg);
    for (const ReportRow& row : trial.rows) {
        CHECK(row.count >= 1);
        CHECK(row.weight == doctest::Approx(static_cast<double>(row.count) / 400.0)
                                .epsilon(1e-12));
        CHECK(row.empirical_excess ==
              doctest::Approx(row.empirical_risk - row.empirical_benchmark).epsilon(1e-12));
        CHECK(row.population_excess ==
              doctest::Approx(row.population_risk - row.population_benchmark).epsilon(1e-12));
        CHECK(row.bound_applicable);
        CHECK(row.bound == 0.05);
        CHECK(row.satisfied == (row.empirical_excess <= row.bound + 1e-9));
        // Empirical benchmarks agree with a recomputation from the bundle.
        bool found = false;
        for (int g = 0; g < bundle.G.size(); ++g) {
            if (bundle.G.name_of(g) != row.group) continue;
            found = true;
            CHECK(row.population_benchmark ==
                  doctest::Approx(population_benchmark_risk(bundle.H, bundle.G[g], bundle.dist,
                                                            bundle.loss))
                      .epsilon(1e-12));
        }
        CHECK(found);
    }
    CHECK(result.satisfaction_frequency ==
          (trial.all_satisfied ? doctest::Approx(1.0) : doctest::Approx(0.0)));
    CHECK(result.bound_description.find("eps") != std::string::npos);

    // The trace detail names the learned rules against the full family.
    CHECK(trial.detail.contains("final_list"));
    CHECK(trial.detail.contains("rounds"));
    const DecisionList learned = decision_list_from_json(trial.detail.at("final_list"));
    const DecisionListPredictor f{&learned, &bundle.H, &bundle.G};
    (void)f(0);  // indices must be valid against the full family
}

TEST_CASE("experts trials report the online bound for every sampled group") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Experts);
    cfg.n = 600;
    const ExperimentResult result = run_experiment(cfg);
    const TrialReport& trial = result.trials[0];
    REQUIRE(trial.rows.size() == 2);
    const double capacity = experts_capacity(2, 2, cfg.delta);
    for (const ReportRow& row : trial.rows) {
        CHECK(row.bound_applicable);
        const double dc = capacity / static_cast<double>(row.count);
        CHECK(row.bound == doctest::Approx(60.0 * std::sqrt(dc) + 16.0 * dc).epsilon(1e-12));
        CHECK(row.satisfied == (row.population_excess <= row.bound + 1e-12));
    }
    CHECK(trial.rounds == 300);  // half the sample streams online
    CHECK(trial.detail.contains("regret_table"));
    CHECK(trial.detail.at("regret_violations").get<int>() == 0);
}

TEST_CASE("the two-stage recipe restricts the online run to per-group selections") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Experts);
    cfg.per_group_erm = true;
    cfg.n = 600;
    const ExperimentResult result = run_experiment(cfg);
    const TrialReport& trial = result.trials[0];
    REQUIRE(trial.detail.contains("per_group_erm_selection"));
    const auto& selection = trial.detail.at("per_group_erm_selection");
    CHECK(selection.size() == 2);
    // Each regret row mentions only selected hypotheses.
    std::vector<std::string> chosen;
    for (const auto& [group, hyp] : selection.items()) {
        chosen.push_back(hyp.get<std::string>());
    }
    for (const auto& row : trial.detail.at("regret_table")) {
        const std::string hyp = row.at("hypothesis").get<std::string>();
        CHECK(std::find(chosen.begin(), chosen.end(), hyp) != chosen.end());
    }
}

TEST_CASE("realizable trials bound the population risk itself") {
    const auto dir = temp_dir() / "realizable";
    std::filesystem::create_directories(dir);
    const desk::Instance inst = desk::ten_point_realizable();
    save_json(to_json(inst.dist), dir / "dist.json");
    save_json(to_json(inst.H), dir / "hyps.json");
    save_json(to_json(inst.G), dir / "groups.json");

    ExperimentConfig cfg;
    cfg.algorithm = AlgorithmKind::Realizable;
    cfg.dist_file = dir / "dist.json";
    cfg.hyp_file = dir / "hyps.json";
    cfg.group_file = dir / "groups.json";
    cfg.n = 2000;
    cfg.seed = 3;
    const ExperimentResult result = run_experiment(cfg);
    const TrialReport& trial = result.trials[0];
    REQUIRE(trial.rows.size() == 3);
    for (const ReportRow& row : trial.rows) {
        CHECK(row.empirical_risk == 0.0);
        CHECK(row.population_risk == 0.0);
        CHECK(row.bound ==
              doctest::Approx(realizable_excess_bound(4, 3, cfg.delta, row.count))
                  .epsilon(1e-12));
        CHECK(row.satisfied);
    }
    CHECK(trial.detail.contains("assigned_hypotheses"));
    CHECK(result.all_pass);
}

TEST_CASE("identical configurations produce byte-identical reports modulo timing") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Prepend);
    cfg.trials = 4;
    const nlohmann::json a = strip_timing(report_json(run_experiment(cfg)));
    const nlohmann::json b = strip_timing(report_json(run_experiment(cfg)));
    CHECK(a.dump() == b.dump());

    const std::string csv_a = report_csv(run_experiment(cfg));
    const std::string csv_b = report_csv(run_experiment(cfg));
    CHECK(csv_a == csv_b);  // the CSV carries no timing field at all
}

TEST_CASE("the thread budget does not change the report") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Experts);
    cfg.trials = 6;
    cfg.n = 300;

    setenv("MULTIGROUP_THREADS", "1", 1);
    CHECK(thread_budget() == 1);
    const nlohmann::json serial = strip_timing(report_json(run_experiment(cfg)));
    setenv("MULTIGROUP_THREADS", "4", 1);
    CHECK(thread_budget() == 4);
    const nlohmann::json parallel = strip_timing(report_json(run_experiment(cfg)));
    unsetenv("MULTIGROUP_THREADS");
    CHECK(serial.dump() == parallel.dump());

    setenv("MULTIGROUP_THREADS", "not-a-number", 1);
    CHECK_THROWS_AS(thread_budget(), std::invalid_argument);
    unsetenv("MULTIGROUP_THREADS");
}

TEST_CASE("multi-trial aggregation counts satisfied trials") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Prepend);
    cfg.trials = 6;
    cfg.min_satisfaction = 0.5;
    const ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.trials.size() == 6);
    int satisfied = 0;
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        CHECK(result.trials[i].trial == static_cast<int>(i));
        satisfied += result.trials[i].all_satisfied ? 1 : 0;
    }
    CHECK(result.satisfaction_frequency == doctest::Approx(satisfied / 6.0).epsilon(1e-12));
    CHECK(result.all_pass == (result.satisfaction_frequency >= 0.5 - 1e-12));
}

TEST_CASE("report files land in the output directory") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Prepend);
    cfg.out_dir = temp_dir() / "outdir";
    std::filesystem::remove_all(cfg.out_dir);
    const ExperimentResult result = run_experiment(cfg);
    CHECK(std::filesystem::exists(cfg.out_dir / "report.json"));
    CHECK(std::filesystem::exists(cfg.out_dir / "report.csv"));
    const nlohmann::json loaded = load_json(cfg.out_dir / "report.json");
    CHECK(strip_timing(loaded).dump() == strip_timing(report_json(result)).dump());
    // CSV header shape.
    std::ifstream csv(cfg.out_dir / "report.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "trial,group,count,weight,empirical_risk,population_risk,empirical_benchmark,"
          "population_benchmark,empirical_excess,population_excess,bound,bound_applicable,"
          "satisfied");
}

TEST_CASE("bounds outside their regime render as null and empty cells") {
    ExperimentConfig cfg = fixture_config("prop45", AlgorithmKind::Prepend);
    cfg.schedule = ScheduleKind::LargeGroupsFinite;
    cfg.gamma = 0.9;  // neither pair-group reaches 0.9 n
    const ExperimentResult result = run_experiment(cfg);
    const TrialReport& trial = result.trials[0];
    REQUIRE_FALSE(trial.rows.empty());
    for (const ReportRow& row : trial.rows) {
        CHECK_FALSE(row.bound_applicable);
        CHECK(row.satisfied);  // vacuous
    }
    const nlohmann::json j = report_json(result);
    for (const auto& row : j.at("trials")[0].at("rows")) {
        CHECK(row.at("bound").is_null());
    }
    const std::string csv = report_csv(result);
    CHECK(csv.find(",,0,1\n") != std::string::npos);  // empty bound, not applicable, satisfied
}

TEST_CASE("comparison runs all algorithms and marks the refusing column") {
    ExperimentConfig cfg = fixture_config("prop52", AlgorithmKind::Prepend);
    cfg.n = 500;
    const ComparisonResult result = compare_algorithms(cfg);
    REQUIRE(result.groups.size() == 3);
    REQUIRE(result.algorithms.size() == 3);
    bool any_nonnegative = false;
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        CHECK_FALSE(result.cells[g][0].refused);  // prepend proceeds
        CHECK_FALSE(result.cells[g][1].refused);  // experts proceeds
        CHECK(result.cells[g][2].refused);        // the consistency fit refuses
        // A decision list may beat the best single hypothesis inside an
        // overlapping group, so per-group excess can go negative; the learner
        // cannot beat the benchmark on every group of this instance at once.
        any_nonnegative = any_nonnegative || result.cells[g][0].empirical_excess >= -1e-12;
    }
    CHECK(any_nonnegative);
    const std::string csv = comparison_csv(result);
    CHECK(csv.find("refused") != std::string::npos);
    CHECK(csv.rfind("group,prepend_empirical_excess,", 0) == 0);
    const nlohmann::json j = comparison_json(result);
    CHECK(j.at("rows")[0].at("realizable") == "refused");
}

TEST_CASE("comparison on a realizable instance shows zero excess in its column") {
    const auto dir = temp_dir() / "compare_realizable";
    std::filesystem::create_directories(dir);
    const desk::Instance inst = desk::ten_point_realizable();
    save_json(to_json(inst.dist), dir / "dist.json");
    save_json(to_json(inst.H), dir / "hyps.json");
    save_json(to_json(inst.G), dir / "groups.json");
    ExperimentConfig cfg;
    cfg.algorithm = AlgorithmKind::Prepend;
    cfg.schedule = ScheduleKind::Constant;
    cfg.eps = 0.05;
    cfg.dist_file = dir / "dist.json";
    cfg.hyp_file = dir / "hyps.json";
    cfg.group_file = dir / "groups.json";
    cfg.n = 2000;
    const ComparisonResult result = compare_algorithms(cfg);
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        CHECK_FALSE(result.cells[g][2].refused);
        CHECK(result.cells[g][2].empirical_excess == doctest::Approx(0.0));
    }
}

TEST_CASE("CSV ingestion: point ids, group columns, warnings and errors") {
    const auto path = temp_dir() / "points.csv";
    std::ofstream(path) << "point_id,label,group_a,group_b,group_empty\n"
                           "0,yes,1,0,0\n"
                           "1,no,1,1,0\n"
                           "2,yes,0,1,0\n";
    IngestSchema schema;
    schema.label_names = {"no", "yes"};
    const IngestResult result = ingest_csv(path, schema);
    CHECK(result.sample.size() == 3);
    CHECK(result.num_points == 3);
    REQUIRE(result.groups.size() == 2);  // the empty column is dropped
    CHECK(result.groups.name_of(0) == "group_a");
    CHECK(group_count(result.sample, result.groups[0]) == 2);
    CHECK(group_count(result.sample, result.groups[1]) == 2);
    REQUIRE(result.excluded_groups.size() == 1);
    CHECK(result.excluded_groups[0] == "group_empty");
    CHECK_FALSE(result.warnings.empty());
    CHECK(result.sample.examples[0].y == 1);  // "yes"
    CHECK(result.sample.examples[1].y == 0);

    std::ofstream(path) << "point_id,label,group_a\n0,yes,1\n1,maybe,1\n";
    CHECK_THROWS_WITH_AS(ingest_csv(path, schema), doctest::Contains(":3:"),
                         std::runtime_error);

    std::ofstream(path) << "point_id,label,group_a\n0,yes,1\n1,no\n";
    CHECK_THROWS_WITH_AS(ingest_csv(path, schema), doctest::Contains(":3:"),
                         std::runtime_error);

    std::ofstream(path) << "point_id,label,group_a\n0,yes,2\n";
    CHECK_THROWS_WITH_AS(ingest_csv(path, schema), doctest::Contains("group_a"),
                         std::runtime_error);

    std::ofstream(path) << "id,label,group_a\n0,yes,1\n";
    CHECK_THROWS_WITH_AS(ingest_csv(path, schema), doctest::Contains("point_id"),
                         std::runtime_error);
}

TEST_CASE("CSV ingestion: duplicate group columns are preserved as a multiset") {
    const auto path = temp_dir() / "dupes.csv";
    std::ofstream(path) << "point_id,label,group_x,group_x\n"
                           "0,yes,1,1\n"
                           "1,no,1,0\n";
    IngestSchema schema;
    schema.label_names = {"no", "yes"};
    const IngestResult result = ingest_csv(path, schema);
    REQUIRE(result.groups.size() == 2);
    CHECK(result.groups.name_of(0) == "group_x");
    CHECK(result.groups.name_of(1) == "group_x");
    CHECK(group_count(result.sample, result.groups[0]) == 2);
    CHECK(group_count(result.sample, result.groups[1]) == 1);
}

TEST_CASE("CSV ingestion: feature columns discretize onto the grid") {
    const auto path = temp_dir() / "features.csv";
    std::ofstream(path) << "f1,f2,label,group_all\n"
                           "0.0,0.0,no,1\n"
                           "0.0,9.0,yes,1\n"
                           "4.0,0.0,yes,1\n"
                           "4.0,9.0,no,1\n";
    IngestSchema schema;
    schema.label_names = {"no", "yes"};
    schema.point_column.clear();
    schema.feature_columns = {"f1", "f2"};
    schema.grid = 2;
    const IngestResult result = ingest_csv(path, schema);
    CHECK(result.num_points == 4);  // 2 x 2 grid
    // Row-major ids over (f1 cell, f2 cell): (0,0) (0,1) (1,0) (1,1).
    CHECK(result.sample.examples[0].x == 0);
    CHECK(result.sample.examples[1].x == 1);
    CHECK(result.sample.examples[2].x == 2);
    CHECK(result.sample.examples[3].x == 3);

    IngestSchema no_source = schema;
    no_source.feature_columns.clear();
    CHECK_THROWS_AS(ingest_csv(path, no_source), std::invalid_argument);
}

}  // TEST_SUITE
