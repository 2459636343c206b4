// Command-line front end for the multi-group learning library.
//
// Subcommands:
//   prepend     decision-list learner with a per-group slack schedule
//   experts     sleeping-experts online reduction
//   realizable  consistent per-group majority vote
//   compare     all three algorithms side by side on one sample
//   fixtures    emit / verify the exact-arithmetic counterexample instances
//   bounds      print the guarantee formulas for given parameters
//   run         drive any of the above from a versioned JSON config
//
// Exit codes: 0 all requested assertions pass; 1 an assertion or fixture
// check failed; 2 configuration or runtime error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "multigroup/fixtures.hpp"
#include "multigroup/harness.hpp"
#include "multigroup/majority.hpp"
#include "multigroup/prepend.hpp"
#include "multigroup/risk.hpp"
#include "multigroup/serialize.hpp"

namespace mg = multigroup;

namespace {

//===----------------------------------------------------------------------===//
// Shared option plumbing
//===----------------------------------------------------------------------===//

struct CommonOptions {
    std::string fixture;
    std::string dist_file;
    std::string hyp_file;
    std::string group_file;
    std::int64_t n = 1000;
    std::uint64_t seed = 0;
    double delta = 0.1;
    int trials = 1;
    double min_satisfaction = 1.0;
    std::string out_dir;
};

void add_instance_options(CLI::App& cmd, CommonOptions& opt) {
    cmd.add_option("--fixture", opt.fixture,
                   "Built-in instance: prop45, prop45-scenario2, prop52, propC2, overlap");
    cmd.add_option("--dist", opt.dist_file, "Distribution JSON file");
    cmd.add_option("--hyp,--hypotheses", opt.hyp_file, "Hypothesis-class JSON file");
    cmd.add_option("--groups", opt.group_file, "Group-family JSON file");
    cmd.add_option("--n", opt.n, "Sample size")->capture_default_str();
    cmd.add_option("--seed", opt.seed, "Root seed; all randomness derives from it")
        ->capture_default_str();
    cmd.add_option("--delta", opt.delta, "Failure probability in (0,1)")->capture_default_str();
    cmd.add_option("--trials", opt.trials, "Independent trials (parallel up to MULTIGROUP_THREADS)")
        ->capture_default_str();
    cmd.add_option("--min-satisfaction", opt.min_satisfaction,
                   "Required fraction of trials with every bound satisfied")
        ->capture_default_str();
    cmd.add_option("--out", opt.out_dir, "Directory for report.json / report.csv");
}

void apply_common(mg::ExperimentConfig& cfg, const CommonOptions& opt) {
    cfg.fixture = opt.fixture;
    cfg.dist_file = opt.dist_file;
    cfg.hyp_file = opt.hyp_file;
    cfg.group_file = opt.group_file;
    cfg.n = opt.n;
    cfg.seed = opt.seed;
    cfg.delta = opt.delta;
    cfg.trials = opt.trials;
    cfg.min_satisfaction = opt.min_satisfaction;
    cfg.out_dir = opt.out_dir;
}

void print_summary(const mg::ExperimentResult& result) {
    std::printf("instance: %s\n", result.instance_source.c_str());
    std::printf("bound:    %s\n", result.bound_description.c_str());
    const mg::TrialReport& first = result.trials.front();
    std::printf("%-18s %8s %8s %12s %12s %12s %12s %6s\n", "group", "count", "weight", "emp_risk",
                "pop_risk", "pop_excess", "bound", "ok");
    for (const mg::ReportRow& row : first.rows) {
        std::printf("%-18s %8lld %8.4f %12.6f %12.6f %12.6f ", row.group.c_str(),
                    static_cast<long long>(row.count), row.weight, row.empirical_risk,
                    row.population_risk, row.population_excess);
        if (row.bound_applicable) {
            std::printf("%12.6f ", row.bound);
        } else {
            std::printf("%12s ", "-");
        }
        std::printf("%6s\n", row.satisfied ? "yes" : "NO");
    }
    for (const std::string& g : first.excluded_groups) {
        std::printf("warning: group '%s' drew no sample points\n", g.c_str());
    }
    if (result.trials.size() > 1) {
        std::printf("trials: %zu, all-bounds satisfaction frequency: %.4f (required %.4f)\n",
                    result.trials.size(), result.satisfaction_frequency,
                    result.cfg.min_satisfaction);
    }
    std::printf("%s\n", result.all_pass ? "PASS" : "FAIL");
}

int run_and_report(const mg::ExperimentConfig& cfg) {
    const mg::ExperimentResult result = mg::run_experiment(cfg);
    print_summary(result);
    if (!cfg.out_dir.empty()) {
        std::printf("wrote %s and %s\n", (cfg.out_dir / "report.json").c_str(),
                    (cfg.out_dir / "report.csv").c_str());
        if (cfg.algorithm == mg::AlgorithmKind::Prepend) {
            // The learned predictor of the first trial, reloadable via
            // decision_list_from_json.
            const nlohmann::json& detail = result.trials.front().detail;
            nlohmann::json list = detail.at("final_list");
            list["rules_named"] = detail.at("final_list_named");
            list["default_named"] = detail.at("default_hypothesis");
            mg::save_json(list, cfg.out_dir / "list.json");
            std::printf("wrote %s\n", (cfg.out_dir / "list.json").c_str());
        }
    }
    return result.all_pass ? 0 : 1;
}

//===----------------------------------------------------------------------===//
// fixtures emit / verify
//===----------------------------------------------------------------------===//

nlohmann::json rat_json(const mg::Rat& r) { return mg::to_string(r); }

nlohmann::json exact_instance_json(const mg::ExactInstance& inst) {
    nlohmann::json mass = nlohmann::json::array();
    for (const mg::Rat& m : inst.dist.mass) mass.push_back(rat_json(m));
    nlohmann::json label_dist = nlohmann::json::array();
    for (const auto& row : inst.dist.label_dist) {
        nlohmann::json jrow = nlohmann::json::array();
        for (const mg::Rat& p : row) jrow.push_back(rat_json(p));
        label_dist.push_back(std::move(jrow));
    }
    nlohmann::json risk = nlohmann::json::array();
    for (const auto& row : inst.expected_risk) {
        nlohmann::json jrow = nlohmann::json::array();
        for (const mg::Rat& p : row) jrow.push_back(rat_json(p));
        risk.push_back(std::move(jrow));
    }
    std::vector<std::string> hyp_names, group_names;
    for (int h = 0; h < inst.H.size(); ++h) hyp_names.push_back(inst.H.name_of(h));
    for (int g = 0; g < inst.G.size(); ++g) group_names.push_back(inst.G.name_of(g));
    return nlohmann::json{{"name", inst.name},
                          {"mass", std::move(mass)},
                          {"label_dist", std::move(label_dist)},
                          {"labels", inst.label_names},
                          {"hypotheses", mg::to_json(inst.H)},
                          {"hypothesis_names", hyp_names},
                          {"groups", mg::to_json(inst.G)},
                          {"group_names", group_names},
                          {"risk_table", std::move(risk)}};
}

void emit_instance_files(const std::filesystem::path& dir, const std::string& stem,
                         const mg::FiniteDistribution& dist, const mg::HypothesisClass& H,
                         const mg::GroupFamily& G) {
    std::filesystem::create_directories(dir);
    mg::save_json(mg::to_json(dist), dir / (stem + "-dist.json"));
    mg::save_json(mg::to_json(H), dir / (stem + "-hypotheses.json"));
    mg::save_json(mg::to_json(G), dir / (stem + "-groups.json"));
}

int fixtures_emit(const std::string& name, const std::string& out, const std::string& eps_text,
                  std::uint64_t seed) {
    const std::filesystem::path dir(out);
    if (name == "prop45" || name == "prop45-scenario2") {
        const auto [s1, s2] = mg::build_twin_scenarios();
        const mg::ExactInstance& inst = (name == "prop45") ? s1 : s2;
        emit_instance_files(dir, name, mg::to_float(inst.dist, inst.label_names), inst.H, inst.G);
        mg::save_json(exact_instance_json(inst), dir / (name + "-instance.json"));
    } else if (name == "prop52") {
        const mg::ExactInstance inst = mg::build_majority_vote_counterexample();
        emit_instance_files(dir, name, mg::to_float(inst.dist, inst.label_names), inst.H, inst.G);
        mg::save_json(exact_instance_json(inst), dir / (name + "-instance.json"));
    } else if (name == "propC2") {
        const mg::MultiaccuracyGapInstance gap =
            mg::build_multiaccuracy_gap(mg::rat_from_string(eps_text));
        emit_instance_files(dir, name, mg::to_float(gap.inst.dist, gap.inst.label_names),
                            gap.inst.H, gap.inst.G);
        nlohmann::json j = exact_instance_json(gap.inst);
        nlohmann::json f = nlohmann::json::array(), c = nlohmann::json::array();
        for (const mg::Rat& v : gap.f) f.push_back(rat_json(v));
        for (const mg::Rat& v : gap.c) c.push_back(rat_json(v));
        j["predictor_f"] = std::move(f);
        j["test_function_c"] = std::move(c);
        j["eps"] = rat_json(gap.eps);
        mg::save_json(j, dir / (name + "-instance.json"));
    } else if (name == "overlap") {
        const mg::OverlapInstance inst = mg::generate_overlap_instance(seed);
        emit_instance_files(dir, name, inst.dist, inst.H, inst.G);
        mg::save_json(nlohmann::json{{"name", "overlap"},
                                     {"seed", inst.seed},
                                     {"attempts", inst.attempts},
                                     {"certified_gap", inst.certified_gap}},
                      dir / (name + "-instance.json"));
    } else {
        std::fprintf(stderr, "unknown fixture '%s'\n", name.c_str());
        return 2;
    }
    std::printf("wrote %s/%s-{dist,hypotheses,groups,instance}.json\n", out.c_str(), name.c_str());
    return 0;
}

int fixtures_verify(const std::string& name, const std::string& eps_text, std::uint64_t seed) {
    if (name == "prop45" || name == "prop45-scenario2") {
        const mg::TwinScenarioReport report = mg::verify_twin_scenarios();
        std::printf("canonical decision lists checked: %zu\n", report.per_list.size());
        std::printf("required excess threshold: %s\n", mg::to_string(report.threshold).c_str());
        int failures = 0;
        for (const mg::TwinScenarioWitness& w : report.per_list) {
            if (w.excess < report.threshold) ++failures;
        }
        std::printf("lists below threshold: %d\n", failures);
        std::printf("%s\n", report.all_flagged ? "PASS" : "FAIL");
        return report.all_flagged ? 0 : 1;
    }
    if (name == "prop52") {
        const mg::VoteCounterexampleReport report = mg::verify_majority_vote_counterexample();
        std::printf("assignments checked: %zu\n", report.rows.size());
        std::printf("worst-group excess per assignment:");
        for (const mg::VoteAssignmentRow& row : report.rows) {
            std::printf(" %s", mg::to_string(row.worst_excess).c_str());
        }
        std::printf("\nminimum: %s, threshold: %s\n", mg::to_string(report.min_excess).c_str(),
                    mg::to_string(report.threshold).c_str());
        const bool pass = report.all_exceed && report.min_excess == mg::Rat(3, 10);
        std::printf("%s\n", pass ? "PASS" : "FAIL");
        return pass ? 0 : 1;
    }
    if (name == "propC2") {
        const mg::Rat eps = mg::rat_from_string(eps_text);
        const mg::MultiaccuracyGapInstance gap = mg::build_multiaccuracy_gap(eps);
        std::printf("eps = %s\n", mg::to_string(eps).c_str());
        std::printf("multiaccuracy value E[c(f-y)] = %s (want 0)\n",
                    mg::to_string(gap.multiaccuracy_value).c_str());
        std::printf("predictor error mass  = %s (want %s)\n",
                    mg::to_string(gap.f_error_mass).c_str(),
                    mg::to_string(mg::Rat(2) * eps).c_str());
        std::printf("hypothesis error mass = %s (want %s)\n",
                    mg::to_string(gap.h_error_mass).c_str(), mg::to_string(eps).c_str());
        const bool pass = gap.multiaccuracy_value == mg::Rat(0) &&
                          gap.f_error_mass == mg::Rat(2) * eps && gap.h_error_mass == eps;
        std::printf("%s\n", pass ? "PASS" : "FAIL");
        return pass ? 0 : 1;
    }
    if (name == "overlap") {
        const mg::OverlapInstance inst = mg::generate_overlap_instance(seed);
        std::printf("seed %llu: certified gap %.6f after %d attempt(s)\n",
                    static_cast<unsigned long long>(inst.seed), inst.certified_gap,
                    inst.attempts);
        const bool pass = inst.certified_gap > 0.05;
        std::printf("%s\n", pass ? "PASS" : "FAIL");
        return pass ? 0 : 1;
    }
    std::fprintf(stderr, "unknown fixture '%s'\n", name.c_str());
    return 2;
}

//===----------------------------------------------------------------------===//
// bounds
//===----------------------------------------------------------------------===//

int print_bounds(const std::string& kind, std::int64_t hyps, std::int64_t groups, double delta,
                 double gamma, std::int64_t n, std::int64_t count, double empirical_risk,
                 double d, double alpha) {
    if (kind == "deviation") {
        const double capacity = mg::finite_class_capacity(hyps, groups, delta);
        mg::DeviationParams params{capacity, delta, n};
        std::printf("finite-class capacity D = %.6f\n", capacity);
        std::printf("deviation bound at count %lld, empirical risk %.4f: %.6f\n",
                    static_cast<long long>(count), empirical_risk,
                    mg::deviation_bound(params, count, empirical_risk));
        return 0;
    }
    if (kind == "deviation-pseudodim") {
        const double capacity = mg::pseudodim_capacity(d, n, delta);
        mg::DeviationParams params{capacity, delta, n};
        std::printf("pseudo-dimension capacity D = %.6f\n", capacity);
        std::printf("deviation bound at count %lld, empirical risk %.4f: %.6f\n",
                    static_cast<long long>(count), empirical_risk,
                    mg::deviation_bound(params, count, empirical_risk));
        return 0;
    }
    if (kind == "prepend-small") {
        std::printf("slack eps_n(g) at count %lld: %.6f\n", static_cast<long long>(count),
                    mg::epsilon_small_groups(hyps, groups, delta, count));
        std::printf("population excess bound (2x slack): %.6f\n",
                    2.0 * mg::epsilon_small_groups(hyps, groups, delta, count));
        return 0;
    }
    if (kind == "prepend-finite") {
        std::printf("slack eps_n(g): %.6f\n",
                    mg::epsilon_large_groups_finite(hyps, groups, delta, gamma, alpha, n, count));
        const double hg = static_cast<double>(hyps) * static_cast<double>(groups);
        std::printf("population excess bound: %.6f\n",
                    22.0 * std::cbrt(std::log(8.0 * hg / delta) /
                                     (gamma * static_cast<double>(count))));
        return 0;
    }
    if (kind == "prepend-pseudodim") {
        std::printf("slack eps_n(g): %.6f\n",
                    mg::epsilon_large_groups_pseudodim(d, delta, gamma, n, count));
        std::printf("population excess bound: %.6f\n",
                    28.0 * std::cbrt(d * std::log(16.0 * static_cast<double>(n) / delta) /
                                     (gamma * static_cast<double>(count))));
        return 0;
    }
    if (kind == "experts") {
        const double capacity = mg::experts_capacity(hyps, groups, delta);
        const double dc = capacity / static_cast<double>(count);
        std::printf("capacity D = 2 log(|G||H|) + log(64/delta) = %.6f\n", capacity);
        std::printf("population excess bound: %.6f\n", 60.0 * std::sqrt(dc) + 16.0 * dc);
        return 0;
    }
    if (kind == "realizable") {
        std::printf("population risk bound: %.6f\n",
                    mg::realizable_excess_bound(hyps, groups, delta, count));
        return 0;
    }
    std::fprintf(stderr,
                 "unknown bound kind '%s' (expected deviation, deviation-pseudodim, "
                 "prepend-small, prepend-finite, prepend-pseudodim, experts, realizable)\n",
                 kind.c_str());
    return 2;
}

}  // namespace

//===----------------------------------------------------------------------===//
// main
//===----------------------------------------------------------------------===//

int main(int argc, char** argv) {
    CLI::App app{"Multi-group agnostic learning toolkit"};
    app.require_subcommand(1);

    // --- prepend ---
    CommonOptions prepend_opt;
    std::string prepend_schedule = "small";
    double prepend_gamma = 1.0;
    double prepend_eps = 0.1;
    std::optional<double> prepend_d;
    CLI::App* prepend = app.add_subcommand(
        "prepend", "Learn a decision list by repairing the worst violated group");
    add_instance_options(*prepend, prepend_opt);
    prepend->add_option("--schedule", prepend_schedule,
                        "Slack schedule: constant, small, finite, pseudodim")
        ->capture_default_str();
    prepend->add_option("--gamma", prepend_gamma, "Group-size threshold for the large schedules")
        ->capture_default_str();
    prepend->add_option("--eps", prepend_eps, "Slack for the constant schedule")
        ->capture_default_str();
    prepend->add_option("--d", prepend_d, "Pseudo-dimension for the pseudodim schedule");

    // --- experts ---
    CommonOptions experts_opt;
    bool experts_catch_all = false;
    bool experts_per_group_erm = false;
    CLI::App* experts =
        app.add_subcommand("experts", "Sleeping-experts online reduction with round snapshots");
    add_instance_options(*experts, experts_opt);
    experts->add_flag("--catch-all", experts_catch_all,
                      "Append an all-ones group so every point has an awake expert");
    experts->add_flag(
        "--per-group-erm", experts_per_group_erm,
        "Two-stage recipe: restrict the class to the holdout-half per-group risk "
        "minimizers before the online run (standard bound formula; no sharper constant claimed)");

    // --- realizable ---
    CommonOptions realizable_opt;
    CLI::App* realizable = app.add_subcommand(
        "realizable", "Per-group consistent fits combined by a majority vote (binary labels)");
    add_instance_options(*realizable, realizable_opt);

    // --- compare ---
    CommonOptions compare_opt;
    std::string compare_schedule = "small";
    double compare_gamma = 1.0;
    double compare_eps = 0.1;
    std::optional<double> compare_d;
    CLI::App* compare =
        app.add_subcommand("compare", "Run all three algorithms on one sample, side by side");
    add_instance_options(*compare, compare_opt);
    compare->add_option("--schedule", compare_schedule, "Slack schedule for the list learner")
        ->capture_default_str();
    compare->add_option("--gamma", compare_gamma, "Group-size threshold for the large schedules")
        ->capture_default_str();
    compare->add_option("--eps", compare_eps, "Slack for the constant schedule")
        ->capture_default_str();
    compare->add_option("--d", compare_d, "Pseudo-dimension for the pseudodim schedule");

    // --- fixtures ---
    std::string fixture_name;
    std::string fixture_out = "fixtures-out";
    std::string fixture_eps = "1/10";
    std::uint64_t fixture_seed = 0;
    CLI::App* fixtures =
        app.add_subcommand("fixtures", "Exact counterexample instances: emit or verify");
    CLI::App* femit = fixtures->add_subcommand("emit", "Write instance JSON files");
    femit->add_option("--name", fixture_name, "prop45, prop45-scenario2, prop52, propC2, overlap")
        ->required();
    femit->add_option("--out", fixture_out, "Output directory")->capture_default_str();
    femit->add_option("--eps", fixture_eps, "Parameter for propC2 (rational, e.g. 1/10)")
        ->capture_default_str();
    femit->add_option("--seed", fixture_seed, "Seed for the overlap instance")
        ->capture_default_str();
    CLI::App* fverify =
        fixtures->add_subcommand("verify", "Run the exact checks; nonzero exit on any violation");
    fverify->add_option("--name", fixture_name, "prop45, prop45-scenario2, prop52, propC2, overlap")
        ->required();
    fverify->add_option("--eps", fixture_eps, "Parameter for propC2 (rational, e.g. 1/10)")
        ->capture_default_str();
    fverify->add_option("--seed", fixture_seed, "Seed for the overlap instance")
        ->capture_default_str();
    fixtures->require_subcommand(1);

    // --- bounds ---
    std::string bounds_kind = "deviation";
    std::int64_t bounds_hyps = 2, bounds_groups = 2, bounds_n = 1000, bounds_count = 1000;
    double bounds_delta = 0.1, bounds_gamma = 1.0, bounds_risk = 1.0, bounds_d = 1.0,
           bounds_alpha = 1.0;
    CLI::App* bounds = app.add_subcommand("bounds", "Print guarantee values for given parameters");
    bounds->add_option("--kind", bounds_kind,
                       "deviation, deviation-pseudodim, prepend-small, prepend-finite, "
                       "prepend-pseudodim, experts, realizable")
        ->capture_default_str();
    bounds->add_option("--hyps", bounds_hyps, "|H|")->capture_default_str();
    bounds->add_option("--groups", bounds_groups, "|G|")->capture_default_str();
    bounds->add_option("--delta", bounds_delta, "Failure probability")->capture_default_str();
    bounds->add_option("--gamma", bounds_gamma, "Group-size threshold")->capture_default_str();
    bounds->add_option("--n", bounds_n, "Sample size")->capture_default_str();
    bounds->add_option("--count", bounds_count, "In-sample group count")->capture_default_str();
    bounds->add_option("--empirical-risk", bounds_risk, "Empirical risk for the sharper branch")
        ->capture_default_str();
    bounds->add_option("--d", bounds_d, "Pseudo-dimension")->capture_default_str();
    bounds->add_option("--alpha", bounds_alpha, "Best single-hypothesis empirical risk")
        ->capture_default_str();

    // --- run ---
    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("--config", config_path, "Config file (schema \"1\")")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepend->parsed()) {
            mg::ExperimentConfig cfg;
            cfg.algorithm = mg::AlgorithmKind::Prepend;
            apply_common(cfg, prepend_opt);
            cfg.schedule = mg::schedule_from_string(prepend_schedule);
            cfg.gamma = prepend_gamma;
            cfg.eps = prepend_eps;
            cfg.d = prepend_d;
            return run_and_report(cfg);
        }
        if (experts->parsed()) {
            mg::ExperimentConfig cfg;
            cfg.algorithm = mg::AlgorithmKind::Experts;
            apply_common(cfg, experts_opt);
            cfg.catch_all = experts_catch_all;
            cfg.per_group_erm = experts_per_group_erm;
            return run_and_report(cfg);
        }
        if (realizable->parsed()) {
            mg::ExperimentConfig cfg;
            cfg.algorithm = mg::AlgorithmKind::Realizable;
            apply_common(cfg, realizable_opt);
            return run_and_report(cfg);
        }
        if (compare->parsed()) {
            mg::ExperimentConfig cfg;
            cfg.algorithm = mg::AlgorithmKind::Prepend;  // schedule source for the list column
            apply_common(cfg, compare_opt);
            cfg.schedule = mg::schedule_from_string(compare_schedule);
            cfg.gamma = compare_gamma;
            cfg.eps = compare_eps;
            cfg.d = compare_d;
            const mg::ComparisonResult result = mg::compare_algorithms(cfg);
            std::printf("%s", mg::comparison_csv(result).c_str());
            if (!cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir);
                mg::save_json(mg::comparison_json(result), cfg.out_dir / "comparison.json");
                std::ofstream csv(cfg.out_dir / "comparison.csv");
                csv << mg::comparison_csv(result);
                std::printf("wrote %s and %s\n", (cfg.out_dir / "comparison.json").c_str(),
                            (cfg.out_dir / "comparison.csv").c_str());
            }
            return 0;
        }
        if (fixtures->parsed()) {
            if (femit->parsed()) return fixtures_emit(fixture_name, fixture_out, fixture_eps,
                                                      fixture_seed);
            return fixtures_verify(fixture_name, fixture_eps, fixture_seed);
        }
        if (bounds->parsed()) {
            return print_bounds(bounds_kind, bounds_hyps, bounds_groups, bounds_delta,
                                bounds_gamma, bounds_n, bounds_count, bounds_risk, bounds_d,
                                bounds_alpha);
        }
        if (run->parsed()) {
            const mg::ExperimentConfig cfg = mg::config_from_json(mg::load_json(config_path));
            return run_and_report(cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
