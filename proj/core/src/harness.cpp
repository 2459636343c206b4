#include "multigroup/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "multigroup/experts.hpp"
#include "multigroup/fixtures.hpp"
#include "multigroup/majority.hpp"
#include "multigroup/risk.hpp"
#include "multigroup/rng.hpp"
#include "multigroup/serialize.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Enum names and configuration
//===----------------------------------------------------------------------===//

std::string to_string(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::Prepend: return "prepend";
        case AlgorithmKind::Experts: return "experts";
        case AlgorithmKind::Realizable: return "realizable";
    }
    throw std::logic_error("unknown algorithm kind");
}

AlgorithmKind algorithm_from_string(const std::string& name) {
    if (name == "prepend") return AlgorithmKind::Prepend;
    if (name == "experts") return AlgorithmKind::Experts;
    if (name == "realizable") return AlgorithmKind::Realizable;
    throw std::invalid_argument("unknown algorithm '" + name +
                                "' (expected prepend, experts or realizable)");
}

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::Constant: return "constant";
        case ScheduleKind::SmallGroups: return "small";
        case ScheduleKind::LargeGroupsFinite: return "finite";
        case ScheduleKind::LargeGroupsPseudodim: return "pseudodim";
    }
    throw std::logic_error("unknown schedule kind");
}

ScheduleKind schedule_from_string(const std::string& name) {
    if (name == "constant") return ScheduleKind::Constant;
    if (name == "small") return ScheduleKind::SmallGroups;
    if (name == "finite") return ScheduleKind::LargeGroupsFinite;
    if (name == "pseudodim") return ScheduleKind::LargeGroupsPseudodim;
    throw std::invalid_argument("unknown schedule '" + name +
                                "' (expected constant, small, finite or pseudodim)");
}

const std::vector<std::string> kFixtureNames = {"prop45", "prop45-scenario2", "prop52", "propC2",
                                                "overlap"};

void ExperimentConfig::validate() const {
    if (schema != "1") throw std::invalid_argument("config: unsupported schema '" + schema + "'");
    const bool has_fixture = !fixture.empty();
    const bool has_files = !dist_file.empty() || !hyp_file.empty() || !group_file.empty();
    if (has_fixture == has_files) {
        throw std::invalid_argument(
            "config: exactly one instance source required (fixture, or dist+hypotheses+groups)");
    }
    if (has_fixture &&
        std::find(kFixtureNames.begin(), kFixtureNames.end(), fixture) == kFixtureNames.end()) {
        std::string known;
        for (const std::string& f : kFixtureNames) known += (known.empty() ? "" : ", ") + f;
        throw std::invalid_argument("config: unknown fixture '" + fixture + "' (known: " + known +
                                    ")");
    }
    if (has_files && (dist_file.empty() || hyp_file.empty() || group_file.empty())) {
        throw std::invalid_argument("config: dist, hypotheses and groups files are all required");
    }
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta outside (0,1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("config: gamma outside (0,1]");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (!(eps >= 0.0)) throw std::invalid_argument("config: eps must be >= 0");
    if (schedule == ScheduleKind::LargeGroupsPseudodim && !d.has_value()) {
        throw std::invalid_argument("config: the pseudodim schedule requires d");
    }
    if (d.has_value() && !(*d >= 0.0)) throw std::invalid_argument("config: d must be >= 0");
    if (!(min_satisfaction >= 0.0 && min_satisfaction <= 1.0)) {
        throw std::invalid_argument("config: min_satisfaction outside [0,1]");
    }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    ExperimentConfig cfg;
    cfg.schema = j.value("schema", std::string("1"));
    if (!j.contains("algorithm")) throw std::invalid_argument("config: missing 'algorithm'");
    cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    cfg.fixture = j.value("fixture", std::string());
    cfg.dist_file = j.value("dist", std::string());
    cfg.hyp_file = j.value("hypotheses", std::string());
    cfg.group_file = j.value("groups", std::string());
    cfg.n = j.value("n", std::int64_t{1000});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.delta = j.value("delta", 0.1);
    cfg.gamma = j.value("gamma", 1.0);
    cfg.schedule = schedule_from_string(j.value("schedule", std::string("small")));
    cfg.eps = j.value("eps", 0.1);
    if (j.contains("d")) cfg.d = j.at("d").get<double>();
    cfg.trials = j.value("trials", 1);
    cfg.catch_all = j.value("catch_all", false);
    cfg.per_group_erm = j.value("per_group_erm", false);
    cfg.min_satisfaction = j.value("min_satisfaction", 1.0);
    cfg.out_dir = j.value("out_dir", std::string());
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j{{"schema", cfg.schema},
                     {"algorithm", to_string(cfg.algorithm)},
                     {"n", cfg.n},
                     {"seed", cfg.seed},
                     {"delta", cfg.delta},
                     {"gamma", cfg.gamma},
                     {"schedule", to_string(cfg.schedule)},
                     {"eps", cfg.eps},
                     {"trials", cfg.trials},
                     {"catch_all", cfg.catch_all},
                     {"per_group_erm", cfg.per_group_erm},
                     {"min_satisfaction", cfg.min_satisfaction}};
    if (!cfg.fixture.empty()) j["fixture"] = cfg.fixture;
    if (!cfg.dist_file.empty()) j["dist"] = cfg.dist_file.string();
    if (!cfg.hyp_file.empty()) j["hypotheses"] = cfg.hyp_file.string();
    if (!cfg.group_file.empty()) j["groups"] = cfg.group_file.string();
    if (cfg.d.has_value()) j["d"] = *cfg.d;
    if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir.string();
    return j;
}

//===----------------------------------------------------------------------===//
// Instance resolution
//===----------------------------------------------------------------------===//

namespace {

InstanceBundle bundle_from_exact(const ExactInstance& inst) {
    InstanceBundle b;
    b.dist = to_float(inst.dist, inst.label_names);
    b.H = inst.H;
    b.G = inst.G;
    b.loss = LossSpec::zero_one(static_cast<int>(inst.loss.size()));
    b.source = inst.name;
    return b;
}

Rat rat_from_double(double v) {
    constexpr long long kScale = 1'000'000'000;
    const double scaled = v * static_cast<double>(kScale);
    if (!(std::abs(scaled) < 9.2e18)) throw std::invalid_argument("value out of rational range");
    return Rat(static_cast<long long>(std::llround(scaled)), kScale);
}

}  // namespace

InstanceBundle resolve_instance(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.fixture.empty()) {
        InstanceBundle b;
        b.dist = distribution_from_json(load_json(cfg.dist_file));
        b.H = hypotheses_from_json(load_json(cfg.hyp_file));
        b.G = groups_from_json(load_json(cfg.group_file));
        for (int h = 0; h < b.H.size(); ++h) {
            if (static_cast<int>(b.H[h].outputs.size()) != b.dist.num_points()) {
                throw std::invalid_argument("instance: hypothesis '" + b.H.name_of(h) +
                                            "' length does not match the domain");
            }
        }
        for (int g = 0; g < b.G.size(); ++g) {
            if (b.G[g].domain_size() != b.dist.num_points()) {
                throw std::invalid_argument("instance: group '" + b.G.name_of(g) +
                                            "' length does not match the domain");
            }
        }
        int num_predictions = b.dist.num_labels();
        for (int h = 0; h < b.H.size(); ++h) {
            for (PredictionId z : b.H[h].outputs) num_predictions = std::max(num_predictions, z + 1);
        }
        b.loss = LossSpec::zero_one(num_predictions);
        b.source = cfg.dist_file.string() + " + " + cfg.hyp_file.string() + " + " +
                   cfg.group_file.string();
        return b;
    }
    if (cfg.fixture == "prop45") return bundle_from_exact(build_twin_scenarios().first);
    if (cfg.fixture == "prop45-scenario2") return bundle_from_exact(build_twin_scenarios().second);
    if (cfg.fixture == "prop52") return bundle_from_exact(build_majority_vote_counterexample());
    if (cfg.fixture == "propC2") {
        return bundle_from_exact(build_multiaccuracy_gap(rat_from_double(cfg.eps)).inst);
    }
    if (cfg.fixture == "overlap") {
        const OverlapInstance inst = generate_overlap_instance(cfg.seed);
        InstanceBundle b;
        b.dist = inst.dist;
        b.H = inst.H;
        b.G = inst.G;
        b.loss = LossSpec::zero_one(2);
        b.source = "overlap(seed=" + std::to_string(inst.seed) + ")";
        return b;
    }
    throw std::invalid_argument("config: unknown fixture '" + cfg.fixture + "'");
}

//===----------------------------------------------------------------------===//
// Trial execution
//===----------------------------------------------------------------------===//

namespace {

constexpr double kBoundTolerance = 1e-12;
constexpr double kEmpiricalTolerance = 1e-9;

// Predictor adapter over a point -> prediction table.
struct LookupPredictor {
    std::vector<PredictionId> outputs;
    PredictionId operator()(PointId x) const { return outputs[static_cast<std::size_t>(x)]; }
};

std::string describe_bound(const ExperimentConfig& cfg) {
    switch (cfg.algorithm) {
        case AlgorithmKind::Prepend:
            switch (cfg.schedule) {
                case ScheduleKind::Constant:
                    return "empirical excess <= eps (constant slack; empirical criterion)";
                case ScheduleKind::SmallGroups:
                    return "population excess <= 2 * eps_n(g), "
                           "eps_n(g) = 9 sqrt((2(|G|+1) log(|H||G|) + log(8/delta)) / #)";
                case ScheduleKind::LargeGroupsFinite:
                    return "population excess <= 22 (log(8|G||H|/delta) / (gamma #))^(1/3) "
                           "for groups with # >= gamma n";
                case ScheduleKind::LargeGroupsPseudodim:
                    return "population excess <= 28 (d log(16n/delta) / (gamma #))^(1/3) "
                           "for groups with # >= gamma n";
            }
            break;
        case AlgorithmKind::Experts:
            return "population excess <= 60 sqrt(D/#) + 16 D/#, "
                   "D = 2 log(|G||H|) + log(64/delta)";
        case AlgorithmKind::Realizable:
            return "population risk <= 16 (2 log(|G|^2 |H|) + log(8/delta)) / #";
    }
    throw std::logic_error("describe_bound: unknown configuration");
}

// Fills the count/weight and benchmark columns shared by every algorithm.
void fill_shared_columns(ReportRow& row, const Group& g, const Sample& s,
                         const InstanceBundle& bundle) {
    row.count = group_count(s, g);
    row.weight = empirical_group_weight(s, g);
    row.empirical_benchmark = empirical_benchmark_risk(bundle.H, g, s, bundle.loss);
    row.population_benchmark = population_benchmark_risk(bundle.H, g, bundle.dist, bundle.loss);
}

void finish_excess_columns(ReportRow& row) {
    row.empirical_excess = row.empirical_risk - row.empirical_benchmark;
    row.population_excess = row.population_risk - row.population_benchmark;
}

TrialReport run_prepend_trial(const ExperimentConfig& cfg, const InstanceBundle& bundle,
                              const Sample& s) {
    TrialReport report;

    // Active family: sampled groups, and for the large-group schedules only
    // those meeting the gamma n threshold.
    std::vector<int> active;
    const bool large = cfg.schedule == ScheduleKind::LargeGroupsFinite ||
                       cfg.schedule == ScheduleKind::LargeGroupsPseudodim;
    if (large) {
        active = filter_group_indices(bundle.G, s, cfg.gamma);
    } else {
        for (int g = 0; g < bundle.G.size(); ++g) {
            if (group_count(s, bundle.G[g]) >= 1) active.push_back(g);
        }
    }
    GroupFamily G_active;
    for (int g : active) {
        G_active.groups.push_back(bundle.G[g]);
        G_active.names.push_back(bundle.G.name_of(g));
    }

    EpsilonSchedule schedule;
    switch (cfg.schedule) {
        case ScheduleKind::Constant:
            schedule = EpsilonSchedule::constant(cfg.eps);
            break;
        case ScheduleKind::SmallGroups:
            schedule = EpsilonSchedule::small_groups(bundle.H.size(), bundle.G.size(), cfg.delta);
            break;
        case ScheduleKind::LargeGroupsFinite:
            schedule = EpsilonSchedule::large_groups_finite(bundle.H.size(), bundle.G.size(),
                                                            cfg.delta, cfg.gamma, s.size());
            break;
        case ScheduleKind::LargeGroupsPseudodim:
            schedule = EpsilonSchedule::large_groups_pseudodim(*cfg.d, cfg.delta, cfg.gamma,
                                                               s.size());
            break;
    }

    const PrependTrace trace = run_prepend(bundle.H, G_active, s, bundle.loss, schedule);
    DecisionListPredictor predictor{&trace.final_list, &bundle.H, &G_active};

    report.rounds = static_cast<int>(trace.rounds.size());
    report.overall_empirical_risk = empirical_risk(predictor, s, bundle.loss);

    const double n_hg = static_cast<double>(bundle.G.size()) * static_cast<double>(bundle.H.size());
    for (int g = 0; g < bundle.G.size(); ++g) {
        const std::int64_t count = group_count(s, bundle.G[g]);
        if (count < 1) {
            report.excluded_groups.push_back(bundle.G.name_of(g));
            continue;
        }
        ReportRow row;
        row.group = bundle.G.name_of(g);
        fill_shared_columns(row, bundle.G[g], s, bundle);
        row.empirical_risk = empirical_conditional_risk(predictor, bundle.G[g], s, bundle.loss);
        row.population_risk =
            population_conditional_risk(predictor, bundle.G[g], bundle.dist, bundle.loss);
        finish_excess_columns(row);

        const bool is_active = std::find(active.begin(), active.end(), g) != active.end();
        row.bound_applicable = is_active;
        row.bound = std::numeric_limits<double>::infinity();
        row.satisfied = true;
        if (is_active) {
            switch (cfg.schedule) {
                case ScheduleKind::Constant:
                    row.bound = cfg.eps;
                    row.satisfied = row.empirical_excess <= row.bound + kEmpiricalTolerance;
                    break;
                case ScheduleKind::SmallGroups:
                    row.bound = 2.0 * epsilon_small_groups(bundle.H.size(), bundle.G.size(),
                                                           cfg.delta, count);
                    row.satisfied = row.population_excess <= row.bound + kBoundTolerance;
                    break;
                case ScheduleKind::LargeGroupsFinite:
                    row.bound = 22.0 * std::cbrt(std::log(8.0 * n_hg / cfg.delta) /
                                                 (cfg.gamma * static_cast<double>(count)));
                    row.satisfied = row.population_excess <= row.bound + kBoundTolerance;
                    break;
                case ScheduleKind::LargeGroupsPseudodim:
                    row.bound = 28.0 * std::cbrt(*cfg.d *
                                                 std::log(16.0 * static_cast<double>(s.size()) /
                                                          cfg.delta) /
                                                 (cfg.gamma * static_cast<double>(count)));
                    row.satisfied = row.population_excess <= row.bound + kBoundTolerance;
                    break;
            }
        }
        report.all_satisfied = report.all_satisfied && row.satisfied;
        report.rows.push_back(std::move(row));
    }

    // Emit the learned list with rule groups remapped to the full family's
    // indices, so the artifact matches the instance files.
    DecisionList emitted = trace.final_list;
    for (Rule& r : emitted.rules) r.group = active[static_cast<std::size_t>(r.group)];
    nlohmann::json named_rules = nlohmann::json::array();
    for (const Rule& r : emitted.rules) {
        named_rules.push_back(
            nlohmann::json::array({bundle.G.name_of(r.group), bundle.H.name_of(r.hyp)}));
    }
    nlohmann::json rounds = nlohmann::json::array();
    for (const PrependRound& r : trace.rounds) {
        rounds.push_back(nlohmann::json{{"group", G_active.name_of(r.group)},
                                        {"hypothesis", bundle.H.name_of(r.hyp)},
                                        {"violation", r.violation},
                                        {"overall_risk_after", r.overall_risk_after}});
    }
    report.detail = nlohmann::json{{"final_list", to_json(emitted)},
                                   {"final_list_named", std::move(named_rules)},
                                   {"default_hypothesis", bundle.H.name_of(emitted.default_hyp)},
                                   {"initial_risk", trace.alpha},
                                   {"epsilon_floor", trace.epsilon_floor},
                                   {"rounds", std::move(rounds)}};
    return report;
}

TrialReport run_experts_trial(const ExperimentConfig& cfg, const InstanceBundle& bundle,
                              const Sample& s, std::uint64_t algo_seed) {
    TrialReport report;

    // Optional two-stage recipe: reduce the class to the holdout-half
    // per-group risk minimizers before the online run.
    HypothesisClass H_run = bundle.H;
    nlohmann::json selected_hyps;
    if (cfg.per_group_erm) {
        Sample holdout;
        for (std::int64_t i = 1; i < s.size(); i += 2) {
            holdout.examples.push_back(s.examples[static_cast<std::size_t>(i)]);
        }
        std::vector<int> chosen;
        selected_hyps = nlohmann::json::object();
        for (int g = 0; g < bundle.G.size(); ++g) {
            if (group_count(holdout, bundle.G[g]) < 1) continue;
            const int h = empirical_erm_index_in_group(bundle.H, bundle.G[g], holdout, bundle.loss);
            selected_hyps[bundle.G.name_of(g)] = bundle.H.name_of(h);
            if (std::find(chosen.begin(), chosen.end(), h) == chosen.end()) chosen.push_back(h);
        }
        if (chosen.empty()) {
            throw std::runtime_error(
                "experts: per-group preselection found no group in the holdout half");
        }
        std::sort(chosen.begin(), chosen.end());
        HypothesisClass reduced;
        for (int h : chosen) {
            reduced.hypotheses.push_back(bundle.H[h]);
            reduced.names.push_back(bundle.H.name_of(h));
        }
        H_run = std::move(reduced);
    }

    const ReductionResult result =
        run_reduction(H_run, bundle.G, s, bundle.loss, algo_seed, cfg.catch_all);
    const GroupFamily& G_eff = result.effective_groups;

    report.rounds = static_cast<int>(result.hedge_size);

    // Expected per-point loss of Q against each label, from the averaged
    // hypothesis marginals; rows of zeros mark points no expert covers.
    const auto marginals = q_hypothesis_marginals(result.q, G_eff, bundle.dist.num_points());
    std::vector<std::vector<double>> q_loss(
        static_cast<std::size_t>(bundle.dist.num_points()),
        std::vector<double>(static_cast<std::size_t>(bundle.dist.num_labels()), 0.0));
    std::vector<bool> covered(static_cast<std::size_t>(bundle.dist.num_points()), false);
    for (int x = 0; x < bundle.dist.num_points(); ++x) {
        double total = 0.0;
        for (int h = 0; h < H_run.size(); ++h) {
            const double ph = marginals[static_cast<std::size_t>(x)][static_cast<std::size_t>(h)];
            if (ph == 0.0) continue;
            total += ph;
            const PredictionId z = H_run[h](x);
            for (int y = 0; y < bundle.dist.num_labels(); ++y) {
                q_loss[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] +=
                    ph * bundle.loss(z, y);
            }
        }
        covered[static_cast<std::size_t>(x)] = total > 0.0;
    }
    auto empirical_q_risk = [&](const Group* g) {
        double acc = 0.0;
        double weight = 0.0;
        for (std::int64_t i = 0; i < s.size(); ++i) {
            const Example& e = s.examples[static_cast<std::size_t>(i)];
            if (g != nullptr && !g->contains(e.x)) continue;
            if (!covered[static_cast<std::size_t>(e.x)]) continue;
            acc += s.weight(i) * q_loss[static_cast<std::size_t>(e.x)][static_cast<std::size_t>(e.y)];
            weight += s.weight(i);
        }
        return weight > 0.0 ? acc / weight : 0.0;
    };

    const double capacity = experts_capacity(H_run.size(), G_eff.size(), cfg.delta);
    for (int g = 0; g < G_eff.size(); ++g) {
        const std::int64_t count = group_count(s, G_eff[g]);
        if (count < 1) {
            report.excluded_groups.push_back(G_eff.name_of(g));
            continue;
        }
        ReportRow row;
        row.group = G_eff.name_of(g);
        fill_shared_columns(row, G_eff[g], s, bundle);
        row.empirical_risk = empirical_q_risk(&G_eff[g]);
        row.population_risk =
            exact_risk_of_Q(result.q, G_eff[g], bundle.dist, bundle.loss, H_run, G_eff);
        finish_excess_columns(row);
        row.bound_applicable = true;
        const double dc = capacity / static_cast<double>(count);
        row.bound = 60.0 * std::sqrt(dc) + 16.0 * dc;
        row.satisfied = row.population_excess <= row.bound + kBoundTolerance;
        report.all_satisfied = report.all_satisfied && row.satisfied;
        report.rows.push_back(std::move(row));
    }
    report.overall_empirical_risk = empirical_q_risk(nullptr);

    const auto regret = sleeping_regret_report(result.log, result.final_state);
    nlohmann::json regret_rows = nlohmann::json::array();
    int violations = 0;
    for (const RegretRow& r : regret) {
        violations += r.violated ? 1 : 0;
        regret_rows.push_back(nlohmann::json{{"hypothesis", H_run.name_of(r.hyp)},
                                             {"group", G_eff.name_of(r.group)},
                                             {"eta", r.eta},
                                             {"awake_regret", r.awake_regret},
                                             {"cum_loss", r.cum_loss},
                                             {"bound", r.bound},
                                             {"violated", r.violated}});
    }
    report.detail = nlohmann::json{{"hedge_rounds", result.hedge_size},
                                   {"holdout_size", result.holdout_size},
                                   {"regret_table", std::move(regret_rows)},
                                   {"regret_violations", violations}};
    if (cfg.per_group_erm) report.detail["per_group_erm_selection"] = std::move(selected_hyps);
    return report;
}

TrialReport run_realizable_trial(const ExperimentConfig& cfg, const InstanceBundle& bundle,
                                 const Sample& s) {
    TrialReport report;
    const MajorityPredictor fit = fit_consistent_majority(bundle.H, bundle.G, s);
    MajorityVotePredictor predictor{&fit, &bundle.H, &bundle.G};

    report.overall_empirical_risk = empirical_risk(predictor, s, bundle.loss);
    for (int g = 0; g < bundle.G.size(); ++g) {
        const std::int64_t count = group_count(s, bundle.G[g]);
        if (count < 1) {
            report.excluded_groups.push_back(bundle.G.name_of(g));
            continue;
        }
        ReportRow row;
        row.group = bundle.G.name_of(g);
        fill_shared_columns(row, bundle.G[g], s, bundle);
        row.empirical_risk = empirical_conditional_risk(predictor, bundle.G[g], s, bundle.loss);
        row.population_risk =
            population_conditional_risk(predictor, bundle.G[g], bundle.dist, bundle.loss);
        finish_excess_columns(row);
        row.bound_applicable = true;
        row.bound = realizable_excess_bound(bundle.H.size(), bundle.G.size(), cfg.delta, count);
        row.satisfied = row.population_risk <= row.bound + kBoundTolerance;
        report.all_satisfied = report.all_satisfied && row.satisfied;
        report.rows.push_back(std::move(row));
    }

    nlohmann::json assigned = nlohmann::json::object();
    for (int g = 0; g < bundle.G.size(); ++g) {
        assigned[bundle.G.name_of(g)] =
            bundle.H.name_of(fit.assigned_hyp[static_cast<std::size_t>(g)]);
    }
    report.detail = nlohmann::json{{"assigned_hypotheses", std::move(assigned)}};
    return report;
}

TrialReport run_trial(const ExperimentConfig& cfg, const InstanceBundle& bundle, int trial) {
    const RngStream root(cfg.seed);
    RngStream trial_root = root.stream("trial/" + std::to_string(trial));
    RngStream draw = trial_root.stream("draw");
    const Sample s = draw_sample(bundle.dist, cfg.n, draw, &bundle.G);

    TrialReport report;
    switch (cfg.algorithm) {
        case AlgorithmKind::Prepend:
            report = run_prepend_trial(cfg, bundle, s);
            break;
        case AlgorithmKind::Experts:
            report = run_experts_trial(cfg, bundle, s, trial_root.stream("algo").next_u64());
            break;
        case AlgorithmKind::Realizable:
            report = run_realizable_trial(cfg, bundle, s);
            break;
    }
    report.trial = trial;
    return report;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

int thread_budget() {
    if (const char* env = std::getenv("MULTIGROUP_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw std::invalid_argument("MULTIGROUP_THREADS is not an integer");
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    const InstanceBundle bundle = resolve_instance(cfg);

    ExperimentResult result;
    result.cfg = cfg;
    result.instance_source = bundle.source;
    result.bound_description = describe_bound(cfg);
    result.trials.resize(static_cast<std::size_t>(cfg.trials));

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.trials));
    const int workers = std::min(thread_budget(), cfg.trials);
    if (workers <= 1) {
        for (int i = 0; i < cfg.trials; ++i) {
            result.trials[static_cast<std::size_t>(i)] = run_trial(cfg, bundle, i);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1)) {
                    try {
                        result.trials[static_cast<std::size_t>(i)] = run_trial(cfg, bundle, i);
                    } catch (...) {
                        errors[static_cast<std::size_t>(i)] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (int i = 0; i < cfg.trials; ++i) {  // deterministic: earliest trial's error wins
            if (errors[static_cast<std::size_t>(i)]) {
                try {
                    std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
                } catch (const std::exception& e) {
                    throw std::runtime_error("trial " + std::to_string(i) + ": " + e.what());
                }
            }
        }
    }

    int satisfied = 0;
    for (const TrialReport& t : result.trials) satisfied += t.all_satisfied ? 1 : 0;
    result.satisfaction_frequency =
        static_cast<double>(satisfied) / static_cast<double>(cfg.trials);
    result.all_pass = result.satisfaction_frequency >= cfg.min_satisfaction - 1e-12;
    result.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        save_json(report_json(result), cfg.out_dir / "report.json");
        std::ofstream csv(cfg.out_dir / "report.csv");
        if (!csv) throw std::runtime_error("cannot open for writing: " +
                                           (cfg.out_dir / "report.csv").string());
        csv << report_csv(result);
        if (!csv) throw std::runtime_error("write failed: " +
                                           (cfg.out_dir / "report.csv").string());
    }
    return result;
}

nlohmann::json report_json(const ExperimentResult& result) {
    nlohmann::json trials = nlohmann::json::array();
    for (const TrialReport& t : result.trials) {
        nlohmann::json rows = nlohmann::json::array();
        for (const ReportRow& r : t.rows) {
            rows.push_back(nlohmann::json{{"group", r.group},
                                          {"count", r.count},
                                          {"weight", r.weight},
                                          {"empirical_risk", r.empirical_risk},
                                          {"population_risk", r.population_risk},
                                          {"empirical_benchmark", r.empirical_benchmark},
                                          {"population_benchmark", r.population_benchmark},
                                          {"empirical_excess", r.empirical_excess},
                                          {"population_excess", r.population_excess},
                                          {"bound", r.bound_applicable
                                                        ? nlohmann::json(r.bound)
                                                        : nlohmann::json(nullptr)},
                                          {"bound_applicable", r.bound_applicable},
                                          {"satisfied", r.satisfied}});
        }
        trials.push_back(nlohmann::json{{"trial", t.trial},
                                        {"rows", std::move(rows)},
                                        {"excluded_groups", t.excluded_groups},
                                        {"rounds", t.rounds},
                                        {"overall_empirical_risk", t.overall_empirical_risk},
                                        {"all_satisfied", t.all_satisfied},
                                        {"detail", t.detail}});
    }
    return nlohmann::json{{"schema", "1"},
                          {"config", to_json(result.cfg)},
                          {"instance", result.instance_source},
                          {"bound_description", result.bound_description},
                          {"trials", std::move(trials)},
                          {"satisfaction_frequency", result.satisfaction_frequency},
                          {"all_pass", result.all_pass},
                          {"elapsed_ms", result.elapsed_ms}};
}

std::string report_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "trial,group,count,weight,empirical_risk,population_risk,empirical_benchmark,"
           "population_benchmark,empirical_excess,population_excess,bound,bound_applicable,"
           "satisfied\n";
    for (const TrialReport& t : result.trials) {
        for (const ReportRow& r : t.rows) {
            out << t.trial << ',' << r.group << ',' << r.count << ',' << format_double(r.weight)
                << ',' << format_double(r.empirical_risk) << ','
                << format_double(r.population_risk) << ',' << format_double(r.empirical_benchmark)
                << ',' << format_double(r.population_benchmark) << ','
                << format_double(r.empirical_excess) << ',' << format_double(r.population_excess)
                << ',' << (r.bound_applicable ? format_double(r.bound) : std::string()) << ','
                << (r.bound_applicable ? 1 : 0) << ',' << (r.satisfied ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

//===----------------------------------------------------------------------===//
// Side-by-side comparison
//===----------------------------------------------------------------------===//

ComparisonResult compare_algorithms(const ExperimentConfig& cfg) {
    cfg.validate();
    const InstanceBundle bundle = resolve_instance(cfg);

    ComparisonResult result;
    result.instance_source = bundle.source;
    result.algorithms = {AlgorithmKind::Prepend, AlgorithmKind::Experts,
                         AlgorithmKind::Realizable};
    for (int g = 0; g < bundle.G.size(); ++g) result.groups.push_back(bundle.G.name_of(g));
    result.cells.assign(result.groups.size(),
                        std::vector<ComparisonCell>(result.algorithms.size()));

    for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
        ExperimentConfig one = cfg;
        one.algorithm = result.algorithms[a];
        one.trials = 1;
        one.out_dir.clear();
        TrialReport trial;
        try {
            trial = run_trial(one, bundle, 0);
        } catch (const NotGroupRealizableError&) {
            for (std::size_t g = 0; g < result.groups.size(); ++g) {
                result.cells[g][a].refused = true;
            }
            continue;
        }
        for (const ReportRow& row : trial.rows) {
            const auto it = std::find(result.groups.begin(), result.groups.end(), row.group);
            if (it == result.groups.end()) continue;  // e.g. the experts catch-all group
            ComparisonCell& cell = result.cells[static_cast<std::size_t>(
                std::distance(result.groups.begin(), it))][a];
            cell.empirical_excess = row.empirical_excess;
            cell.population_excess = row.population_excess;
            cell.bound = row.bound;
            cell.bound_applicable = row.bound_applicable;
        }
    }
    return result;
}

nlohmann::json comparison_json(const ComparisonResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        nlohmann::json row{{"group", result.groups[g]}};
        for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
            const ComparisonCell& cell = result.cells[g][a];
            const std::string name = to_string(result.algorithms[a]);
            if (cell.refused) {
                row[name] = "refused";
            } else {
                row[name] = nlohmann::json{{"empirical_excess", cell.empirical_excess},
                                           {"population_excess", cell.population_excess},
                                           {"bound", cell.bound_applicable
                                                         ? nlohmann::json(cell.bound)
                                                         : nlohmann::json(nullptr)}};
            }
        }
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"schema", "1"},
                          {"instance", result.instance_source},
                          {"rows", std::move(rows)}};
}

std::string comparison_csv(const ComparisonResult& result) {
    std::ostringstream out;
    out << "group";
    for (AlgorithmKind a : result.algorithms) {
        const std::string name = to_string(a);
        out << ',' << name << "_empirical_excess," << name << "_population_excess," << name
            << "_bound";
    }
    out << '\n';
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        out << result.groups[g];
        for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
            const ComparisonCell& cell = result.cells[g][a];
            if (cell.refused) {
                out << ",refused,refused,refused";
            } else {
                out << ',' << format_double(cell.empirical_excess) << ','
                    << format_double(cell.population_excess) << ','
                    << (cell.bound_applicable ? format_double(cell.bound) : std::string());
            }
        }
        out << '\n';
    }
    return out.str();
}

//===----------------------------------------------------------------------===//
// CSV ingestion
//===----------------------------------------------------------------------===//

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        // Trim surrounding whitespace.
        const auto begin = cell.find_first_not_of(" \t");
        const auto end = cell.find_last_not_of(" \t");
        cells.push_back(begin == std::string::npos ? std::string()
                                                   : cell.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

[[noreturn]] void ingest_fail(const std::filesystem::path& path, int line, const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path, const IngestSchema& schema) {
    if (schema.label_names.empty()) {
        throw std::invalid_argument("ingest_csv: the schema must declare the label set");
    }
    const bool feature_mode = schema.point_column.empty();
    if (feature_mode && schema.feature_columns.empty()) {
        throw std::invalid_argument("ingest_csv: need a point column or feature columns");
    }
    if (feature_mode && schema.grid < 1) {
        throw std::invalid_argument("ingest_csv: grid must be >= 1");
    }

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::runtime_error(path.string() + ": missing column '" + name + "'");
        }
        return static_cast<int>(std::distance(header.begin(), it));
    };

    const int label_col = column_index(schema.label_column);
    std::vector<int> group_cols;
    std::vector<std::string> group_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].rfind(schema.group_prefix, 0) == 0) {
            group_cols.push_back(static_cast<int>(c));
            group_names.push_back(header[c]);
        }
    }
    int point_col = -1;
    std::vector<int> feature_cols;
    if (feature_mode) {
        for (const std::string& f : schema.feature_columns) feature_cols.push_back(column_index(f));
    } else {
        point_col = column_index(schema.point_column);
    }

    // Pass 1: parse every row.
    struct RawRow {
        int line = 0;
        std::int64_t point = -1;
        std::vector<double> features;
        LabelId label = 0;
        std::vector<bool> in_group;
    };
    std::vector<RawRow> raw;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            ingest_fail(path, line_no, "expected " + std::to_string(header.size()) +
                                           " columns, found " + std::to_string(cells.size()));
        }
        RawRow row;
        row.line = line_no;
        const std::string& label_text = cells[static_cast<std::size_t>(label_col)];
        const auto label_it =
            std::find(schema.label_names.begin(), schema.label_names.end(), label_text);
        if (label_it == schema.label_names.end()) {
            ingest_fail(path, line_no, "label '" + label_text + "' outside the declared set");
        }
        row.label = static_cast<LabelId>(std::distance(schema.label_names.begin(), label_it));
        try {
            if (feature_mode) {
                for (int c : feature_cols) {
                    row.features.push_back(std::stod(cells[static_cast<std::size_t>(c)]));
                }
            } else {
                row.point = std::stoll(cells[static_cast<std::size_t>(point_col)]);
                if (row.point < 0) ingest_fail(path, line_no, "negative point id");
            }
            for (int c : group_cols) {
                const std::string& v = cells[static_cast<std::size_t>(c)];
                if (v != "0" && v != "1") {
                    ingest_fail(path, line_no, "group column '" +
                                                   header[static_cast<std::size_t>(c)] +
                                                   "' must be 0 or 1, found '" + v + "'");
                }
                row.in_group.push_back(v == "1");
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            ingest_fail(path, line_no, "malformed row '" + line + "'");
        }
        raw.push_back(std::move(row));
    }
    if (raw.empty()) throw std::runtime_error(path.string() + ": no data rows");

    // Resolve point ids: either direct, or grid cells over min-max
    // normalized features.
    IngestResult result;
    if (feature_mode) {
        const std::size_t dims = feature_cols.size();
        std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
        std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
        for (const RawRow& row : raw) {
            for (std::size_t j = 0; j < dims; ++j) {
                lo[j] = std::min(lo[j], row.features[j]);
                hi[j] = std::max(hi[j], row.features[j]);
            }
        }
        std::int64_t domain = 1;
        for (std::size_t j = 0; j < dims; ++j) domain *= schema.grid;
        if (domain > 1'000'000) {
            throw std::invalid_argument("ingest_csv: grid^features exceeds 1e6 points");
        }
        result.num_points = static_cast<int>(domain);
        for (RawRow& row : raw) {
            std::int64_t id = 0;
            for (std::size_t j = 0; j < dims; ++j) {
                int cell = 0;
                if (hi[j] > lo[j]) {
                    const double u = (row.features[j] - lo[j]) / (hi[j] - lo[j]);
                    cell = std::min(schema.grid - 1,
                                    static_cast<int>(u * static_cast<double>(schema.grid)));
                }
                id = id * schema.grid + cell;
            }
            row.point = id;
        }
    } else {
        std::int64_t max_id = 0;
        for (const RawRow& row : raw) max_id = std::max(max_id, row.point);
        if (max_id >= 1'000'000) {
            throw std::invalid_argument("ingest_csv: point ids exceed 1e6");
        }
        result.num_points = static_cast<int>(max_id) + 1;
    }

    // A point belongs to a group when any of its rows does.
    std::vector<std::vector<std::uint8_t>> indicators(
        group_cols.size(), std::vector<std::uint8_t>(static_cast<std::size_t>(result.num_points), 0));
    for (const RawRow& row : raw) {
        for (std::size_t gi = 0; gi < group_cols.size(); ++gi) {
            if (row.in_group[gi]) {
                indicators[gi][static_cast<std::size_t>(row.point)] = 1;
            }
        }
    }

    std::int64_t index = 0;
    for (const RawRow& row : raw) {
        result.sample.examples.push_back(
            Example{index++, static_cast<PointId>(row.point), row.label});
    }

    GroupFamily all;
    for (std::size_t gi = 0; gi < group_cols.size(); ++gi) {
        all.groups.emplace_back(std::move(indicators[gi]));
        all.names.push_back(group_names[gi]);
    }
    for (int g = 0; g < all.size(); ++g) {
        if (group_count(result.sample, all[g]) == 0) {
            result.excluded_groups.push_back(all.name_of(g));
            result.warnings.push_back("group '" + all.name_of(g) +
                                      "' has no sample points; excluded");
            continue;
        }
        result.groups.groups.push_back(all[g]);
        result.groups.names.push_back(all.name_of(g));
    }
    if (result.groups.size() > 0) cache_group_counts(result.sample, result.groups);
    return result;
}

}  // namespace multigroup
