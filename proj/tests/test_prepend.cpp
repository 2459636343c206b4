// Prepend loop and slack schedules: frozen schedule values, the gamma-n
// precondition, two fully hand-traced runs, termination under a zero slack,
// the round-count cap, and the per-group guarantee on random instances.

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "multigroup/fixtures.hpp"
#include "multigroup/prepend.hpp"
#include "multigroup/risk.hpp"
#include "multigroup/rng.hpp"

#include "desk_instances.hpp"

using namespace multigroup;

namespace {

double worst_violation(const DecisionList& list, const HypothesisClass& H, const GroupFamily& G,
                       const Sample& s, const LossSpec& loss, const EpsilonSchedule& schedule) {
    const DecisionListPredictor f{&list, &H, &G};
    double worst = -1e300;
    for (int g = 0; g < G.size(); ++g) {
        const double lf = empirical_conditional_risk(f, G[g], s, loss);
        const double bench = empirical_benchmark_risk(H, G[g], s, loss);
        worst = std::max(worst, lf - bench - schedule.value(group_count(s, G[g])));
    }
    return worst;
}

}  // namespace

TEST_SUITE("prepend") {

TEST_CASE("slack formulas match independently computed values") {
    CHECK(epsilon_small_groups(2, 2, 0.05, 1000) ==
          doctest::Approx(1.0415508333913457).epsilon(1e-14));
    CHECK(epsilon_large_groups_finite(2, 2, 0.05, 0.25, 1.0, 4096, 1024) ==
          doctest::Approx(3.1981494066422176).epsilon(1e-14));
    CHECK(epsilon_large_groups_pseudodim(1.0, 0.05, 0.25, 4096, 1024) ==
          doctest::Approx(5.224705324626016).epsilon(1e-14));
}

TEST_CASE("the large-group slack at the threshold count equals its closed cap") {
    // At count = gamma n the (n/gamma)^(1/6)/sqrt(count) form collapses to
    // (log-term / (gamma count))^(1/3) times the constant.
    const double log_term = std::log(8.0 * 2.0 * 2.0 / 0.05);
    const double cap = std::pow(36.0, 2.0 / 3.0) * std::cbrt(log_term / (0.25 * 1024.0));
    CHECK(epsilon_large_groups_finite(2, 2, 0.05, 0.25, 1.0, 4096, 1024) ==
          doctest::Approx(cap).epsilon(1e-12));
    // Above the threshold the slack only shrinks, staying under the cap.
    CHECK(epsilon_large_groups_finite(2, 2, 0.05, 0.25, 1.0, 4096, 2048) < cap);
    CHECK(epsilon_large_groups_pseudodim(1.0, 0.05, 0.25, 4096, 1024) <=
          14.0 * std::cbrt(std::log(16.0 * 4096.0 / 0.05) / (0.25 * 1024.0)) + 1e-12);
}

TEST_CASE("large-group slacks refuse counts below gamma n") {
    CHECK_THROWS_AS(epsilon_large_groups_finite(2, 2, 0.05, 0.25, 1.0, 4096, 1023),
                    std::invalid_argument);
    CHECK_THROWS_AS(epsilon_large_groups_pseudodim(1.0, 0.05, 0.25, 4096, 1023),
                    std::invalid_argument);
    CHECK_THROWS_AS(epsilon_small_groups(2, 2, 0.05, 0), std::invalid_argument);
    CHECK_THROWS_AS(epsilon_small_groups(2, 2, -0.1, 10), std::invalid_argument);
}

TEST_CASE("schedule dispatch matches the free functions") {
    const EpsilonSchedule constant = EpsilonSchedule::constant(0.25);
    CHECK(constant.value(1) == 0.25);
    CHECK(constant.value(1000000) == 0.25);

    const EpsilonSchedule small = EpsilonSchedule::small_groups(3, 4, 0.1);
    CHECK(small.value(500) == epsilon_small_groups(3, 4, 0.1, 500));

    const EpsilonSchedule finite = EpsilonSchedule::large_groups_finite(3, 4, 0.1, 0.5, 2000, 0.7);
    CHECK(finite.value(1500) == epsilon_large_groups_finite(3, 4, 0.1, 0.5, 0.7, 2000, 1500));

    EpsilonSchedule unresolved = EpsilonSchedule::large_groups_finite(3, 4, 0.1, 0.5, 2000);
    CHECK_THROWS_AS(unresolved.value(1500), std::logic_error);  // alpha comes from the sample

    const EpsilonSchedule pd = EpsilonSchedule::large_groups_pseudodim(2.0, 0.1, 0.5, 2000);
    CHECK(pd.value(1500) == epsilon_large_groups_pseudodim(2.0, 0.1, 0.5, 2000, 1500));
}

TEST_CASE("group filtering keeps exactly the groups meeting the threshold") {
    const desk::Instance inst = desk::eight_point();
    const Sample s = draw_sample(inst.dist, 1000, RngStream(17), &inst.G);
    const auto kept = filter_group_indices(inst.G, s, 0.5);
    for (int g = 0; g < inst.G.size(); ++g) {
        const bool expected = static_cast<double>(group_count(s, inst.G[g])) >= 0.5 * 1000.0;
        const bool is_kept = std::find(kept.begin(), kept.end(), g) != kept.end();
        CHECK(is_kept == expected);
    }
    // gamma = 1 keeps only full-coverage groups; none here covers everything.
    CHECK(filter_group_indices(inst.G, s, 1.0).empty());
    const GroupFamily named = filter_groups(inst.G, s, 0.3);
    REQUIRE(static_cast<std::size_t>(named.size()) ==
            filter_group_indices(inst.G, s, 0.3).size());
}

TEST_CASE("two-point run: one corrective rule then a clean stop") {
    // Mass 3/4 on a (+1), 1/4 on b (-1); constants as hypotheses; groups are
    // everything and {b}. The initial minimizer is always-one; the only
    // violation is on {b}, fixed by one prepended rule.
    FiniteDistribution d;
    d.mass = {0.75, 0.25};
    d.label_dist = {{0.0, 1.0}, {1.0, 0.0}};
    d.labels = {"-1", "+1"};
    HypothesisClass H;
    H.hypotheses = {Hypothesis{{1, 1}}, Hypothesis{{0, 0}}};
    H.names = {"always-one", "always-zero"};
    GroupFamily G;
    G.groups = {all_ones_group(2), desk::make_group({1}, 2)};
    G.names = {"everything", "b-only"};
    const LossSpec loss = LossSpec::zero_one(2);
    const Sample s = exhaustive_weighted_sample(d, &G);

    const PrependTrace trace = run_prepend(H, G, s, loss, EpsilonSchedule::constant(0.01));
    CHECK(trace.final_list.default_hyp == 0);
    CHECK(trace.alpha == doctest::Approx(0.25).epsilon(1e-12));
    REQUIRE(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].group == 1);
    CHECK(trace.rounds[0].hyp == 1);
    CHECK(trace.rounds[0].violation == doctest::Approx(1.0 - 0.0 - 0.01).epsilon(1e-12));
    CHECK(trace.rounds[0].overall_risk_after == doctest::Approx(0.0).epsilon(1e-12));
    REQUIRE(trace.final_list.rules.size() == 1);
    CHECK(trace.final_list.rules[0] == Rule{1, 1});

    const DecisionListPredictor f{&trace.final_list, &H, &G};
    CHECK(empirical_conditional_risk(f, G[0], s, loss) == doctest::Approx(0.0));
    CHECK(empirical_conditional_risk(f, G[1], s, loss) == doctest::Approx(0.0));
}

TEST_CASE("twin-scenario run: initial minimizer, single prepend, stop") {
    const auto scenarios = build_twin_scenarios();
    const ExactInstance& s1 = scenarios.first;
    const FiniteDistribution dist = to_float(s1.dist, s1.label_names);
    const LossSpec loss = LossSpec::zero_one(dist.num_labels());
    const Sample s = exhaustive_weighted_sample(dist, &s1.G);

    const PrependTrace trace = run_prepend(s1.H, s1.G, s, loss, EpsilonSchedule::constant(0.01));
    // Initial: always-second-label has risk 7/12 < 2/3.
    CHECK(trace.final_list.default_hyp == 1);
    CHECK(trace.alpha == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
    // One round: the first group's conditional risk 7/8 exceeds its
    // benchmark 1/2, fixed by the first hypothesis.
    REQUIRE(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].group == 0);
    CHECK(trace.rounds[0].hyp == 0);
    CHECK(trace.rounds[0].violation == doctest::Approx(7.0 / 8.0 - 0.5 - 0.01).epsilon(1e-12));

    const DecisionListPredictor f{&trace.final_list, &s1.H, &s1.G};
    CHECK(empirical_conditional_risk(f, s1.G[0], s, loss) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(empirical_conditional_risk(f, s1.G[1], s, loss) ==
          doctest::Approx(3.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("a zero slack with nothing to fix stops immediately") {
    // Duplicate hypotheses: every violation is exactly zero, carrying no
    // progress, so the loop must not spin.
    FiniteDistribution d;
    d.mass = {0.5, 0.5};
    d.label_dist = {{0.0, 1.0}, {1.0, 0.0}};
    d.labels = {"0", "1"};
    HypothesisClass H;
    H.hypotheses = {Hypothesis{{1, 0}}, Hypothesis{{1, 0}}};
    GroupFamily G;
    G.groups = {all_ones_group(2)};
    const Sample s = exhaustive_weighted_sample(d, &G);

    const PrependTrace trace =
        run_prepend(H, G, s, LossSpec::zero_one(2), EpsilonSchedule::constant(0.0));
    CHECK(trace.rounds.empty());
    CHECK(trace.final_list.default_hyp == 0);
    CHECK(trace.epsilon_floor == 0.0);
}

TEST_CASE("a zero slack still terminates and achieves every attainable fix") {
    RngStream root(314);
    for (int trial = 0; trial < 20; ++trial) {
        const desk::Instance inst =
            desk::random_instance(root.stream("zero-eps").stream(trial), 8, 3, 3, 2);
        const Sample s =
            draw_sample(inst.dist, 150, root.stream("sample").stream(trial), &inst.G);
        GroupFamily active;
        for (int g = 0; g < inst.G.size(); ++g) {
            if (group_count(s, inst.G[g]) >= 1) {
                active.groups.push_back(inst.G[g]);
                active.names.push_back(inst.G.name_of(g));
            }
        }
        const EpsilonSchedule zero = EpsilonSchedule::constant(0.0);
        const PrependTrace trace = run_prepend(inst.H, active, s, inst.loss, zero);
        CHECK(worst_violation(trace.final_list, inst.H, active, s, inst.loss, zero) <= 1e-12);
    }
}

TEST_CASE("groups absent from the sample are rejected up front") {
    const desk::Instance inst = desk::eight_point();
    FiniteDistribution narrow = inst.dist;  // all mass on the first two points
    narrow.mass = {0.5, 0.5, 0, 0, 0, 0, 0, 0};
    GroupFamily G;
    G.groups = {desk::make_group({4, 5}, 8)};
    G.names = {"unsampled"};
    const Sample s = draw_sample(narrow, 100, RngStream(4));
    CHECK_THROWS_WITH_AS(
        run_prepend(inst.H, G, s, inst.loss, EpsilonSchedule::constant(0.1)),
        doctest::Contains("unsampled"), std::invalid_argument);
}

TEST_CASE("round counts respect the potential-argument cap on random instances") {
    RngStream root(777);
    for (int trial = 0; trial < 40; ++trial) {
        const desk::Instance inst =
            desk::random_instance(root.stream("inst").stream(trial), 10, 4, 4, 3);
        const Sample s = draw_sample(inst.dist, 300, root.stream("draw").stream(trial), &inst.G);
        GroupFamily active;
        for (int g = 0; g < inst.G.size(); ++g) {
            if (group_count(s, inst.G[g]) >= 1) {
                active.groups.push_back(inst.G[g]);
                active.names.push_back(inst.G.name_of(g));
            }
        }
        const double eps = 0.02 + 0.2 * root.stream("eps").stream(trial).next_unit();
        const EpsilonSchedule schedule = EpsilonSchedule::constant(eps);
        const PrependTrace trace = run_prepend(inst.H, active, s, inst.loss, schedule);

        REQUIRE(trace.epsilon_floor > 0.0);
        CHECK(static_cast<double>(trace.rounds.size()) <=
              std::ceil(trace.alpha / trace.epsilon_floor));
        CHECK(worst_violation(trace.final_list, inst.H, active, s, inst.loss, schedule) <= 1e-9);

        // The overall risk trace starts at alpha and never increases.
        double prev = trace.alpha;
        for (const PrependRound& r : trace.rounds) {
            CHECK(r.overall_risk_after <= prev + 1e-12);
            prev = r.overall_risk_after;
        }
        // Round bookkeeping: epsilon_floor is the smallest weighted slack.
        double floor = 1e300;
        for (std::size_t g = 0; g < trace.group_epsilons.size(); ++g) {
            floor = std::min(floor, trace.group_weights[g] * trace.group_epsilons[g]);
        }
        CHECK(trace.epsilon_floor == doctest::Approx(floor).epsilon(1e-12));
    }
}

TEST_CASE("the per-group guarantee also holds under the count-dependent schedule") {
    RngStream root(989);
    for (int trial = 0; trial < 10; ++trial) {
        const desk::Instance inst =
            desk::random_instance(root.stream("inst").stream(trial), 8, 3, 3, 2);
        const Sample s = draw_sample(inst.dist, 400, root.stream("draw").stream(trial), &inst.G);
        GroupFamily active;
        for (int g = 0; g < inst.G.size(); ++g) {
            if (group_count(s, inst.G[g]) >= 1) {
                active.groups.push_back(inst.G[g]);
                active.names.push_back(inst.G.name_of(g));
            }
        }
        const EpsilonSchedule schedule =
            EpsilonSchedule::small_groups(inst.H.size(), active.size(), 0.1);
        const PrependTrace trace = run_prepend(inst.H, active, s, inst.loss, schedule);
        CHECK(worst_violation(trace.final_list, inst.H, active, s, inst.loss, schedule) <= 1e-9);
    }
}

TEST_CASE("an empty active family returns the bare minimizer") {
    const desk::Instance inst = desk::eight_point();
    const Sample s = draw_sample(inst.dist, 100, RngStream(12));
    const PrependTrace trace =
        run_prepend(inst.H, GroupFamily{}, s, inst.loss, EpsilonSchedule::constant(0.1));
    CHECK(trace.rounds.empty());
    CHECK(trace.final_list.rules.empty());
    CHECK(trace.epsilon_floor == 0.0);
}

}  // TEST_SUITE
