// Risk evaluation and deviation-bound checks: conditional risks against hand
// computations, lowest-index tie-breaking in empirical risk minimization, and
// the capacity/bound formulas frozen against independently computed values.

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "multigroup/risk.hpp"
#include "multigroup/rng.hpp"

#include "desk_instances.hpp"

using namespace multigroup;

TEST_SUITE("risk") {

TEST_CASE("conditional risks match hand computation on the desk instance") {
    const desk::Instance inst = desk::eight_point();
    // always-one on g1 = {0,1,2,6}: mean of (1 - P(y=1|x)) weighted by mass.
    // masses .20,.15,.15,.10 with P1 .9,.8,.2,.85 over total .60:
    // (.20*.1 + .15*.2 + .15*.8 + .10*.15) / .60 = .185/.60
    const double expected = (0.20 * 0.1 + 0.15 * 0.2 + 0.15 * 0.8 + 0.10 * 0.15) / 0.60;
    CHECK(population_conditional_risk(inst.H[1], inst.G[0], inst.dist, inst.loss) ==
          doctest::Approx(expected).epsilon(1e-12));

    const Sample s = exhaustive_weighted_sample(inst.dist, &inst.G);
    CHECK(empirical_conditional_risk(inst.H[1], inst.G[0], s, inst.loss) ==
          doctest::Approx(expected).epsilon(1e-12));

    // pointwise-majority overall: sum of mass * min(P, 1-P).
    double best = 0.0;
    for (int x = 0; x < 8; ++x) {
        const auto& row = inst.dist.label_dist[static_cast<std::size_t>(x)];
        best += inst.dist.mass[static_cast<std::size_t>(x)] * std::min(row[0], row[1]);
    }
    CHECK(empirical_risk(inst.H[0], s, inst.loss) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("risk queries on groups without data or mass are refused") {
    const desk::Instance inst = desk::eight_point();
    const Group empty = desk::make_group({}, 8);
    const Sample s = draw_sample(inst.dist, 50, RngStream(1));
    CHECK_THROWS_AS(empirical_conditional_risk(inst.H[0], empty, s, inst.loss),
                    std::invalid_argument);
    CHECK_THROWS_AS(population_conditional_risk(inst.H[0], empty, inst.dist, inst.loss),
                    std::invalid_argument);
}

TEST_CASE("empirical risk minimization breaks ties toward the lowest index") {
    // Two points, deterministic labels 0 and 1; the two constant hypotheses
    // have identical risk 1/2, so index 0 must win.
    FiniteDistribution d;
    d.mass = {0.5, 0.5};
    d.label_dist = {{1.0, 0.0}, {0.0, 1.0}};
    d.labels = {"0", "1"};
    HypothesisClass H;
    H.hypotheses = {Hypothesis{{0, 0}}, Hypothesis{{1, 1}}};
    const LossSpec loss = LossSpec::zero_one(2);
    const Sample s = exhaustive_weighted_sample(d);
    CHECK(empirical_erm_index(H, s, loss) == 0);

    // Swap the order; still index 0 (same risk).
    HypothesisClass H2;
    H2.hypotheses = {Hypothesis{{1, 1}}, Hypothesis{{0, 0}}};
    CHECK(empirical_erm_index(H2, s, loss) == 0);

    // In-group selection: restricted to the second point, always-one is
    // perfect and wins despite its higher overall index.
    const Group second = desk::make_group({1}, 2);
    CHECK(empirical_erm_index_in_group(H, second, s, loss) == 1);
    CHECK(empirical_benchmark_risk(H, second, s, loss) == doctest::Approx(0.0));
    CHECK(population_benchmark_risk(H, second, d, loss) == doctest::Approx(0.0));
}

TEST_CASE("benchmark risks equal the minimum over hypotheses") {
    const desk::Instance inst = desk::eight_point();
    const Sample s = exhaustive_weighted_sample(inst.dist, &inst.G);
    for (int g = 0; g < inst.G.size(); ++g) {
        double manual = 1e9;
        for (int h = 0; h < inst.H.size(); ++h) {
            manual = std::min(manual, population_conditional_risk(inst.H[h], inst.G[g],
                                                                  inst.dist, inst.loss));
        }
        CHECK(population_benchmark_risk(inst.H, inst.G[g], inst.dist, inst.loss) ==
              doctest::Approx(manual).epsilon(1e-12));
        CHECK(empirical_benchmark_risk(inst.H, inst.G[g], s, inst.loss) ==
              doctest::Approx(manual).epsilon(1e-12));
    }
}

TEST_CASE("capacity formulas match independently computed values") {
    CHECK(finite_class_capacity(2, 2, 0.05) ==
          doctest::Approx(7.847762537473608).epsilon(1e-14));
    CHECK(pseudodim_capacity(1.0, 100, 0.05) ==
          doctest::Approx(26.268443281425974).epsilon(1e-14));
    CHECK(experts_capacity(2, 2, 0.1) == doctest::Approx(9.234056898593499).epsilon(1e-14));
}

TEST_CASE("capacities accept any positive failure probability") {
    // delta = 8/e exceeds 1 yet is legal for the capacity formulas; the
    // singleton-class capacity is then exactly log(e) = 1.
    const double delta = 8.0 / std::exp(1.0);
    CHECK(finite_class_capacity(1, 1, delta) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(finite_class_capacity(1, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(finite_class_capacity(0, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(pseudodim_capacity(-1.0, 100, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(experts_capacity(1, 0, 0.1), std::invalid_argument);
}

TEST_CASE("deviation bound takes the smaller branch and is frozen at a spot value") {
    DeviationParams params;
    params.log_capacity = 1.0;
    params.delta = 0.05;
    params.n = 10000;
    // slow branch 9 sqrt(1/10000) = 0.09; fast branch 7*0.01 + 16/10000 = 0.0716.
    CHECK(deviation_bound(params, 10000, 1.0) == doctest::Approx(0.0716).epsilon(1e-12));
    // At zero empirical risk the fast branch collapses to 16 D / c.
    CHECK(deviation_bound(params, 10000, 0.0) == doctest::Approx(0.0016).epsilon(1e-12));
    // Small counts flip the minimum to the slow branch.
    const double slow = 9.0 * std::sqrt(1.0 / 4.0);
    CHECK(deviation_bound(params, 4, 1.0) == doctest::Approx(slow).epsilon(1e-12));
}

TEST_CASE("deviation bound is monotone in count and capacity") {
    DeviationParams params;
    params.log_capacity = 3.0;
    params.delta = 0.1;
    params.n = 100000;
    for (const double risk : {0.0, 0.3, 1.0}) {
        double prev = 1e300;
        for (std::int64_t c = 1; c <= 100000; c *= 10) {
            const double b = deviation_bound(params, c, risk);
            CHECK(b <= prev + 1e-15);
            prev = b;
        }
    }
    DeviationParams bigger = params;
    bigger.log_capacity = 6.0;
    CHECK(deviation_bound(bigger, 500, 0.5) >= deviation_bound(params, 500, 0.5));
}

TEST_CASE("deviation bound rejects out-of-range arguments") {
    DeviationParams params;
    params.log_capacity = 1.0;
    params.delta = 0.1;
    params.n = 100;
    CHECK_THROWS_AS(deviation_bound(params, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(deviation_bound(params, 10, 1.5), std::invalid_argument);
    DeviationParams bad_delta = params;
    bad_delta.delta = 1.2;  // the two-sided bound itself needs a true probability
    CHECK_THROWS_AS(deviation_bound(bad_delta, 10, 0.5), std::invalid_argument);
    DeviationParams bad_capacity = params;
    bad_capacity.log_capacity = 0.0;
    CHECK_THROWS_AS(deviation_bound(bad_capacity, 10, 0.5), std::invalid_argument);
}

TEST_CASE("finite-sample deviations fall inside the bound on a concrete run") {
    const desk::Instance inst = desk::eight_point(true);
    DeviationParams params;
    params.log_capacity = finite_class_capacity(inst.H.size(), inst.G.size(), 0.1);
    params.delta = 0.1;
    params.n = 4000;
    const Sample s = draw_sample(inst.dist, 4000, RngStream(99).stream("dev"), &inst.G);
    for (int h = 0; h < inst.H.size(); ++h) {
        for (int g = 0; g < inst.G.size(); ++g) {
            const double emp = empirical_conditional_risk(inst.H[h], inst.G[g], s, inst.loss);
            const double pop =
                population_conditional_risk(inst.H[h], inst.G[g], inst.dist, inst.loss);
            const double bound = deviation_bound(params, group_count(s, inst.G[g]), emp);
            CHECK(std::abs(emp - pop) <= bound);
        }
    }
}

}  // TEST_SUITE
