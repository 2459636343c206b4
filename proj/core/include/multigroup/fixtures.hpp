#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "multigroup/decision_list.hpp"
#include "multigroup/rational.hpp"
#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Exact instances
//===----------------------------------------------------------------------===//

// Joint distribution with rational masses and label probabilities, so the
// counterexample claims can be checked with zero tolerance.
struct ExactDistribution {
    std::vector<Rat> mass;
    std::vector<std::vector<Rat>> label_dist;

    int num_points() const { return static_cast<int>(mass.size()); }
    int num_labels() const {
        return label_dist.empty() ? 0 : static_cast<int>(label_dist[0].size());
    }
    void validate() const;  // masses/rows must sum to exactly 1
    Rat group_mass(const Group& g) const;
};

// A distribution bundled with classes, a rational loss table, and the
// expected per-(h,g) risk table frozen at construction time.
struct ExactInstance {
    std::string name;
    ExactDistribution dist;
    HypothesisClass H;
    GroupFamily G;
    std::vector<std::vector<Rat>> loss;           // [prediction][label]
    std::vector<std::vector<Rat>> expected_risk;  // [hypothesis][group]
    std::vector<std::string> label_names;

    // Recomputes every stored risk and throws std::logic_error on mismatch.
    void check_risk_table() const;
};

// Exact conditional risk of an arbitrary predictor.
template <PointPredictor F>
Rat exact_conditional_risk(const F& f, const Group& g, const ExactDistribution& dist,
                           const std::vector<std::vector<Rat>>& loss) {
    const Rat pg = dist.group_mass(g);
    if (pg == Rat(0)) throw std::invalid_argument("exact_conditional_risk: zero-mass group");
    Rat acc(0);
    for (int x = 0; x < dist.num_points(); ++x) {
        if (!g.contains(x)) continue;
        if (dist.mass[static_cast<std::size_t>(x)] == Rat(0)) continue;
        const auto& row = dist.label_dist[static_cast<std::size_t>(x)];
        const PredictionId z = f(x);
        Rat expected(0);
        for (int y = 0; y < dist.num_labels(); ++y) {
            expected += row[static_cast<std::size_t>(y)] *
                        loss[static_cast<std::size_t>(z)][static_cast<std::size_t>(y)];
        }
        acc += dist.mass[static_cast<std::size_t>(x)] * expected;
    }
    return acc / pg;
}

Rat exact_benchmark_risk(const HypothesisClass& H, const Group& g, const ExactDistribution& dist,
                         const std::vector<std::vector<Rat>>& loss);

// Float view of an exact distribution, for the sampled experiments.
FiniteDistribution to_float(const ExactDistribution& dist, std::vector<std::string> labels);

//===----------------------------------------------------------------------===//
// Twin-scenario construction (decision lists cannot be scenario-robust)
//===----------------------------------------------------------------------===//
//
// Two 3-point, 3-label scenarios that agree on every group mass and every
// benchmark conditional risk, yet any canonical decision list over the two
// groups has, in one of the scenarios, a group with excess risk >= 1/8.

std::pair<ExactInstance, ExactInstance> build_twin_scenarios();

struct TwinScenarioWitness {
    DecisionList list;
    int scenario = 0;  // 0 or 1: scenario attaining the worst excess
    int group = 0;
    Rat excess;
};

struct TwinScenarioReport {
    std::vector<TwinScenarioWitness> per_list;  // worst witness per canonical list
    Rat threshold;                              // 1/8
    bool all_flagged = false;                   // every list fails somewhere by >= 1/8
};

TwinScenarioReport verify_twin_scenarios();

//===----------------------------------------------------------------------===//
// Majority-vote counterexample (per-group fits cannot be combined safely)
//===----------------------------------------------------------------------===//
//
// Four points with masses 3/24, 7/24, 7/24, 7/24, three overlapping groups
// and the two constant hypotheses. Every assignment of hypotheses to groups
// leaves some group with excess risk > 1/4; the attainable excesses are
// exactly 3/10, 4/10, 7/10 and 1.

ExactInstance build_majority_vote_counterexample();

struct VoteAssignmentRow {
    std::vector<int> assignment;  // hypothesis index per group
    int worst_group = 0;
    Rat worst_excess;
};

struct VoteCounterexampleReport {
    std::vector<VoteAssignmentRow> rows;  // all |H|^|G| assignments
    Rat threshold;                        // 1/4
    Rat min_excess;                       // smallest worst-case excess over assignments
    bool all_exceed = false;
};

VoteCounterexampleReport verify_majority_vote_counterexample();

//===----------------------------------------------------------------------===//
// Calibrated-but-biased construction (multiaccuracy does not bound excess)
//===----------------------------------------------------------------------===//
//
// For eps in (0, 1/2): three points with masses 1-2eps, eps, eps; the target
// concept is identically 1, a real-valued predictor f errs on mass 2eps yet
// is exactly 0-multiaccurate against c = h*g, while h errs only on mass eps.

struct MultiaccuracyGapInstance {
    ExactInstance inst;      // the distribution, the single-group family, H = {h}
    std::vector<Rat> f;      // real-valued predictor, per point
    std::vector<Rat> c;      // test function h*g, per point
    Rat eps;
    Rat f_error_mass;        // Pr(f != target | g)   = 2 eps
    Rat h_error_mass;        // Pr(h != target | g)   = eps
    Rat multiaccuracy_value; // E[c (f - target)]     = 0
    Rat consequence_bound;   // 4 inf_h L(h|g) + 2*0 / P(g), report line only
};

MultiaccuracyGapInstance build_multiaccuracy_gap(const Rat& eps);

// E[c(x)(f(x) - y)] over the distribution, with numeric label values.
// Requires |c| <= 1 and f in [0,1] pointwise.
Rat multiaccuracy_violation(const std::vector<Rat>& f, const std::vector<Rat>& c,
                            const ExactDistribution& dist, const std::vector<Rat>& label_values);

//===----------------------------------------------------------------------===//
// Seeded planar instance with two overlapping groups
//===----------------------------------------------------------------------===//
//
// Grid-discretized two-group instance where no single hypothesis is
// simultaneously near-optimal for both groups; the construction is retried
// with fresh jitter until the gap certificate min_h max_g excess > 0.05
// holds (error after 100 attempts).

struct OverlapInstance {
    FiniteDistribution dist;
    HypothesisClass H;
    GroupFamily G;
    double certified_gap = 0.0;  // min over h of max over g of excess of h on g
    std::uint64_t seed = 0;
    int attempts = 0;
};

OverlapInstance generate_overlap_instance(std::uint64_t seed, int n_points = 12,
                                          double overlap = 0.4);

//===----------------------------------------------------------------------===//
// Brute-force optimality oracle
//===----------------------------------------------------------------------===//

enum class PredictorClass {
    DecisionLists,        // canonical lists up to a maximum length
    AllMaps,              // every function from points to predictions
    MajorityAssignments,  // sign-vote predictors from group-to-hypothesis assignments
};

// Witness for the minimizing predictor; exactly one field is populated,
// matching the class searched.
struct BruteForceWitness {
    std::optional<DecisionList> list;
    std::optional<std::vector<PredictionId>> map;
    std::optional<std::vector<int>> assignment;
};

struct ExactBruteForceResult {
    Rat optimum;  // min over the class of max over groups of excess risk
    BruteForceWitness witness;
};

struct BruteForceResult {
    double optimum = 0.0;
    BruteForceWitness witness;
};

// Exact search over the predictor class; guards |G| <= 4, |H| <= 4 and at
// most 12 domain points. max_len applies to DecisionLists only (default:
// number of groups).
ExactBruteForceResult brute_force_optimum(const ExactInstance& inst, PredictorClass cls,
                                          int max_len = -1);

// Same search against weighted empirical risks on a sample.
BruteForceResult brute_force_optimum(const Sample& s, const HypothesisClass& H,
                                     const GroupFamily& G, const LossSpec& loss,
                                     PredictorClass cls, int max_len = -1,
                                     int num_predictions = -1);

}  // namespace multigroup
