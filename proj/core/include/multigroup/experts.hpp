#pragma once

#include <cstdint>
#include <vector>

#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Sleeping-experts reduction
//===----------------------------------------------------------------------===//
//
// One expert per (hypothesis, group) pair, flattened as h * |G| + g. An
// expert is awake on a round exactly when its group contains the round's
// point. Selection is p(h,g) proportional to eta * weight over the awake
// set; awake experts update weight *= (1+eta)^(mixture_loss - own_loss).
// Weights are kept in log space so long losing streaks cannot underflow.

struct ExpertState {
    int num_hyps = 0;
    int num_groups = 0;
    std::vector<double> log_weight;              // per expert; uniform start, log(1/N)
    std::vector<double> eta;                     // per expert, in (0,1]
    std::vector<double> cum_loss;                // sum of g(x_t) * loss_t(h)
    std::vector<double> cum_mixture_loss_awake;  // sum of g(x_t) * mixture_loss_t

    int num_experts() const { return num_hyps * num_groups; }
    int expert_index(int h, int g) const { return h * num_groups + g; }
};

struct HedgeRound {
    PointId x = 0;
    LabelId y = 0;
    std::vector<double> p;      // full expert vector; zero on asleep experts
    double mixture_loss = 0.0;  // sum over awake experts of p * loss
};

// Round-by-round record of the online run; enough to audit the regret
// accounting and the awake-support property.
struct InternalHypothesisLog {
    std::vector<HedgeRound> rounds;
};

// Snapshot-based view of the online learner's internal hypotheses: the
// distribution the learner would have played at round t for an arbitrary
// point. Prediction: draw a round uniformly, draw an expert from its
// distribution at x, output that hypothesis's prediction.
struct RandomizedPredictor {
    int num_hyps = 0;
    int num_groups = 0;
    std::vector<double> eta;
    std::vector<std::vector<double>> log_weight_snapshots;  // entering each round

    int num_experts() const { return num_hyps * num_groups; }
    std::int64_t num_rounds() const { return static_cast<std::int64_t>(log_weight_snapshots.size()); }

    // p_t(.;x): selection distribution at round t if the point were x.
    // Throws std::runtime_error when no expert is awake at x.
    std::vector<double> distribution_at(std::int64_t t, PointId x, const GroupFamily& G) const;
};

// eta(h,g) = min{ sqrt(log(|H||G|) / sum_i g(x'_i)), 1 } from a held-out
// sample; a group absent from the holdout gets rate 1, and the degenerate
// single-expert case (log 1 = 0) is clamped to 1e-9.
std::vector<double> set_learning_rates(const HypothesisClass& H, const GroupFamily& G,
                                       const Sample& holdout);

ExpertState make_expert_state(const HypothesisClass& H, const GroupFamily& G,
                              std::vector<double> eta);

// One online round: returns the played distribution and the mixture loss,
// and updates weights/accounting in place. Throws std::runtime_error when no
// expert is awake ("uncovered point").
std::pair<std::vector<double>, double> hedge_round(ExpertState& state, PointId x, LabelId y,
                                                   const HypothesisClass& H, const GroupFamily& G,
                                                   const LossSpec& loss);

struct ReductionResult {
    RandomizedPredictor q;
    InternalHypothesisLog log;
    ExpertState final_state;
    GroupFamily effective_groups;  // includes the catch-all group when added
    std::vector<std::int64_t> holdout_group_counts;
    std::int64_t hedge_size = 0;
    std::int64_t holdout_size = 0;
    std::uint64_t seed = 0;
};

// Runs the full reduction on a sample: even positions form the online
// stream, odd positions the rate-setting holdout (floor(n/2) rows each).
// With add_catch_all, an all-ones group is appended so every point has an
// awake expert.
ReductionResult run_reduction(const HypothesisClass& H, const GroupFamily& G, const Sample& s,
                              const LossSpec& loss, std::uint64_t seed,
                              bool add_catch_all = false);

// L(Q|g) computed exactly on the distribution: average over rounds of the
// expected loss of the round's selection distribution, conditioned on g.
double exact_risk_of_Q(const RandomizedPredictor& q, const Group& g,
                       const FiniteDistribution& dist, const LossSpec& loss,
                       const HypothesisClass& H, const GroupFamily& G);

// Same quantity for a single round's internal hypothesis p_t.
double exact_risk_of_round(const RandomizedPredictor& q, std::int64_t t, const Group& g,
                           const FiniteDistribution& dist, const LossSpec& loss,
                           const HypothesisClass& H, const GroupFamily& G);

// Per-point hypothesis marginals of Q, averaged over rounds: out[x][h] is
// the probability Q predicts with hypothesis h at point x. Points where no
// expert is ever awake get an all-zero row.
std::vector<std::vector<double>> q_hypothesis_marginals(const RandomizedPredictor& q,
                                                        const GroupFamily& G, int num_points);

// Draws a prediction from Q at x.
PredictionId predict(const RandomizedPredictor& q, PointId x, const GroupFamily& G,
                     const HypothesisClass& H, RngStream& rng);

struct RegretRow {
    int hyp = 0;
    int group = 0;
    double eta = 0.0;
    double awake_regret = 0.0;  // sum g(x_t)(mixture_loss_t - loss_t(h))
    double cum_loss = 0.0;
    double bound = 0.0;         // (e-1+1/eta) log(|H||G|) + (e-1) eta cum_loss
    bool violated = false;
};

// Per-expert regret against the deterministic guarantee; flags violations.
std::vector<RegretRow> sleeping_regret_report(const InternalHypothesisLog& log,
                                              const ExpertState& state);

}  // namespace multigroup
