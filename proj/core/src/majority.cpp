#include "multigroup/majority.hpp"

#include <cmath>
#include <string>

#include "multigroup/risk.hpp"

namespace multigroup {

MajorityPredictor fit_consistent_majority(const HypothesisClass& H, const GroupFamily& G,
                                          const Sample& s) {
    if (H.size() == 0) throw std::invalid_argument("fit_consistent_majority: empty hypothesis class");
    if (G.size() == 0) throw std::invalid_argument("fit_consistent_majority: empty group family");
    for (const Example& e : s.examples) {
        if (e.y != 0 && e.y != 1) {
            throw std::invalid_argument(
                "fit_consistent_majority: non-binary label id " + std::to_string(e.y) +
                " (expected 0 for -1, 1 for +1)");
        }
    }
    for (const Hypothesis& h : H.hypotheses) {
        for (PredictionId z : h.outputs) {
            if (z != 0 && z != 1) {
                throw std::invalid_argument(
                    "fit_consistent_majority: hypothesis with non-binary output");
            }
        }
    }
    const LossSpec loss = LossSpec::zero_one(2);

    MajorityPredictor p;
    p.assigned_hyp.reserve(static_cast<std::size_t>(G.size()));
    for (int gi = 0; gi < G.size(); ++gi) {
        if (group_count(s, G[gi]) < 1) {
            throw std::invalid_argument("fit_consistent_majority: group '" + G.name_of(gi) +
                                        "' has no sample points");
        }
        const int best = empirical_erm_index_in_group(H, G[gi], s, loss);
        const double best_risk = empirical_conditional_risk(H[best], G[gi], s, loss);
        if (best_risk > 0.0) {
            throw NotGroupRealizableError(
                "fit_consistent_majority: group '" + G.name_of(gi) +
                "' admits no hypothesis consistent with the sample (best empirical risk " +
                std::to_string(best_risk) + "); the vote construction requires realizable groups");
        }
        p.assigned_hyp.push_back(best);
    }
    return p;
}

PredictionId predict_majority(const MajorityPredictor& p, PointId x, const HypothesisClass& H,
                              const GroupFamily& G) {
    if (static_cast<int>(p.assigned_hyp.size()) != G.size()) {
        throw std::invalid_argument("predict_majority: predictor/group family size mismatch");
    }
    int vote_sum = 0;
    for (int gi = 0; gi < G.size(); ++gi) {
        if (!G[gi].contains(x)) continue;
        const PredictionId z = H[p.assigned_hyp[static_cast<std::size_t>(gi)]](x);
        vote_sum += (z == 1) ? 1 : -1;
    }
    // Zero-sum ties and uncovered points resolve to +1.
    return vote_sum >= 0 ? 1 : 0;
}

double realizable_excess_bound(std::int64_t num_hyps, std::int64_t num_groups, double delta,
                               std::int64_t count_in_group) {
    if (num_hyps < 1 || num_groups < 1) {
        throw std::invalid_argument("realizable_excess_bound: class sizes must be >= 1");
    }
    if (!(delta > 0.0)) throw std::invalid_argument("realizable_excess_bound: delta must be positive");
    if (count_in_group < 1) {
        throw std::invalid_argument("realizable_excess_bound: count must be >= 1");
    }
    const double g = static_cast<double>(num_groups);
    const double h = static_cast<double>(num_hyps);
    return 16.0 * (2.0 * std::log(g * g * h) + std::log(8.0 / delta)) /
           static_cast<double>(count_in_group);
}

}  // namespace multigroup
