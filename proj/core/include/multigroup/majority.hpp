#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Group-conditional majority vote for the group-realizable binary setting
//===----------------------------------------------------------------------===//
//
// Binary convention: label/prediction id 0 stands for -1 and id 1 for +1.
// Each group g contributes the vote of its per-group empirical risk
// minimizer; the prediction is the sign of the vote sum, with zero-sum ties
// and uncovered points resolving to +1.

struct MajorityPredictor {
    std::vector<int> assigned_hyp;  // hypothesis index per group
};

// Raised when some group admits no zero-error hypothesis on the sample; the
// vote construction is only sound under group realizability, so the fit
// refuses instead of returning a best-effort predictor.
class NotGroupRealizableError : public std::runtime_error {
  public:
    explicit NotGroupRealizableError(const std::string& what) : std::runtime_error(what) {}
};

// Picks each group's empirical risk minimizer under zero-one loss (ties to
// the lowest index) and validates that every group is fit perfectly.
// Throws std::invalid_argument on non-binary instances or groups without
// sample points, NotGroupRealizableError when consistency fails.
MajorityPredictor fit_consistent_majority(const HypothesisClass& H, const GroupFamily& G,
                                          const Sample& s);

// sign(sum over covering groups of that group's assigned vote), as label id.
PredictionId predict_majority(const MajorityPredictor& p, PointId x, const HypothesisClass& H,
                              const GroupFamily& G);

// Excess-risk bound for the vote predictor:
// 16 (2 log(|G|^2 |H|) + log(8/delta)) / count.
double realizable_excess_bound(std::int64_t num_hyps, std::int64_t num_groups, double delta,
                               std::int64_t count_in_group);

// Callable view satisfying PointPredictor.
struct MajorityVotePredictor {
    const MajorityPredictor* p;
    const HypothesisClass* H;
    const GroupFamily* G;

    PredictionId operator()(PointId x) const { return predict_majority(*p, x, *H, *G); }
};

}  // namespace multigroup
