#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Decision lists over (group test, hypothesis) rules
//===----------------------------------------------------------------------===//

struct Rule {
    int group = 0;
    int hyp = 0;

    friend bool operator==(const Rule&, const Rule&) = default;
};

// Ordered rules, first entry is the outermost test: the first rule whose
// group contains x fires; otherwise the default hypothesis predicts.
struct DecisionList {
    std::vector<Rule> rules;
    int default_hyp = 0;

    friend bool operator==(const DecisionList&, const DecisionList&) = default;
};

// First-match evaluation. Throws std::out_of_range on bad indices.
PredictionId evaluate(const DecisionList& f, PointId x, const HypothesisClass& H,
                      const GroupFamily& G);

// Inserts (group, hyp) as the new outermost rule.
void prepend_rule(DecisionList& f, int group, int hyp);

// Keeps only the outermost occurrence of each group; functionally equivalent
// to the input on every point, and idempotent.
DecisionList canonicalize(const DecisionList& f);

// Number of canonical lists with at most max_len rules over classes of the
// given sizes: sum over k of (falling factorial of num_groups over k) times
// num_hyps^(k+1).
std::uint64_t canonical_count(int num_hyps, int num_groups, int max_len);

// Yields every canonical list with <= max_len rules exactly once, in a fixed
// deterministic order (by length, then lexicographic in the group tuple, the
// hypothesis tuple, and the default). Requires max_len <= num_groups.
std::vector<DecisionList> enumerate_canonical(int num_hyps, int num_groups, int max_len);

// Callback-based variant for callers that do not want to materialize the
// whole class.
void for_each_canonical(int num_hyps, int num_groups, int max_len,
                        const std::function<void(const DecisionList&)>& fn);

// Callable view binding a list to its classes, satisfying PointPredictor.
struct DecisionListPredictor {
    const DecisionList* list;
    const HypothesisClass* H;
    const GroupFamily* G;

    PredictionId operator()(PointId x) const { return evaluate(*list, x, *H, *G); }
};

}  // namespace multigroup
