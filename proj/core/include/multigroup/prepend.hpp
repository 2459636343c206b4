#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multigroup/decision_list.hpp"
#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Per-group slack schedules
//===----------------------------------------------------------------------===//

// Slack for small finite classes: 9 sqrt((2(|G|+1) log(|H||G|) + log(8/d)) / c).
double epsilon_small_groups(std::int64_t num_hyps, std::int64_t num_groups, double delta,
                            std::int64_t count_in_group);

// Slack for groups with empirical mass at least gamma, finite classes:
// 36^(2/3) (alpha log(8|G||H|/d))^(1/3) (n/gamma)^(1/6) / sqrt(c).
// Requires c >= gamma*n; the value is then at most
// 36^(2/3) (alpha log(8|G||H|/d) / (gamma c))^(1/3).
double epsilon_large_groups_finite(std::int64_t num_hyps, std::int64_t num_groups, double delta,
                                   double gamma, double alpha, std::int64_t n,
                                   std::int64_t count_in_group);

// As above with capacity measured by a pseudo-dimension d:
// (2*36^2 d log(16n/d))^(1/3) (n/gamma)^(1/6) / sqrt(c), capped by
// 14 (d log(16n/delta) / (gamma c))^(1/3).
double epsilon_large_groups_pseudodim(double d, double delta, double gamma, std::int64_t n,
                                      std::int64_t count_in_group);

enum class ScheduleKind { Constant, SmallGroups, LargeGroupsFinite, LargeGroupsPseudodim };

// ε_n(g) as a function of the in-sample group count. The large-groups kinds
// need alpha = L_n of the best single hypothesis; when left unset it is
// filled in from the training sample by run_prepend.
struct EpsilonSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double constant_eps = 0.0;
    std::int64_t num_hyps = 1;
    std::int64_t num_groups = 1;
    double delta = 0.1;
    double gamma = 1.0;
    std::optional<double> alpha;  // LargeGroupsFinite only
    std::int64_t n = 1;
    double d = 0.0;  // LargeGroupsPseudodim only

    double value(std::int64_t count_in_group) const;

    static EpsilonSchedule constant(double eps);
    static EpsilonSchedule small_groups(std::int64_t num_hyps, std::int64_t num_groups,
                                        double delta);
    static EpsilonSchedule large_groups_finite(std::int64_t num_hyps, std::int64_t num_groups,
                                               double delta, double gamma, std::int64_t n,
                                               std::optional<double> alpha = std::nullopt);
    static EpsilonSchedule large_groups_pseudodim(double d, double delta, double gamma,
                                                  std::int64_t n);
};

// G_{n,gamma}: the groups whose sample count is at least gamma*n. Order and
// names are preserved.
GroupFamily filter_groups(const GroupFamily& G, const Sample& s, double gamma);
std::vector<int> filter_group_indices(const GroupFamily& G, const Sample& s, double gamma);

//===----------------------------------------------------------------------===//
// The prepend loop
//===----------------------------------------------------------------------===//

struct PrependRound {
    int group = 0;
    int hyp = 0;
    double violation = 0.0;           // L_n(f|g) - L_n(h|g) - eps(g) at selection time
    double overall_risk_after = 0.0;  // L_n(f) after the prepend
};

struct PrependTrace {
    DecisionList final_list;
    std::vector<PrependRound> rounds;
    double alpha = 0.0;          // L_n of the initial hypothesis
    double epsilon_floor = 0.0;  // min_g P_n(g) eps(g)
    std::vector<double> group_epsilons;  // eps(g) per active group
    std::vector<double> group_weights;   // P_n(g) per active group
};

// Starts from the global empirical ERM, then repeatedly prepends the
// (group, hypothesis) pair with the largest positive violation
// L_n(f|g) - L_n(h|g) - eps(g) until none remains. Tie-breaks: lowest index
// for the initial hypothesis, lexicographically lowest (g,h) in the argmax.
// When eps(g) = 0 a zero violation carries no progress, so the loop also
// stops once the selected pair no longer strictly lowers the overall risk;
// for positive slacks this coincides with the plain violation test.
PrependTrace run_prepend(const HypothesisClass& H, const GroupFamily& G_active, const Sample& s,
                         const LossSpec& loss, const EpsilonSchedule& schedule);

}  // namespace multigroup
