#include "multigroup/prepend.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "multigroup/risk.hpp"

namespace multigroup {

namespace {
void check_delta(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("epsilon schedule: delta must be positive");
}
}  // namespace

double epsilon_small_groups(std::int64_t num_hyps, std::int64_t num_groups, double delta,
                            std::int64_t count_in_group) {
    if (num_hyps < 1 || num_groups < 1) {
        throw std::invalid_argument("epsilon_small_groups: class sizes must be >= 1");
    }
    check_delta(delta);
    if (count_in_group < 1) throw std::invalid_argument("epsilon_small_groups: count must be >= 1");
    const double HG = static_cast<double>(num_hyps) * static_cast<double>(num_groups);
    const double numerator =
        2.0 * (static_cast<double>(num_groups) + 1.0) * std::log(HG) + std::log(8.0 / delta);
    return 9.0 * std::sqrt(numerator / static_cast<double>(count_in_group));
}

double epsilon_large_groups_finite(std::int64_t num_hyps, std::int64_t num_groups, double delta,
                                   double gamma, double alpha, std::int64_t n,
                                   std::int64_t count_in_group) {
    if (num_hyps < 1 || num_groups < 1) {
        throw std::invalid_argument("epsilon_large_groups_finite: class sizes must be >= 1");
    }
    check_delta(delta);
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("epsilon_large_groups_finite: gamma outside (0,1]");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("epsilon_large_groups_finite: alpha outside [0,1]");
    }
    if (n < 1) throw std::invalid_argument("epsilon_large_groups_finite: n must be >= 1");
    if (static_cast<double>(count_in_group) < gamma * static_cast<double>(n)) {
        throw std::invalid_argument(
            "epsilon_large_groups_finite: group count below gamma*n; filter groups first");
    }
    const double log_term = std::log(8.0 * static_cast<double>(num_groups) *
                                     static_cast<double>(num_hyps) / delta);
    return std::pow(36.0, 2.0 / 3.0) * std::cbrt(alpha * log_term) *
           std::pow(static_cast<double>(n) / gamma, 1.0 / 6.0) /
           std::sqrt(static_cast<double>(count_in_group));
}

double epsilon_large_groups_pseudodim(double d, double delta, double gamma, std::int64_t n,
                                      std::int64_t count_in_group) {
    if (d < 0.0) throw std::invalid_argument("epsilon_large_groups_pseudodim: d must be >= 0");
    check_delta(delta);
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("epsilon_large_groups_pseudodim: gamma outside (0,1]");
    }
    if (n < 1) throw std::invalid_argument("epsilon_large_groups_pseudodim: n must be >= 1");
    if (static_cast<double>(count_in_group) < gamma * static_cast<double>(n)) {
        throw std::invalid_argument(
            "epsilon_large_groups_pseudodim: group count below gamma*n; filter groups first");
    }
    const double log_term = std::log(16.0 * static_cast<double>(n) / delta);
    return std::cbrt(2.0 * 36.0 * 36.0 * d * log_term) *
           std::pow(static_cast<double>(n) / gamma, 1.0 / 6.0) /
           std::sqrt(static_cast<double>(count_in_group));
}

double EpsilonSchedule::value(std::int64_t count_in_group) const {
    switch (kind) {
        case ScheduleKind::Constant:
            if (!(constant_eps >= 0.0) || !std::isfinite(constant_eps)) {
                throw std::invalid_argument("epsilon schedule: constant slack must be finite and >= 0");
            }
            return constant_eps;
        case ScheduleKind::SmallGroups:
            return epsilon_small_groups(num_hyps, num_groups, delta, count_in_group);
        case ScheduleKind::LargeGroupsFinite:
            if (!alpha.has_value()) {
                throw std::logic_error(
                    "epsilon schedule: alpha unresolved; run_prepend fills it from the sample");
            }
            return epsilon_large_groups_finite(num_hyps, num_groups, delta, gamma, *alpha, n,
                                               count_in_group);
        case ScheduleKind::LargeGroupsPseudodim:
            return epsilon_large_groups_pseudodim(d, delta, gamma, n, count_in_group);
    }
    throw std::logic_error("epsilon schedule: unknown kind");
}

EpsilonSchedule EpsilonSchedule::constant(double eps) {
    EpsilonSchedule s;
    s.kind = ScheduleKind::Constant;
    s.constant_eps = eps;
    return s;
}

EpsilonSchedule EpsilonSchedule::small_groups(std::int64_t num_hyps, std::int64_t num_groups,
                                              double delta) {
    EpsilonSchedule s;
    s.kind = ScheduleKind::SmallGroups;
    s.num_hyps = num_hyps;
    s.num_groups = num_groups;
    s.delta = delta;
    return s;
}

EpsilonSchedule EpsilonSchedule::large_groups_finite(std::int64_t num_hyps,
                                                     std::int64_t num_groups, double delta,
                                                     double gamma, std::int64_t n,
                                                     std::optional<double> alpha) {
    EpsilonSchedule s;
    s.kind = ScheduleKind::LargeGroupsFinite;
    s.num_hyps = num_hyps;
    s.num_groups = num_groups;
    s.delta = delta;
    s.gamma = gamma;
    s.n = n;
    s.alpha = alpha;
    return s;
}

EpsilonSchedule EpsilonSchedule::large_groups_pseudodim(double d, double delta, double gamma,
                                                        std::int64_t n) {
    EpsilonSchedule s;
    s.kind = ScheduleKind::LargeGroupsPseudodim;
    s.d = d;
    s.delta = delta;
    s.gamma = gamma;
    s.n = n;
    return s;
}

std::vector<int> filter_group_indices(const GroupFamily& G, const Sample& s, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("filter_groups: gamma outside (0,1]");
    }
    const double threshold = gamma * static_cast<double>(s.size());
    std::vector<int> kept;
    for (int i = 0; i < G.size(); ++i) {
        if (static_cast<double>(group_count(s, G[i])) >= threshold) kept.push_back(i);
    }
    return kept;
}

GroupFamily filter_groups(const GroupFamily& G, const Sample& s, double gamma) {
    GroupFamily out;
    for (int i : filter_group_indices(G, s, gamma)) {
        out.groups.push_back(G[i]);
        out.names.push_back(G.name_of(i));
    }
    return out;
}

PrependTrace run_prepend(const HypothesisClass& H, const GroupFamily& G_active, const Sample& s,
                         const LossSpec& loss, const EpsilonSchedule& schedule) {
    if (H.size() == 0) throw std::invalid_argument("run_prepend: empty hypothesis class");
    const int num_groups = G_active.size();
    for (int gi = 0; gi < num_groups; ++gi) {
        if (group_count(s, G_active[gi]) < 1) {
            throw std::invalid_argument("run_prepend: active group '" + G_active.name_of(gi) +
                                        "' has no sample points");
        }
    }

    PrependTrace trace;
    trace.final_list.default_hyp = empirical_erm_index(H, s, loss);
    trace.alpha = empirical_risk(H[trace.final_list.default_hyp], s, loss);

    // Resolve a data-dependent alpha before evaluating the schedule.
    EpsilonSchedule resolved = schedule;
    if (resolved.kind == ScheduleKind::LargeGroupsFinite && !resolved.alpha.has_value()) {
        resolved.alpha = trace.alpha;
    }

    // eps(g), P_n(g) and the benchmark table L_n(h|g) are fixed for the run.
    std::vector<double> eps(static_cast<std::size_t>(num_groups));
    std::vector<double> pn(static_cast<std::size_t>(num_groups));
    std::vector<std::vector<double>> hyp_risk(static_cast<std::size_t>(num_groups));
    for (int gi = 0; gi < num_groups; ++gi) {
        const Group& g = G_active[gi];
        eps[static_cast<std::size_t>(gi)] = resolved.value(group_count(s, g));
        if (!std::isfinite(eps[static_cast<std::size_t>(gi)])) {
            throw std::invalid_argument("run_prepend: schedule produced a non-finite slack");
        }
        pn[static_cast<std::size_t>(gi)] = empirical_group_weight(s, g);
        auto& row = hyp_risk[static_cast<std::size_t>(gi)];
        row.resize(static_cast<std::size_t>(H.size()));
        for (int hi = 0; hi < H.size(); ++hi) {
            row[static_cast<std::size_t>(hi)] = empirical_conditional_risk(H[hi], g, s, loss);
        }
    }
    trace.group_epsilons = eps;
    trace.group_weights = pn;
    trace.epsilon_floor = std::numeric_limits<double>::infinity();
    for (int gi = 0; gi < num_groups; ++gi) {
        trace.epsilon_floor = std::min(trace.epsilon_floor,
                                       pn[static_cast<std::size_t>(gi)] * eps[static_cast<std::size_t>(gi)]);
    }
    if (num_groups == 0) trace.epsilon_floor = 0.0;

    // Defensive cap: the termination argument bounds rounds by alpha/floor;
    // allow ample slack and refuse to spin forever on degenerate schedules.
    std::int64_t round_cap = 10000 + 4 * s.size();
    if (trace.epsilon_floor > 0.0) {
        round_cap = static_cast<std::int64_t>(std::ceil(trace.alpha / trace.epsilon_floor)) + 16;
    }

    DecisionListPredictor current{&trace.final_list, &H, &G_active};
    for (std::int64_t round = 0; round < round_cap; ++round) {
        int best_g = -1;
        int best_h = -1;
        double best_violation = -std::numeric_limits<double>::infinity();
        for (int gi = 0; gi < num_groups; ++gi) {
            const double list_risk = empirical_conditional_risk(current, G_active[gi], s, loss);
            for (int hi = 0; hi < H.size(); ++hi) {
                const double violation = list_risk -
                                         hyp_risk[static_cast<std::size_t>(gi)][static_cast<std::size_t>(hi)] -
                                         eps[static_cast<std::size_t>(gi)];
                if (violation > best_violation) {  // strict: first (g,h) wins ties
                    best_violation = violation;
                    best_g = gi;
                    best_h = hi;
                }
            }
        }
        if (best_g < 0 || best_violation < 0.0) break;
        // A zero violation under a zero slack would prepend a rule that
        // changes nothing; require strict progress to terminate.
        const double progress = best_violation + eps[static_cast<std::size_t>(best_g)];
        if (!(progress > 0.0)) break;

        prepend_rule(trace.final_list, best_g, best_h);
        trace.rounds.push_back(PrependRound{best_g, best_h, best_violation,
                                            empirical_risk(current, s, loss)});
    }
    if (static_cast<std::int64_t>(trace.rounds.size()) >= round_cap) {
        throw std::runtime_error("run_prepend: round cap exceeded; schedule permits no progress");
    }
    return trace;
}

}  // namespace multigroup
