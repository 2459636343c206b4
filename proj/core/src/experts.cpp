#include "multigroup/experts.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace multigroup {

namespace {

constexpr double kEtaFloor = 1e-9;

// Normalized eta*exp(log_weight) over the awake set, via a max-shift so that
// extreme weight ratios stay finite.
std::vector<double> selection_distribution(const std::vector<double>& log_weight,
                                           const std::vector<double>& eta,
                                           const std::vector<int>& awake, int num_experts) {
    std::vector<double> p(static_cast<std::size_t>(num_experts), 0.0);
    double max_log = -std::numeric_limits<double>::infinity();
    for (int i : awake) max_log = std::max(max_log, log_weight[static_cast<std::size_t>(i)]);
    double z = 0.0;
    for (int i : awake) {
        const double v = eta[static_cast<std::size_t>(i)] *
                         std::exp(log_weight[static_cast<std::size_t>(i)] - max_log);
        p[static_cast<std::size_t>(i)] = v;
        z += v;
    }
    for (int i : awake) p[static_cast<std::size_t>(i)] /= z;
    return p;
}

std::vector<int> awake_experts(const ExpertState& state, PointId x, const GroupFamily& G) {
    std::vector<int> awake;
    for (int h = 0; h < state.num_hyps; ++h) {
        for (int g = 0; g < state.num_groups; ++g) {
            if (G[g].contains(x)) awake.push_back(state.expert_index(h, g));
        }
    }
    return awake;
}

}  // namespace

std::vector<double> set_learning_rates(const HypothesisClass& H, const GroupFamily& G,
                                       const Sample& holdout) {
    if (holdout.size() < 1) throw std::invalid_argument("set_learning_rates: empty holdout");
    const int num_hyps = H.size();
    const int num_groups = G.size();
    const double log_n_experts =
        std::log(static_cast<double>(num_hyps) * static_cast<double>(num_groups));
    std::vector<double> eta(static_cast<std::size_t>(num_hyps * num_groups));
    for (int g = 0; g < num_groups; ++g) {
        const std::int64_t count = group_count(holdout, G[g]);
        double rate;
        if (count == 0) {
            rate = 1.0;
        } else {
            rate = std::min(std::sqrt(log_n_experts / static_cast<double>(count)), 1.0);
            if (rate == 0.0) rate = kEtaFloor;  // single-expert case: log 1 = 0
        }
        for (int h = 0; h < num_hyps; ++h) eta[static_cast<std::size_t>(h * num_groups + g)] = rate;
    }
    return eta;
}

ExpertState make_expert_state(const HypothesisClass& H, const GroupFamily& G,
                              std::vector<double> eta) {
    ExpertState state;
    state.num_hyps = H.size();
    state.num_groups = G.size();
    const std::size_t n = static_cast<std::size_t>(state.num_experts());
    if (eta.size() != n) throw std::invalid_argument("make_expert_state: eta size mismatch");
    for (double e : eta) {
        if (!(e > 0.0 && e <= 1.0)) {
            throw std::invalid_argument("make_expert_state: learning rates must lie in (0,1]");
        }
    }
    state.eta = std::move(eta);
    state.log_weight.assign(n, -std::log(static_cast<double>(n)));  // uniform
    state.cum_loss.assign(n, 0.0);
    state.cum_mixture_loss_awake.assign(n, 0.0);
    return state;
}

std::pair<std::vector<double>, double> hedge_round(ExpertState& state, PointId x, LabelId y,
                                                   const HypothesisClass& H, const GroupFamily& G,
                                                   const LossSpec& loss) {
    const std::vector<int> awake = awake_experts(state, x, G);
    if (awake.empty()) {
        throw std::runtime_error("hedge_round: uncovered point " + std::to_string(x) +
                                 " (no group contains it)");
    }
    std::vector<double> p = selection_distribution(state.log_weight, state.eta, awake,
                                                   state.num_experts());
    double mixture_loss = 0.0;
    for (int i : awake) {
        const int h = i / state.num_groups;
        mixture_loss += p[static_cast<std::size_t>(i)] * loss(H[h](x), y);
    }
    for (int i : awake) {
        const int h = i / state.num_groups;
        const double own_loss = loss(H[h](x), y);
        state.log_weight[static_cast<std::size_t>(i)] +=
            (mixture_loss - own_loss) * std::log1p(state.eta[static_cast<std::size_t>(i)]);
        state.cum_loss[static_cast<std::size_t>(i)] += own_loss;
        state.cum_mixture_loss_awake[static_cast<std::size_t>(i)] += mixture_loss;
    }
    return {std::move(p), mixture_loss};
}

ReductionResult run_reduction(const HypothesisClass& H, const GroupFamily& G, const Sample& s,
                              const LossSpec& loss, std::uint64_t seed, bool add_catch_all) {
    if (s.size() < 2) throw std::invalid_argument("run_reduction: need at least 2 examples to split");
    if (H.size() == 0) throw std::invalid_argument("run_reduction: empty hypothesis class");

    ReductionResult result;
    result.seed = seed;
    result.effective_groups = G;
    if (add_catch_all) {
        int domain = 0;
        for (const Example& e : s.examples) domain = std::max(domain, e.x + 1);
        for (const Group& g : G.groups) domain = std::max(domain, g.domain_size());
        result.effective_groups.groups.push_back(all_ones_group(domain));
        result.effective_groups.names.resize(static_cast<std::size_t>(G.size()), "");
        result.effective_groups.names.push_back("catch-all");
    }
    const GroupFamily& Geff = result.effective_groups;

    // Even positions stream to the online learner, odd positions set rates.
    const std::int64_t m = s.size() / 2;
    Sample hedge_half, holdout;
    for (std::int64_t i = 0; i < m; ++i) {
        hedge_half.examples.push_back(s.examples[static_cast<std::size_t>(2 * i)]);
        holdout.examples.push_back(s.examples[static_cast<std::size_t>(2 * i + 1)]);
    }
    result.hedge_size = m;
    result.holdout_size = m;
    for (const Group& g : Geff.groups) result.holdout_group_counts.push_back(group_count(holdout, g));

    ExpertState state = make_expert_state(H, Geff, set_learning_rates(H, Geff, holdout));
    result.q.num_hyps = state.num_hyps;
    result.q.num_groups = state.num_groups;
    result.q.eta = state.eta;
    result.q.log_weight_snapshots.reserve(static_cast<std::size_t>(m));
    result.log.rounds.reserve(static_cast<std::size_t>(m));

    for (const Example& e : hedge_half.examples) {
        result.q.log_weight_snapshots.push_back(state.log_weight);
        auto [p, mixture_loss] = hedge_round(state, e.x, e.y, H, Geff, loss);
        result.log.rounds.push_back(HedgeRound{e.x, e.y, std::move(p), mixture_loss});
    }
    result.final_state = std::move(state);
    return result;
}

std::vector<double> RandomizedPredictor::distribution_at(std::int64_t t, PointId x,
                                                         const GroupFamily& G) const {
    const auto& log_weight = log_weight_snapshots.at(static_cast<std::size_t>(t));
    std::vector<int> awake;
    for (int h = 0; h < num_hyps; ++h) {
        for (int g = 0; g < num_groups; ++g) {
            if (G[g].contains(x)) awake.push_back(h * num_groups + g);
        }
    }
    if (awake.empty()) {
        throw std::runtime_error("randomized predictor: uncovered point " + std::to_string(x));
    }
    return selection_distribution(log_weight, eta, awake, num_experts());
}

double exact_risk_of_round(const RandomizedPredictor& q, std::int64_t t, const Group& g,
                           const FiniteDistribution& dist, const LossSpec& loss,
                           const HypothesisClass& H, const GroupFamily& G) {
    const double pg = dist.group_mass(g);
    if (pg <= 0.0) throw std::invalid_argument("exact_risk_of_round: zero-mass group");
    double acc = 0.0;
    for (int x = 0; x < dist.num_points(); ++x) {
        if (!g.contains(x)) continue;
        const double mx = dist.mass[static_cast<std::size_t>(x)];
        if (mx <= 0.0) continue;
        const std::vector<double> p = q.distribution_at(t, x, G);
        const auto& row = dist.label_dist[static_cast<std::size_t>(x)];
        double expected = 0.0;
        for (int h = 0; h < q.num_hyps; ++h) {
            double ph = 0.0;  // marginal over the hypothesis's awake experts
            for (int gg = 0; gg < q.num_groups; ++gg) {
                ph += p[static_cast<std::size_t>(h * q.num_groups + gg)];
            }
            if (ph == 0.0) continue;
            const PredictionId z = H[h](x);
            double hyp_loss = 0.0;
            for (int y = 0; y < dist.num_labels(); ++y) {
                hyp_loss += row[static_cast<std::size_t>(y)] * loss(z, y);
            }
            expected += ph * hyp_loss;
        }
        acc += mx * expected;
    }
    return acc / pg;
}

double exact_risk_of_Q(const RandomizedPredictor& q, const Group& g,
                       const FiniteDistribution& dist, const LossSpec& loss,
                       const HypothesisClass& H, const GroupFamily& G) {
    const std::int64_t T = q.num_rounds();
    if (T == 0) throw std::invalid_argument("exact_risk_of_Q: no rounds");
    const double pg = dist.group_mass(g);
    if (pg <= 0.0) throw std::invalid_argument("exact_risk_of_Q: zero-mass group");

    // Average the per-round hypothesis marginals once per point, then take
    // the conditional expectation. Equivalent to averaging per-round risks.
    double acc = 0.0;
    for (int x = 0; x < dist.num_points(); ++x) {
        if (!g.contains(x)) continue;
        const double mx = dist.mass[static_cast<std::size_t>(x)];
        if (mx <= 0.0) continue;
        std::vector<double> avg_marginal(static_cast<std::size_t>(q.num_hyps), 0.0);
        for (std::int64_t t = 0; t < T; ++t) {
            const std::vector<double> p = q.distribution_at(t, x, G);
            for (int h = 0; h < q.num_hyps; ++h) {
                double ph = 0.0;
                for (int gg = 0; gg < q.num_groups; ++gg) {
                    ph += p[static_cast<std::size_t>(h * q.num_groups + gg)];
                }
                avg_marginal[static_cast<std::size_t>(h)] += ph;
            }
        }
        const auto& row = dist.label_dist[static_cast<std::size_t>(x)];
        double expected = 0.0;
        for (int h = 0; h < q.num_hyps; ++h) {
            const PredictionId z = H[h](x);
            double hyp_loss = 0.0;
            for (int y = 0; y < dist.num_labels(); ++y) {
                hyp_loss += row[static_cast<std::size_t>(y)] * loss(z, y);
            }
            expected += (avg_marginal[static_cast<std::size_t>(h)] / static_cast<double>(T)) * hyp_loss;
        }
        acc += mx * expected;
    }
    return acc / pg;
}

std::vector<std::vector<double>> q_hypothesis_marginals(const RandomizedPredictor& q,
                                                        const GroupFamily& G, int num_points) {
    const std::int64_t T = q.num_rounds();
    if (T == 0) throw std::invalid_argument("q_hypothesis_marginals: no rounds");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(num_points),
                                         std::vector<double>(static_cast<std::size_t>(q.num_hyps), 0.0));
    for (int x = 0; x < num_points; ++x) {
        auto& row = out[static_cast<std::size_t>(x)];
        for (std::int64_t t = 0; t < T; ++t) {
            std::vector<double> p;
            try {
                p = q.distribution_at(t, x, G);
            } catch (const std::runtime_error&) {
                row.assign(row.size(), 0.0);  // no expert ever awake here
                break;
            }
            for (int h = 0; h < q.num_hyps; ++h) {
                double ph = 0.0;
                for (int gg = 0; gg < q.num_groups; ++gg) {
                    ph += p[static_cast<std::size_t>(h * q.num_groups + gg)];
                }
                row[static_cast<std::size_t>(h)] += ph;
            }
        }
        for (double& v : row) v /= static_cast<double>(T);
    }
    return out;
}

PredictionId predict(const RandomizedPredictor& q, PointId x, const GroupFamily& G,
                     const HypothesisClass& H, RngStream& rng) {
    const std::int64_t T = q.num_rounds();
    if (T == 0) throw std::invalid_argument("predict: no rounds");
    const std::int64_t t = static_cast<std::int64_t>(rng.next_index(static_cast<std::uint64_t>(T)));
    const std::vector<double> p = q.distribution_at(t, x, G);
    double u = rng.next_unit();
    double acc = 0.0;
    int chosen = -1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        chosen = static_cast<int>(i);
        acc += p[i];
        if (u < acc) break;
    }
    if (chosen < 0) throw std::logic_error("predict: empty selection distribution");
    const int h = chosen / q.num_groups;
    return H[h](x);
}

std::vector<RegretRow> sleeping_regret_report(const InternalHypothesisLog& log,
                                              const ExpertState& state) {
    (void)log;  // accounting is carried by the state; the log is the audit trail
    const double log_n_experts = std::log(static_cast<double>(state.num_experts()));
    const double e_minus_1 = std::exp(1.0) - 1.0;
    std::vector<RegretRow> rows;
    rows.reserve(static_cast<std::size_t>(state.num_experts()));
    for (int h = 0; h < state.num_hyps; ++h) {
        for (int g = 0; g < state.num_groups; ++g) {
            const std::size_t i = static_cast<std::size_t>(state.expert_index(h, g));
            RegretRow row;
            row.hyp = h;
            row.group = g;
            row.eta = state.eta[i];
            row.cum_loss = state.cum_loss[i];
            row.awake_regret = state.cum_mixture_loss_awake[i] - state.cum_loss[i];
            row.bound = (e_minus_1 + 1.0 / row.eta) * log_n_experts +
                        e_minus_1 * row.eta * row.cum_loss;
            row.violated = row.awake_regret > row.bound + 1e-12;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace multigroup
