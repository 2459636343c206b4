#pragma once

#include <cstdint>
#include <stdexcept>

#include "multigroup/types.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Conditional risks
//===----------------------------------------------------------------------===//

// L_n(f|g): weighted average loss over the sample rows falling in g.
// Throws std::invalid_argument when no row falls in g.
template <PointPredictor F>
double empirical_conditional_risk(const F& f, const Group& g, const Sample& s,
                                  const LossSpec& loss) {
    double weight_in_group = 0.0;
    double weighted_loss = 0.0;
    bool any = false;
    for (std::int64_t i = 0; i < s.size(); ++i) {
        const Example& e = s.examples[static_cast<std::size_t>(i)];
        if (!g.contains(e.x)) continue;
        any = true;
        const double w = s.weight(i);
        weight_in_group += w;
        weighted_loss += w * loss(f(e.x), e.y);
    }
    if (!any || weight_in_group <= 0.0) {
        throw std::invalid_argument("empirical_conditional_risk: empty group in sample");
    }
    return weighted_loss / weight_in_group;
}

// L(f|g): exact conditional expectation over the finite distribution.
// Throws std::invalid_argument when P(g) = 0.
template <PointPredictor F>
double population_conditional_risk(const F& f, const Group& g, const FiniteDistribution& dist,
                                   const LossSpec& loss) {
    const double pg = dist.group_mass(g);
    if (pg <= 0.0) throw std::invalid_argument("population_conditional_risk: zero-mass group");
    double acc = 0.0;
    for (int x = 0; x < dist.num_points(); ++x) {
        if (!g.contains(x)) continue;
        const double mx = dist.mass[static_cast<std::size_t>(x)];
        if (mx <= 0.0) continue;
        const auto& row = dist.label_dist[static_cast<std::size_t>(x)];
        const PredictionId z = f(x);
        double expected = 0.0;
        for (int y = 0; y < dist.num_labels(); ++y) {
            expected += row[static_cast<std::size_t>(y)] * loss(z, y);
        }
        acc += mx * expected;
    }
    return acc / pg;
}

// Overall (unconditional) weighted empirical risk L_n(f).
template <PointPredictor F>
double empirical_risk(const F& f, const Sample& s, const LossSpec& loss) {
    double weighted_loss = 0.0;
    for (std::int64_t i = 0; i < s.size(); ++i) {
        const Example& e = s.examples[static_cast<std::size_t>(i)];
        weighted_loss += s.weight(i) * loss(f(e.x), e.y);
    }
    return weighted_loss / s.total_weight();
}

//===----------------------------------------------------------------------===//
// ERM selection (ties resolve to the lowest index)
//===----------------------------------------------------------------------===//

int empirical_erm_index(const HypothesisClass& H, const Sample& s, const LossSpec& loss);
int empirical_erm_index_in_group(const HypothesisClass& H, const Group& g, const Sample& s,
                                 const LossSpec& loss);

// min_h L_n(h|g) and min_h L(h|g): per-group benchmark risks.
double empirical_benchmark_risk(const HypothesisClass& H, const Group& g, const Sample& s,
                                const LossSpec& loss);
double population_benchmark_risk(const HypothesisClass& H, const Group& g,
                                 const FiniteDistribution& dist, const LossSpec& loss);

//===----------------------------------------------------------------------===//
// Deviation bounds
//===----------------------------------------------------------------------===//

// Capacity D and confidence parameters for the two-sided deviation bound.
struct DeviationParams {
    double log_capacity = 0.0;  // D
    double delta = 0.0;         // failure probability in (0,1)
    std::int64_t n = 0;         // sample size the capacity was computed for

    void validate() const;
};

// |L - L_n| <= min{ 9 sqrt(D/c), 7 sqrt(D L_n / c) + 16 D / c } where c is the
// in-group count. Nonincreasing in c, nondecreasing in D.
double deviation_bound(const DeviationParams& params, std::int64_t count_in_group,
                       double empirical_risk);

// D for finite benchmark and group classes: 2 log(|H||G|) + log(8/delta).
double finite_class_capacity(std::int64_t num_hyps, std::int64_t num_groups, double delta);

// D when only a pseudo-dimension d is known: 4 d log(2n) + log(8/delta).
double pseudodim_capacity(double d, std::int64_t n, double delta);

// D used by the online-reduction guarantee: 2 log(|G||H|) + log(64/delta).
// Kept separate from finite_class_capacity so the constants cannot be mixed up.
double experts_capacity(std::int64_t num_hyps, std::int64_t num_groups, double delta);

}  // namespace multigroup
