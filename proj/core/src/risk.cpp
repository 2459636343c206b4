#include "multigroup/risk.hpp"

#include <cmath>
#include <limits>

namespace multigroup {

int empirical_erm_index(const HypothesisClass& H, const Sample& s, const LossSpec& loss) {
    if (H.size() == 0) throw std::invalid_argument("empirical_erm_index: empty hypothesis class");
    int best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (int i = 0; i < H.size(); ++i) {
        const double r = empirical_risk(H[i], s, loss);
        if (r < best_risk) {
            best_risk = r;
            best = i;
        }
    }
    return best;
}

int empirical_erm_index_in_group(const HypothesisClass& H, const Group& g, const Sample& s,
                                 const LossSpec& loss) {
    if (H.size() == 0) {
        throw std::invalid_argument("empirical_erm_index_in_group: empty hypothesis class");
    }
    int best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (int i = 0; i < H.size(); ++i) {
        const double r = empirical_conditional_risk(H[i], g, s, loss);
        if (r < best_risk) {
            best_risk = r;
            best = i;
        }
    }
    return best;
}

double empirical_benchmark_risk(const HypothesisClass& H, const Group& g, const Sample& s,
                                const LossSpec& loss) {
    return empirical_conditional_risk(H[empirical_erm_index_in_group(H, g, s, loss)], g, s, loss);
}

double population_benchmark_risk(const HypothesisClass& H, const Group& g,
                                 const FiniteDistribution& dist, const LossSpec& loss) {
    if (H.size() == 0) throw std::invalid_argument("population_benchmark_risk: empty class");
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < H.size(); ++i) {
        best = std::min(best, population_conditional_risk(H[i], g, dist, loss));
    }
    return best;
}

void DeviationParams::validate() const {
    if (!(log_capacity > 0.0)) throw std::invalid_argument("deviation params: D must be positive");
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("deviation params: delta outside (0,1)");
    }
}

double deviation_bound(const DeviationParams& params, std::int64_t count_in_group,
                       double empirical_risk) {
    params.validate();
    if (count_in_group < 1) throw std::invalid_argument("deviation_bound: count must be >= 1");
    if (!(empirical_risk >= 0.0 && empirical_risk <= 1.0)) {
        throw std::invalid_argument("deviation_bound: empirical risk outside [0,1]");
    }
    const double D = params.log_capacity;
    const double c = static_cast<double>(count_in_group);
    const double slow = 9.0 * std::sqrt(D / c);
    const double fast = 7.0 * std::sqrt(D * empirical_risk / c) + 16.0 * D / c;
    return std::min(slow, fast);
}

double finite_class_capacity(std::int64_t num_hyps, std::int64_t num_groups, double delta) {
    if (num_hyps < 1 || num_groups < 1) {
        throw std::invalid_argument("finite_class_capacity: class sizes must be >= 1");
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("finite_class_capacity: delta must be positive");
    }
    return 2.0 * std::log(static_cast<double>(num_hyps) * static_cast<double>(num_groups)) +
           std::log(8.0 / delta);
}

double pseudodim_capacity(double d, std::int64_t n, double delta) {
    if (d < 0.0) throw std::invalid_argument("pseudodim_capacity: dimension must be >= 0");
    if (n < 1) throw std::invalid_argument("pseudodim_capacity: n must be >= 1");
    if (!(delta > 0.0)) {
        throw std::invalid_argument("pseudodim_capacity: delta must be positive");
    }
    return 4.0 * d * std::log(2.0 * static_cast<double>(n)) + std::log(8.0 / delta);
}

double experts_capacity(std::int64_t num_hyps, std::int64_t num_groups, double delta) {
    if (num_hyps < 1 || num_groups < 1) {
        throw std::invalid_argument("experts_capacity: class sizes must be >= 1");
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("experts_capacity: delta must be positive");
    }
    return 2.0 * std::log(static_cast<double>(num_groups) * static_cast<double>(num_hyps)) +
           std::log(64.0 / delta);
}

}  // namespace multigroup
