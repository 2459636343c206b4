#include "multigroup/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>

#include "multigroup/risk.hpp"

namespace multigroup {

namespace {

constexpr std::uint64_t kMaxMapEnumeration = 20'000'000;

void check_search_size(int num_hyps, int num_groups, int num_points) {
    if (num_hyps < 1 || num_hyps > 4 || num_groups < 1 || num_groups > 4 || num_points < 1 ||
        num_points > 12) {
        throw std::invalid_argument(
            "brute_force_optimum: search limited to <= 4 hypotheses, <= 4 groups, <= 12 points");
    }
}

std::uint64_t map_count(int num_predictions, int num_points) {
    std::uint64_t total = 1;
    for (int i = 0; i < num_points; ++i) {
        if (total > kMaxMapEnumeration / static_cast<std::uint64_t>(num_predictions)) {
            return kMaxMapEnumeration + 1;
        }
        total *= static_cast<std::uint64_t>(num_predictions);
    }
    return total;
}

// Point predictor backed by an explicit output table.
struct TablePredictor {
    const std::vector<PredictionId>* table;
    PredictionId operator()(PointId x) const { return (*table)[static_cast<std::size_t>(x)]; }
};

// Sign-vote over covering groups; ties and uncovered points go to id 1.
struct AssignmentVotePredictor {
    const std::vector<int>* assignment;
    const HypothesisClass* H;
    const GroupFamily* G;

    PredictionId operator()(PointId x) const {
        int sum = 0;
        for (int g = 0; g < G->size(); ++g) {
            if (!(*G)[g].contains(x)) continue;
            sum += ((*H)[(*assignment)[static_cast<std::size_t>(g)]](x) == 1) ? 1 : -1;
        }
        return sum >= 0 ? 1 : 0;
    }
};

void require_binary_for_vote(const HypothesisClass& H, int num_predictions) {
    if (num_predictions != 2) {
        throw std::invalid_argument(
            "brute_force_optimum: sign-vote search requires two prediction ids");
    }
    for (int h = 0; h < H.size(); ++h) {
        for (PredictionId z : H[h].outputs) {
            if (z != 0 && z != 1) {
                throw std::invalid_argument(
                    "brute_force_optimum: sign-vote search requires 0/1 hypothesis outputs");
            }
        }
    }
}

// Shared enumeration skeleton; the first predictor attaining the running
// minimum is kept, so witnesses are deterministic.
void search_class(PredictorClass cls, int num_hyps, int num_groups, int num_points,
                  int num_predictions, int max_len,
                  const std::function<void(const DecisionList&)>& try_list,
                  const std::function<void(const std::vector<PredictionId>&)>& try_map,
                  const std::function<void(const std::vector<int>&)>& try_assignment) {
    switch (cls) {
        case PredictorClass::DecisionLists: {
            const int len = max_len < 0 ? num_groups : max_len;
            for_each_canonical(num_hyps, num_groups, len, try_list);
            break;
        }
        case PredictorClass::AllMaps: {
            if (map_count(num_predictions, num_points) > kMaxMapEnumeration) {
                throw std::invalid_argument(
                    "brute_force_optimum: map enumeration exceeds the size cap");
            }
            std::vector<PredictionId> table(static_cast<std::size_t>(num_points), 0);
            while (true) {
                try_map(table);
                int pos = num_points - 1;
                while (pos >= 0 && table[static_cast<std::size_t>(pos)] == num_predictions - 1) {
                    table[static_cast<std::size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0) break;
                ++table[static_cast<std::size_t>(pos)];
            }
            break;
        }
        case PredictorClass::MajorityAssignments: {
            std::vector<int> assignment(static_cast<std::size_t>(num_groups), 0);
            while (true) {
                try_assignment(assignment);
                int pos = num_groups - 1;
                while (pos >= 0 && assignment[static_cast<std::size_t>(pos)] == num_hyps - 1) {
                    assignment[static_cast<std::size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0) break;
                ++assignment[static_cast<std::size_t>(pos)];
            }
            break;
        }
    }
}

}  // namespace

ExactBruteForceResult brute_force_optimum(const ExactInstance& inst, PredictorClass cls,
                                          int max_len) {
    check_search_size(inst.H.size(), inst.G.size(), inst.dist.num_points());
    const int num_predictions = static_cast<int>(inst.loss.size());

    std::vector<Rat> bench;
    bench.reserve(static_cast<std::size_t>(inst.G.size()));
    for (int g = 0; g < inst.G.size(); ++g) {
        bench.push_back(exact_benchmark_risk(inst.H, inst.G[g], inst.dist, inst.loss));
    }

    ExactBruteForceResult result;
    bool found = false;
    auto consider = [&](const auto& pred, const auto& record_witness) {
        Rat worst(0);
        bool first = true;
        for (int g = 0; g < inst.G.size(); ++g) {
            const Rat excess = exact_conditional_risk(pred, inst.G[g], inst.dist, inst.loss) -
                               bench[static_cast<std::size_t>(g)];
            if (first || excess > worst) {
                worst = excess;
                first = false;
            }
        }
        if (!found || worst < result.optimum) {
            result.optimum = worst;
            record_witness();
            found = true;
        }
    };

    if (cls == PredictorClass::MajorityAssignments) {
        require_binary_for_vote(inst.H, num_predictions);
    }
    search_class(
        cls, inst.H.size(), inst.G.size(), inst.dist.num_points(), num_predictions, max_len,
        [&](const DecisionList& list) {
            DecisionListPredictor pred{&list, &inst.H, &inst.G};
            consider(pred, [&] { result.witness = BruteForceWitness{list, {}, {}}; });
        },
        [&](const std::vector<PredictionId>& table) {
            TablePredictor pred{&table};
            consider(pred, [&] { result.witness = BruteForceWitness{{}, table, {}}; });
        },
        [&](const std::vector<int>& assignment) {
            AssignmentVotePredictor pred{&assignment, &inst.H, &inst.G};
            consider(pred, [&] { result.witness = BruteForceWitness{{}, {}, assignment}; });
        });
    if (!found) throw std::logic_error("brute_force_optimum: empty predictor class");
    return result;
}

BruteForceResult brute_force_optimum(const Sample& s, const HypothesisClass& H,
                                     const GroupFamily& G, const LossSpec& loss,
                                     PredictorClass cls, int max_len, int num_predictions) {
    const int domain = static_cast<int>(G.size() > 0 ? G[0].domain_size() : 0);
    check_search_size(H.size(), G.size(), domain);
    if (num_predictions < 0) num_predictions = loss.num_predictions();
    for (int g = 0; g < G.size(); ++g) {
        if (group_count(s, G[g]) == 0) {
            throw std::invalid_argument("brute_force_optimum: group '" + G.name_of(g) +
                                        "' has no sample points");
        }
    }

    std::vector<double> bench;
    bench.reserve(static_cast<std::size_t>(G.size()));
    for (int g = 0; g < G.size(); ++g) {
        bench.push_back(empirical_benchmark_risk(H, G[g], s, loss));
    }

    BruteForceResult result;
    bool found = false;
    auto consider = [&](const auto& pred, const auto& record_witness) {
        double worst = -std::numeric_limits<double>::infinity();
        for (int g = 0; g < G.size(); ++g) {
            const double excess =
                empirical_conditional_risk(pred, G[g], s, loss) - bench[static_cast<std::size_t>(g)];
            worst = std::max(worst, excess);
        }
        if (!found || worst < result.optimum) {
            result.optimum = worst;
            record_witness();
            found = true;
        }
    };

    if (cls == PredictorClass::MajorityAssignments) {
        require_binary_for_vote(H, num_predictions);
    }
    search_class(
        cls, H.size(), G.size(), domain, num_predictions, max_len,
        [&](const DecisionList& list) {
            DecisionListPredictor pred{&list, &H, &G};
            consider(pred, [&] { result.witness = BruteForceWitness{list, {}, {}}; });
        },
        [&](const std::vector<PredictionId>& table) {
            TablePredictor pred{&table};
            consider(pred, [&] { result.witness = BruteForceWitness{{}, table, {}}; });
        },
        [&](const std::vector<int>& assignment) {
            AssignmentVotePredictor pred{&assignment, &H, &G};
            consider(pred, [&] { result.witness = BruteForceWitness{{}, {}, assignment}; });
        });
    if (!found) throw std::logic_error("brute_force_optimum: empty predictor class");
    return result;
}

}  // namespace multigroup
