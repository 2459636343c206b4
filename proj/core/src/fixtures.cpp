#include "multigroup/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>

#include "multigroup/risk.hpp"
#include "multigroup/rng.hpp"

namespace multigroup {

//===----------------------------------------------------------------------===//
// Exact distributions
//===----------------------------------------------------------------------===//

void ExactDistribution::validate() const {
    if (mass.empty()) throw std::invalid_argument("exact distribution: empty domain");
    Rat total(0);
    for (const Rat& m : mass) {
        if (m < Rat(0)) throw std::invalid_argument("exact distribution: negative mass");
        total += m;
    }
    if (total != Rat(1)) throw std::invalid_argument("exact distribution: masses do not sum to 1");
    if (label_dist.size() != mass.size()) {
        throw std::invalid_argument("exact distribution: label rows != points");
    }
    for (const auto& row : label_dist) {
        Rat row_sum(0);
        for (const Rat& p : row) {
            if (p < Rat(0)) throw std::invalid_argument("exact distribution: negative label prob");
            row_sum += p;
        }
        if (row_sum != Rat(1)) {
            throw std::invalid_argument("exact distribution: label row does not sum to 1");
        }
    }
}

Rat ExactDistribution::group_mass(const Group& g) const {
    Rat total(0);
    for (int x = 0; x < num_points(); ++x) {
        if (g.contains(x)) total += mass[static_cast<std::size_t>(x)];
    }
    return total;
}

Rat exact_benchmark_risk(const HypothesisClass& H, const Group& g, const ExactDistribution& dist,
                         const std::vector<std::vector<Rat>>& loss) {
    if (H.size() == 0) throw std::invalid_argument("exact_benchmark_risk: empty class");
    Rat best = exact_conditional_risk(H[0], g, dist, loss);
    for (int i = 1; i < H.size(); ++i) {
        best = std::min(best, exact_conditional_risk(H[i], g, dist, loss));
    }
    return best;
}

void ExactInstance::check_risk_table() const {
    for (int h = 0; h < H.size(); ++h) {
        for (int g = 0; g < G.size(); ++g) {
            const Rat actual = exact_conditional_risk(H[h], G[g], dist, loss);
            if (actual != expected_risk[static_cast<std::size_t>(h)][static_cast<std::size_t>(g)]) {
                throw std::logic_error("exact instance '" + name + "': stored risk for (" +
                                       H.name_of(h) + ", " + G.name_of(g) +
                                       ") does not match recomputation");
            }
        }
    }
}

FiniteDistribution to_float(const ExactDistribution& dist, std::vector<std::string> labels) {
    FiniteDistribution out;
    out.labels = std::move(labels);
    out.mass.reserve(dist.mass.size());
    for (const Rat& m : dist.mass) out.mass.push_back(to_double(m));
    out.label_dist.reserve(dist.label_dist.size());
    for (const auto& row : dist.label_dist) {
        std::vector<double> frow;
        frow.reserve(row.size());
        for (const Rat& p : row) frow.push_back(to_double(p));
        out.label_dist.push_back(std::move(frow));
    }
    return out;
}

namespace {

std::vector<std::vector<Rat>> exact_zero_one_loss(int k) {
    std::vector<std::vector<Rat>> loss(static_cast<std::size_t>(k),
                                       std::vector<Rat>(static_cast<std::size_t>(k), Rat(1)));
    for (int i = 0; i < k; ++i) loss[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Rat(0);
    return loss;
}

Group group_of(std::initializer_list<int> members, int domain) {
    std::vector<std::uint8_t> ind(static_cast<std::size_t>(domain), 0);
    for (int x : members) ind[static_cast<std::size_t>(x)] = 1;
    return Group(std::move(ind));
}

}  // namespace

//===----------------------------------------------------------------------===//
// Twin scenarios
//===----------------------------------------------------------------------===//

std::pair<ExactInstance, ExactInstance> build_twin_scenarios() {
    const Rat q0(0);
    const Rat q14(1, 4);
    const Rat q34(3, 4);

    HypothesisClass H;
    H.hypotheses = {Hypothesis{{0, 0, 0}}, Hypothesis{{1, 1, 1}}};  // constant first/second label
    H.names = {"always-first-label", "always-second-label"};

    GroupFamily G;
    G.groups = {group_of({0, 1}, 3), group_of({0, 2}, 3)};
    G.names = {"first-pair", "second-pair"};

    // Both scenarios share group masses and the whole benchmark risk table.
    const std::vector<std::vector<Rat>> shared_risk = {{Rat(1, 2), Rat(7, 8)},
                                                       {Rat(7, 8), Rat(1, 2)}};

    ExactInstance s1;
    s1.name = "twin-scenario-1";
    s1.dist.mass = {Rat(1, 3), Rat(1, 3), Rat(1, 3)};
    s1.dist.label_dist = {{q14, q0, q34}, {q34, q14, q0}, {q0, Rat(1), q0}};
    s1.H = H;
    s1.G = G;
    s1.loss = exact_zero_one_loss(3);
    s1.expected_risk = shared_risk;
    s1.label_names = {"1", "2", "3"};
    s1.dist.validate();
    s1.check_risk_table();

    ExactInstance s2 = s1;
    s2.name = "twin-scenario-2";
    s2.dist.label_dist = {{q0, q14, q34}, {Rat(1), q0, q0}, {q14, q34, q0}};
    s2.dist.validate();
    s2.check_risk_table();

    return {std::move(s1), std::move(s2)};
}

TwinScenarioReport verify_twin_scenarios() {
    const auto [s1, s2] = build_twin_scenarios();
    const ExactInstance* scenarios[2] = {&s1, &s2};

    // Benchmarks agree across scenarios; compute them once per group.
    std::vector<Rat> bench;
    for (int g = 0; g < s1.G.size(); ++g) {
        bench.push_back(exact_benchmark_risk(s1.H, s1.G[g], s1.dist, s1.loss));
    }

    TwinScenarioReport report;
    report.threshold = Rat(1, 8);
    report.all_flagged = true;
    for_each_canonical(s1.H.size(), s1.G.size(), s1.G.size(), [&](const DecisionList& f) {
        TwinScenarioWitness w;
        w.list = f;
        bool first = true;
        for (int sc = 0; sc < 2; ++sc) {
            const ExactInstance& inst = *scenarios[sc];
            DecisionListPredictor pred{&f, &inst.H, &inst.G};
            for (int g = 0; g < inst.G.size(); ++g) {
                const Rat excess = exact_conditional_risk(pred, inst.G[g], inst.dist, inst.loss) -
                                   bench[static_cast<std::size_t>(g)];
                if (first || excess > w.excess) {
                    w.excess = excess;
                    w.scenario = sc;
                    w.group = g;
                    first = false;
                }
            }
        }
        if (w.excess < report.threshold) report.all_flagged = false;
        report.per_list.push_back(std::move(w));
    });
    return report;
}

//===----------------------------------------------------------------------===//
// Majority-vote counterexample
//===----------------------------------------------------------------------===//

ExactInstance build_majority_vote_counterexample() {
    ExactInstance inst;
    inst.name = "vote-counterexample";
    inst.dist.mass = {Rat(3, 24), Rat(7, 24), Rat(7, 24), Rat(7, 24)};
    // Labels are deterministic: id 0 is -1, id 1 is +1.
    inst.dist.label_dist = {{Rat(0), Rat(1)}, {Rat(1), Rat(0)}, {Rat(1), Rat(0)}, {Rat(0), Rat(1)}};
    inst.H.hypotheses = {Hypothesis{{1, 1, 1, 1}}, Hypothesis{{0, 0, 0, 0}}};
    inst.H.names = {"always-plus", "always-minus"};
    inst.G.groups = {group_of({0, 1}, 4), group_of({0, 2}, 4), group_of({0, 3}, 4)};
    inst.G.names = {"pair-1", "pair-2", "pair-3"};
    inst.loss = exact_zero_one_loss(2);
    inst.expected_risk = {{Rat(7, 10), Rat(7, 10), Rat(0)}, {Rat(3, 10), Rat(3, 10), Rat(1)}};
    inst.label_names = {"-1", "+1"};
    inst.dist.validate();
    inst.check_risk_table();
    return inst;
}

namespace {

// Sign-vote predictor for a group-to-hypothesis assignment; ties and
// uncovered points resolve to +1 (id 1).
struct AssignmentVote {
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

}  // namespace

VoteCounterexampleReport verify_majority_vote_counterexample() {
    const ExactInstance inst = build_majority_vote_counterexample();
    std::vector<Rat> bench;
    for (int g = 0; g < inst.G.size(); ++g) {
        bench.push_back(exact_benchmark_risk(inst.H, inst.G[g], inst.dist, inst.loss));
    }

    VoteCounterexampleReport report;
    report.threshold = Rat(1, 4);
    report.all_exceed = true;
    const int num_assignments_total = 1 << inst.G.size();  // |H| = 2
    for (int code = 0; code < num_assignments_total; ++code) {
        VoteAssignmentRow row;
        row.assignment.resize(static_cast<std::size_t>(inst.G.size()));
        for (int g = 0; g < inst.G.size(); ++g) {
            row.assignment[static_cast<std::size_t>(g)] = (code >> g) & 1;
        }
        AssignmentVote pred{&row.assignment, &inst.H, &inst.G};
        bool first = true;
        for (int g = 0; g < inst.G.size(); ++g) {
            const Rat excess = exact_conditional_risk(pred, inst.G[g], inst.dist, inst.loss) -
                               bench[static_cast<std::size_t>(g)];
            if (first || excess > row.worst_excess) {
                row.worst_excess = excess;
                row.worst_group = g;
                first = false;
            }
        }
        if (!(row.worst_excess > report.threshold)) report.all_exceed = false;
        if (code == 0 || row.worst_excess < report.min_excess) report.min_excess = row.worst_excess;
        report.rows.push_back(std::move(row));
    }
    return report;
}

//===----------------------------------------------------------------------===//
// Calibrated-but-biased construction
//===----------------------------------------------------------------------===//

MultiaccuracyGapInstance build_multiaccuracy_gap(const Rat& eps) {
    if (!(eps > Rat(0) && eps < Rat(1, 2))) {
        throw std::invalid_argument("build_multiaccuracy_gap: eps must lie in (0, 1/2)");
    }
    MultiaccuracyGapInstance out;
    out.eps = eps;

    ExactInstance& inst = out.inst;
    inst.name = "multiaccuracy-gap";
    inst.dist.mass = {Rat(1) - Rat(2) * eps, eps, eps};
    // The target concept is identically 1: label id 1 with probability one.
    inst.dist.label_dist = {{Rat(0), Rat(1)}, {Rat(0), Rat(1)}, {Rat(0), Rat(1)}};
    inst.H.hypotheses = {Hypothesis{{1, 1, 0}}};  // +1 on the first two points, -1 on the third
    inst.H.names = {"plus-except-last"};
    inst.G.groups = {all_ones_group(3)};
    inst.G.names = {"everyone"};
    inst.loss = exact_zero_one_loss(2);
    inst.expected_risk = {{eps}};
    inst.label_names = {"0", "1"};
    inst.dist.validate();
    inst.check_risk_table();

    out.f = {Rat(1), Rat(0), Rat(0)};
    out.c = {Rat(1), Rat(1), Rat(-1)};  // the hypothesis read as +/-1, times the group
    out.multiaccuracy_value =
        multiaccuracy_violation(out.f, out.c, inst.dist, {Rat(0), Rat(1)});
    out.h_error_mass = exact_conditional_risk(inst.H[0], inst.G[0], inst.dist, inst.loss);
    // f disagrees with the target exactly on the two eps-mass points.
    Rat f_err(0);
    for (int x = 0; x < 3; ++x) {
        if (out.f[static_cast<std::size_t>(x)] != Rat(1)) {
            f_err += inst.dist.mass[static_cast<std::size_t>(x)];
        }
    }
    out.f_error_mass = f_err / inst.dist.group_mass(inst.G[0]);
    // Consequence of 0-multiaccuracy: risk at most 4 inf_h L(h|g) + 2*0/P(g).
    out.consequence_bound = Rat(4) * out.h_error_mass;
    return out;
}

Rat multiaccuracy_violation(const std::vector<Rat>& f, const std::vector<Rat>& c,
                            const ExactDistribution& dist, const std::vector<Rat>& label_values) {
    if (static_cast<int>(f.size()) != dist.num_points() ||
        static_cast<int>(c.size()) != dist.num_points()) {
        throw std::invalid_argument("multiaccuracy_violation: table size mismatch");
    }
    if (static_cast<int>(label_values.size()) != dist.num_labels()) {
        throw std::invalid_argument("multiaccuracy_violation: label value count mismatch");
    }
    for (const Rat& v : f) {
        if (v < Rat(0) || v > Rat(1)) {
            throw std::invalid_argument("multiaccuracy_violation: predictor value outside [0,1]");
        }
    }
    for (const Rat& v : c) {
        if (v < Rat(-1) || v > Rat(1)) {
            throw std::invalid_argument("multiaccuracy_violation: test function outside [-1,1]");
        }
    }
    Rat acc(0);
    for (int x = 0; x < dist.num_points(); ++x) {
        Rat expected_label(0);
        for (int y = 0; y < dist.num_labels(); ++y) {
            expected_label += dist.label_dist[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] *
                              label_values[static_cast<std::size_t>(y)];
        }
        acc += dist.mass[static_cast<std::size_t>(x)] * c[static_cast<std::size_t>(x)] *
               (f[static_cast<std::size_t>(x)] - expected_label);
    }
    return acc;
}

//===----------------------------------------------------------------------===//
// Overlapping planar instance
//===----------------------------------------------------------------------===//

OverlapInstance generate_overlap_instance(std::uint64_t seed, int n_points, double overlap) {
    if (n_points < 4) throw std::invalid_argument("generate_overlap_instance: need >= 4 points");
    if (!(overlap >= 0.0 && overlap <= 1.0)) {
        throw std::invalid_argument("generate_overlap_instance: overlap outside [0,1]");
    }
    const RngStream root(seed);
    const int nx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_points))));
    const int ny = (n_points + nx - 1) / nx;

    for (int attempt = 0; attempt < 100; ++attempt) {
        RngStream rng = root.stream("attempt/" + std::to_string(attempt));
        std::vector<double> px(static_cast<std::size_t>(n_points));
        std::vector<double> py(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i) {
            const int cx = i % nx;
            const int cy = i / nx;
            px[static_cast<std::size_t>(i)] = (static_cast<double>(cx) + rng.next_unit()) / nx;
            py[static_cast<std::size_t>(i)] = (static_cast<double>(cy) + rng.next_unit()) /
                                              std::max(ny, 1);
        }

        OverlapInstance out;
        out.seed = seed;
        out.attempts = attempt + 1;
        out.dist.mass.assign(static_cast<std::size_t>(n_points),
                             1.0 / static_cast<double>(n_points));
        out.dist.labels = {"-1", "+1"};
        std::vector<std::uint8_t> left(static_cast<std::size_t>(n_points)),
            right(static_cast<std::size_t>(n_points));
        Hypothesis h_top, h_bottom, h_left, h_diag;
        for (int i = 0; i < n_points; ++i) {
            const double x = px[static_cast<std::size_t>(i)];
            const double y = py[static_cast<std::size_t>(i)];
            // Left half wants the top labeled +1; right half wants the bottom.
            const bool positive = (x < 0.5) ? (y > 0.5) : (y <= 0.5);
            out.dist.label_dist.push_back(positive ? std::vector<double>{0.0, 1.0}
                                                   : std::vector<double>{1.0, 0.0});
            left[static_cast<std::size_t>(i)] = (x <= 0.5 + overlap / 2.0) ? 1 : 0;
            right[static_cast<std::size_t>(i)] = (x >= 0.5 - overlap / 2.0) ? 1 : 0;
            h_top.outputs.push_back(y > 0.5 ? 1 : 0);
            h_bottom.outputs.push_back(y <= 0.5 ? 1 : 0);
            h_left.outputs.push_back(x <= 0.5 ? 1 : 0);
            h_diag.outputs.push_back(x + y <= 1.0 ? 1 : 0);
        }
        out.dist.validate();
        out.H.hypotheses = {h_top, h_bottom, h_left, h_diag};
        out.H.names = {"plus-above", "plus-below", "plus-left", "plus-under-diagonal"};
        out.G.groups = {Group(left), Group(right)};
        out.G.names = {"left", "right"};

        bool group_empty = false;
        for (const Group& g : out.G.groups) {
            if (out.dist.group_mass(g) <= 0.0) group_empty = true;
        }
        if (group_empty) continue;

        // Certify that no single hypothesis is near-optimal for both groups.
        const LossSpec loss = LossSpec::zero_one(2);
        double gap = std::numeric_limits<double>::infinity();
        for (int h = 0; h < out.H.size(); ++h) {
            double worst = 0.0;
            for (int g = 0; g < out.G.size(); ++g) {
                const double excess =
                    population_conditional_risk(out.H[h], out.G[g], out.dist, loss) -
                    population_benchmark_risk(out.H, out.G[g], out.dist, loss);
                worst = std::max(worst, excess);
            }
            gap = std::min(gap, worst);
        }
        if (gap > 0.05) {
            out.certified_gap = gap;
            return out;
        }
    }
    throw std::runtime_error(
        "generate_overlap_instance: no certified instance after 100 attempts");
}

}  // namespace multigroup
