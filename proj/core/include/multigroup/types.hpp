#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "multigroup/rng.hpp"

namespace multigroup {

using PointId = int;
using LabelId = int;
using PredictionId = int;

class Group;

//===----------------------------------------------------------------------===//
// Distribution over a finite domain
//===----------------------------------------------------------------------===//

// Exact joint distribution over point-ids 0..m-1 with per-point label
// distributions. Serves as the ground-truth oracle: population risks are
// finite sums, never estimates.
struct FiniteDistribution {
    std::vector<double> mass;                      // per point, sums to 1
    std::vector<std::vector<double>> label_dist;   // [point][label], rows sum to 1
    std::vector<std::string> labels;               // display names, one per label id

    int num_points() const { return static_cast<int>(mass.size()); }
    int num_labels() const { return static_cast<int>(labels.size()); }

    // Throws std::invalid_argument unless masses/label rows are nonnegative
    // and sum to 1 within 1e-12.
    void validate() const;

    // P(g): total mass of points inside the group.
    double group_mass(const Group& g) const;

    const std::vector<double>& conditional_label_dist(PointId x) const;
};

//===----------------------------------------------------------------------===//
// Loss, hypotheses, groups
//===----------------------------------------------------------------------===//

// Bounded loss table over prediction space Z x label space Y.
struct LossSpec {
    std::vector<std::vector<double>> table;  // [prediction][label], entries in [0,1]

    int num_predictions() const { return static_cast<int>(table.size()); }
    int num_labels() const { return table.empty() ? 0 : static_cast<int>(table[0].size()); }

    double operator()(PredictionId z, LabelId y) const { return table.at(z).at(y); }

    void validate() const;  // throws std::invalid_argument on out-of-range entries

    // Identity-mismatch loss with Z = Y = {0..k-1}.
    static LossSpec zero_one(int k);
};

// Tabular predictor: point-id -> prediction-id.
struct Hypothesis {
    std::vector<PredictionId> outputs;

    PredictionId operator()(PointId x) const { return outputs.at(x); }
};

struct HypothesisClass {
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> names;  // optional; empty or one per hypothesis

    int size() const { return static_cast<int>(hypotheses.size()); }
    const Hypothesis& operator[](int i) const { return hypotheses.at(i); }
    std::string name_of(int i) const;
};

// Binary indicator over the domain marking a subpopulation.
class Group {
  public:
    Group() = default;
    explicit Group(std::vector<std::uint8_t> indicator) : indicator_(std::move(indicator)) {}

    bool contains(PointId x) const { return indicator_.at(x) != 0; }
    int domain_size() const { return static_cast<int>(indicator_.size()); }
    const std::vector<std::uint8_t>& indicator() const { return indicator_; }

  private:
    std::vector<std::uint8_t> indicator_;
};

struct GroupFamily {
    std::vector<Group> groups;
    std::vector<std::string> names;  // optional; empty or one per group

    int size() const { return static_cast<int>(groups.size()); }
    const Group& operator[](int i) const { return groups.at(i); }
    std::string name_of(int i) const;
};

// Group containing every point; used by the --catch-all option so that any
// point has at least one matching group.
Group all_ones_group(int num_points);

//===----------------------------------------------------------------------===//
// Samples
//===----------------------------------------------------------------------===//

struct Example {
    std::int64_t index;  // original position in the draw order
    PointId x;
    LabelId y;
};

// Indexed list of (point, label) pairs with cached per-group counts.
// `weights` is normally empty (every example counts once); the exhaustive
// weighted sample built from a distribution populates it so that weighted
// empirical risks coincide with population risks exactly.
struct Sample {
    std::vector<Example> examples;
    std::vector<double> weights;              // empty, or one positive weight per example
    std::vector<std::int64_t> group_counts;   // cached #_n(g) for an attached family

    std::int64_t size() const { return static_cast<std::int64_t>(examples.size()); }
    double weight(std::int64_t i) const {
        return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
    }
    double total_weight() const;
};

// n i.i.d. draws, deterministic for a given stream. When a family is passed,
// the group-count cache is filled.
Sample draw_sample(const FiniteDistribution& dist, std::int64_t n, RngStream rng,
                   const GroupFamily* family = nullptr);

// #_n(g): number of sample rows inside the group (unweighted count).
std::int64_t group_count(const Sample& s, const Group& g);

// P_n(g): weighted share of the sample inside the group.
double empirical_group_weight(const Sample& s, const Group& g);

// Rebuilds the group-count cache against the given family.
void cache_group_counts(Sample& s, const GroupFamily& family);

// One row per (point, label) pair with positive probability, weighted by
// mass(x) * P(y|x). Empirical statistics on this sample equal population
// statistics.
Sample exhaustive_weighted_sample(const FiniteDistribution& dist,
                                  const GroupFamily* family = nullptr);

//===----------------------------------------------------------------------===//
// Predictor concept
//===----------------------------------------------------------------------===//

// Anything callable on a point-id; hypotheses, decision lists and vote
// predictors all evaluate through this.
template <typename F>
concept PointPredictor = requires(const F& f, PointId x) {
    { f(x) } -> std::convertible_to<PredictionId>;
};

}  // namespace multigroup
