#include "multigroup/types.hpp"

#include <cmath>
#include <stdexcept>

namespace multigroup {

namespace {
constexpr double kSumTolerance = 1e-12;

void check_probability_vector(const std::vector<double>& v, const char* what) {
    double sum = 0.0;
    for (double p : v) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument(std::string(what) + ": negative or non-finite entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw std::invalid_argument(std::string(what) + ": entries sum to " + std::to_string(sum) +
                                    ", expected 1");
    }
}
}  // namespace

void FiniteDistribution::validate() const {
    if (mass.empty()) throw std::invalid_argument("distribution: empty domain");
    if (labels.empty()) throw std::invalid_argument("distribution: empty label space");
    if (label_dist.size() != mass.size()) {
        throw std::invalid_argument("distribution: label_dist rows != number of points");
    }
    check_probability_vector(mass, "distribution mass");
    for (const auto& row : label_dist) {
        if (row.size() != labels.size()) {
            throw std::invalid_argument("distribution: label_dist row width != number of labels");
        }
        check_probability_vector(row, "label distribution row");
    }
}

double FiniteDistribution::group_mass(const Group& g) const {
    double total = 0.0;
    for (int x = 0; x < num_points(); ++x) {
        if (g.contains(x)) total += mass[static_cast<std::size_t>(x)];
    }
    return total;
}

const std::vector<double>& FiniteDistribution::conditional_label_dist(PointId x) const {
    if (x < 0 || x >= num_points()) {
        throw std::invalid_argument("conditional_label_dist: point out of range");
    }
    return label_dist[static_cast<std::size_t>(x)];
}

void LossSpec::validate() const {
    if (table.empty() || table[0].empty()) throw std::invalid_argument("loss: empty table");
    const std::size_t width = table[0].size();
    for (const auto& row : table) {
        if (row.size() != width) throw std::invalid_argument("loss: ragged table");
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("loss: entry outside [0,1]");
            }
        }
    }
}

LossSpec LossSpec::zero_one(int k) {
    LossSpec spec;
    spec.table.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 1.0));
    for (int i = 0; i < k; ++i) spec.table[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0.0;
    return spec;
}

std::string HypothesisClass::name_of(int i) const {
    if (i >= 0 && i < static_cast<int>(names.size()) && !names[static_cast<std::size_t>(i)].empty()) {
        return names[static_cast<std::size_t>(i)];
    }
    return "h" + std::to_string(i);
}

std::string GroupFamily::name_of(int i) const {
    if (i >= 0 && i < static_cast<int>(names.size()) && !names[static_cast<std::size_t>(i)].empty()) {
        return names[static_cast<std::size_t>(i)];
    }
    return "g" + std::to_string(i);
}

Group all_ones_group(int num_points) {
    return Group(std::vector<std::uint8_t>(static_cast<std::size_t>(num_points), 1));
}

double Sample::total_weight() const {
    if (weights.empty()) return static_cast<double>(examples.size());
    double sum = 0.0;
    for (double w : weights) sum += w;
    return sum;
}

Sample draw_sample(const FiniteDistribution& dist, std::int64_t n, RngStream rng,
                   const GroupFamily* family) {
    if (n < 1) throw std::invalid_argument("draw_sample: n must be at least 1");
    dist.validate();

    Sample s;
    s.examples.reserve(static_cast<std::size_t>(n));
    const int m = dist.num_points();
    const int k = dist.num_labels();
    for (std::int64_t i = 0; i < n; ++i) {
        // Inverse-CDF draw for the point, then for its label.
        double u = rng.next_unit();
        int x = m - 1;
        double acc = 0.0;
        for (int p = 0; p < m; ++p) {
            acc += dist.mass[static_cast<std::size_t>(p)];
            if (u < acc) {
                x = p;
                break;
            }
        }
        double v = rng.next_unit();
        const auto& row = dist.label_dist[static_cast<std::size_t>(x)];
        int y = k - 1;
        acc = 0.0;
        for (int lab = 0; lab < k; ++lab) {
            acc += row[static_cast<std::size_t>(lab)];
            if (v < acc) {
                y = lab;
                break;
            }
        }
        s.examples.push_back(Example{i, x, y});
    }
    if (family != nullptr) cache_group_counts(s, *family);
    return s;
}

std::int64_t group_count(const Sample& s, const Group& g) {
    std::int64_t count = 0;
    for (const Example& e : s.examples) {
        if (g.contains(e.x)) ++count;
    }
    return count;
}

double empirical_group_weight(const Sample& s, const Group& g) {
    double in_group = 0.0;
    for (std::int64_t i = 0; i < s.size(); ++i) {
        if (g.contains(s.examples[static_cast<std::size_t>(i)].x)) in_group += s.weight(i);
    }
    return in_group / s.total_weight();
}

void cache_group_counts(Sample& s, const GroupFamily& family) {
    s.group_counts.clear();
    s.group_counts.reserve(static_cast<std::size_t>(family.size()));
    for (const Group& g : family.groups) s.group_counts.push_back(group_count(s, g));
}

Sample exhaustive_weighted_sample(const FiniteDistribution& dist, const GroupFamily* family) {
    dist.validate();
    Sample s;
    std::int64_t idx = 0;
    for (int x = 0; x < dist.num_points(); ++x) {
        const double mx = dist.mass[static_cast<std::size_t>(x)];
        if (mx <= 0.0) continue;
        const auto& row = dist.label_dist[static_cast<std::size_t>(x)];
        for (int y = 0; y < dist.num_labels(); ++y) {
            const double py = row[static_cast<std::size_t>(y)];
            if (py <= 0.0) continue;
            s.examples.push_back(Example{idx++, x, y});
            s.weights.push_back(mx * py);
        }
    }
    if (s.examples.empty()) throw std::invalid_argument("exhaustive_weighted_sample: empty support");
    if (family != nullptr) cache_group_counts(s, *family);
    return s;
}

}  // namespace multigroup
