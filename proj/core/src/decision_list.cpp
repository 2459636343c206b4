#include "multigroup/decision_list.hpp"

#include <stdexcept>

namespace multigroup {

PredictionId evaluate(const DecisionList& f, PointId x, const HypothesisClass& H,
                      const GroupFamily& G) {
    for (const Rule& r : f.rules) {
        if (r.group < 0 || r.group >= G.size()) {
            throw std::out_of_range("decision list: group index out of range");
        }
        if (r.hyp < 0 || r.hyp >= H.size()) {
            throw std::out_of_range("decision list: hypothesis index out of range");
        }
        if (G[r.group].contains(x)) return H[r.hyp](x);
    }
    if (f.default_hyp < 0 || f.default_hyp >= H.size()) {
        throw std::out_of_range("decision list: default hypothesis index out of range");
    }
    return H[f.default_hyp](x);
}

void prepend_rule(DecisionList& f, int group, int hyp) {
    f.rules.insert(f.rules.begin(), Rule{group, hyp});
}

DecisionList canonicalize(const DecisionList& f) {
    DecisionList out;
    out.default_hyp = f.default_hyp;
    std::vector<bool> seen;
    for (const Rule& r : f.rules) {
        if (r.group >= static_cast<int>(seen.size())) seen.resize(static_cast<std::size_t>(r.group) + 1, false);
        if (r.group >= 0 && seen[static_cast<std::size_t>(r.group)]) continue;  // inner duplicate is dead
        if (r.group >= 0) seen[static_cast<std::size_t>(r.group)] = true;
        out.rules.push_back(r);
    }
    return out;
}

std::uint64_t canonical_count(int num_hyps, int num_groups, int max_len) {
    if (num_hyps < 1 || num_groups < 0 || max_len < 0) {
        throw std::invalid_argument("canonical_count: invalid sizes");
    }
    std::uint64_t total = 0;
    std::uint64_t falling = 1;  // num_groups * (num_groups-1) * ... over k factors
    std::uint64_t hyp_pow = static_cast<std::uint64_t>(num_hyps);  // num_hyps^(k+1)
    for (int k = 0; k <= max_len; ++k) {
        total += falling * hyp_pow;
        falling *= static_cast<std::uint64_t>(num_groups - k);
        hyp_pow *= static_cast<std::uint64_t>(num_hyps);
    }
    return total;
}

namespace {

void emit_lists(int num_hyps, int num_groups, int target_len, std::vector<Rule>& prefix,
                std::vector<bool>& used, const std::function<void(const DecisionList&)>& fn) {
    if (static_cast<int>(prefix.size()) == target_len) {
        DecisionList f;
        f.rules = prefix;
        for (int d = 0; d < num_hyps; ++d) {
            f.default_hyp = d;
            fn(f);
        }
        return;
    }
    for (int g = 0; g < num_groups; ++g) {
        if (used[static_cast<std::size_t>(g)]) continue;
        used[static_cast<std::size_t>(g)] = true;
        for (int h = 0; h < num_hyps; ++h) {
            prefix.push_back(Rule{g, h});
            emit_lists(num_hyps, num_groups, target_len, prefix, used, fn);
            prefix.pop_back();
        }
        used[static_cast<std::size_t>(g)] = false;
    }
}

}  // namespace

void for_each_canonical(int num_hyps, int num_groups, int max_len,
                        const std::function<void(const DecisionList&)>& fn) {
    if (num_hyps < 1) throw std::invalid_argument("for_each_canonical: empty hypothesis class");
    if (max_len > num_groups) {
        throw std::invalid_argument("for_each_canonical: max_len exceeds number of groups");
    }
    std::vector<Rule> prefix;
    std::vector<bool> used(static_cast<std::size_t>(num_groups), false);
    for (int len = 0; len <= max_len; ++len) {
        emit_lists(num_hyps, num_groups, len, prefix, used, fn);
    }
}

std::vector<DecisionList> enumerate_canonical(int num_hyps, int num_groups, int max_len) {
    std::vector<DecisionList> out;
    out.reserve(canonical_count(num_hyps, num_groups, max_len));
    for_each_canonical(num_hyps, num_groups, max_len,
                       [&out](const DecisionList& f) { out.push_back(f); });
    return out;
}

}  // namespace multigroup
