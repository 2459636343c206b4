// Decision-list mechanics: first-match evaluation, canonicalization keeping
// the outermost rule per group while preserving the function, and the
// canonical enumeration's count, uniqueness and fixed order.

#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "multigroup/decision_list.hpp"

#include "desk_instances.hpp"

using namespace multigroup;

namespace {

// Small fixture: 4 points, two overlapping groups, three hypotheses with
// distinct outputs everywhere so evaluation differences are visible.
struct ListFixture {
    HypothesisClass H;
    GroupFamily G;

    ListFixture() {
        H.hypotheses = {Hypothesis{{0, 0, 0, 0}}, Hypothesis{{1, 1, 1, 1}},
                        Hypothesis{{2, 2, 2, 2}}};
        G.groups = {desk::make_group({0, 1}, 4), desk::make_group({1, 2}, 4)};
        G.names = {"front", "middle"};
    }
};

}  // namespace

TEST_SUITE("declist") {

TEST_CASE("the first matching rule fires; the default covers the rest") {
    const ListFixture fx;
    DecisionList list;
    list.rules = {Rule{0, 1}, Rule{1, 2}};  // front -> ones, middle -> twos
    list.default_hyp = 0;
    CHECK(evaluate(list, 0, fx.H, fx.G) == 1);  // front only
    CHECK(evaluate(list, 1, fx.H, fx.G) == 1);  // in both; outermost (front) wins
    CHECK(evaluate(list, 2, fx.H, fx.G) == 2);  // middle only
    CHECK(evaluate(list, 3, fx.H, fx.G) == 0);  // uncovered -> default
}

TEST_CASE("prepending makes the new rule outermost") {
    const ListFixture fx;
    DecisionList list;
    list.default_hyp = 0;
    prepend_rule(list, 1, 2);
    prepend_rule(list, 0, 1);
    REQUIRE(list.rules.size() == 2);
    CHECK(list.rules[0] == Rule{0, 1});
    CHECK(list.rules[1] == Rule{1, 2});
    CHECK(evaluate(list, 1, fx.H, fx.G) == 1);
}

TEST_CASE("evaluation rejects out-of-range rule indices") {
    const ListFixture fx;
    DecisionList list;
    list.rules = {Rule{5, 0}};
    list.default_hyp = 0;
    CHECK_THROWS_AS(evaluate(list, 0, fx.H, fx.G), std::out_of_range);
    DecisionList bad_hyp;
    bad_hyp.rules = {Rule{0, 9}};
    bad_hyp.default_hyp = 0;
    CHECK_THROWS_AS(evaluate(bad_hyp, 0, fx.H, fx.G), std::out_of_range);
}

TEST_CASE("canonicalization keeps the outermost occurrence of each group") {
    const ListFixture fx;
    DecisionList list;
    // Built by prepending 0,1,0,1 with alternating hypotheses; the inner
    // duplicates are shadowed.
    list.rules = {Rule{1, 2}, Rule{0, 1}, Rule{1, 0}, Rule{0, 2}};
    list.default_hyp = 0;

    const DecisionList canon = canonicalize(list);
    REQUIRE(canon.rules.size() == 2);
    CHECK(canon.rules[0] == Rule{1, 2});
    CHECK(canon.rules[1] == Rule{0, 1});
    CHECK(canon.default_hyp == 0);

    for (int x = 0; x < 4; ++x) {
        CHECK(evaluate(canon, x, fx.H, fx.G) == evaluate(list, x, fx.H, fx.G));
    }
    CHECK(canonicalize(canon) == canon);  // idempotent
}

TEST_CASE("canonical counts follow the falling-factorial formula") {
    CHECK(canonical_count(2, 2, 2) == 26);
    CHECK(canonical_count(3, 2, 0) == 3);          // defaults only
    CHECK(canonical_count(2, 3, 1) == 2 + 3 * 4);  // |H| + P(3,1) |H|^2
    CHECK(canonical_count(1, 4, 4) == 1 + 4 + 12 + 24 + 24);
}

TEST_CASE("enumeration yields each canonical list exactly once, in a fixed order") {
    const auto lists = enumerate_canonical(2, 2, 2);
    CHECK(lists.size() == 26);

    std::set<std::pair<std::vector<std::pair<int, int>>, int>> seen;
    for (const DecisionList& l : lists) {
        std::vector<std::pair<int, int>> key;
        std::set<int> groups_used;
        for (const Rule& r : l.rules) {
            key.emplace_back(r.group, r.hyp);
            groups_used.insert(r.group);
        }
        CHECK(groups_used.size() == l.rules.size());  // canonical: distinct groups
        seen.insert({key, l.default_hyp});
    }
    CHECK(seen.size() == 26);

    // Shorter lists come first; the first entry is the empty list with
    // default 0, the second the empty list with default 1.
    CHECK(lists[0].rules.empty());
    CHECK(lists[0].default_hyp == 0);
    CHECK(lists[1].rules.empty());
    CHECK(lists[1].default_hyp == 1);
    for (std::size_t i = 1; i < lists.size(); ++i) {
        CHECK(lists[i - 1].rules.size() <= lists[i].rules.size());
    }

    // The callback variant visits the same sequence.
    std::vector<DecisionList> streamed;
    for_each_canonical(2, 2, 2, [&](const DecisionList& l) { streamed.push_back(l); });
    REQUIRE(streamed.size() == lists.size());
    for (std::size_t i = 0; i < lists.size(); ++i) CHECK(streamed[i] == lists[i]);
}

TEST_CASE("enumeration validates its arguments") {
    CHECK_THROWS_AS(enumerate_canonical(2, 2, 3), std::invalid_argument);  // max_len > |G|
    CHECK_THROWS_AS(enumerate_canonical(0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_canonical(2, 2, -1), std::invalid_argument);
}

TEST_CASE("the predictor view evaluates through the same path") {
    const ListFixture fx;
    DecisionList list;
    list.rules = {Rule{1, 2}};
    list.default_hyp = 1;
    const DecisionListPredictor pred{&list, &fx.H, &fx.G};
    for (int x = 0; x < 4; ++x) CHECK(pred(x) == evaluate(list, x, fx.H, fx.G));
}

}  // TEST_SUITE
