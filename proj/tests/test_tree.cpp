#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "gw/sample.hpp"
#include "gw/tree.hpp"

using namespace gw;

namespace {

// all ordered trees with out-degrees < deg_cap and size <= size_cap
void gen_trees(long size_cap, long deg_cap, std::vector<int>& enc, long open,
               std::vector<FiniteTree>& out) {
    if (open == 0) {
        out.push_back(FiniteTree::decode(enc));
        return;
    }
    long remaining = size_cap - static_cast<long>(enc.size());
    if (remaining < open) return;
    for (int k = 0; k < deg_cap; ++k) {
        enc.push_back(k);
        gen_trees(size_cap, deg_cap, enc, open - 1 + k, out);
        enc.pop_back();
    }
}

std::vector<FiniteTree> all_trees(long size_cap, long deg_cap = 4) {
    std::vector<FiniteTree> out;
    std::vector<int> enc;
    gen_trees(size_cap, deg_cap, enc, 1, out);
    return out;
}

FiniteTree random_tree(RngStream& rng) {
    Offspring<double> crit({{0, 0.5}, {2, 0.5}});
    for (;;) {
        auto t = sample_gw(crit, rng);
        if (t.ok()) return t.value;
    }
}

}  // namespace

TEST_CASE("decode and encode round-trip with consistent labels") {
    auto t = FiniteTree::decode({2, 0, 2, 0, 0});
    CHECK(t.size() == 5);
    CHECK(t.height() == 2);
    auto ls = t.labels();
    CHECK(ls[2] == NodeLabel{2});
    CHECK(ls[4] == (NodeLabel{2, 2}));
    CHECK(t.child_count({2}) == 2);
    CHECK(t.child_count({1}) == 0);
    CHECK(t.child_count({3}) == -1);
    CHECK(t.encode() == std::vector<int>{2, 0, 2, 0, 0});

    CHECK_THROWS_AS(FiniteTree::decode({2, 0}), MalformedSequence);
    CHECK_THROWS_AS(FiniteTree::decode({0, 0}), MalformedSequence);
}

TEST_CASE("round-trip holds for every tree up to size 12") {
    for (const auto& t : all_trees(12, 3)) {
        CHECK(FiniteTree::decode(t.encode()) == t);
        // child counts over the node set sum to size - 1
        long s = 0;
        for (int k : t.encode()) s += k;
        CHECK(s == t.size() - 1);
    }
}

TEST_CASE("restriction truncates at the requested level") {
    auto t = FiniteTree::decode({2, 0, 2, 0, 0});
    CHECK(t.restrict(1).encode() == std::vector<int>{2, 0, 0});
    CHECK(t.restrict(0).encode() == std::vector<int>{0});
    CHECK(t.restrict(5) == t);
}

TEST_CASE("grafting replaces a leaf subtree") {
    auto t = FiniteTree::decode({2, 0, 2, 0, 0});
    auto g = FiniteTree::decode({1, 0});
    auto gr = t.graft({1}, g);
    CHECK(gr.encode() == std::vector<int>{2, 1, 0, 2, 0, 0});
    CHECK_THROWS_AS(t.graft({2}, g), NotALeaf);
    CHECK(graft_set_contains(t, {1}, gr));
    CHECK_FALSE(graft_set_contains(t, {1}, t.graft({2, 1}, g)));
    CHECK(graft_set_contains(t, {1}, t));
}

TEST_CASE("graft size and height compose additively") {
    auto hosts = all_trees(5, 3);
    auto grafts = all_trees(4, 3);
    for (const auto& t : hosts)
        for (const auto& x : t.leaves())
            for (const auto& g : grafts) {
                auto gr = t.graft(x, g);
                CHECK(gr.size() == t.size() - 1 + g.size());
                CHECK(gr.height() >= t.height());
                CHECK(gr.height() >= depth_of(x) + g.height());
            }
}

TEST_CASE("graft-set membership agrees with brute force") {
    auto hosts = all_trees(4, 3);
    auto candidates = all_trees(7, 3);
    for (const auto& t : hosts)
        for (const auto& x : t.leaves())
            for (const auto& c : candidates) {
                bool brute = false;
                if (c.child_count(x) >= 0)
                    brute = (t.graft(x, c.subtree(x)) == c);
                CHECK(graft_set_contains(t, x, c) == brute);
            }
}

TEST_CASE("graft-set intersections are empty, nested or a single tree") {
    auto hosts = all_trees(4, 3);
    auto universe = all_trees(7, 3);
    std::vector<std::pair<FiniteTree, NodeLabel>> pairs;
    for (const auto& t : hosts)
        for (const auto& x : t.leaves()) pairs.push_back({t, x});
    for (size_t i = 0; i < pairs.size(); ++i)
        for (size_t j = i + 1; j < pairs.size(); ++j) {
            long inter = 0;
            bool only1 = false, only2 = false;
            for (const auto& c : universe) {
                bool a = graft_set_contains(pairs[i].first, pairs[i].second, c);
                bool b = graft_set_contains(pairs[j].first, pairs[j].second, c);
                if (a && b) ++inter;
                only1 |= a && !b;
                only2 |= b && !a;
            }
            // a proper overlap pins both graft subtrees, leaving one tree
            if (inter >= 2) CHECK((!only1 || !only2));
        }
}

TEST_CASE("tree distance is an ultrametric") {
    auto t = FiniteTree::decode({2, 0, 2, 0, 0});
    auto g = FiniteTree::decode({1, 0});
    CHECK(tree_distance(t, t) == 0.0);
    CHECK(tree_distance(t, t.graft({1}, g)) == 0.5);

    RngStream rng(11, 0);
    for (int i = 0; i < 1000; ++i) {
        auto a = random_tree(rng);
        auto b = random_tree(rng);
        auto c = random_tree(rng);
        double ab = tree_distance(a, b);
        double bc = tree_distance(b, c);
        double ac = tree_distance(a, c);
        CHECK(ab == tree_distance(b, a));
        CHECK(ac <= std::max(ab, bc) + 1e-300);
    }
}

TEST_CASE("balls of radius two to the minus h are restriction classes") {
    RngStream rng(12, 0);
    for (int i = 0; i < 500; ++i) {
        auto a = random_tree(rng);
        auto b = random_tree(rng);
        for (int h = 0; h <= 4; ++h) {
            bool same = a.restrict(h) == b.restrict(h);
            CHECK(same == (tree_distance(a, b) <= std::ldexp(1.0, -h)));
        }
    }
}

TEST_CASE("restriction contracts the distance") {
    RngStream rng(13, 0);
    for (int i = 0; i < 500; ++i) {
        auto a = random_tree(rng);
        auto b = random_tree(rng);
        for (int h = 1; h <= 3; ++h)
            CHECK(tree_distance(a.restrict(h), b.restrict(h)) <= tree_distance(a, b));
    }
}

TEST_CASE("leftmost-branch folding preserves leaf count") {
    CHECK(minami_map(FiniteTree::decode({2, 0, 0})).encode() == std::vector<int>{1, 0});
    auto hosts = all_trees(8, 3);
    for (const auto& t : hosts) CHECK(minami_map(t).size() == t.leaf_count());
}

TEST_CASE("functional evaluations match hand counts") {
    auto t = FiniteTree::decode({2, 0, 2, 0, 0});
    CHECK(Functional::size().eval(t) == 5);
    CHECK(Functional::height().eval(t) == 2);
    CHECK(Functional::leaves({0}).eval(t) == 3);
    CHECK(Functional::leaves({0, 2}).eval(t) == 5);
    CHECK(Functional::max_out_degree().eval(t) == 2);
    CHECK(Functional::largest_generation().eval(t) == 2);
}

TEST_CASE("partially observed trees restrict only away from unexplored nodes") {
    ExtendedTree et(FiniteTree::decode({3, 0, 0, 0}), {{}});
    CHECK(et.restrict_star(2).encode() == std::vector<int>{2, 0, 0});
    CHECK_THROWS_AS(et.restrict(1), CannotRestrict);
    CHECK_THROWS_AS(et.restrict_star(5), InsufficientMaterialization);

    ExtendedTree deep(FiniteTree::decode({1, 2, 0, 0}), {{1}});
    CHECK(deep.restrict(0).encode() == std::vector<int>{0});
    CHECK_THROWS_AS(deep.restrict(2), CannotRestrict);
}
