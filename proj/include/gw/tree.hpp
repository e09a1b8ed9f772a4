#pragma once

// Rooted ordered trees in Neveu's encoding: nodes are finite sequences of
// positive integers, the canonical serialization is the preorder sequence of
// child counts. All operations are pure; trees are immutable values.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gw/errors.hpp"

namespace gw {

// A node label: the empty sequence is the root, label ui is child i of u.
using NodeLabel = std::vector<int>;

inline int depth_of(const NodeLabel& u) { return static_cast<int>(u.size()); }

// Proper-prefix test: is v an ancestor of u?
inline bool is_ancestor(const NodeLabel& v, const NodeLabel& u) {
    return v.size() < u.size() && std::equal(v.begin(), v.end(), u.begin());
}

inline bool is_prefix(const NodeLabel& v, const NodeLabel& u) {
    return v.size() <= u.size() && std::equal(v.begin(), v.end(), u.begin());
}

// Lexicographic order with ancestors first; this is the order in which
// preorder traversal emits the nodes.
inline bool lex_less(const NodeLabel& a, const NodeLabel& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Longest common prefix of a nonempty set of labels.
inline NodeLabel mrca(const std::vector<NodeLabel>& labels) {
    if (labels.empty()) return {};
    NodeLabel out = labels.front();
    for (const auto& u : labels) {
        size_t n = 0;
        while (n < out.size() && n < u.size() && out[n] == u[n]) ++n;
        out.resize(n);
    }
    return out;
}

struct TreeStats {
    int height = 0;
    long size = 0;
    std::vector<long> width;  // width[h] = z_h
    int max_out_degree = 0;
    long largest_generation = 0;  // max_h z_h
    long leaf_type_count = 0;     // card{u : k_u in A}
};

class FiniteTree {
  public:
    // The single-node tree {root}.
    FiniteTree() : k_{0} {}

    // Decode a preorder child-count sequence. The running number of open
    // slots must stay positive and hit zero exactly at the end.
    static FiniteTree decode(std::vector<int> child_counts) {
        if (child_counts.empty()) throw MalformedSequence("empty child-count sequence");
        long open = 1;
        for (size_t i = 0; i < child_counts.size(); ++i) {
            if (child_counts[i] < 0) throw MalformedSequence("negative child count");
            if (open == 0) throw MalformedSequence("walk terminated before end of sequence");
            open += child_counts[i] - 1;
        }
        if (open != 0) throw MalformedSequence("unfilled child slots at end of sequence");
        FiniteTree t;
        t.k_ = std::move(child_counts);
        return t;
    }

    const std::vector<int>& encode() const { return k_; }

    long size() const { return static_cast<long>(k_.size()); }

    bool operator==(const FiniteTree& o) const { return k_ == o.k_; }
    auto operator<=>(const FiniteTree& o) const { return k_ <=> o.k_; }

    // Preorder labels, aligned with encode().
    std::vector<NodeLabel> labels() const {
        std::vector<NodeLabel> out;
        out.reserve(k_.size());
        size_t i = 0;
        NodeLabel root;
        emit_preorder(root, i, out);
        return out;
    }

    int depth_at(size_t preorder_index) const { return depths()[preorder_index]; }

    // Depth of each node in preorder.
    std::vector<int> depths() const {
        std::vector<int> d(k_.size());
        std::vector<int> remaining;
        for (size_t i = 0; i < k_.size(); ++i) {
            d[i] = static_cast<int>(remaining.size());
            remaining.push_back(k_[i]);
            while (!remaining.empty() && remaining.back() == 0) {
                remaining.pop_back();
                if (!remaining.empty()) --remaining.back();
            }
        }
        return d;
    }

    bool contains(const NodeLabel& u) const { return find_preorder(u).has_value(); }

    // Child count of u, -1 if u is not a node of the tree.
    int child_count(const NodeLabel& u) const {
        auto idx = find_preorder(u);
        return idx ? k_[*idx] : -1;
    }

    int height() const {
        int h = 0;
        for (int d : depths()) h = std::max(h, d);
        return h;
    }

    TreeStats stats(const std::set<int>& A) const {
        TreeStats s;
        auto d = depths();
        s.size = size();
        for (size_t i = 0; i < k_.size(); ++i) {
            s.height = std::max(s.height, d[i]);
            s.max_out_degree = std::max(s.max_out_degree, k_[i]);
            if (static_cast<size_t>(d[i]) >= s.width.size()) s.width.resize(d[i] + 1, 0);
            ++s.width[d[i]];
            if (A.count(k_[i])) ++s.leaf_type_count;
        }
        for (long z : s.width) s.largest_generation = std::max(s.largest_generation, z);
        return s;
    }

    long leaf_count() const {
        long n = 0;
        for (int k : k_)
            if (k == 0) ++n;
        return n;
    }

    std::vector<NodeLabel> leaves() const {
        std::vector<NodeLabel> out;
        auto ls = labels();
        for (size_t i = 0; i < k_.size(); ++i)
            if (k_[i] == 0) out.push_back(ls[i]);
        return out;
    }

    // r_h: keep the nodes of depth <= h.
    FiniteTree restrict(int h) const {
        if (h < 0) throw CannotRestrict("negative restriction level");
        std::vector<int> out;
        out.reserve(k_.size());
        auto d = depths();
        for (size_t i = 0; i < k_.size(); ++i) {
            if (d[i] > h) continue;
            out.push_back(d[i] == h ? 0 : k_[i]);
        }
        return decode(std::move(out));
    }

    // t (*)_x t2: replace the leaf x by the tree t2.
    FiniteTree graft(const NodeLabel& x, const FiniteTree& t2) const {
        auto idx = find_preorder(x);
        if (!idx || k_[*idx] != 0) throw NotALeaf("graft point is not a leaf of the tree");
        std::vector<int> out;
        out.reserve(k_.size() + t2.k_.size() - 1);
        out.insert(out.end(), k_.begin(), k_.begin() + *idx);
        out.insert(out.end(), t2.k_.begin(), t2.k_.end());
        out.insert(out.end(), k_.begin() + *idx + 1, k_.end());
        return decode(std::move(out));
    }

    // Subtree S_x above x (x itself becomes the root of the result).
    FiniteTree subtree(const NodeLabel& x) const {
        auto idx = find_preorder(x);
        if (!idx) throw Error("subtree: label not in tree");
        size_t end = subtree_end(*idx);
        return decode(std::vector<int>(k_.begin() + *idx, k_.begin() + end));
    }

    // Replace the subtree above x by a single leaf.
    FiniteTree prune_to_leaf(const NodeLabel& x) const {
        auto idx = find_preorder(x);
        if (!idx) throw Error("prune_to_leaf: label not in tree");
        size_t end = subtree_end(*idx);
        std::vector<int> out;
        out.insert(out.end(), k_.begin(), k_.begin() + *idx);
        out.push_back(0);
        out.insert(out.end(), k_.begin() + end, k_.end());
        return decode(std::move(out));
    }

  private:
    std::vector<int> k_;

    // End (exclusive) of the subtree rooted at preorder index i.
    size_t subtree_end(size_t i) const {
        long open = 1;
        size_t j = i;
        while (open > 0) {
            open += k_[j] - 1;
            ++j;
        }
        return j;
    }

    // Preorder index of label u, walking down by child indices.
    std::optional<size_t> find_preorder(const NodeLabel& u) const {
        size_t i = 0;
        for (int c : u) {
            if (c < 1 || c > k_[i]) return std::nullopt;
            // skip children 1..c-1
            size_t j = i + 1;
            for (int sib = 1; sib < c; ++sib) j = subtree_end(j);
            i = j;
        }
        return i;
    }

    void emit_preorder(const NodeLabel& label, size_t& i, std::vector<NodeLabel>& out) const {
        out.push_back(label);
        int k = k_[i];
        ++i;
        for (int c = 1; c <= k; ++c) {
            NodeLabel child = label;
            child.push_back(c);
            emit_preorder(child, i, out);
        }
    }
};

// s in T(t,x) iff s is t with some tree grafted on the leaf x.
inline bool graft_set_contains(const FiniteTree& t, const NodeLabel& x, const FiniteTree& s) {
    if (t.child_count(x) != 0) throw NotALeaf("graft point is not a leaf of the base tree");
    if (!s.contains(x)) return false;
    return s.prune_to_leaf(x) == t;
}

// Largest h with r_h(t1) = r_h(t2); nullopt when the trees are equal.
inline std::optional<int> agreement_level(const FiniteTree& t1, const FiniteTree& t2) {
    if (t1 == t2) return std::nullopt;
    int h = 0;
    while (t1.restrict(h + 1) == t2.restrict(h + 1)) ++h;
    return h;
}

// d(t1,t2) = 2^{-sup{h : r_h(t1)=r_h(t2)}}, 0 for equal trees. Since r_0 is
// always the root, distinct trees have d <= 1 with d = 1 iff the root
// degrees differ.
inline double tree_distance(const FiniteTree& t1, const FiniteTree& t2) {
    auto h = agreement_level(t1, t2);
    if (!h) return 0.0;
    return std::ldexp(1.0, -*h);
}

// Minami's correspondence: a tree whose nodes are the leaves of t. The
// left-most leaf becomes the root; the subtrees hanging off the left-most
// branch map, in root-to-leaf order, to the root's children.
inline FiniteTree minami_map(const FiniteTree& t) {
    const auto& k = t.encode();
    // Recursive worker on subranges of the preorder encoding.
    struct Impl {
        const std::vector<int>& k;
        size_t subtree_end(size_t i) const {
            long open = 1;
            size_t j = i;
            while (open > 0) {
                open += k[j] - 1;
                ++j;
            }
            return j;
        }
        void run(size_t i, std::vector<int>& out) const {
            // Collect subtrees hanging off the left-most branch from node i.
            std::vector<size_t> hanging;
            size_t cur = i;
            while (k[cur] != 0) {
                size_t child1 = cur + 1;
                size_t j = subtree_end(child1);
                for (int c = 2; c <= k[cur]; ++c) {
                    hanging.push_back(j);
                    j = subtree_end(j);
                }
                cur = child1;
            }
            out.push_back(static_cast<int>(hanging.size()));
            for (size_t h : hanging) run(h, out);
        }
    };
    std::vector<int> out;
    Impl{k}.run(0, out);
    return FiniteTree::decode(std::move(out));
}

// |u|_infty = max(|u|, max entry of u).
inline int infinity_norm(const NodeLabel& u) {
    int m = depth_of(u);
    for (int c : u) m = std::max(m, c);
    return m;
}

// A finite tree enriched with at most one symbolic infinite-degree node,
// materialized only up to a finite number of children.
class ExtendedTree {
  public:
    explicit ExtendedTree(FiniteTree base) : base_(std::move(base)) {}
    ExtendedTree(FiniteTree base, std::set<NodeLabel> infinite)
        : base_(std::move(base)), infinite_(std::move(infinite)) {
        for (const auto& u : infinite_)
            if (!base_.contains(u)) throw Error("infinite-node label not in base tree");
    }

    const FiniteTree& base() const { return base_; }
    const std::set<NodeLabel>& infinite_nodes() const { return infinite_; }

    bool is_infinite(const NodeLabel& u) const { return infinite_.count(u) > 0; }

    // r_h on the materialized part; refuses if an infinite node sits strictly
    // below the cut (its children would be unbounded).
    FiniteTree restrict(int h) const {
        for (const auto& u : infinite_)
            if (depth_of(u) < h)
                throw CannotRestrict("infinite node below restriction level; use restrict_star");
        return base_.restrict(h);
    }

    // r_n^infty: keep nodes u with |u|_infty <= n. The result is finite with
    // height <= n and all out-degrees <= n.
    FiniteTree restrict_star(int n) const {
        if (n < 0) throw CannotRestrict("negative restriction level");
        for (const auto& u : infinite_)
            if (depth_of(u) < n && base_.child_count(u) < n)
                throw InsufficientMaterialization(
                    "infinite node materialized below requested restriction level");
        auto ls = base_.labels();
        const auto& k = base_.encode();
        std::vector<int> out;
        build_star(ls, k, 0, n, out);
        return FiniteTree::decode(std::move(out));
    }

  private:
    FiniteTree base_;
    std::set<NodeLabel> infinite_;

    static size_t subtree_end(const std::vector<int>& k, size_t i) {
        long open = 1;
        size_t j = i;
        while (open > 0) {
            open += k[j] - 1;
            ++j;
        }
        return j;
    }

    static void build_star(const std::vector<NodeLabel>& ls, const std::vector<int>& k, size_t i,
                           int n, std::vector<int>& out) {
        int depth = depth_of(ls[i]);
        int keep = (depth + 1 > n) ? 0 : std::min(k[i], n);
        out.push_back(keep);
        size_t j = i + 1;
        for (int c = 1; c <= k[i]; ++c) {
            size_t end = subtree_end(k, j);
            if (c <= keep) build_star(ls, k, j, n, out);
            j = end;
        }
    }
};

// Tree functionals the conditioning machinery understands.
struct Functional {
    enum Kind { Height, Size, Leaves, MaxOutDegree, LargestGeneration };
    Kind kind = Size;
    std::set<int> A;  // only for Leaves

    static Functional height() { return {Height, {}}; }
    static Functional size() { return {Size, {}}; }
    static Functional leaves(std::set<int> A) { return {Leaves, std::move(A)}; }
    static Functional max_out_degree() { return {MaxOutDegree, {}}; }
    static Functional largest_generation() { return {LargestGeneration, {}}; }

    long eval(const FiniteTree& t) const {
        auto s = t.stats(A);
        switch (kind) {
            case Height: return s.height;
            case Size: return s.size;
            case Leaves: return s.leaf_type_count;
            case MaxOutDegree: return s.max_out_degree;
            case LargestGeneration: return s.largest_generation;
        }
        return 0;
    }

    std::string name() const {
        switch (kind) {
            case Height: return "height";
            case Size: return "size";
            case Leaves: return "leaves";
            case MaxOutDegree: return "maxdeg";
            case LargestGeneration: return "maxgen";
        }
        return "?";
    }
};

// Half-open conditioning window [lo, lo+len); len = 0 encodes [lo, +infty).
struct Window {
    long lo = 1;
    long len = 1;
    bool unbounded() const { return len == 0; }
    bool contains(long v) const { return v >= lo && (unbounded() || v < lo + len); }
};

}  // namespace gw
