#pragma once

// Seeded Monte Carlo samplers. Every sampler is a pure function of
// (distribution, RngStream, budget): identical inputs reproduce identical
// outputs, and distinct stream indices give independent sequences.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gw/errors.hpp"
#include "gw/offspring.hpp"
#include "gw/tree.hpp"

namespace gw {

// Counter-based generator (splitmix64). Cheap to split: each (seed, stream)
// pair is its own reproducible sequence.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1)) ^ mix(stream)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // uniform in [0,1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform in {0,...,n-1}
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }
    std::uint64_t state_;
};

struct SampleBudget {
    long max_nodes = 1'000'000;
    int max_height = 100'000;
    long max_rejections = 10'000'000;
};

enum class SampleStatus { Ok, Truncated, Exhausted };

template <class T>
struct Outcome {
    T value{};
    SampleStatus status = SampleStatus::Ok;
    bool ok() const { return status == SampleStatus::Ok; }
};

// Draw from an arbitrary finitely-supported pmf (cdf walk on doubles; a
// truncation tail of 1e-14 lands on the largest support point).
template <class P>
long sample_k(const std::map<long, P>& pmf, RngStream& rng) {
    double u = rng.next_double();
    double acc = 0.0;
    long last = 0;
    for (const auto& [k, pk] : pmf) {
        acc += to_double(pk);
        last = k;
        if (u < acc) return k;
    }
    return last;
}

template <class P>
long sample_k(const Offspring<P>& p, RngStream& rng) {
    return sample_k(p.pmf(), rng);
}

namespace detail {

// Rebuild a preorder encoding from BFS-ordered (parent, child count) rows.
inline FiniteTree bfs_to_tree(const std::vector<int>& ks, const std::vector<long>& parent) {
    std::vector<std::vector<long>> children(ks.size());
    for (size_t i = 1; i < ks.size(); ++i) children[parent[i]].push_back(i);
    std::vector<int> enc;
    enc.reserve(ks.size());
    std::vector<long> stack = {0};
    while (!stack.empty()) {
        long u = stack.back();
        stack.pop_back();
        enc.push_back(ks[u]);
        for (auto it = children[u].rbegin(); it != children[u].rend(); ++it) stack.push_back(*it);
    }
    return FiniteTree::decode(std::move(enc));
}

}  // namespace detail

// Plain GW tree, generated breadth first so the height budget cuts exactly
// at a generation boundary.
template <class P>
Outcome<FiniteTree> sample_gw(const Offspring<P>& p, RngStream& rng,
                              const SampleBudget& budget = {}) {
    std::vector<int> ks = {0};
    std::vector<long> parent = {-1};
    std::vector<long> frontier = {0};
    int depth = 0;
    bool truncated = false;
    while (!frontier.empty()) {
        if (depth >= budget.max_height) {
            truncated = true;
            break;
        }
        std::vector<long> next;
        for (long u : frontier) {
            long k = sample_k(p, rng);
            ks[u] = static_cast<int>(k);
            for (long c = 0; c < k; ++c) {
                ks.push_back(0);
                parent.push_back(u);
                next.push_back(static_cast<long>(ks.size()) - 1);
            }
            if (static_cast<long>(ks.size()) > budget.max_nodes) {
                truncated = true;
                break;
            }
        }
        if (truncated) break;
        frontier = std::move(next);
        ++depth;
    }
    Outcome<FiniteTree> out;
    if (truncated) {
        out.status = SampleStatus::Truncated;
        // leave any still-open nodes as leaves so the value is a valid tree
        out.value = detail::bfs_to_tree(ks, parent);
        return out;
    }
    out.value = detail::bfs_to_tree(ks, parent);
    return out;
}

// r_cutoff of a GW tree: exact, always terminates. Nodes at the cutoff
// depth are leaves by construction (no draw).
template <class P>
Outcome<FiniteTree> sample_gw_restricted(const Offspring<P>& p, RngStream& rng, int cutoff,
                                         const SampleBudget& budget = {}) {
    std::vector<int> ks = {0};
    std::vector<long> parent = {-1};
    std::vector<long> frontier = {0};
    for (int depth = 0; depth < cutoff && !frontier.empty(); ++depth) {
        std::vector<long> next;
        for (long u : frontier) {
            long k = sample_k(p, rng);
            ks[u] = static_cast<int>(k);
            for (long c = 0; c < k; ++c) {
                ks.push_back(0);
                parent.push_back(u);
                next.push_back(static_cast<long>(ks.size()) - 1);
            }
            if (static_cast<long>(ks.size()) > budget.max_nodes)
                return {detail::bfs_to_tree(ks, parent), SampleStatus::Truncated};
        }
        frontier = std::move(next);
    }
    return {detail::bfs_to_tree(ks, parent), SampleStatus::Ok};
}

// (Z_0..Z_n, W_0..W_n) with W_h = Z_h / m^h.
template <class P>
std::pair<std::vector<long>, std::vector<double>> sample_process(const Offspring<P>& p,
                                                                 RngStream& rng, int n) {
    std::vector<long> z = {1};
    for (int h = 0; h < n; ++h) {
        long s = 0;
        for (long i = 0; i < z.back(); ++i) s += sample_k(p, rng);
        z.push_back(s);
    }
    double m = to_double(p.mean());
    std::vector<double> w;
    double mh = 1.0;
    for (int h = 0; h <= n; ++h) {
        w.push_back(z[h] / mh);
        mh *= m;
    }
    return {std::move(z), std::move(w)};
}

// r_h of Kesten's tree: one spine of size-biased nodes, ordinary subtrees
// elsewhere, cut at depth h.
template <class P>
Outcome<FiniteTree> sample_kesten(const Offspring<P>& p, RngStream& rng, int h,
                                  const SampleBudget& budget = {}) {
    auto pstar = size_biased(p);
    std::vector<int> ks = {0};
    std::vector<long> parent = {-1};
    long spine = 0;
    for (int depth = 0; depth < h; ++depth) {
        long k = sample_k(pstar, rng);
        ks[spine] = static_cast<int>(k);
        long special = static_cast<long>(rng.next_below(k));
        long next_spine = -1;
        for (long c = 0; c < k; ++c) {
            long child = static_cast<long>(ks.size());
            ks.push_back(0);
            parent.push_back(spine);
            if (c == special) {
                next_spine = child;
            } else {
                // ordinary subtree, itself restricted at the remaining depth
                auto sub = sample_gw_restricted(p, rng, h - depth - 1, budget);
                if (!sub.ok()) return {detail::bfs_to_tree(ks, parent), sub.status};
                // splice: append the subtree below `child`
                const auto& enc = sub.value.encode();
                auto labels = sub.value.labels();
                // preorder: parent of node i is the node with its prefix label
                std::map<NodeLabel, long> where;
                for (size_t i = 0; i < enc.size(); ++i) {
                    long idx = (i == 0) ? child : static_cast<long>(ks.size());
                    if (i > 0) {
                        ks.push_back(0);
                        NodeLabel par = labels[i];
                        par.pop_back();
                        parent.push_back(where.at(par));
                    }
                    ks[idx] = enc[i];
                    where[labels[i]] = idx;
                }
                if (static_cast<long>(ks.size()) > budget.max_nodes)
                    return {detail::bfs_to_tree(ks, parent), SampleStatus::Truncated};
            }
        }
        spine = next_spine;
    }
    return {detail::bfs_to_tree(ks, parent), SampleStatus::Ok};
}

// r_h of the surviving part decomposition of a super-critical tree:
// survivor nodes draw a joint (survivors, extinct) count, the survivor
// positions are uniform among the possible configurations, extinct subtrees
// grow as conjugate-distribution GW trees.
template <class P>
Outcome<FiniteTree> sample_survivor(const Offspring<P>& p, RngStream& rng, int h,
                                    const SampleBudget& budget = {},
                                    std::pair<long, long>* root_se = nullptr) {
    auto joint = survivor_joint(p);
    auto ptilde = conjugate(p);
    // flatten the joint for cdf sampling
    std::vector<std::pair<std::pair<long, long>, double>> rows;
    for (const auto& [se, pr] : joint.table) rows.push_back({se, to_double(pr)});

    std::vector<int> ks = {0};
    std::vector<long> parent = {-1};
    std::vector<long> frontier = {0};  // survivor-type nodes at current depth
    for (int depth = 0; depth < h && !frontier.empty(); ++depth) {
        std::vector<long> next;
        for (long u : frontier) {
            double uu = rng.next_double(), acc = 0.0;
            std::pair<long, long> se = rows.back().first;
            for (const auto& [key, pr] : rows) {
                acc += pr;
                if (uu < acc) {
                    se = key;
                    break;
                }
            }
            auto [S, E] = se;
            if (u == 0 && root_se) *root_se = se;
            long k = S + E;
            ks[u] = static_cast<int>(k);
            // choose the S survivor positions uniformly (reservoir over slots)
            std::vector<bool> special(k, false);
            long need = S;
            for (long c = 0; c < k; ++c) {
                if (rng.next_below(k - c) < static_cast<std::uint64_t>(need)) {
                    special[c] = true;
                    --need;
                }
            }
            for (long c = 0; c < k; ++c) {
                long child = static_cast<long>(ks.size());
                ks.push_back(0);
                parent.push_back(u);
                if (special[c]) {
                    next.push_back(child);
                } else {
                    auto sub = sample_gw_restricted(ptilde, rng, h - depth - 1, budget);
                    if (!sub.ok()) return {detail::bfs_to_tree(ks, parent), sub.status};
                    const auto& enc = sub.value.encode();
                    auto labels = sub.value.labels();
                    std::map<NodeLabel, long> where;
                    for (size_t i = 0; i < enc.size(); ++i) {
                        long idx = (i == 0) ? child : static_cast<long>(ks.size());
                        if (i > 0) {
                            ks.push_back(0);
                            NodeLabel par = labels[i];
                            par.pop_back();
                            parent.push_back(where.at(par));
                        }
                        ks[idx] = enc[i];
                        where[labels[i]] = idx;
                    }
                }
            }
            if (static_cast<long>(ks.size()) > budget.max_nodes)
                return {detail::bfs_to_tree(ks, parent), SampleStatus::Truncated};
        }
        frontier = std::move(next);
    }
    return {detail::bfs_to_tree(ks, parent), SampleStatus::Ok};
}

// Condensation tree of a sub-critical p, materialized for restriction level
// n: the special spine draws size-biased-without-normalization counts with
// an atom at infinity; the infinite node gets n ordinary children and ends
// the spine. Ordinary subtrees are full (a.s. finite) GW trees.
template <class P>
Outcome<ExtendedTree> sample_condensation(const Offspring<P>& p, RngStream& rng, int n,
                                          const SampleBudget& budget = {}) {
    auto ext = condensation_offspring(p);
    std::vector<int> ks = {0};
    std::vector<long> parent = {-1};
    std::vector<NodeLabel> label = {{}};
    long spine = 0;
    NodeLabel spine_label;
    auto grow_ordinary = [&](long at) -> bool {
        auto sub = sample_gw(p, rng, budget);
        if (!sub.ok()) return false;
        const auto& enc = sub.value.encode();
        auto labels = sub.value.labels();
        std::map<NodeLabel, long> where;
        for (size_t i = 0; i < enc.size(); ++i) {
            long idx = (i == 0) ? at : static_cast<long>(ks.size());
            if (i > 0) {
                ks.push_back(0);
                NodeLabel par = labels[i];
                par.pop_back();
                parent.push_back(where.at(par));
                NodeLabel full = label[at];
                full.insert(full.end(), labels[i].begin(), labels[i].end());
                label.push_back(std::move(full));
            }
            ks[idx] = enc[i];
            where[labels[i]] = idx;
        }
        return static_cast<long>(ks.size()) <= budget.max_nodes;
    };
    while (true) {
        // draw from the extended pmf: finite part + atom at infinity
        double u = rng.next_double(), acc = 0.0;
        long k = -1;  // -1 = infinity
        for (const auto& [kk, pr] : ext.finite) {
            acc += to_double(pr);
            if (u < acc) {
                k = kk;
                break;
            }
        }
        if (k < 0) {
            // the infinite node: materialize n ordinary children
            ks[spine] = n;
            std::vector<long> kids;
            for (long c = 0; c < n; ++c) {
                kids.push_back(static_cast<long>(ks.size()));
                ks.push_back(0);
                parent.push_back(spine);
                NodeLabel l = spine_label;
                l.push_back(static_cast<int>(c + 1));
                label.push_back(std::move(l));
            }
            for (long kid : kids)
                if (!grow_ordinary(kid))
                    return {ExtendedTree(detail::bfs_to_tree(ks, parent)),
                            SampleStatus::Truncated};
            auto base = detail::bfs_to_tree(ks, parent);
            return {ExtendedTree(std::move(base), {spine_label}), SampleStatus::Ok};
        }
        ks[spine] = static_cast<int>(k);
        long special = static_cast<long>(rng.next_below(k));
        long next_spine = -1;
        NodeLabel next_label;
        std::vector<long> ordinary;
        for (long c = 0; c < k; ++c) {
            long child = static_cast<long>(ks.size());
            ks.push_back(0);
            parent.push_back(spine);
            NodeLabel l = spine_label;
            l.push_back(static_cast<int>(c + 1));
            label.push_back(l);
            if (c == special) {
                next_spine = child;
                next_label = std::move(l);
            } else {
                ordinary.push_back(child);
            }
        }
        for (long kid : ordinary)
            if (!grow_ordinary(kid))
                return {ExtendedTree(detail::bfs_to_tree(ks, parent)), SampleStatus::Truncated};
        spine = next_spine;
        spine_label = std::move(next_label);
        if (static_cast<long>(ks.size()) > budget.max_nodes)
            return {ExtendedTree(detail::bfs_to_tree(ks, parent)), SampleStatus::Truncated};
    }
}

// GW process with immigration: Z*_0 = 0, each generation adds Y ~ (p* - 1)
// immigrants on top of the ordinary offspring.
template <class P>
std::vector<long> sample_immigration(const Offspring<P>& p, RngStream& rng, int n) {
    auto pstar = size_biased(p);
    std::vector<long> z = {0};
    for (int h = 0; h < n; ++h) {
        long s = sample_k(pstar, rng) - 1;
        for (long i = 0; i < z.back(); ++i) s += sample_k(p, rng);
        z.push_back(s);
    }
    return z;
}

// Exact rejection sampling of tau given {A(tau) in window}. Truncated draws
// count as rejections; budgets must dominate every acceptable tree.
template <class P>
Outcome<FiniteTree> sample_conditioned(const Offspring<P>& p, const Functional& f,
                                       const Window& win, RngStream& rng,
                                       const SampleBudget& budget = {}) {
    for (long r = 0; r < budget.max_rejections; ++r) {
        auto cand = sample_gw(p, rng, budget);
        if (!cand.ok()) continue;
        if (win.contains(f.eval(cand.value))) return cand;
    }
    return {FiniteTree(), SampleStatus::Exhausted};
}

}  // namespace gw
