#pragma once

// Exact enumeration oracle: tree laws, functional laws, conditioned and
// Kesten restricted laws, the Dwass identity, graft-set probabilities and
// the finite-n ratio identity behind the local limit theorems. Everything
// here is deterministic; with rational inputs every number is exact.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "gw/errors.hpp"
#include "gw/offspring.hpp"
#include "gw/tree.hpp"
#include "gw/tree_law.hpp"

namespace gw {

inline constexpr long kEnumGuard = 4'000'000;  // max trees visited per call

// P(tau = t) = prod over nodes of p(k_u).
template <class P>
P tree_prob(const Offspring<P>& p, const FiniteTree& t) {
    P pr = num::one<P>();
    for (int k : t.encode()) pr *= p.prob(k);
    return pr;
}

// P(r_h(tau) = t) for a tree t of height <= h: product over depths < h only.
template <class P>
P restriction_prob(const Offspring<P>& p, const FiniteTree& t, int h) {
    auto d = t.depths();
    const auto& k = t.encode();
    P pr = num::one<P>();
    for (size_t i = 0; i < k.size(); ++i)
        if (d[i] < h) pr *= p.prob(k[i]);
    return pr;
}

namespace detail {

template <class F>
void gen_trees_size(const std::vector<long>& support, long cap, std::vector<int>& enc, long open,
                    long& visited, F&& f) {
    if (open == 0) {
        f(enc);
        return;
    }
    for (long k : support) {
        long open2 = open - 1 + k;
        if (static_cast<long>(enc.size()) + 1 + open2 > cap) continue;
        enc.push_back(static_cast<int>(k));
        if (++visited > kEnumGuard) throw SupportTooLarge("tree enumeration guard exceeded");
        gen_trees_size(support, cap, enc, open2, visited, f);
        enc.pop_back();
    }
}

}  // namespace detail

template <class P>
std::vector<long> support_of(const Offspring<P>& p) {
    std::vector<long> s;
    for (const auto& [k, pk] : p.pmf()) s.push_back(k);
    return s;
}

// Visit every tree over the given child-count support with size <= cap.
template <class F>
void for_each_tree(const std::vector<long>& support, long cap, F&& f) {
    std::vector<int> enc;
    long visited = 0;
    detail::gen_trees_size(support, cap, enc, 1, visited, [&](const std::vector<int>& e) {
        f(FiniteTree::decode(e));
    });
}

// Visit every tree over the support with height <= hcap (complete trees, not
// restrictions: depth-hcap nodes are leaves by force).
template <class F>
void for_each_tree_height_le(const std::vector<long>& support, int hcap, F&& f) {
    // simple recursive product construction
    std::function<std::vector<std::vector<int>>(int)> gen = [&](int h) {
        std::vector<std::vector<int>> out;
        for (long k : support) {
            if (k == 0) {
                out.push_back({0});
                continue;
            }
            if (h == 0) continue;
            auto subs = gen(h - 1);
            // k-fold cartesian product of subs
            std::vector<std::vector<int>> acc = {{static_cast<int>(k)}};
            for (long c = 0; c < k; ++c) {
                std::vector<std::vector<int>> next;
                for (const auto& a : acc)
                    for (const auto& s : subs) {
                        auto e = a;
                        e.insert(e.end(), s.begin(), s.end());
                        next.push_back(std::move(e));
                        if (static_cast<long>(next.size()) > kEnumGuard)
                            throw SupportTooLarge("height enumeration guard exceeded");
                    }
                acc = std::move(next);
            }
            for (auto& e : acc) out.push_back(std::move(e));
        }
        return out;
    };
    for (auto& e : gen(hcap)) f(FiniteTree::decode(e));
}

// Law of tau on {|t| <= size_cap}; complement = everything larger (plus the
// infinite trees when super-critical).
template <class P>
TreeLaw<P> enumerate_law(const Offspring<P>& p, long size_cap) {
    TreeLaw<P> law;
    P mass = num::zero<P>();
    for_each_tree(support_of(p), size_cap, [&](const FiniteTree& t) {
        P pr = tree_prob(p, t);
        if (pr != num::zero<P>()) {
            law.table[t] = pr;
            mass += pr;
        }
    });
    law.complement = num::one<P>() - mass;
    if (law.complement < num::zero<P>()) law.complement = num::zero<P>();
    return law;
}

namespace detail {

// truncated polynomial product
template <class P>
std::vector<P> poly_mul(const std::vector<P>& a, const std::vector<P>& b, long cap) {
    std::vector<P> c(std::min<long>(cap + 1, a.size() + b.size() - 1), num::zero<P>());
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == num::zero<P>()) continue;
        for (size_t j = 0; j < b.size() && i + j < c.size(); ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

// g(A(z)) truncated at degree cap, with child counts above maxdeg dropped
template <class P>
std::vector<P> g_compose(const Offspring<P>& p, const std::vector<P>& A, long cap, long maxdeg) {
    // Horner over descending support
    std::vector<P> B = {num::zero<P>()};
    long top = std::min(maxdeg, p.max_support());
    for (long k = top; k >= 0; --k) {
        B = poly_mul(B, A, cap);
        if (B.empty()) B = {num::zero<P>()};
        P pk = p.prob(k);
        if (pk != num::zero<P>()) {
            if (B.empty()) B.resize(1, num::zero<P>());
            B[0] += pk;
        }
    }
    return B;
}

}  // namespace detail

// Coefficients a[s] = P(|tau| = s, all out-degrees <= maxdeg), s <= cap,
// from the series fixed point A(z) = z * g(A(z)).
template <class P>
std::vector<P> size_series(const Offspring<P>& p, long cap, long maxdeg = -1) {
    if (maxdeg < 0) maxdeg = p.max_support();
    std::vector<P> A(1, num::zero<P>());
    for (long it = 0; it <= cap; ++it) {
        auto B = detail::g_compose(p, A, cap - 1, maxdeg);
        std::vector<P> next(std::min<long>(cap + 1, B.size() + 1), num::zero<P>());
        for (size_t i = 0; i + 1 < next.size() && i < B.size(); ++i) next[i + 1] = B[i];
        A = std::move(next);
    }
    A.resize(cap + 1, num::zero<P>());
    return A;
}

// Law of |tau| up to size_cap.
template <class P>
PMF<P> size_law(const Offspring<P>& p, long size_cap) {
    auto a = size_series(p, size_cap);
    PMF<P> out;
    P mass = num::zero<P>();
    for (long s = 1; s <= size_cap; ++s)
        if (a[s] != num::zero<P>()) {
            out.table[s] = a[s];
            mass += a[s];
        }
    out.complement = num::one<P>() - mass;
    if (out.complement < num::zero<P>()) out.complement = num::zero<P>();
    return out;
}

// Law of H(tau) for heights <= hcap, via the iteration G_{n+1} = g(G_n):
// P(H <= n) = G_{n+1}(0).
template <class P>
PMF<P> height_law(const Offspring<P>& p, long hcap) {
    PMF<P> out;
    P prev = num::zero<P>();  // P(H <= n-1)
    P cur = num::zero<P>();
    for (long n = 0; n <= hcap; ++n) {
        cur = gen_fn(p, cur).first;  // iterate g starting from 0
        P mass = cur - prev;
        if (mass != num::zero<P>()) out.table[n] = mass;
        prev = cur;
    }
    out.complement = num::one<P>() - cur;
    if (out.complement < num::zero<P>()) out.complement = num::zero<P>();
    return out;
}

// P(H(tau) <= n) exactly (critical/sub-critical: the finite-tree mass).
template <class P>
P height_cdf(const Offspring<P>& p, long n) {
    P cur = num::zero<P>();
    for (long i = 0; i <= n; ++i) cur = gen_fn(p, cur).first;
    return cur;
}

// Exact law of L_A(tau) on values <= n_max. Unary nodes outside A are summed
// out analytically (each maximal chain contributes a geometric factor), after
// which the event {L_A <= n_max} must be size-bounded over the remaining
// support; otherwise the law has no finite exact representation here.
template <class P>
PMF<P> leaves_law(const Offspring<P>& p, const std::set<long>& A, long n_max) {
    P p1 = p.prob(1);
    if (p1 != num::zero<P>() && !A.count(1)) {
        // contract unary chains: p'(k) = p(k)/(1-p(1)) for k != 1
        std::map<long, P> contracted;
        for (const auto& [k, pk] : p.pmf())
            if (k != 1) contracted[k] = pk / (num::one<P>() - p1);
        return leaves_law(Offspring<P>(std::move(contracted)), A, n_max);
    }
    // boundedness: growth without touching A needs 0 outside A together with
    // some k >= 1 outside A
    bool zero_out = p.prob(0) != num::zero<P>() && !A.count(0);
    long kmax = p.max_support();
    for (const auto& [k, pk] : p.pmf())
        if (zero_out && k >= 1 && !A.count(k))
            throw SupportTooLarge("leaf-count event is not size-bounded for this support");
    long cap = std::max(2 * n_max + 1, kmax * n_max + 1);
    PMF<P> out;
    P mass = num::zero<P>();
    for_each_tree(support_of(p), cap, [&](const FiniteTree& t) {
        P pr = tree_prob(p, t);
        if (pr == num::zero<P>()) return;
        long v = Functional::leaves(std::set<int>(A.begin(), A.end())).eval(t);
        if (v <= n_max) {
            out.table[v] += pr;
            mass += pr;
        }
    });
    out.complement = num::one<P>() - mass;
    if (out.complement < num::zero<P>()) out.complement = num::zero<P>();
    return out;
}

// P(M(tau) = d, |tau| <= cap) for d <= the support maximum, via truncated
// size series differences. Complement is everything of size > cap.
template <class P>
PMF<P> maxdeg_law_capped(const Offspring<P>& p, long size_cap) {
    PMF<P> out;
    P prev_mass = num::zero<P>();
    P total = num::zero<P>();
    for (long d = 0; d <= p.max_support(); ++d) {
        if (d >= 1 && p.prob(d) == num::zero<P>()) continue;
        auto a = size_series(p, size_cap, d);
        P m = num::zero<P>();
        for (long s = 1; s <= size_cap; ++s) m += a[s];
        P diff = m - prev_mass;
        if (diff != num::zero<P>()) out.table[d] = diff;
        total += diff;
        prev_mass = m;
    }
    out.complement = num::one<P>() - total;
    if (out.complement < num::zero<P>()) out.complement = num::zero<P>();
    return out;
}

// Law of a functional by direct enumeration over {|t| <= cap}.
template <class P>
PMF<P> functional_law_enum(const Offspring<P>& p, const Functional& f, long size_cap) {
    PMF<P> out;
    P mass = num::zero<P>();
    for_each_tree(support_of(p), size_cap, [&](const FiniteTree& t) {
        P pr = tree_prob(p, t);
        if (pr == num::zero<P>()) return;
        out.table[f.eval(t)] += pr;
        mass += pr;
    });
    out.complement = num::one<P>() - mass;
    if (out.complement < num::zero<P>()) out.complement = num::zero<P>();
    return out;
}

// Dispatch: cap means "largest functional value" for Height and Leaves,
// "largest tree size" for the rest.
template <class P>
PMF<P> functional_law(const Offspring<P>& p, const Functional& f, long cap) {
    switch (f.kind) {
        case Functional::Size: return size_law(p, cap);
        case Functional::Height: return height_law(p, cap);
        case Functional::Leaves: return leaves_law(p, std::set<long>(f.A.begin(), f.A.end()), cap);
        case Functional::MaxOutDegree: return maxdeg_law_capped(p, cap);
        case Functional::LargestGeneration: return functional_law_enum(p, f, cap);
    }
    throw Error("unknown functional");
}

// n-fold convolution of p, indices 0..max_index.
template <class P>
std::vector<P> walk_pmf(const Offspring<P>& p, long n, long max_index) {
    std::vector<P> base(std::min(p.max_support(), max_index) + 1, num::zero<P>());
    for (const auto& [k, pk] : p.pmf())
        if (k <= max_index) base[k] = pk;
    std::vector<P> acc = {num::one<P>()};
    for (long i = 0; i < n; ++i) acc = detail::poly_mul(acc, base, max_index);
    acc.resize(max_index + 1, num::zero<P>());
    return acc;
}

// Both sides of the total-progeny identity P(|tau|=n) = (1/n) P(S_n = n-1).
template <class P>
std::pair<P, P> dwass_check(const Offspring<P>& p, long n) {
    P lhs = size_law(p, n).at(n);
    auto conv = walk_pmf(p, n, n - 1);
    P rhs = conv[n - 1] / P(static_cast<long>(n));
    return {lhs, rhs};
}

// Exact law of r_h of Kesten's tree: weight each height-<=h restriction t by
// z_h(t)/m^h times P(r_h(tau) = t).
template <class P>
TreeLaw<P> kesten_restriction_law(const Offspring<P>& p, int h) {
    if (!p.hyp()) throw InvalidDistribution("offspring must be non-degenerate");
    P mh = num::pow_int(p.mean(), h);
    TreeLaw<P> law;
    for_each_tree_height_le(support_of(p), h, [&](const FiniteTree& t) {
        auto st = t.stats({});
        long zh = (h < static_cast<long>(st.width.size())) ? st.width[h] : 0;
        if (zh == 0) return;  // no depth-h node: cannot be a Kesten restriction
        P pr = restriction_prob(p, t, h) * P(static_cast<long>(zh)) / mh;
        if (pr != num::zero<P>()) law.table[t] += pr;
    });
    return law;
}

// Law of r_h(tau) given {A(tau) in window}, from trees of size <= cap.
// When the exact window probability is known, table entries are exact and
// the complement is the window mass hiding beyond the cap; otherwise the
// complement falls back to all unenumerated tree mass.
template <class P>
TreeLaw<P> conditioned_restriction_law(const Offspring<P>& p, const Functional& f,
                                       const Window& win, int h, long cap,
                                       std::optional<P> true_window_mass = {}) {
    std::map<FiniteTree, P> bucket;
    P w = num::zero<P>(), all = num::zero<P>();
    for_each_tree(support_of(p), cap, [&](const FiniteTree& t) {
        P pr = tree_prob(p, t);
        if (pr == num::zero<P>()) return;
        all += pr;
        if (!win.contains(f.eval(t))) return;
        bucket[t.restrict(h)] += pr;
        w += pr;
    });
    P denom, miss;
    if (true_window_mass) {
        denom = *true_window_mass;
        miss = denom - w;
    } else {
        miss = num::one<P>() - all;  // any unenumerated tree may be in the window
        if (miss < num::zero<P>()) miss = num::zero<P>();
        denom = w + miss;
    }
    if (denom == num::zero<P>()) throw WindowUnreachable("window has zero probability");
    if (miss < num::zero<P>()) miss = num::zero<P>();
    TreeLaw<P> law;
    for (auto& [r, m] : bucket) law.table[r] = m / denom;
    law.complement = miss / denom;
    return law;
}

// P(tau in T(t,x)): product of p(k_u) over the nodes of t other than x.
// With the flag set, the Kesten-tree value m^{-|x|} times that.
template <class P>
P graft_set_prob(const Offspring<P>& p, const FiniteTree& t, const NodeLabel& x,
                 bool use_kesten = false) {
    if (t.child_count(x) != 0) throw NotALeaf("graft point is not a leaf");
    P pr = tree_prob(p, t) / p.prob(0);
    if (use_kesten) pr = pr / num::pow_int(p.mean(), depth_of(x));
    return pr;
}

// Shift D(t,x) of the additive functionals; zero for the identity-class
// max out-degree and the monotone largest generation.
inline long graft_shift(const Functional& f, const FiniteTree& t, const NodeLabel& x) {
    switch (f.kind) {
        case Functional::Size: return t.size() - 1;
        case Functional::Height: return depth_of(x);
        case Functional::Leaves: {
            long l = f.eval(t);
            return l - (f.A.count(0) ? 1 : 0);
        }
        case Functional::MaxOutDegree: return 0;
        case Functional::LargestGeneration: return 0;
    }
    return 0;
}

// Finite-n ratio identity: returns
//   lhs = P(tau in T(t,x), A(tau) in win)        (numerator of the conditioned prob)
//   rhs = m^{|x|} P(tau* in T(t,x)) * P(A in win - D)
// over matched graft-argument universes, so additive functionals with
// n >= n0 give exact equality and the monotone class gives lhs >= rhs.
template <class P>
std::pair<P, P> eq_tmp_ratio(const Offspring<P>& p, const Functional& f, const FiniteTree& t,
                             const NodeLabel& x, const Window& win, long cap) {
    P gp = graft_set_prob(p, t, x);  // = m^{|x|} * P(tau* in T(t,x))
    long D = graft_shift(f, t, x);
    Window shifted{win.lo - D, win.len};

    P lhs_num = num::zero<P>(), rhs_num = num::zero<P>();
    if (f.kind == Functional::Height && win.unbounded()) {
        // complement trick (critical/sub-critical): {H < n} is height-bounded
        for_each_tree_height_le(support_of(p), static_cast<int>(win.lo) - 1,
                                [&](const FiniteTree& t2) {
                                    P pr = tree_prob(p, t2);
                                    if (pr == num::zero<P>()) return;
                                    if (f.eval(t.graft(x, t2)) < win.lo) lhs_num += pr;
                                });
        lhs_num = num::one<P>() - lhs_num;
        rhs_num = num::one<P>() - height_cdf(p, shifted.lo - 1);
    } else if (f.kind == Functional::Height) {
        int hcap = static_cast<int>(win.lo + win.len) - 1;
        for_each_tree_height_le(support_of(p), hcap, [&](const FiniteTree& t2) {
            P pr = tree_prob(p, t2);
            if (pr == num::zero<P>()) return;
            if (win.contains(f.eval(t.graft(x, t2)))) lhs_num += pr;
            if (shifted.contains(f.eval(t2))) rhs_num += pr;
        });
    } else {
        for_each_tree(support_of(p), cap, [&](const FiniteTree& t2) {
            P pr = tree_prob(p, t2);
            if (pr == num::zero<P>()) return;
            if (win.contains(f.eval(t.graft(x, t2)))) lhs_num += pr;
            if (shifted.contains(f.eval(t2))) rhs_num += pr;
        });
    }
    return {gp * lhs_num, gp * rhs_num};
}

struct RatioRow {
    long n = 0;
    long ell = 0;
    double ratio = 0.0;
    bool defined = false;
};

struct RatioTable {
    long period = 1;
    std::vector<RatioRow> rows;
};

// P(S_n = n + ell) / P(S_n = n) from exact convolutions. For periodic p the
// ratio is only defined when ell is a multiple of the period.
template <class P>
RatioTable strong_ratio_table(const Offspring<P>& p, const std::vector<long>& ns,
                              const std::vector<long>& ells) {
    RatioTable out;
    out.period = p.period();
    long lmax = 0;
    for (long l : ells) lmax = std::max(lmax, l);
    for (long n : ns) {
        auto conv = walk_pmf(p, n, n + lmax);
        P base = conv[n];
        for (long l : ells) {
            RatioRow row{n, l, 0.0, false};
            if (base != num::zero<P>() && n + l >= 0) {
                row.ratio = to_double(conv[n + l]) / to_double(base);
                row.defined = true;
            }
            out.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace gw
