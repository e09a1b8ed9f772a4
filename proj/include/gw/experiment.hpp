#pragma once

// Experiment drivers: local-limit convergence tables, window-probability
// ratio tables, the martingale-limit Monte Carlo, the graft-property probe
// and the condensation geometry experiment.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gw/enumerate.hpp"
#include "gw/offspring.hpp"
#include "gw/sample.hpp"
#include "gw/tree_law.hpp"

namespace gw {

struct ConvergenceRow {
    long n = 0;
    double window_mass = 0.0;
    double tv_lo = 0.0;
    double tv_hi = 0.0;
    double residual = 0.0;  // |lhs - rhs| of the finite-n ratio identity
};

struct ConvergenceReport {
    std::string functional;
    int h = 0;
    bool routed_generic = true;
    double theta = 1.0;
    std::vector<ConvergenceRow> rows;
};

// Window mass P(A(tau) in win), exact where the machinery allows it. Height
// tail windows use the cdf complement (critical/sub-critical: finite trees
// carry all the mass).
template <class P>
P window_mass(const Offspring<P>& p, const Functional& f, const Window& win, long cap) {
    if (f.kind == Functional::Height) {
        P below = win.lo >= 1 ? height_cdf(p, win.lo - 1) : num::zero<P>();
        if (win.unbounded()) return num::one<P>() - below;
        return height_cdf(p, win.lo + win.len - 1) - below;
    }
    if (f.kind == Functional::Leaves) {
        std::set<long> A(f.A.begin(), f.A.end());
        if (win.unbounded()) {
            auto below = leaves_law(p, A, win.lo - 1);
            return num::one<P>() - below.mass();
        }
        return leaves_law(p, A, win.lo + win.len - 1).window_mass(win);
    }
    auto law = functional_law(p, f, cap);
    return law.window_mass(win);
}

// Is the window probability from window_mass exact for this combination?
// Height and leaf counts always are; bounded size windows are once the cap
// covers them; capped max-degree and largest-generation masses are not.
inline bool window_mass_exact(const Functional& f, const Window& win, long cap, double mean) {
    switch (f.kind) {
        case Functional::Height: return mean <= 1.0 || !win.unbounded();
        case Functional::Leaves: return mean <= 1.0 || !win.unbounded();
        case Functional::Size: return !win.unbounded() && win.lo + win.len - 1 <= cap;
        default: return false;
    }
}

// TV of conditioned restricted laws against the Kesten target, one row per
// window start. Sub-critical leaf-count conditioning routes through the
// genericity analysis to pick its target distribution.
template <class P>
ConvergenceReport convergence_experiment(const Offspring<P>& p, const Functional& f,
                                         const std::vector<Window>& windows, int h, long cap) {
    ConvergenceReport rep;
    rep.functional = f.name();
    rep.h = h;

    TreeLaw<P> target;
    if (p.criticality() < 0 && f.kind == Functional::Leaves) {
        std::set<long> A(f.A.begin(), f.A.end());
        auto g = genericity(p, A);
        rep.routed_generic = g.generic;
        rep.theta = g.theta;
        if (!g.generic)
            throw Error("non-generic routing: use the condensation experiment");
        if constexpr (std::is_same_v<P, Rat>) {
            if (!g.theta_exact) throw Error("critical tilt parameter is not rational");
            target = kesten_restriction_law(tilt(p, A, *g.theta_exact), h);
        } else {
            target = kesten_restriction_law(tilt(p, A, P(g.theta)), h);
        }
    } else {
        target = kesten_restriction_law(p, h);
    }

    // residual probe: smallest branching tree in the support
    long kmin = 0;
    for (const auto& [k, pk] : p.pmf())
        if (k >= 1) {
            kmin = k;
            break;
        }
    std::vector<int> enc = {static_cast<int>(kmin)};
    for (long i = 0; i < kmin; ++i) enc.push_back(0);
    FiniteTree probe = FiniteTree::decode(enc);
    NodeLabel px = {1};

    for (const auto& win : windows) {
        ConvergenceRow row;
        row.n = win.lo;
        P wm = window_mass(p, f, win, cap);
        row.window_mass = to_double(wm);
        std::optional<P> exact_wm;
        if (window_mass_exact(f, win, cap, to_double(p.mean()))) exact_wm = wm;
        auto law = conditioned_restriction_law(p, f, win, h, cap, exact_wm);
        auto tv = tv_distance(law, target);
        row.tv_lo = tv.lo;
        row.tv_hi = tv.hi;
        auto [lhs, rhs] = eq_tmp_ratio(p, f, probe, px, win, cap);
        row.residual = std::abs(to_double(lhs) - to_double(rhs));
        rep.rows.push_back(row);
    }
    return rep;
}

struct WindowRatioRow {
    long n = 0;
    double mass = 0.0;
    double ratio = 0.0;  // P(A_{n+1}) / P(A_n)
    bool defined = false;
};

// Table of successive window-probability ratios; the limit is the offspring
// mean for height windows and one for size windows at criticality. Computed
// in floats: exact rationals blow up exponentially under g-iteration and the
// table reports doubles regardless.
template <class P>
std::vector<WindowRatioRow> ratio_table(const Offspring<P>& p, const Functional& f,
                                        const std::vector<long>& ns, long n1, long cap) {
    auto pd = to_double_offspring(p);
    std::vector<WindowRatioRow> out;
    for (long n : ns) {
        WindowRatioRow row;
        row.n = n;
        double a = window_mass(pd, f, Window{n, n1}, cap);
        double b = window_mass(pd, f, Window{n + 1, n1}, cap);
        row.mass = a;
        if (a > 0.0) {
            row.ratio = b / a;
            row.defined = true;
        }
        out.push_back(row);
    }
    return out;
}

struct KestenStigumReport {
    double mean_w = 0.0;
    double ci3 = 0.0;  // 3 sigma band of the mean estimate
    double frac_extinct = 0.0;
    double q = 0.0;
};

// Monte Carlo check of the martingale limit dichotomy for finite-support
// super-critical offspring: E[W_n] = 1 and P(Z_n = 0) ~ q.
template <class P>
KestenStigumReport kesten_stigum_mc(const Offspring<P>& p, int n, long reps,
                                    std::uint64_t seed = 1) {
    if (!(to_double(p.mean()) > 1.0))
        throw NotSuperCritical("martingale dichotomy experiment requires mean > 1");
    RngStream rng(seed, 0);
    double s = 0.0, s2 = 0.0;
    long extinct = 0;
    for (long i = 0; i < reps; ++i) {
        auto [z, w] = sample_process(p, rng, n);
        s += w[n];
        s2 += w[n] * w[n];
        if (z[n] == 0) ++extinct;
    }
    KestenStigumReport rep;
    rep.mean_w = s / reps;
    double var = std::max(0.0, s2 / reps - rep.mean_w * rep.mean_w);
    rep.ci3 = 3.0 * std::sqrt(var / reps);
    rep.frac_extinct = static_cast<double>(extinct) / reps;
    rep.q = extinction_float(p);
    return rep;
}

struct ProbeWitness {
    FiniteTree t;
    NodeLabel x;
    long D = 0;
    long n0 = 0;
};

struct ProbeResult {
    enum Cls { Identity, Additivity, Monotonicity, None } cls = None;
    std::vector<ProbeWitness> witnesses;  // one per (host, leaf), additive classes only
};

namespace detail {

inline std::vector<FiniteTree> all_trees_up_to(long cap) {
    // unrestricted ordered trees: child counts up to cap-1
    std::vector<long> support;
    for (long k = 0; k < cap; ++k) support.push_back(k);
    std::vector<FiniteTree> out;
    for_each_tree(support, cap, [&](const FiniteTree& t) { out.push_back(t); });
    return out;
}

}  // namespace detail

// Exhaustively classify how a functional behaves under grafting. Hosts run
// over all trees of size <= host_cap with every leaf as graft point; graft
// arguments run over all trees of size <= graft_cap. The threshold clause is
// honored by searching the smallest n0 below which mismatches are ignored,
// and a classification only counts when at least two distinct functional
// values survive above the threshold.
inline ProbeResult property_probe(const Functional& f, long host_cap = 6, long graft_cap = 9,
                                  long n0_cap = 8) {
    auto hosts = detail::all_trees_up_to(host_cap);
    auto grafts = detail::all_trees_up_to(graft_cap);

    bool monotone = true;
    bool additive = true;
    bool identity = true;
    ProbeResult out;

    for (const auto& t : hosts) {
        for (const auto& x : t.leaves()) {
            std::vector<std::pair<long, long>> vals;  // (A(t'), A(t (*) t'))
            for (const auto& g : grafts) {
                long a = f.eval(g);
                long b = f.eval(t.graft(x, g));
                vals.push_back({a, b});
                if (b < a) monotone = false;
            }
            if (!additive) continue;
            // smallest threshold with a constant shift above it
            std::optional<long> found_D, found_n0;
            for (long n0 = 0; n0 <= n0_cap && !found_D; ++n0) {
                std::optional<long> D;
                bool okay = true;
                std::set<long> distinct;
                for (const auto& [a, b] : vals) {
                    if (a < n0) continue;
                    distinct.insert(a);
                    if (!D) D = b - a;
                    if (b - a != *D) {
                        okay = false;
                        break;
                    }
                }
                if (okay && D && distinct.size() >= 2) {
                    found_D = D;
                    found_n0 = n0;
                }
            }
            if (!found_D) {
                additive = false;
                identity = false;
                continue;
            }
            if (*found_D != 0) identity = false;
            out.witnesses.push_back({t, x, *found_D, *found_n0});
        }
    }

    if (identity && additive)
        out.cls = ProbeResult::Identity;
    else if (additive)
        out.cls = ProbeResult::Additivity;
    else if (monotone)
        out.cls = ProbeResult::Monotonicity;
    else
        out.cls = ProbeResult::None;
    if (out.cls == ProbeResult::Monotonicity || out.cls == ProbeResult::None)
        out.witnesses.clear();
    return out;
}

struct CondensationReport {
    long reps = 0;
    double frac_one_infinite = 0.0;
    std::map<int, double> depth_freq;
    double tv_vs_geometric = 0.0;  // against Geom(1-m) - 1 on depths <= depth_cap
    double depth0 = 0.0;
};

template <class P>
CondensationReport condensation_experiment(const Offspring<P>& p, long reps, int depth_cap,
                                           std::uint64_t seed = 1) {
    RngStream rng(seed, 0);
    CondensationReport rep;
    rep.reps = reps;
    long good = 0;
    std::map<int, long> counts;
    for (long i = 0; i < reps; ++i) {
        auto s = sample_condensation(p, rng, 1);
        if (!s.ok()) continue;
        if (s.value.infinite_nodes().size() == 1) ++good;
        int d = depth_of(*s.value.infinite_nodes().begin());
        ++counts[d];
    }
    rep.frac_one_infinite = static_cast<double>(good) / reps;
    double m = to_double(p.mean());
    double tv = 0.0;
    for (int d = 0; d <= depth_cap; ++d) {
        double emp = counts.count(d) ? static_cast<double>(counts[d]) / reps : 0.0;
        double theo = (1.0 - m) * std::pow(m, d);
        rep.depth_freq[d] = emp;
        tv += std::abs(emp - theo);
    }
    rep.tv_vs_geometric = 0.5 * tv;
    rep.depth0 = rep.depth_freq.count(0) ? rep.depth_freq[0] : 0.0;
    return rep;
}

}  // namespace gw
