// Acceptance gate: twelve numbered checks, one PASS/FAIL line each.
// Returns nonzero if any check fails. Tolerances are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "gw/enumerate.hpp"
#include "gw/experiment.hpp"
#include "gw/offspring.hpp"
#include "gw/sample.hpp"

using namespace gw;

namespace {

const Offspring<Rat> kCrit({{0, rat(1, 2)}, {2, rat(1, 2)}});
const Offspring<Rat> kSub({{0, rat(3, 5)}, {2, rat(2, 5)}});
const Offspring<Rat> kSuper({{0, rat(1, 4)}, {2, rat(3, 4)}});
const Offspring<Rat> kAperiodic({{0, rat(1, 4)}, {1, rat(1, 2)}, {2, rat(1, 4)}});

// exactly critical with unbounded-looking support: geometric atoms
// 2^-(k+1) for k < K and the remainder 2^-K parked at K+1, mean exactly 1
Offspring<Rat> wide_critical(int K) {
    std::map<long, Rat> pmf;
    Rat acc = 0;
    for (int k = 0; k < K; ++k) {
        pmf[k] = Rat(1) / num::pow_int(Rat(2), k + 1);
        acc += pmf[k];
    }
    pmf[K + 1] = Rat(1) - acc;
    return Offspring<Rat>(std::move(pmf));
}

Rat catalan(long k) {
    Rat c = 1;
    for (long i = 0; i < k; ++i) c = c * Rat(2 * (2 * i + 1)) / Rat(i + 2);
    return c;
}

int failures = 0;

void report(int idx, bool ok, const std::string& what) {
    std::printf("%s criterion-%02d %s\n", ok ? "PASS" : "FAIL", idx, what.c_str());
    if (!ok) ++failures;
}

bool c1_extinction() {
    if (extinction_q(kSuper) != rat(1, 3)) return false;
    auto superf = to_double_offspring(kSuper);
    if (std::abs(extinction_q(superf) - 1.0 / 3.0) >= 1e-12) return false;
    for (const auto* p : {&kCrit, &kSub, &kAperiodic})
        if (extinction_q(*p) != Rat(1)) return false;
    return extinction_q(wide_critical(6)) == Rat(1);
}

bool c2_conjugate() {
    Rat q = extinction_q(kSuper);
    auto conj = conjugate(kSuper);
    auto law = enumerate_law(kSuper, 9);
    auto claw = enumerate_law(conj, 9);
    for (const auto& [t, pr] : law.table)
        if (q * claw.at(t) != pr) return false;
    return !law.table.empty();
}

bool c3_weighted_restriction() {
    for (const auto* p : {&kCrit, &kSub}) {
        Rat mh = 1;
        for (int h = 1; h <= 3; ++h) {
            mh = mh * p->mean();
            auto kl = kesten_restriction_law(*p, h);
            if (kl.mass() != Rat(1)) return false;
            // independent pointwise recomputation of the weights
            for (const auto& [t, pr] : kl.table) {
                long zh = 0;
                for (const auto& u : t.labels())
                    if (depth_of(u) == h) ++zh;
                if (pr != Rat(zh) * restriction_prob(*p, t, h) / mh) return false;
            }
        }
    }
    return true;
}

bool c4_total_progeny() {
    for (const auto* p : {&kCrit, &kSub, &kSuper, &kAperiodic})
        for (long n = 1; n <= 15; ++n) {
            auto [lhs, rhs] = dwass_check(*p, n);
            if (lhs != rhs) return false;
        }
    auto sl = size_law(kCrit, 15);
    for (long k = 0; k <= 7; ++k)
        if (sl.at(2 * k + 1) != catalan(k) / num::pow_int(Rat(2), 2 * k + 1)) return false;
    return true;
}

bool c5_ratio_identity() {
    std::vector<std::pair<FiniteTree, NodeLabel>> hosts;
    for (const std::vector<int>& enc :
         {std::vector<int>{2, 0, 0}, std::vector<int>{2, 2, 0, 0, 0}, std::vector<int>{1, 0}}) {
        FiniteTree t = FiniteTree::decode(enc);
        for (const auto& x : t.leaves()) hosts.push_back({t, x});
    }
    long cases = 0;
    for (const auto* p : {&kCrit, &kAperiodic})
        for (const auto& [t, x] : hosts) {
            if (tree_prob(*p, t) == Rat(0)) continue;
            struct Probe {
                Functional f;
                Window win;
                long cap;
            };
            std::vector<Probe> probes = {
                {Functional::size(), Window{9, 2}, 13},
                {Functional::size(), Window{11, 3}, 15},
                {Functional::height(), Window{4, 1}, 0},
                {Functional::height(), Window{4, 0}, 0},
                {Functional::leaves({0}), Window{5, 1}, 14},
            };
            for (const auto& pr : probes) {
                auto [lhs, rhs] = eq_tmp_ratio(*p, pr.f, t, x, pr.win, pr.cap);
                if (lhs != rhs) return false;
                if (lhs == Rat(0)) return false;
                ++cases;
            }
        }
    return cases >= 20;
}

bool c6_max_degree_identity() {
    auto p = wide_critical(6);
    auto t = FiniteTree::decode({2, 0, 0});
    for (long n = 3; n <= 5; ++n) {
        for (const NodeLabel& x : {NodeLabel{1}, NodeLabel{2}}) {
            auto [lhs, rhs] = eq_tmp_ratio(p, Functional::max_out_degree(), t, x,
                                           Window{n, 0}, 9);
            if (lhs != rhs) return false;
            if (lhs == Rat(0)) return false;
        }
    }
    return true;
}

bool c7_leaf_tree() {
    for (const auto* p : {&kCrit, &kAperiodic}) {
        auto lo = leaf_offspring(*p);
        if (leaf_offspring_mean(*p) != Rat(1)) return false;
        auto ll = leaves_law(*p, {0}, 7);
        auto sl = size_law(lo, 7);
        for (long n = 1; n <= 7; ++n)
            if (ll.at(n) != sl.at(n)) return false;
    }
    return true;
}

bool c8_tilt_genericity() {
    auto tp = tilt(kSub, {0}, rat(5, 4));
    if (tp.prob(0) != rat(1, 2) || tp.prob(2) != rat(1, 2)) return false;

    // conditioned on the leaf count, the tilted and the original tree law agree
    auto f = Functional::leaves({0});
    for (long n = 2; n <= 5; ++n) {
        Rat wa = 0, wb = 0;
        std::map<FiniteTree, Rat> la, lb;
        for_each_tree(support_of(kSub), 2 * n - 1, [&](const FiniteTree& t) {
            if (f.eval(t) != n) return;
            la[t] = tree_prob(kSub, t);
            lb[t] = tree_prob(tp, t);
            wa += la[t];
            wb += lb[t];
        });
        if (wa == Rat(0)) return false;
        for (const auto& [t, pr] : la)
            if (pr / wa != lb.at(t) / wb) return false;
    }

    for (const std::set<long>& A : {std::set<long>{0}, std::set<long>{2}}) {
        if (!genericity(kSub, A).generic) return false;
        if (!genericity(Offspring<double>::poisson(0.8), A).generic) return false;
    }
    auto pl = Offspring<double>::power_law(3.0, 1.0, 0.5);
    for (const std::set<long>& A : {std::set<long>{0}, std::set<long>{0, 1}})
        if (genericity(pl, A).generic) return false;
    return true;
}

bool c9_martingale(double* seconds) {
    auto start = std::chrono::steady_clock::now();
    auto ks = kesten_stigum_mc(kSuper, 10, 100000, 42);
    *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (std::abs(ks.mean_w - 1.0) > ks.ci3) return false;
    double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 100000.0);
    if (std::abs(ks.frac_extinct - 1.0 / 3.0) > 3.0 * sigma) return false;
    return *seconds < 30.0;
}

bool c10_condensation() {
    auto c = condensation_experiment(kSub, 100000, 8, 7);
    return c.frac_one_infinite == 1.0 && c.tv_vs_geometric < 0.01;
}

bool c11_survivor() {
    RngStream rng(5, 0);
    const long N = 50000;
    long s20 = 0, s11 = 0;
    for (long i = 0; i < N; ++i) {
        std::pair<long, long> se{0, 0};
        auto t = sample_survivor(kSuper, rng, 3, {}, &se);
        if (!t.ok()) return false;
        if (se == std::pair<long, long>{2, 0}) ++s20;
        if (se == std::pair<long, long>{1, 1}) ++s11;
    }
    if (s20 + s11 != N) return false;
    double sigma = std::sqrt(0.25 / N);
    if (std::abs(static_cast<double>(s20) / N - 0.5) > 3.0 * sigma) return false;

    auto phat = survivor_joint(kSuper).backbone();
    if (phat.prob(1) != rat(1, 2) || phat.prob(2) != rat(1, 2) || phat.prob(0) != Rat(0))
        return false;

    // reconstruct g on [0,1] from the extinction split: below q through the
    // conjugate part, above q through the backbone part
    auto pf = to_double_offspring(kSuper);
    auto conj = to_double_offspring(conjugate(kSuper));
    auto bb = to_double_offspring(phat);
    double q = extinction_q(pf);
    for (int i = 0; i < 100; ++i) {
        double s = static_cast<double>(i) / 99.0;
        double lo = gen_fn(pf, q * s).first;
        if (std::abs(lo - q * gen_fn(conj, s).first) > 1e-12) return false;
        double hi = gen_fn(pf, q + (1.0 - q) * s).first;
        if (std::abs(hi - (q + (1.0 - q) * gen_fn(bb, s).first)) > 1e-12) return false;
    }
    return true;
}

bool c12_topology() {
    // ultrametric inequality and the restriction-ball identity on the
    // exhaustive set of binary-support trees of size <= 7
    std::vector<FiniteTree> ts;
    for_each_tree({0, 2}, 7, [&](const FiniteTree& t) { ts.push_back(t); });
    for (const auto& a : ts)
        for (const auto& b : ts) {
            for (int h = 0; h <= 3; ++h) {
                bool same = a.restrict(h) == b.restrict(h);
                if (same != (tree_distance(a, b) <= std::ldexp(1.0, -h))) return false;
            }
            for (const auto& c : ts)
                if (tree_distance(a, c) >
                    std::max(tree_distance(a, b), tree_distance(b, c)))
                    return false;
        }

    if (property_probe(Functional::size(), 5, 7).cls != ProbeResult::Additivity) return false;
    auto rh = property_probe(Functional::height(), 5, 7);
    if (rh.cls != ProbeResult::Additivity) return false;
    for (const auto& w : rh.witnesses)
        if (w.D != static_cast<long>(w.x.size())) return false;
    auto rl = property_probe(Functional::leaves({0}), 5, 7);
    if (rl.cls != ProbeResult::Additivity) return false;
    for (const auto& w : rl.witnesses)
        if (w.D != Functional::leaves({0}).eval(w.t) - 1) return false;
    if (property_probe(Functional::max_out_degree(), 5, 7).cls != ProbeResult::Identity)
        return false;
    return property_probe(Functional::largest_generation(), 5, 7).cls ==
           ProbeResult::Monotonicity;
}

}  // namespace

int main() {
    report(1, c1_extinction(), "extinction probabilities exact and within 1e-12 in floats");
    report(2, c2_conjugate(), "conjugate law carries a factor q on every tree up to size 9");
    report(3, c3_weighted_restriction(),
           "height-weighted restriction law pointwise exact with unit mass, h <= 3");
    report(4, c4_total_progeny(),
           "total progeny identity exact to n = 15 on four pmfs, Catalan masses match");
    report(5, c5_ratio_identity(),
           "graft ratio identity residual zero for size, height and leaf windows");
    report(6, c6_max_degree_identity(),
           "max out-degree conditioning matches the weighted law on wide critical support");
    report(7, c7_leaf_tree(),
           "leaf count law equals leaf-tree total progeny, unit mean at criticality");
    report(8, c8_tilt_genericity(),
           "critical tilt recovers the critical pmf; genericity split by tail radius");
    double secs = 0.0;
    bool ok9 = c9_martingale(&secs);
    report(9, ok9,
           "martingale mean and extinction fraction inside 3-sigma in " +
               std::to_string(secs).substr(0, 5) + "s");
    report(10, c10_condensation(),
           "one unexplored node per condensation sample, geometric depth law");
    report(11, c11_survivor(),
           "survivor root joint law, backbone pmf and piecewise g reconstruction");
    report(12, c12_topology(), "ultrametric balls are restriction classes; graft classes");
    if (failures) std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
