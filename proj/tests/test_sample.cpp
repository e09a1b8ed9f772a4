#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <map>

#include "gw/enumerate.hpp"
#include "gw/sample.hpp"

using namespace gw;

namespace {

const Offspring<Rat> kCrit({{0, rat(1, 2)}, {2, rat(1, 2)}});
const Offspring<Rat> kSub({{0, rat(3, 5)}, {2, rat(2, 5)}});
const Offspring<Rat> kSuper({{0, rat(1, 4)}, {2, rat(3, 4)}});

}  // namespace

TEST_CASE("streams are deterministic and independent") {
    RngStream a(7, 0), b(7, 0), c(7, 1);
    CHECK(a.next_u64() == b.next_u64());
    RngStream a2(7, 0);
    bool differ = false;
    for (int i = 0; i < 8; ++i) differ |= a2.next_u64() != c.next_u64();
    CHECK(differ);

    RngStream s1(7, 0), s2(7, 0);
    auto t1 = sample_gw(kCrit, s1);
    auto t2 = sample_gw(kCrit, s2);
    CHECK(t1.value == t2.value);
    CHECK(t1.status == t2.status);
}

TEST_CASE("plain sampler matches the exact law on atoms") {
    RngStream rng(1, 0);
    const long N = 100000;
    long singletons = 0;
    for (long i = 0; i < N; ++i) {
        auto t = sample_gw(kCrit, rng);
        if (t.ok() && t.value.size() == 1) ++singletons;
    }
    double f = static_cast<double>(singletons) / N;
    CHECK(std::abs(f - 0.5) < 3.0 * std::sqrt(0.25 / N));
}

TEST_CASE("height-weighted sampler matches its exact restriction law") {
    RngStream rng(2, 0);
    auto one = sample_kesten(kCrit, rng, 1);
    REQUIRE(one.ok());
    CHECK(one.value.encode() == std::vector<int>{2, 0, 0});

    RngStream rng2(3, 0);
    std::map<FiniteTree, long> emp;
    const long N = 100000;
    for (long i = 0; i < N; ++i) {
        auto t = sample_kesten(kCrit, rng2, 2);
        REQUIRE(t.ok());
        CHECK(t.value.height() == 2);
        ++emp[t.value];
    }
    auto oracle = kesten_restriction_law(kCrit, 2);
    double tv = 0.0;
    for (const auto& [t, pr] : oracle.table) {
        double e = emp.count(t) ? static_cast<double>(emp.at(t)) / N : 0.0;
        tv += std::abs(e - to_double(pr));
    }
    CHECK(tv / 2 < 0.01);
}

TEST_CASE("height-weighted samples restrict consistently across levels") {
    RngStream rng(4, 0);
    std::map<FiniteTree, long> emp;
    const long N = 50000;
    for (long i = 0; i < N; ++i) {
        auto t = sample_kesten(kSub, rng, 3);
        REQUIRE(t.ok());
        ++emp[t.value.restrict(2)];
    }
    auto oracle = kesten_restriction_law(kSub, 2);
    double tv = 0.0;
    for (const auto& [t, pr] : oracle.table) {
        double e = emp.count(t) ? static_cast<double>(emp.at(t)) / N : 0.0;
        tv += std::abs(e - to_double(pr));
    }
    CHECK(tv / 2 < 0.01);
}

TEST_CASE("survivor sampler reproduces the root joint law") {
    RngStream rng(5, 0);
    const long N = 50000;
    long s2 = 0, s1 = 0;
    for (long i = 0; i < N; ++i) {
        std::pair<long, long> se{0, 0};
        auto t = sample_survivor(kSuper, rng, 3, {}, &se);
        REQUIRE(t.ok());
        CHECK(t.value.child_count({}) == 2);  // both (2,0) and (1,1) give two children
        if (se == std::pair<long, long>{2, 0}) ++s2;
        if (se == std::pair<long, long>{1, 1}) ++s1;
    }
    CHECK(s2 + s1 == N);
    double f = static_cast<double>(s2) / N;
    CHECK(std::abs(f - 0.5) < 3.0 * std::sqrt(0.25 / N));
}

TEST_CASE("survivor restriction matches conditioning on deep survival") {
    // r_2 of the surviving decomposition against the height >= 6 conditioned
    // law: the extinct parts below level 2 rarely reach that deep
    RngStream rng(6, 0);
    std::map<FiniteTree, long> emp;
    const long N = 50000;
    const int deep = 6;
    for (long i = 0; i < N; ++i) {
        auto t = sample_survivor(kSuper, rng, deep);
        REQUIRE(t.ok());
        ++emp[t.value.restrict(2)];
    }
    RngStream rej(7, 0);
    std::map<FiniteTree, long> cond;
    long kept = 0;
    while (kept < N) {
        // level-restricted sampler terminates on super-critical trees and
        // reaches the cutoff exactly when the full tree survives that deep
        auto t = sample_gw_restricted(kSuper, rej, deep);
        if (!t.ok()) continue;
        if (t.value.height() < deep) continue;
        ++cond[t.value.restrict(2)];
        ++kept;
    }
    double tv = 0.0;
    std::set<FiniteTree> keys;
    for (const auto& [t, c] : emp) keys.insert(t);
    for (const auto& [t, c] : cond) keys.insert(t);
    for (const auto& t : keys) {
        double a = emp.count(t) ? static_cast<double>(emp.at(t)) / N : 0.0;
        double b = cond.count(t) ? static_cast<double>(cond.at(t)) / N : 0.0;
        tv += std::abs(a - b);
    }
    CHECK(tv / 2 < 0.02);
}

TEST_CASE("condensation sampler marks exactly one unexplored node") {
    RngStream rng(8, 0);
    std::map<int, long> depth;
    const long N = 100000;
    for (long i = 0; i < N; ++i) {
        auto t = sample_condensation(kSub, rng, 2);
        REQUIRE(t.ok());
        REQUIRE(t.value.infinite_nodes().size() == 1);
        ++depth[depth_of(*t.value.infinite_nodes().begin())];
    }
    double tv = 0.0;
    const double q = 0.2, m = 0.8;
    for (int d = 0; d <= 8; ++d) {
        double th = q * std::pow(m, d);
        double e = depth.count(d) ? static_cast<double>(depth.at(d)) / N : 0.0;
        tv += std::abs(e - th);
    }
    CHECK(tv / 2 < 0.01);

    RngStream rng2(9, 0);
    auto t = sample_condensation(kSub, rng2, 3);
    auto f = t.value.restrict_star(3);
    CHECK(f.height() <= 3);
    CHECK(f.stats({}).max_out_degree <= 3);
}

TEST_CASE("immigration chain and the branching martingale") {
    RngStream rng(10, 0);
    for (int i = 0; i < 100; ++i) {
        auto z = sample_immigration(kCrit, rng, 3);
        CHECK(z[0] == 0);
        CHECK(z[1] == 1);  // critical binary immigration is one arrival
    }
    // E[Z*_n] = n at criticality
    double s = 0.0;
    const long N = 50000;
    const int n = 3;
    for (long i = 0; i < N; ++i) s += sample_immigration(kCrit, rng, n)[n];
    CHECK(std::abs(s / N - n) < 0.1);

    RngStream rng2(11, 0);
    double sw = 0.0;
    for (long i = 0; i < N; ++i) {
        auto [z, w] = sample_process(kCrit, rng2, 6);
        sw += w[6];
    }
    CHECK(std::abs(sw / N - 1.0) < 0.05);
}

TEST_CASE("rejection sampler hits the window or reports exhaustion") {
    RngStream rng(12, 0);
    for (int i = 0; i < 50; ++i) {
        auto t = sample_conditioned(kCrit, Functional::size(), Window{3, 1}, rng);
        REQUIRE(t.ok());
        CHECK(t.value.encode() == std::vector<int>{2, 0, 0});
    }
    SampleBudget tight;
    tight.max_rejections = 5;
    auto bad = sample_conditioned(kCrit, Functional::size(), Window{2, 1}, rng, tight);
    CHECK(bad.status == SampleStatus::Exhausted);
}
