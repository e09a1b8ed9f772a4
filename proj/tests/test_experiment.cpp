#include "catch2/catch_amalgamated.hpp"

#include <cmath>

#include "gw/experiment.hpp"

using namespace gw;

namespace {

const Offspring<Rat> kCrit({{0, rat(1, 2)}, {2, rat(1, 2)}});
const Offspring<Rat> kSub({{0, rat(3, 5)}, {2, rat(2, 5)}});
const Offspring<Rat> kSuper({{0, rat(1, 4)}, {2, rat(3, 4)}});

}  // namespace

TEST_CASE("variation distance brackets behave on exact laws") {
    // plain law of r_1 vs the height-weighted law of r_1: they disagree only
    // on the extinct singleton, total variation exactly one half
    TreeLaw<Rat> a = enumerate_law(kCrit, 3);
    std::map<FiniteTree, Rat> r1;
    for (const auto& [t, pr] : a.table) r1[t.restrict(1)] += pr;
    TreeLaw<Rat> plain;
    plain.table = r1;
    plain.complement = a.complement;
    // all trees of size <= 3 restrict to one of the two level-1 shapes, and
    // the unenumerated remainder restricts to the branching shape
    plain.table[FiniteTree::decode({2, 0, 0})] += plain.complement;
    plain.complement = 0;
    auto target = kesten_restriction_law(kCrit, 1);
    auto tv = tv_distance(plain, target);
    CHECK(tv.lo == 0.5);
    CHECK(tv.hi == 0.5);
}

TEST_CASE("window masses agree with direct law evaluations") {
    CHECK(window_mass(kCrit, Functional::height(), Window{1, 0}, 0) == rat(1, 2));
    CHECK(window_mass(kCrit, Functional::size(), Window{3, 1}, 9) == rat(1, 8));
    CHECK(window_mass(kCrit, Functional::leaves({0}), Window{2, 1}, 0) == rat(1, 8));
    CHECK(window_mass_exact(Functional::height(), Window{3, 0}, 0, 1.0));
    CHECK(window_mass_exact(Functional::size(), Window{3, 1}, 9, 1.0));
    CHECK_FALSE(window_mass_exact(Functional::size(), Window{3, 0}, 9, 1.0));
    CHECK_FALSE(window_mass_exact(Functional::max_out_degree(), Window{3, 1}, 9, 1.0));
}

TEST_CASE("conditioning on ever-deeper survival converges to the weighted law") {
    auto rep = convergence_experiment(kCrit, Functional::height(),
                                      {Window{1, 0}, Window{2, 0}, Window{3, 0}}, 1, 20);
    for (const auto& r : rep.rows) {
        CHECK(r.tv_lo == 0.0);
        CHECK(r.residual == 0.0);
    }

    auto rep2 = convergence_experiment(kCrit, Functional::size(),
                                       {Window{5, 2}, Window{9, 2}, Window{13, 2}}, 2, 15);
    CHECK(rep2.rows[0].tv_lo > rep2.rows[2].tv_lo);
    for (const auto& r : rep2.rows) CHECK(r.residual < 1e-15);
}

TEST_CASE("sub-critical leaf conditioning routes through the critical tilt") {
    auto rep = convergence_experiment(kSub, Functional::leaves({0}), {Window{3, 1}}, 1, 13);
    CHECK(rep.routed_generic);
    CHECK(std::abs(rep.theta - 1.25) < 1e-9);
}

TEST_CASE("window probability ratios approach the offspring mean") {
    auto rt = ratio_table(kSub, Functional::height(), {8, 9, 10}, 0, 0);
    for (const auto& r : rt) {
        REQUIRE(r.defined);
        CHECK(std::abs(r.ratio - 0.8) < 0.05);
    }
    auto rc = ratio_table(kCrit, Functional::height(), {40}, 0, 0);
    REQUIRE(rc[0].defined);
    CHECK(std::abs(rc[0].ratio - 1.0) < 0.05);
}

TEST_CASE("martingale limit experiment at desk scale") {
    auto ks = kesten_stigum_mc(kSuper, 10, 100000, 42);
    CHECK(std::abs(ks.mean_w - 1.0) <= ks.ci3);
    CHECK(std::abs(ks.frac_extinct - 1.0 / 3.0) < 0.01);
    CHECK(std::abs(ks.q - 1.0 / 3.0) < 1e-12);
    CHECK_THROWS_AS(kesten_stigum_mc(kCrit, 5, 10), NotSuperCritical);
}

TEST_CASE("graft behavior classification of the five functionals") {
    auto rs = property_probe(Functional::size(), 5, 7);
    REQUIRE(rs.cls == ProbeResult::Additivity);
    for (const auto& w : rs.witnesses) CHECK(w.D == w.t.size() - 1);

    auto rh = property_probe(Functional::height(), 5, 7);
    REQUIRE(rh.cls == ProbeResult::Additivity);
    for (const auto& w : rh.witnesses) CHECK(w.D == static_cast<long>(w.x.size()));

    auto rl = property_probe(Functional::leaves({0}), 5, 7);
    REQUIRE(rl.cls == ProbeResult::Additivity);
    for (const auto& w : rl.witnesses)
        CHECK(w.D == Functional::leaves({0}).eval(w.t) - 1);

    CHECK(property_probe(Functional::max_out_degree(), 5, 7).cls == ProbeResult::Identity);
    CHECK(property_probe(Functional::largest_generation(), 5, 7).cls ==
          ProbeResult::Monotonicity);
}

TEST_CASE("condensation geometry at scale") {
    auto c = condensation_experiment(kSub, 50000, 8, 7);
    CHECK(c.frac_one_infinite == 1.0);
    CHECK(c.tv_vs_geometric < 0.01);
    CHECK(std::abs(c.depth0 - 0.2) < 0.01);
}
