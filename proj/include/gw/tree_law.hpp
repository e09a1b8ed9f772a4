#pragma once

// Finitely-supported laws over trees or integers, with an explicit bound on
// the mass that fell outside the enumeration window. Exact rational laws
// have complement + enumerated mass equal to one.

#include <cmath>
#include <map>

#include "gw/num.hpp"
#include "gw/tree.hpp"

namespace gw {

template <class P>
struct TreeLaw {
    std::map<FiniteTree, P> table;
    P complement{};

    P mass() const {
        P s = num::zero<P>();
        for (const auto& [t, pr] : table) s += pr;
        return s;
    }
    P at(const FiniteTree& t) const {
        auto it = table.find(t);
        return it == table.end() ? num::zero<P>() : it->second;
    }
};

template <class P>
struct PMF {
    std::map<long, P> table;
    P complement{};

    P mass() const {
        P s = num::zero<P>();
        for (const auto& [v, pr] : table) s += pr;
        return s;
    }
    P at(long v) const {
        auto it = table.find(v);
        return it == table.end() ? num::zero<P>() : it->second;
    }
    // mass of the enumerated part inside the window
    P window_mass(const Window& w) const {
        P s = num::zero<P>();
        for (const auto& [v, pr] : table)
            if (w.contains(v)) s += pr;
        return s;
    }
};

struct TvInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// Total variation between two laws over the same universe. Unaccounted mass
// on either side widens the exact half-sum into an interval.
template <class Law>
TvInterval tv_distance(const Law& a, const Law& b) {
    double s = 0.0;
    for (const auto& [k, pa] : a.table) s += std::abs(to_double(pa) - to_double(b.at(k)));
    for (const auto& [k, pb] : b.table)
        if (!a.table.count(k)) s += to_double(pb);
    double ca = to_double(a.complement), cb = to_double(b.complement);
    TvInterval out;
    // unknown mass may cancel against enumerated discrepancies or add new ones
    out.lo = std::max(0.0, 0.5 * s - (ca + cb));
    out.hi = std::min(1.0, 0.5 * (s + ca + cb));
    return out;
}

}  // namespace gw
