#pragma once

// JSON serialization: trees as {"k": [preorder child counts]}, extended
// trees with an extra "inf" list of labels, distributions as exact pmfs
// (rationals as strings) or parametric families with a truncation tail.

#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "gw/errors.hpp"
#include "gw/offspring.hpp"
#include "gw/tree.hpp"

namespace gw {

using nlohmann::json;

inline json tree_to_json(const FiniteTree& t) {
    json j;
    j["k"] = t.encode();
    return j;
}

inline json tree_to_json(const ExtendedTree& t) {
    json j = tree_to_json(t.base());
    json inf = json::array();
    for (const auto& u : t.infinite_nodes()) inf.push_back(u);
    j["inf"] = std::move(inf);
    return j;
}

inline FiniteTree tree_from_json(const json& j) {
    if (!j.contains("k")) throw MalformedSequence("tree JSON lacks \"k\"");
    return FiniteTree::decode(j.at("k").get<std::vector<int>>());
}

inline ExtendedTree extended_tree_from_json(const json& j) {
    FiniteTree base = tree_from_json(j);
    std::set<NodeLabel> inf;
    if (j.contains("inf"))
        for (const auto& u : j.at("inf")) inf.insert(u.get<NodeLabel>());
    return ExtendedTree(std::move(base), std::move(inf));
}

// A distribution is carried either exactly (rational pmf) or as a truncated
// float pmf; exactly one of the two is set.
struct DistSpec {
    std::optional<Offspring<Rat>> exact;
    std::optional<Offspring<double>> approx;

    bool is_exact() const { return exact.has_value(); }
    Offspring<double> as_double() const {
        if (approx) return *approx;
        return to_double_offspring(*exact);
    }
};

inline Rat json_to_rational(const json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rat(v.get<long>());
    if (v.is_number_float()) {
        auto r = rationalize(v.get<double>());
        if (!r) throw InvalidDistribution("cannot represent float probability exactly");
        return *r;
    }
    throw InvalidDistribution("unsupported probability value in JSON");
}

inline DistSpec dist_from_json(const json& j) {
    DistSpec out;
    if (j.contains("pmf")) {
        std::map<long, Rat> pmf;
        for (const auto& [key, val] : j.at("pmf").items())
            pmf[std::stol(key)] = json_to_rational(val);
        out.exact = Offspring<Rat>(std::move(pmf));
        return out;
    }
    double tail = j.value("truncate_tail", 1e-14);
    if (j.contains("geometric")) {
        out.approx = Offspring<double>::geometric(j.at("geometric").at("a").get<double>(), tail);
        return out;
    }
    if (j.contains("poisson")) {
        out.approx = Offspring<double>::poisson(j.at("poisson").at("lambda").get<double>(), tail);
        return out;
    }
    if (j.contains("powerlaw")) {
        const auto& pl = j.at("powerlaw");
        out.approx = Offspring<double>::power_law(pl.at("beta").get<double>(),
                                                  pl.value("scale", 1.0), pl.at("p0").get<double>());
        return out;
    }
    throw InvalidDistribution("unrecognized distribution JSON");
}

// Accepts a preset name, a geom:a shorthand, or inline JSON.
inline DistSpec parse_dist(const std::string& s) {
    DistSpec out;
    if (s == "critical-binary") {
        out.exact = Offspring<Rat>({{0, rat(1, 2)}, {2, rat(1, 2)}});
        return out;
    }
    if (s == "sub-binary") {
        out.exact = Offspring<Rat>({{0, rat(3, 5)}, {2, rat(2, 5)}});
        return out;
    }
    if (s == "super-binary") {
        out.exact = Offspring<Rat>({{0, rat(1, 4)}, {2, rat(3, 4)}});
        return out;
    }
    if (s.rfind("geom:", 0) == 0) {
        out.approx = Offspring<double>::geometric(std::stod(s.substr(5)));
        return out;
    }
    return dist_from_json(json::parse(s));
}

template <class P>
json dist_to_json(const Offspring<P>& p) {
    json pmf = json::object();
    for (const auto& [k, pk] : p.pmf()) {
        if constexpr (std::is_same_v<P, Rat>)
            pmf[std::to_string(k)] = to_string(pk);
        else
            pmf[std::to_string(k)] = pk;
    }
    json j;
    j["pmf"] = std::move(pmf);
    if (!p.exact()) j["tail_bound"] = to_double(p.tail());
    return j;
}

// "height" | "size" | "maxdeg" | "maxgen" | "leaves:0,2"
inline Functional parse_functional(const std::string& s) {
    if (s == "height") return Functional::height();
    if (s == "size") return Functional::size();
    if (s == "maxdeg") return Functional::max_out_degree();
    if (s == "maxgen") return Functional::largest_generation();
    if (s.rfind("leaves", 0) == 0) {
        std::set<int> A;
        if (s.size() > 7 && s[6] == ':') {
            size_t pos = 7;
            while (pos < s.size()) {
                size_t next = s.find(',', pos);
                if (next == std::string::npos) next = s.size();
                A.insert(std::stoi(s.substr(pos, next - pos)));
                pos = next + 1;
            }
        } else {
            A = {0};
        }
        return Functional::leaves(std::move(A));
    }
    throw Error("unknown functional: " + s);
}

// "n" or "n:n1"; n1 = 0 means the tail window [n, infinity)
inline Window parse_window(const std::string& s) {
    Window w;
    auto colon = s.find(':');
    if (colon == std::string::npos) {
        w.lo = std::stol(s);
        w.len = 1;
    } else {
        w.lo = std::stol(s.substr(0, colon));
        w.len = std::stol(s.substr(colon + 1));
    }
    return w;
}

}  // namespace gw
