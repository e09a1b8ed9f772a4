// Command-line front door. Parses a distribution spec, dispatches to the
// exact oracle or the samplers, and emits CSV (with '#' config headers) or
// JSON. Identical configs and seeds reproduce identical bytes.
//
// Exit codes: 0 ok, 2 validation error, 3 budget exhaustion.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gw/enumerate.hpp"
#include "gw/experiment.hpp"
#include "gw/json_io.hpp"
#include "gw/offspring.hpp"
#include "gw/sample.hpp"
#include "gw/tree.hpp"

namespace {

using namespace gw;

struct RunConfig {
    std::string dist = "critical-binary";
    std::string functional = "size";
    std::string window = "3";
    std::string windows;  // comma-separated starts for `converge` / `ratio`
    int h = 2;
    long cap_size = 12;
    long cap_height = 4;
    std::uint64_t seed = 1;
    long reps = 10000;
    long n = 3;
    std::string mode = "exact";
    std::string out;
    std::string format = "csv";
    std::string kind = "gw";
    std::string what = "conjugate";
    std::string theta = "1";
    std::string aset = "0";
    int threads = 0;
};

json config_json(const RunConfig& c, const std::string& cmd) {
    json j;
    j["cmd"] = cmd;
    j["dist"] = c.dist;
    j["functional"] = c.functional;
    j["window"] = c.window;
    j["h"] = c.h;
    j["cap_size"] = c.cap_size;
    j["cap_height"] = c.cap_height;
    j["seed"] = c.seed;
    j["reps"] = c.reps;
    j["mode"] = c.mode;
    return j;
}

struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            os = &file;
        }
    }
    std::ostream& out() { return *os; }
};

void csv_header(std::ostream& os, const RunConfig& c, const std::string& cmd) {
    os << "# " << config_json(c, cmd).dump() << "\n";
}

std::set<long> parse_set(const std::string& s) {
    std::set<long> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.insert(std::stol(item));
    return out;
}

std::vector<long> parse_list(const std::string& s) {
    std::vector<long> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stol(item));
    return out;
}

// provenance tag for output columns: exact rationals, float intervals or MC
const char* provenance(const DistSpec& d) { return d.is_exact() ? "exact" : "interval"; }

int cmd_solve(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    Sink sink(c.out);
    json r;
    if (d.is_exact()) {
        const auto& p = *d.exact;
        r["m"] = to_string(p.mean());
        try {
            r["q"] = to_string(extinction_exact(p));
            r["q_provenance"] = "exact";
        } catch (const Error&) {
            r["q"] = extinction_float(p);
            r["q_provenance"] = "float";
        }
        r["period"] = p.period();
        r["radius"] = "inf";
        r["criticality"] =
            p.criticality() < 0 ? "sub-critical" : (p.criticality() > 0 ? "super-critical" : "critical");
    } else {
        const auto& p = *d.approx;
        r["m"] = p.mean();
        r["q"] = extinction_float(p);
        r["q_provenance"] = "float";
        r["period"] = p.period();
        r["radius"] = p.radius();
        r["tail_bound"] = p.tail();
        r["criticality"] =
            p.criticality() < 0 ? "sub-critical" : (p.criticality() > 0 ? "super-critical" : "critical");
    }
    if (c.format == "json") {
        json j;
        j["config"] = config_json(c, "solve");
        j["result"] = r;
        sink.out() << j.dump(2) << "\n";
    } else {
        csv_header(sink.out(), c, "solve");
        sink.out() << "key,value,provenance\n";
        for (const auto& [k, v] : r.items())
            sink.out() << k << "," << (v.is_string() ? v.get<std::string>() : v.dump()) << ","
                       << provenance(d) << "\n";
    }
    return 0;
}

template <class P>
json derive_json(const Offspring<P>& p, const std::string& what) {
    if (what == "conjugate") return dist_to_json(conjugate(p));
    if (what == "size-biased") return dist_to_json(size_biased(p));
    if (what == "backbone") return dist_to_json(survivor_joint(p).backbone());
    if (what == "leaf-offspring") return dist_to_json(leaf_offspring(p));
    if (what == "condensation") {
        auto e = condensation_offspring(p);
        json j = json::object();
        for (const auto& [k, pk] : e.finite) {
            if constexpr (std::is_same_v<P, Rat>)
                j[std::to_string(k)] = to_string(pk);
            else
                j[std::to_string(k)] = pk;
        }
        json out;
        out["pmf"] = std::move(j);
        if constexpr (std::is_same_v<P, Rat>)
            out["atom_infinity"] = to_string(e.atom_infinity);
        else
            out["atom_infinity"] = e.atom_infinity;
        return out;
    }
    throw Error("unknown derivation: " + what);
}

int cmd_derive(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    Sink sink(c.out);
    json r = d.is_exact() ? derive_json(*d.exact, c.what) : derive_json(*d.approx, c.what);
    json j;
    j["config"] = config_json(c, "derive");
    j["result"] = std::move(r);
    sink.out() << j.dump(2) << "\n";
    return 0;
}

int cmd_tilt(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto A = parse_set(c.aset);
    Sink sink(c.out);
    json r;
    if (d.is_exact())
        r = dist_to_json(tilt(*d.exact, A, parse_rational(c.theta)));
    else
        r = dist_to_json(tilt(*d.approx, A, std::stod(c.theta)));
    json j;
    j["config"] = config_json(c, "tilt");
    j["theta"] = c.theta;
    j["result"] = std::move(r);
    sink.out() << j.dump(2) << "\n";
    return 0;
}

int cmd_classify(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto A = parse_set(c.aset);
    TiltReport rep = d.is_exact() ? genericity(*d.exact, A) : genericity(*d.approx, A);
    Sink sink(c.out);
    json j;
    j["config"] = config_json(c, "classify");
    j["generic"] = rep.generic;
    j["theta"] = rep.theta;
    if (rep.theta_exact) j["theta_exact"] = to_string(*rep.theta_exact);
    j["tilted_mean"] = rep.tilted_mean;
    json pm = json::object();
    for (const auto& [k, v] : rep.tilted_pmf) pm[std::to_string(k)] = v;
    j["tilted_pmf"] = std::move(pm);
    sink.out() << j.dump(2) << "\n";
    return 0;
}

int cmd_sample(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto p = d.as_double();
    RngStream rng(c.seed, 0);
    SampleBudget budget;
    Sink sink(c.out);
    if (c.kind == "process" || c.kind == "immigration") {
        csv_header(sink.out(), c, "sample");
        sink.out() << (c.kind == "process" ? "rep,n,Z,W\n" : "rep,n,Zstar\n");
        for (long r = 0; r < c.reps; ++r) {
            if (c.kind == "process") {
                auto [z, w] = sample_process(p, rng, static_cast<int>(c.n));
                for (size_t i = 0; i < z.size(); ++i)
                    sink.out() << r << "," << i << "," << z[i] << "," << w[i] << "\n";
            } else {
                auto z = sample_immigration(p, rng, static_cast<int>(c.n));
                for (size_t i = 0; i < z.size(); ++i)
                    sink.out() << r << "," << i << "," << z[i] << "\n";
            }
        }
        return 0;
    }
    csv_header(sink.out(), c, "sample");
    for (long r = 0; r < c.reps; ++r) {
        if (c.kind == "gw") {
            auto t = sample_gw(p, rng, budget);
            if (!t.ok()) return 3;
            sink.out() << tree_to_json(t.value).dump() << "\n";
        } else if (c.kind == "kesten") {
            auto t = sample_kesten(p, rng, c.h, budget);
            if (!t.ok()) return 3;
            sink.out() << tree_to_json(t.value).dump() << "\n";
        } else if (c.kind == "survivor") {
            auto t = sample_survivor(p, rng, c.h, budget);
            if (!t.ok()) return 3;
            sink.out() << tree_to_json(t.value).dump() << "\n";
        } else if (c.kind == "condensation") {
            auto t = sample_condensation(p, rng, c.h, budget);
            if (!t.ok()) return 3;
            sink.out() << tree_to_json(t.value).dump() << "\n";
        } else if (c.kind == "conditioned") {
            auto t = sample_conditioned(p, parse_functional(c.functional), parse_window(c.window),
                                        rng, budget);
            if (t.status == SampleStatus::Exhausted) return 3;
            if (!t.ok()) return 3;
            sink.out() << tree_to_json(t.value).dump() << "\n";
        } else {
            throw Error("unknown sample kind: " + c.kind);
        }
    }
    return 0;
}

template <class P>
void emit_pmf(std::ostream& os, const PMF<P>& pmf, const std::string& prov) {
    os << "value,prob,provenance\n";
    for (const auto& [v, pr] : pmf.table) {
        if constexpr (std::is_same_v<P, Rat>)
            os << v << "," << to_string(pr) << "," << prov << "\n";
        else
            os << v << "," << pr << "," << prov << "\n";
    }
    os << "complement," << to_double(pmf.complement) << "," << prov << "\n";
}

template <class P>
void emit_tree_law(std::ostream& os, const TreeLaw<P>& law, const std::string& prov) {
    os << "tree,prob,provenance\n";
    for (const auto& [t, pr] : law.table) {
        std::string cell = tree_to_json(t).dump();
        std::string quoted;
        for (char ch : cell) {
            quoted += ch;
            if (ch == '"') quoted += ch;  // CSV doubles embedded quotes
        }
        os << "\"" << quoted << "\",";
        if constexpr (std::is_same_v<P, Rat>)
            os << to_string(pr);
        else
            os << pr;
        os << "," << prov << "\n";
    }
    os << "complement," << to_double(law.complement) << "," << prov << "\n";
}

template <class P>
int law_for(const RunConfig& c, const Offspring<P>& p, const std::string& prov) {
    Sink sink(c.out);
    csv_header(sink.out(), c, "law");
    if (c.kind == "tree") {
        emit_tree_law(sink.out(), enumerate_law(p, c.cap_size), prov);
    } else if (c.kind == "kesten") {
        emit_tree_law(sink.out(), kesten_restriction_law(p, c.h), prov);
    } else if (c.kind == "conditioned") {
        auto f = parse_functional(c.functional);
        auto win = parse_window(c.window);
        P wm = window_mass(p, f, win, c.cap_size);
        std::optional<P> exact_wm;
        if (window_mass_exact(f, win, c.cap_size, to_double(p.mean()))) exact_wm = wm;
        emit_tree_law(sink.out(),
                      conditioned_restriction_law(p, f, win, c.h, c.cap_size, exact_wm), prov);
    } else if (c.kind == "functional") {
        auto f = parse_functional(c.functional);
        long cap = (f.kind == Functional::Height) ? c.cap_height : c.cap_size;
        emit_pmf(sink.out(), functional_law(p, f, cap), prov);
    } else {
        throw Error("unknown law kind: " + c.kind);
    }
    return 0;
}

int cmd_law(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    return d.is_exact() ? law_for(c, *d.exact, "exact") : law_for(c, *d.approx, "interval");
}

int cmd_dwass(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    Sink sink(c.out);
    csv_header(sink.out(), c, "dwass");
    sink.out() << "n,lhs,rhs,equal,provenance\n";
    if (d.is_exact()) {
        auto [lhs, rhs] = dwass_check(*d.exact, c.n);
        sink.out() << c.n << "," << to_string(lhs) << "," << to_string(rhs) << ","
                   << (lhs == rhs ? "yes" : "no") << ",exact\n";
    } else {
        auto [lhs, rhs] = dwass_check(*d.approx, c.n);
        sink.out() << c.n << "," << lhs << "," << rhs << ","
                   << (std::abs(lhs - rhs) < 1e-12 ? "yes" : "no") << ",interval\n";
    }
    return 0;
}

int cmd_ratio(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto p = d.as_double();
    auto f = parse_functional(c.functional);
    auto win = parse_window(c.window);
    auto ns = parse_list(c.windows.empty() ? c.window : c.windows);
    Sink sink(c.out);
    csv_header(sink.out(), c, "ratio");
    sink.out() << "n,mass,ratio,provenance\n";
    for (const auto& row : ratio_table(p, f, ns, win.len, c.cap_size)) {
        sink.out() << row.n << "," << row.mass << ",";
        if (row.defined)
            sink.out() << row.ratio;
        else
            sink.out() << "undefined";
        sink.out() << ",float\n";
    }
    return 0;
}

int cmd_converge(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto f = parse_functional(c.functional);
    auto win = parse_window(c.window);
    std::vector<Window> windows;
    for (long n : parse_list(c.windows.empty() ? c.window : c.windows))
        windows.push_back(Window{n, win.len});
    Sink sink(c.out);
    csv_header(sink.out(), c, "converge");
    sink.out() << "n,window_mass,tv_lower,tv_upper,residual,provenance\n";
    auto emit = [&](const ConvergenceReport& rep, const char* prov) {
        for (const auto& row : rep.rows)
            sink.out() << row.n << "," << row.window_mass << "," << row.tv_lo << "," << row.tv_hi
                       << "," << row.residual << "," << prov << "\n";
    };
    if (d.is_exact())
        emit(convergence_experiment(*d.exact, f, windows, c.h, c.cap_size), "exact");
    else
        emit(convergence_experiment(*d.approx, f, windows, c.h, c.cap_size), "interval");
    return 0;
}

int cmd_kesten_stigum(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto rep = kesten_stigum_mc(d.as_double(), static_cast<int>(c.n), c.reps, c.seed);
    Sink sink(c.out);
    csv_header(sink.out(), c, "kesten-stigum");
    sink.out() << "key,value,provenance\n";
    sink.out() << "mean_W," << rep.mean_w << ",mc\n";
    sink.out() << "ci3," << rep.ci3 << ",mc\n";
    sink.out() << "frac_extinct," << rep.frac_extinct << ",mc\n";
    sink.out() << "q," << rep.q << ",float\n";
    return 0;
}

int cmd_condense(const RunConfig& c) {
    auto d = parse_dist(c.dist);
    auto rep = condensation_experiment(d.as_double(), c.reps, static_cast<int>(c.n), c.seed);
    Sink sink(c.out);
    csv_header(sink.out(), c, "condense");
    sink.out() << "key,value,provenance\n";
    sink.out() << "frac_one_infinite," << rep.frac_one_infinite << ",mc\n";
    sink.out() << "tv_vs_geometric," << rep.tv_vs_geometric << ",mc\n";
    sink.out() << "depth0," << rep.depth0 << ",mc\n";
    for (const auto& [dpt, fr] : rep.depth_freq)
        sink.out() << "depth_" << dpt << "," << fr << ",mc\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galton-Watson tree laboratory"};
    app.require_subcommand(1);
    RunConfig c;
    if (const char* env = std::getenv("GWFORGE_THREADS")) c.threads = std::atoi(env);

    auto add_common = [&](CLI::App* s) {
        s->set_help_flag("--help", "print help");  // frees -h / --h for the level option
        s->add_option("--dist", c.dist, "distribution: preset name, geom:a, or JSON");
        s->add_option("--functional", c.functional,
                      "height|size|leaves:A|maxdeg|maxgen");
        s->add_option("--window", c.window, "window start n or n:n1 (n1=0 means tail)");
        s->add_option("--windows", c.windows, "comma-separated window starts");
        s->add_option("--h", c.h, "restriction level");
        s->add_option("--cap-size", c.cap_size, "enumeration size cap");
        s->add_option("--cap-height", c.cap_height, "enumeration height cap");
        s->add_option("--seed", c.seed, "rng seed");
        s->add_option("--reps", c.reps, "Monte Carlo repetitions");
        s->add_option("--n", c.n, "primary integer parameter");
        s->add_option("--mode", c.mode, "exact|mc");
        s->add_option("--out", c.out, "output path (default stdout)");
        s->add_option("--format", c.format, "csv|json");
        s->add_option("--kind", c.kind, "object kind for sample/law");
        s->add_option("--what", c.what, "derivation name for derive");
        s->add_option("--theta", c.theta, "tilt parameter");
        s->add_option("--set", c.aset, "out-degree set A, comma separated");
        s->add_option("--threads", c.threads, "worker thread cap");
        return s;
    };

    struct Cmd {
        const char* name;
        int (*fn)(const RunConfig&);
    };
    const Cmd cmds[] = {
        {"solve", cmd_solve},       {"derive", cmd_derive},
        {"tilt", cmd_tilt},         {"classify", cmd_classify},
        {"sample", cmd_sample},     {"law", cmd_law},
        {"dwass", cmd_dwass},       {"ratio", cmd_ratio},
        {"converge", cmd_converge}, {"kesten-stigum", cmd_kesten_stigum},
        {"condense", cmd_condense},
    };
    std::map<std::string, int (*)(const RunConfig&)> dispatch;
    for (const auto& cmd : cmds) {
        add_common(app.add_subcommand(cmd.name));
        dispatch[cmd.name] = cmd.fn;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto* s : app.get_subcommands()) return dispatch.at(s->get_name())(c);
    } catch (const SupportTooLarge& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
