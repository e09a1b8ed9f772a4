#pragma once

// Offspring-distribution algebra: criticality, extinction, and the derived
// distributions (conjugate, size-biased, backbone, tilted, condensation,
// leaf offspring). Finite-support pmfs carry exact rationals; parametric
// families are truncated with a tracked tail bound.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "gw/errors.hpp"
#include "gw/num.hpp"

namespace gw {

template <class P>
class Offspring {
  public:
    // Exact finite-support pmf; must sum to one.
    explicit Offspring(std::map<long, P> pmf) : Offspring(std::move(pmf), num::zero<P>()) {}

    // Truncated pmf: stored mass plus tail bound must sum to one.
    static Offspring truncated(std::map<long, P> pmf, P tail) {
        return Offspring(std::move(pmf), std::move(tail));
    }

    static Offspring<double> geometric(double a, double tail_eps = 1e-14) {
        if (!(a > 0.0 && a < 1.0)) throw InvalidDistribution("geometric parameter not in (0,1)");
        std::map<long, double> pmf;
        double mass = 0.0, term = 1.0 - a;
        long k = 0;
        while (1.0 - mass > tail_eps) {
            pmf[k] = term;
            mass += term;
            term *= a;
            ++k;
        }
        auto out = Offspring<double>(std::move(pmf), std::max(0.0, 1.0 - mass));
        out.mean_ = a / (1.0 - a);
        out.mean_is_exact_ = true;
        out.radius_ = 1.0 / a;
        return out;
    }

    static Offspring<double> poisson(double lambda, double tail_eps = 1e-14) {
        if (!(lambda > 0.0)) throw InvalidDistribution("poisson rate not positive");
        std::map<long, double> pmf;
        double mass = 0.0, term = std::exp(-lambda);
        long k = 0;
        while (1.0 - mass > tail_eps) {
            pmf[k] = term;
            mass += term;
            ++k;
            term *= lambda / k;
        }
        auto out = Offspring<double>(std::move(pmf), std::max(0.0, 1.0 - mass));
        out.mean_ = lambda;
        out.mean_is_exact_ = true;
        out.radius_ = std::numeric_limits<double>::infinity();
        return out;
    }

    // p(0) = p0, p(k) proportional to k^{-beta} scale^k for k >= 1. With
    // scale = 1 the radius of convergence is 1 and the truncation tail decays
    // only polynomially, so the tail bound stays honest but not tiny.
    static Offspring<double> power_law(double beta, double scale, double p0,
                                       long max_terms = 200000) {
        if (!(beta > 1.0)) throw InvalidDistribution("power-law exponent must exceed 1");
        if (!(scale > 0.0 && scale <= 1.0)) throw InvalidDistribution("power-law scale not in (0,1]");
        if (!(p0 >= 0.0 && p0 < 1.0)) throw InvalidDistribution("power-law p0 not in [0,1)");
        std::vector<double> w(max_terms + 1, 0.0);
        double z = 0.0, s = 1.0;
        for (long k = 1; k <= max_terms; ++k) {
            s *= scale;
            w[k] = std::pow(static_cast<double>(k), -beta) * s;
            z += w[k];
        }
        // tail of the normalizer: integral bound for scale=1, geometric otherwise
        double ztail = (scale == 1.0)
                           ? std::pow(static_cast<double>(max_terms), 1.0 - beta) / (beta - 1.0)
                           : w[max_terms] * scale / (1.0 - scale);
        double zfull = z + ztail;
        std::map<long, double> pmf;
        pmf[0] = p0;
        for (long k = 1; k <= max_terms; ++k) pmf[k] = (1.0 - p0) * w[k] / zfull;
        auto out = Offspring<double>(std::move(pmf), (1.0 - p0) * ztail / zfull);
        out.radius_ = 1.0 / scale;
        if (scale == 1.0 && beta <= 2.0) {
            out.mean_finite_ = false;
        }
        return out;
    }

    P prob(long k) const {
        auto it = pmf_.find(k);
        return it == pmf_.end() ? num::zero<P>() : it->second;
    }
    const std::map<long, P>& pmf() const { return pmf_; }
    P tail() const { return tail_; }
    bool exact() const { return tail_ == num::zero<P>(); }

    // Mean of the full distribution when known in closed form, else the mean
    // of the stored truncation (a lower bound).
    P mean() const { return mean_; }
    bool mean_is_exact() const { return mean_is_exact_; }
    bool mean_finite() const { return mean_finite_; }

    long max_support() const { return pmf_.empty() ? 0 : pmf_.rbegin()->first; }

    // gcd of the positive support
    long period() const { return period_; }

    double radius() const { return radius_; }

    bool hyp() const {
        P p0 = prob(0), p1 = prob(1);
        return p0 > num::zero<P>() && p0 < num::one<P>() && p0 + p1 < num::one<P>();
    }

    // -1 sub-critical, 0 critical, +1 super-critical
    int criticality() const {
        if (!mean_finite_) return 1;
        if (mean_ < num::one<P>()) return -1;
        if (mean_ > num::one<P>()) return 1;
        return 0;
    }

    P mass(const std::set<long>& A) const {
        P s = num::zero<P>();
        for (const auto& [k, pk] : pmf_)
            if (A.count(k)) s += pk;
        return s;
    }

  private:
    template <class Q>
    friend class Offspring;

    Offspring(std::map<long, P> pmf, P tail) : pmf_(std::move(pmf)), tail_(std::move(tail)) {
        P sum = tail_;
        for (const auto& [k, pk] : pmf_) {
            if (k < 0) throw InvalidDistribution("negative support point");
            if (pk < num::zero<P>()) throw InvalidDistribution("negative probability");
            sum += pk;
        }
        if (!num::close(sum, num::one<P>()))
            throw InvalidDistribution("probabilities do not sum to one");
        // drop exact zeros so the support is the support
        for (auto it = pmf_.begin(); it != pmf_.end();)
            it = (it->second == num::zero<P>()) ? pmf_.erase(it) : std::next(it);
        mean_ = num::zero<P>();
        for (const auto& [k, pk] : pmf_) mean_ += P(static_cast<long>(k)) * pk;
        mean_is_exact_ = exact();
        period_ = 0;
        for (const auto& [k, pk] : pmf_)
            if (k >= 1) period_ = std::gcd(period_, k);
        radius_ = exact() ? std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::quiet_NaN();
    }

    std::map<long, P> pmf_;
    P tail_{};
    P mean_{};
    bool mean_is_exact_ = true;
    bool mean_finite_ = true;
    long period_ = 0;
    double radius_ = std::numeric_limits<double>::infinity();
};

// Float copy of a distribution; the rounding defect is folded into the
// largest atom so the result still sums to one.
template <class P>
Offspring<double> to_double_offspring(const Offspring<P>& p) {
    std::map<long, double> pmf;
    double mass = 0.0;
    for (const auto& [k, pk] : p.pmf()) {
        pmf[k] = to_double(pk);
        mass += pmf[k];
    }
    double tail = to_double(p.tail());
    if (tail == 0.0 && !pmf.empty()) {
        pmf.rbegin()->second += 1.0 - mass;
        return Offspring<double>(std::move(pmf));
    }
    return Offspring<double>::truncated(std::move(pmf), std::max(0.0, 1.0 - mass));
}

// (g(r), g'(r)) summed over the stored support. For truncated distributions
// the error is at most tail * max(1, r^K) on g.
template <class P>
std::pair<P, P> gen_fn(const Offspring<P>& p, const P& r) {
    if (r < num::zero<P>()) throw OutOfDomain("generating function argument negative");
    if (!p.exact() && to_double(r) >= p.radius())
        throw OutOfDomain("argument at or beyond the radius of convergence");
    P g = num::zero<P>(), dg = num::zero<P>();
    for (const auto& [k, pk] : p.pmf()) {
        P rk1 = num::pow_int(r, k >= 1 ? k - 1 : 0);
        if (k == 0) {
            g += pk;
        } else {
            g += pk * rk1 * r;
            dg += P(static_cast<long>(k)) * pk * rk1;
        }
    }
    return {g, dg};
}

namespace detail {

template <class P>
inline double g_of(const Offspring<P>& p, double x) {
    double g = 0.0;
    for (const auto& [k, pk] : p.pmf()) g += to_double(pk) * std::pow(x, static_cast<double>(k));
    return g;
}

}  // namespace detail

// Smallest root of g(r)=r in [0,1], as a float. Degenerate pmfs get their
// textbook answers directly.
template <class P>
double extinction_float(const Offspring<P>& p) {
    double p0 = to_double(p.prob(0)), p1 = to_double(p.prob(1));
    if (p0 == 0.0) return 0.0;                   // g(0)=0
    if (p0 >= 1.0) return 1.0;                   // dies at the first step
    if (p0 + p1 >= 1.0 - 1e-15) return 1.0;      // linear g, sub-critical
    if (p.mean_finite() && !(to_double(p.mean()) > 1.0)) return 1.0;
    // monotone fixed-point iteration from 0 converges to the smallest root
    double x = 0.0;
    for (int i = 0; i < 100000; ++i) {
        double nx = detail::g_of(p, x);
        if (std::abs(nx - x) < 1e-17) {
            x = nx;
            break;
        }
        x = nx;
    }
    // Newton polish on f(r)=g(r)-r
    for (int i = 0; i < 8; ++i) {
        double g = 0.0, dg = 0.0;
        for (const auto& [k, pk] : p.pmf()) {
            double pd = to_double(pk);
            g += pd * std::pow(x, static_cast<double>(k));
            if (k >= 1) dg += pd * k * std::pow(x, static_cast<double>(k - 1));
        }
        double f = g - x, df = dg - 1.0;
        if (std::abs(df) < 1e-14) break;
        double nx = x - f / df;
        if (nx < 0.0 || nx > 1.0) break;
        x = nx;
    }
    return std::clamp(x, 0.0, 1.0);
}

// Exact extinction probability for rational pmfs. The smallest root of
// g(r)=r need not be rational; in that case this throws and the float
// version is the fallback.
inline Rat extinction_exact(const Offspring<Rat>& p) {
    if (p.prob(0) == 0) return Rat(0);
    if (p.prob(0) == 1) return Rat(1);
    if (p.prob(1) == 1) return Rat(0);
    if (!(p.mean() > 1)) return Rat(1);
    double qf = extinction_float(p);
    for (unsigned long den : {1000ul, 1000000ul, 1000000000ul}) {
        auto q = rationalize(qf, den);
        if (!q) continue;
        auto [g, dg] = gen_fn(p, *q);
        (void)dg;
        if (g == *q && *q >= 0 && *q <= 1) return *q;
    }
    throw Error("extinction probability is not rational at representable size");
}

inline Rat extinction_q(const Offspring<Rat>& p) { return extinction_exact(p); }
inline double extinction_q(const Offspring<double>& p) { return extinction_float(p); }

// Conjugate (sub-critical) distribution of a super-critical p: q^{n-1} p(n).
template <class P>
Offspring<P> conjugate(const Offspring<P>& p) {
    if (!p.mean_finite() || !(p.mean() > num::one<P>()))
        throw NotSuperCritical("conjugate requires mean > 1");
    P q = extinction_q(p);
    std::map<long, P> out;
    for (const auto& [k, pk] : p.pmf()) out[k] = num::pow_int(q, k - 1) * pk;
    if (p.exact()) return Offspring<P>(std::move(out));
    P mass = num::zero<P>();
    for (auto& [k, pk] : out) mass += pk;
    return Offspring<P>::truncated(std::move(out), num::one<P>() - mass);
}

// Size-biased distribution: n p(n) / m.
template <class P>
Offspring<P> size_biased(const Offspring<P>& p) {
    if (!p.mean_finite() || p.mean() == num::zero<P>())
        throw ZeroOrInfiniteMean("size-biasing requires finite positive mean");
    P m = p.mean();
    std::map<long, P> out;
    for (const auto& [k, pk] : p.pmf())
        if (k >= 1) out[k] = P(static_cast<long>(k)) * pk / m;
    if (p.exact()) return Offspring<P>(std::move(out));
    P mass = num::zero<P>();
    for (auto& [k, pk] : out) mass += pk;
    return Offspring<P>::truncated(std::move(out), num::one<P>() - mass);
}

// Joint law of (survivor children, extinct children) at a node of the
// surviving part of a super-critical tree.
template <class P>
struct JointRootLaw {
    std::map<std::pair<long, long>, P> table;  // (S,E) -> probability

    Offspring<P> backbone() const {
        std::map<long, P> out;
        for (const auto& [se, pr] : table) out[se.first] += pr;
        return Offspring<P>(std::move(out));
    }
};

namespace detail {

template <class P>
P binom(long n, long k) {
    P acc = num::one<P>();
    for (long i = 1; i <= k; ++i) acc = acc * P(n - k + i) / P(i);
    return acc;
}

}  // namespace detail

// P(S=k, E=n-k) = p(n) C(n,k) (1-q)^{k-1} q^{n-k}, k >= 1.
template <class P>
JointRootLaw<P> survivor_joint(const Offspring<P>& p) {
    if (!p.mean_finite() || !(p.mean() > num::one<P>()))
        throw NotSuperCritical("survivor decomposition requires mean > 1");
    P q = extinction_q(p);
    P one_q = num::one<P>() - q;
    JointRootLaw<P> out;
    for (const auto& [n, pn] : p.pmf()) {
        for (long k = 1; k <= n; ++k) {
            P pr = pn * detail::binom<P>(n, k) * num::pow_int(one_q, k - 1) *
                   num::pow_int(q, n - k);
            if (pr != num::zero<P>()) out.table[{k, n - k}] += pr;
        }
    }
    return out;
}

// Tilted distribution: theta^{k-1} p(k) off A, c_A(theta) theta^{k-1} p(k) on A.
template <class P>
Offspring<P> tilt(const Offspring<P>& p, const std::set<long>& A, const P& theta) {
    if (theta <= num::zero<P>()) throw ThetaOutsideInterval("theta must be positive");
    P s_out = num::zero<P>(), s_in = num::zero<P>();
    for (const auto& [k, pk] : p.pmf()) {
        P term = num::pow_int(theta, k - 1) * pk;
        (A.count(k) ? s_in : s_out) += term;
    }
    if (s_in == num::zero<P>()) throw EmptyIntersection("distribution puts no mass on A");
    if (s_out > num::one<P>())
        throw ThetaOutsideInterval("normalizing constant would be negative");
    P c = (num::one<P>() - s_out) / s_in;
    std::map<long, P> out;
    for (const auto& [k, pk] : p.pmf()) {
        P term = num::pow_int(theta, k - 1) * pk;
        out[k] = A.count(k) ? c * term : term;
    }
    if (p.exact()) return Offspring<P>(std::move(out));
    P mass = num::zero<P>();
    for (auto& [k, pk] : out) mass += pk;
    P t = num::one<P>() - mass;
    if (t < num::zero<P>()) t = num::zero<P>();
    return Offspring<P>::truncated(std::move(out), t);
}

template <class P>
P tilt_constant(const Offspring<P>& p, const std::set<long>& A, const P& theta) {
    P s_out = num::zero<P>(), s_in = num::zero<P>();
    for (const auto& [k, pk] : p.pmf()) {
        P term = num::pow_int(theta, k - 1) * pk;
        (A.count(k) ? s_in : s_out) += term;
    }
    if (s_in == num::zero<P>()) throw EmptyIntersection("distribution puts no mass on A");
    if (s_out > num::one<P>())
        throw ThetaOutsideInterval("normalizing constant would be negative");
    return (num::one<P>() - s_out) / s_in;
}

struct TiltReport {
    std::set<long> A;
    bool generic = false;
    double theta = 1.0;                 // theta_c (generic) or theta_star (not)
    std::optional<Rat> theta_exact;     // set when the exact check passes
    std::map<long, double> tilted_pmf;  // p at the reported theta
    double tilted_mean = 0.0;
};

namespace detail {

// mean of p_theta^A, double arithmetic over the stored support
template <class P>
double tilted_mean(const Offspring<P>& p, const std::set<long>& A, double th) {
    double s_out = 0, s_in = 0, m_out = 0, m_in = 0;
    for (const auto& [k, pk] : p.pmf()) {
        double term = std::pow(th, static_cast<double>(k - 1)) * to_double(pk);
        if (A.count(k)) {
            s_in += term;
            m_in += k * term;
        } else {
            s_out += term;
            m_out += k * term;
        }
    }
    double c = (1.0 - s_out) / s_in;
    return m_out + c * m_in;
}

template <class P>
double tilt_sum_out(const Offspring<P>& p, const std::set<long>& A, double th) {
    double s_out = 0;
    for (const auto& [k, pk] : p.pmf())
        if (!A.count(k)) s_out += std::pow(th, static_cast<double>(k - 1)) * to_double(pk);
    return s_out;
}

}  // namespace detail

// Decide whether a sub-critical p is generic for A: is there a tilt making
// it critical inside the feasible interval I_A? Returned theta is theta_c
// in the generic case and sup I_A otherwise.
template <class P>
TiltReport genericity(const Offspring<P>& p, const std::set<long>& A) {
    if (!p.mean_finite() || !(p.mean() < num::one<P>()))
        throw NotSubCritical("genericity analysis requires mean < 1");
    if (to_double(p.mass(A)) <= 0.0) throw EmptyIntersection("distribution puts no mass on A");

    double cap = std::isfinite(p.radius()) ? p.radius() : 1e9;
    // sup of the feasible interval: largest theta <= cap with sum_out <= 1
    double lo = 1.0, hi = cap;
    if (detail::tilt_sum_out(p, A, hi) <= 1.0) {
        lo = hi;
    } else {
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (detail::tilt_sum_out(p, A, mid) <= 1.0 ? lo : hi) = mid;
        }
    }
    double theta_star = lo;

    TiltReport rep;
    rep.A = A;
    double m_at_star = detail::tilted_mean(p, A, theta_star);
    if (m_at_star >= 1.0) {
        // a critical tilt exists in (1, theta_star]; bisect on the mean
        double a = 1.0, b = theta_star;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (a + b);
            (detail::tilted_mean(p, A, mid) < 1.0 ? a : b) = mid;
        }
        rep.generic = true;
        rep.theta = 0.5 * (a + b);
    } else {
        rep.generic = false;
        rep.theta = theta_star;
    }

    // exact lift when the pmf is rational and theta rationalizes cleanly
    if constexpr (std::is_same_v<P, Rat>) {
        for (unsigned long den : {1000ul, 1000000ul}) {
            auto th = rationalize(rep.theta, den);
            if (!th || *th <= 0) continue;
            try {
                auto tp = tilt(p, A, *th);
                if (rep.generic && tp.mean() == Rat(1)) {
                    rep.theta_exact = *th;
                    break;
                }
            } catch (const Error&) {
            }
        }
    }

    auto tp_f = [&] {
        double c = (1.0 - detail::tilt_sum_out(p, A, rep.theta));
        double s_in = 0;
        for (const auto& [k, pk] : p.pmf())
            if (A.count(k)) s_in += std::pow(rep.theta, static_cast<double>(k - 1)) * to_double(pk);
        c /= s_in;
        std::map<long, double> out;
        for (const auto& [k, pk] : p.pmf()) {
            double term = std::pow(rep.theta, static_cast<double>(k - 1)) * to_double(pk);
            out[k] = A.count(k) ? c * term : term;
        }
        return out;
    }();
    rep.tilted_pmf = std::move(tp_f);
    rep.tilted_mean = detail::tilted_mean(p, A, rep.theta);
    return rep;
}

// A pmf on N u {infinity}.
template <class P>
struct ExtendedOffspring {
    std::map<long, P> finite;
    P atom_infinity{};
};

// Condensation offspring of a sub-critical p: n p(n) plus an atom 1-m at
// infinity.
template <class P>
ExtendedOffspring<P> condensation_offspring(const Offspring<P>& p) {
    if (!p.mean_finite() || !(p.mean() < num::one<P>()))
        throw NotSubCritical("condensation requires mean < 1");
    ExtendedOffspring<P> out;
    for (const auto& [k, pk] : p.pmf())
        if (k >= 1) out.finite[k] = P(static_cast<long>(k)) * pk;
    out.atom_infinity = num::one<P>() - p.mean();
    return out;
}

// Offspring distribution of the leaf tree: the pmf of
// zeta' = sum_{k=1}^{N-1} (X_k - 1), N geometric(p(0)), X ~ zeta | zeta > 0.
// Solved from the series identity g_{zeta'}(s) (1 - B(s)) = p(0) with
// B(s) = sum_{j>=1} p(j) s^{j-1}.
template <class P>
Offspring<P> leaf_offspring(const Offspring<P>& p, long terms = 64) {
    P p0 = p.prob(0);
    if (p0 == num::zero<P>() || p0 == num::one<P>())
        throw InvalidDistribution("leaf offspring needs 0 < p(0) < 1");
    P b0 = p.prob(1);
    P denom = num::one<P>() - b0;
    std::vector<P> c(terms, num::zero<P>());
    c[0] = p0 / denom;
    for (long n = 1; n < terms; ++n) {
        P s = num::zero<P>();
        for (long i = 1; i <= n; ++i) s += p.prob(i + 1) * c[n - i];
        c[n] = s / denom;
    }
    std::map<long, P> out;
    P mass = num::zero<P>();
    for (long n = 0; n < terms; ++n) {
        if (c[n] != num::zero<P>()) out[n] = c[n];
        mass += c[n];
    }
    P t = num::one<P>() - mass;
    if (t < num::zero<P>()) t = num::zero<P>();
    if (t == num::zero<P>()) return Offspring<P>(std::move(out));
    return Offspring<P>::truncated(std::move(out), t);
}

// Exact mean of the leaf offspring: (m - (1 - p(0))) / p(0); equals 1 at
// criticality.
template <class P>
P leaf_offspring_mean(const Offspring<P>& p) {
    P p0 = p.prob(0);
    if (p0 == num::zero<P>()) throw InvalidDistribution("leaf offspring needs p(0) > 0");
    return (p.mean() - (num::one<P>() - p0)) / p0;
}

}  // namespace gw
