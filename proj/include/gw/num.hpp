#pragma once

// Numeric layer: exact rationals (GMP) for finite-support laws, doubles for
// truncated parametric ones. Everything downstream is templated on the
// probability type P in {Rat, double}.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "gw/errors.hpp"

namespace gw {

using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat parse_rational(const std::string& s) {
    try {
        Rat r(s);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw InvalidDistribution("not a rational: '" + s + "'");
    }
}

inline std::string to_string(const Rat& r) { return r.get_str(); }

inline double to_double(const Rat& r) { return r.get_d(); }
inline double to_double(double x) { return x; }

// Best rational approximation of x with denominator <= max_den, by continued
// fractions. Used to lift float fixed points back into exact arithmetic.
inline std::optional<Rat> rationalize(double x, unsigned long max_den = 1'000'000) {
    if (!std::isfinite(x)) return std::nullopt;
    bool neg = x < 0;
    double y = std::abs(x);
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(y);
        if (a > 1e18) break;
        long ai = static_cast<long>(a);
        long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > static_cast<long>(max_den)) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double frac = y - a;
        if (frac < 1e-15) break;
        y = 1.0 / frac;
    }
    if (q1 == 0) return std::nullopt;
    Rat r(neg ? -p1 : p1, q1);
    r.canonicalize();
    return r;
}

namespace num {

template <class P>
inline P zero() {
    return P(0);
}
template <class P>
inline P one() {
    return P(1);
}

inline bool is_exact(const Rat&) { return true; }
inline bool is_exact(double) { return false; }

// Equality up to representation: exact for rationals, 1e-12 relative for doubles.
inline bool close(const Rat& a, const Rat& b) { return a == b; }
inline bool close(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= 1e-12 * scale;
}

template <class P>
inline P pow_int(const P& base, long e) {
    if (e < 0) return num::one<P>() / pow_int(base, -e);
    P acc = num::one<P>();
    P b = base;
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

}  // namespace num
}  // namespace gw
