#pragma once

// Shared plumbing: error taxonomy, exact rationals (GMP-backed), and the
// splitmix64 mixer used for substream derivation.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <gmpxx.h>

namespace chainring {

// Error taxonomy. `usage_error` maps to CLI exit code 2, failed verification
// to exit code 1.
struct usage_error : std::invalid_argument {
    explicit usage_error(const std::string& msg) : std::invalid_argument(msg) {}
};
struct domain_error : std::domain_error {
    explicit domain_error(const std::string& msg) : std::domain_error(msg) {}
};
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

using Int = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(long num, long den) {
    if (den == 0) throw usage_error("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }
inline std::string to_string(const Int& z) { return z.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

// Parse "a/b" or "a" (integers may be arbitrarily large).
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            Rational r{Int(s)};
            return r;
        }
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) throw usage_error("rational with zero denominator: " + s);
        Rational r(num, den);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw usage_error("cannot parse rational: '" + s + "'");
    }
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// splitmix64 finalizer; the basis of the counter-based generator
// ("cbrng:splitmix64/v1", see rng.hpp).
inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic key folding for substream derivation.
inline uint64_t fold_key(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (0x9E3779B97F4A7C15ULL + (b << 1)));
}

} // namespace chainring
