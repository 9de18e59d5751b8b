#pragma once

// Arithmetic and enumeration in a finite chain ring R: either Z/p^e or
// F_q[t]/(t^e) with q = p^f. Elements are canonical codes in [0, |R|):
//   * Z/p^e      : the integer representative itself.
//   * F_q[t]/t^e : mixed radix, code = sum c_i q^i where c_i in [0, q) encodes
//                  the t^i coefficient, itself base-p digits over the fixed
//                  irreducible defining F_q.
//
// Every nonzero element is unit * pi^v for a unique valuation v in [0, e);
// valuation(0) = e so that val(ab) = min(val a + val b, e) holds everywhere.

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "common.hpp"

namespace chainring {

enum class RingKind : uint8_t { modular, polynomial };

namespace detail {

// F_p[x] helpers on base-p digit codes, used only to construct F_q.
inline uint32_t fp_poly_degree(uint64_t code, uint32_t p) {
    int d = -1;
    for (int i = 0; code; ++i, code /= p) d = i;
    return d < 0 ? 0 : static_cast<uint32_t>(d);
}

inline uint64_t fp_poly_mulmod(uint64_t a, uint64_t b, uint64_t mod, uint32_t p, uint32_t f) {
    // digits of a,b have degree < f; mod is monic of degree f
    std::vector<uint32_t> da(f, 0), db(f, 0), prod(2 * f - 1, 0), dm(f + 1, 0);
    for (uint32_t i = 0; i < f; ++i) { da[i] = a % p; a /= p; db[i] = b % p; b /= p; }
    for (uint32_t i = 0; i <= f; ++i) { dm[i] = mod % p; mod /= p; }
    for (uint32_t i = 0; i < f; ++i)
        for (uint32_t j = 0; j < f; ++j)
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
    // reduce modulo the monic irreducible
    for (int d = 2 * static_cast<int>(f) - 2; d >= static_cast<int>(f); --d) {
        uint32_t c = prod[d];
        if (!c) continue;
        prod[d] = 0;
        for (uint32_t i = 0; i < f; ++i)
            prod[d - f + i] = (prod[d - f + i] + c * (p - dm[i])) % p;
    }
    uint64_t out = 0;
    for (int i = static_cast<int>(f) - 1; i >= 0; --i) out = out * p + prod[i];
    return out;
}

inline bool fp_poly_divides(uint64_t divisor, uint64_t dividend, uint32_t p) {
    // long division in F_p[x] on digit codes; returns true when remainder is 0
    uint32_t dd = fp_poly_degree(dividend, p);
    uint32_t dv = fp_poly_degree(divisor, p);
    std::vector<uint32_t> rem(dd + 1, 0), div(dv + 1, 0);
    for (uint32_t i = 0; i <= dd; ++i) { rem[i] = dividend % p; dividend /= p; }
    for (uint32_t i = 0; i <= dv; ++i) { div[i] = divisor % p; divisor /= p; }
    // inverse of leading coefficient of divisor
    uint32_t lc = div[dv], lcinv = 1;
    for (uint32_t x = 1; x < p; ++x) if (x * lc % p == 1) { lcinv = x; break; }
    for (int d = static_cast<int>(dd); d >= static_cast<int>(dv); --d) {
        uint32_t c = rem[d];
        if (!c) continue;
        uint32_t s = c * lcinv % p;
        for (uint32_t i = 0; i <= dv; ++i)
            rem[d - dv + i] = (rem[d - dv + i] + s * (p - div[i])) % p;
    }
    for (auto c : rem) if (c) return false;
    return true;
}

// Lexicographically least monic irreducible of degree f over F_p, scanning
// the non-leading coefficient code ascending. Fixed per (p, f) so canonical
// forms reproduce across runs and machines.
inline uint64_t least_irreducible(uint32_t p, uint32_t f) {
    uint64_t pf = 1;
    for (uint32_t i = 0; i < f; ++i) pf *= p;
    for (uint64_t low = 0; low < pf; ++low) {
        uint64_t cand = pf + low; // monic: leading digit 1 at position f
        bool irred = true;
        // trial division by all monic polynomials of degree 1..f/2
        for (uint32_t d = 1; irred && 2 * d <= f; ++d) {
            uint64_t pd = 1;
            for (uint32_t i = 0; i < d; ++i) pd *= p;
            for (uint64_t l2 = 0; l2 < pd; ++l2)
                if (fp_poly_divides(pd + l2, cand, p)) { irred = false; break; }
        }
        if (irred) return cand;
    }
    throw domain_error("no irreducible polynomial found"); // unreachable
}

} // namespace detail

struct RingData {
    RingKind kind;
    uint32_t p = 2, e = 1, f = 1;
    uint32_t q = 2;       // residue field cardinality p^f
    uint32_t size = 2;    // |R| = q^e
    uint64_t irred = 0;   // monic irreducible defining F_q (polynomial kind)
    std::vector<uint16_t> fq_mul; // q*q multiplication table for F_q
    std::vector<uint16_t> fq_inv; // inverses in F_q (index 0 unused)
    std::vector<uint32_t> pi_pow; // codes of pi^0 .. pi^e
    std::vector<uint32_t> pow_q;  // q^0 .. q^e (radix helpers, poly kind)
    std::vector<uint32_t> pow_p;  // p^0 .. p^e (modular kind)
};

class RingSpec {
public:
    RingSpec() = default;

    static RingSpec modular(uint32_t p, uint32_t e) {
        check_prime(p);
        if (e < 1) throw usage_error("ring length e must be >= 1");
        auto d = std::make_shared<RingData>();
        d->kind = RingKind::modular;
        d->p = p; d->e = e; d->f = 1; d->q = p;
        d->pow_p.assign(e + 1, 1);
        uint64_t s = 1;
        for (uint32_t i = 1; i <= e; ++i) {
            s *= p;
            if (s > (1u << 20)) throw resource_error("ring too large (cap 2^20 elements)");
            d->pow_p[i] = static_cast<uint32_t>(s);
        }
        d->size = d->pow_p[e];
        d->pi_pow.assign(e + 1, 0);
        for (uint32_t i = 0; i < e; ++i) d->pi_pow[i] = d->pow_p[i];
        d->pi_pow[e] = 0;
        build_fq(*d);
        return RingSpec(std::move(d));
    }

    static RingSpec polynomial(uint32_t p, uint32_t f, uint32_t e) {
        check_prime(p);
        if (e < 1 || f < 1) throw usage_error("ring parameters must satisfy e,f >= 1");
        auto d = std::make_shared<RingData>();
        d->kind = RingKind::polynomial;
        d->p = p; d->e = e; d->f = f;
        uint64_t q = 1;
        for (uint32_t i = 0; i < f; ++i) {
            q *= p;
            if (q > 1024) throw resource_error("residue field too large (cap 1024)");
        }
        d->q = static_cast<uint32_t>(q);
        d->pow_q.assign(e + 1, 1);
        uint64_t s = 1;
        for (uint32_t i = 1; i <= e; ++i) {
            s *= q;
            if (s > (1u << 20)) throw resource_error("ring too large (cap 2^20 elements)");
            d->pow_q[i] = static_cast<uint32_t>(s);
        }
        d->size = d->pow_q[e];
        d->irred = f > 1 ? detail::least_irreducible(p, f) : 0;
        d->pi_pow.assign(e + 1, 0);
        for (uint32_t i = 0; i < e; ++i) d->pi_pow[i] = d->pow_q[i]; // t^i
        d->pi_pow[e] = 0;
        build_fq(*d);
        return RingSpec(std::move(d));
    }

    // Accepts "Z/p^e" written either as the evaluated modulus ("Z/8") or as
    // "Z/2^3", and "F_q[t]/t^e" ("F4[t]/t^2", underscores optional).
    static RingSpec parse(const std::string& text);

    std::string notation() const {
        if (kind() == RingKind::modular) return "Z/" + std::to_string(size());
        return "F" + std::to_string(q()) + "[t]/t^" + std::to_string(e());
    }

    bool operator==(const RingSpec& o) const {
        if (d_ == o.d_) return true;
        if (!d_ || !o.d_) return false;
        return d_->kind == o.d_->kind && d_->p == o.d_->p && d_->e == o.d_->e && d_->f == o.d_->f;
    }
    bool operator!=(const RingSpec& o) const { return !(*this == o); }
    explicit operator bool() const { return static_cast<bool>(d_); }

    RingKind kind() const { return d_->kind; }
    uint32_t p() const { return d_->p; }
    uint32_t e() const { return d_->e; }
    uint32_t f() const { return d_->f; }
    uint32_t q() const { return d_->q; }
    uint32_t size() const { return d_->size; }
    uint32_t maximal_ideal_size() const { return d_->size / d_->q; }

    // --- arithmetic on codes ---

    uint32_t zero() const { return 0; }
    uint32_t one() const { return d_->kind == RingKind::modular ? 1u : 1u; }
    uint32_t pi(uint32_t k = 1) const { return d_->pi_pow[std::min(k, d_->e)]; }

    uint32_t add(uint32_t a, uint32_t b) const {
        if (d_->kind == RingKind::modular) {
            uint64_t s = static_cast<uint64_t>(a) + b;
            return s >= d_->size ? static_cast<uint32_t>(s - d_->size) : static_cast<uint32_t>(s);
        }
        // carry-free: digitwise addition mod p across all base-p digits
        uint32_t out = 0, mul = 1;
        while (a || b) {
            out += ((a % d_->p) + (b % d_->p)) % d_->p * mul;
            a /= d_->p; b /= d_->p; mul *= d_->p;
        }
        return out;
    }

    uint32_t neg(uint32_t a) const {
        if (d_->kind == RingKind::modular) return a == 0 ? 0 : d_->size - a;
        uint32_t out = 0, mul = 1;
        while (a) {
            uint32_t dig = a % d_->p;
            out += (dig ? d_->p - dig : 0) * mul;
            a /= d_->p; mul *= d_->p;
        }
        return out;
    }

    uint32_t sub(uint32_t a, uint32_t b) const { return add(a, neg(b)); }

    uint32_t mul(uint32_t a, uint32_t b) const {
        if (d_->kind == RingKind::modular)
            return static_cast<uint32_t>(static_cast<uint64_t>(a) * b % d_->size);
        // truncated polynomial product in t with F_q coefficient arithmetic
        uint32_t out = 0;
        for (uint32_t i = 0; i < d_->e && a; ++i) {
            uint32_t ca = digit_q(a, i);
            if (!ca) continue;
            for (uint32_t j = 0; i + j < d_->e; ++j) {
                uint32_t cb = digit_q(b, j);
                if (!cb) continue;
                uint32_t prod = d_->fq_mul[ca * d_->q + cb];
                out = add(out, static_cast<uint32_t>(prod) * d_->pow_q[i + j]);
            }
        }
        return out;
    }

    uint32_t valuation(uint32_t a) const {
        if (a == 0) return d_->e;
        if (d_->kind == RingKind::modular) {
            uint32_t v = 0;
            while (a % d_->p == 0) { a /= d_->p; ++v; }
            return v;
        }
        uint32_t v = 0;
        while (digit_q(a, v) == 0) ++v;
        return v;
    }

    bool is_unit(uint32_t a) const { return valuation(a) == 0; }

    uint32_t inv(uint32_t a) const {
        if (!is_unit(a)) throw domain_error("inverse of a non-unit in " + notation());
        if (d_->kind == RingKind::modular) {
            // extended Euclid on the lift
            int64_t r0 = d_->size, r1 = a, s0 = 0, s1 = 1;
            while (r1) {
                int64_t qu = r0 / r1;
                int64_t r2 = r0 - qu * r1, s2 = s0 - qu * s1;
                r0 = r1; r1 = r2;
                s0 = s1; s1 = s2;
            }
            if (s0 < 0) s0 += d_->size;
            return static_cast<uint32_t>(s0);
        }
        // a = c (1 + w), w nilpotent: a^{-1} = c^{-1} sum (-w)^k
        uint32_t c = digit_q(a, 0);
        uint32_t cinv = d_->fq_inv[c];
        uint32_t w = mul(a, cinv);           // 1 + nilpotent
        uint32_t m = sub(w, one());          // nilpotent part
        uint32_t acc = one(), term = one();
        for (uint32_t k = 1; k < d_->e; ++k) {
            term = mul(term, neg(m));
            acc = add(acc, term);
        }
        return mul(acc, cinv);
    }

    // exact division by pi^k; requires valuation(a) >= k
    uint32_t shift_down(uint32_t a, uint32_t k) const {
        if (a == 0) return 0;
        if (d_->kind == RingKind::modular) return a / d_->pow_p[k];
        return a / d_->pow_q[k];
    }

    // a = quot * pi^k + rem with rem the canonical representative mod pi^k
    void divrem_pi(uint32_t a, uint32_t k, uint32_t& quot, uint32_t& rem) const {
        uint32_t radix = d_->kind == RingKind::modular ? d_->pow_p[k] : d_->pow_q[k];
        quot = a / radix;
        rem = a % radix;
    }

    uint32_t mul_pi_pow(uint32_t a, uint32_t k) const {
        if (k >= d_->e) return 0;
        if (d_->kind == RingKind::modular)
            return static_cast<uint32_t>(static_cast<uint64_t>(a) * d_->pow_p[k] % d_->size);
        return (a % d_->pow_q[d_->e - k]) * d_->pow_q[k];
    }

    uint32_t unit_part(uint32_t a) const {
        if (a == 0) throw domain_error("unit part of zero");
        return shift_down(a, valuation(a));
    }

    // quotient map R -> R/m = F_q, value as an F_q code in [0, q)
    uint32_t residue(uint32_t a) const {
        if (d_->kind == RingKind::modular) return a % d_->p;
        return digit_q(a, 0);
    }

    // residue field arithmetic on F_q codes
    uint32_t fq_add(uint32_t a, uint32_t b) const {
        if (d_->f == 1) return (a + b) % d_->p;
        uint32_t out = 0, mul = 1, pp = d_->p;
        while (a || b) { out += ((a % pp) + (b % pp)) % pp * mul; a /= pp; b /= pp; mul *= pp; }
        return out;
    }
    uint32_t fq_mul(uint32_t a, uint32_t b) const { return d_->fq_mul[a * d_->q + b]; }
    uint32_t fq_inv(uint32_t a) const {
        if (!a) throw domain_error("inverse of zero in residue field");
        return d_->fq_inv[a];
    }

    // --- enumeration ---

    std::vector<uint32_t> enumerate_elements() const {
        std::vector<uint32_t> out(d_->size);
        std::iota(out.begin(), out.end(), 0u);
        return out;
    }

    std::vector<uint32_t> enumerate_units() const {
        std::vector<uint32_t> out;
        out.reserve(d_->size - d_->size / d_->q);
        for (uint32_t a = 0; a < d_->size; ++a)
            if (is_unit(a)) out.push_back(a);
        return out;
    }

    // e+1 ideals, inclusion-decreasing: (pi^0) > (pi^1) > ... > (pi^e) = 0
    std::vector<std::vector<uint32_t>> enumerate_ideals() const {
        std::vector<std::vector<uint32_t>> out(d_->e + 1);
        for (uint32_t a = 0; a < d_->size; ++a) {
            uint32_t v = valuation(a);
            for (uint32_t j = 0; j <= d_->e; ++j)
                if (v >= j) out[j].push_back(a);
        }
        return out;
    }

    std::string elem_str(uint32_t a) const { return std::to_string(a); }

    uint32_t parse_elem(const std::string& s) const {
        size_t pos = 0;
        unsigned long v = 0;
        try { v = std::stoul(s, &pos); } catch (...) { throw usage_error("bad ring element: '" + s + "'"); }
        if (pos != s.size() || v >= d_->size) throw usage_error("ring element out of range: '" + s + "'");
        return static_cast<uint32_t>(v);
    }

private:
    explicit RingSpec(std::shared_ptr<const RingData> d) : d_(std::move(d)) {}

    uint32_t digit_q(uint32_t a, uint32_t i) const { return a / d_->pow_q[i] % d_->q; }

    static void check_prime(uint32_t p) {
        if (p < 2) throw usage_error("p must be a prime");
        for (uint32_t d = 2; d * d <= p; ++d)
            if (p % d == 0) throw usage_error(std::to_string(p) + " is not prime");
    }

    static void build_fq(RingData& d) {
        d.fq_mul.assign(static_cast<size_t>(d.q) * d.q, 0);
        d.fq_inv.assign(d.q, 0);
        for (uint32_t a = 0; a < d.q; ++a)
            for (uint32_t b = 0; b < d.q; ++b) {
                uint32_t prod = d.f == 1
                    ? a * b % d.p
                    : static_cast<uint32_t>(detail::fp_poly_mulmod(a, b, d.irred, d.p, d.f));
                d.fq_mul[a * d.q + b] = static_cast<uint16_t>(prod);
                if (prod == 1) d.fq_inv[a] = static_cast<uint16_t>(b);
            }
    }

    std::shared_ptr<const RingData> d_;
};

inline RingSpec RingSpec::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c)) && c != '_') s += c;
    auto parse_uint = [](const std::string& t) -> uint32_t {
        size_t pos = 0;
        unsigned long v;
        try { v = std::stoul(t, &pos); } catch (...) { throw usage_error("bad ring notation"); }
        if (pos != t.size() || v == 0 || v > (1u << 20)) throw usage_error("bad ring notation");
        return static_cast<uint32_t>(v);
    };
    auto factor_prime_power = [](uint32_t n, uint32_t& p, uint32_t& k) {
        for (p = 2; p <= n; ++p) {
            if (n % p) continue;
            k = 0;
            uint32_t m = n;
            while (m % p == 0) { m /= p; ++k; }
            if (m != 1) throw usage_error("modulus is not a prime power: " + std::to_string(n));
            return;
        }
        throw usage_error("bad modulus");
    };
    if (s.rfind("Z/", 0) == 0) {
        std::string rest = s.substr(2);
        auto caret = rest.find('^');
        if (caret != std::string::npos) {
            uint32_t p = parse_uint(rest.substr(0, caret));
            uint32_t e = parse_uint(rest.substr(caret + 1));
            return RingSpec::modular(p, e);
        }
        uint32_t p, e;
        factor_prime_power(parse_uint(rest), p, e);
        return RingSpec::modular(p, e);
    }
    if (s.size() > 1 && s[0] == 'F') {
        auto bracket = s.find("[t]/t");
        if (bracket == std::string::npos) throw usage_error("cannot parse ring notation: '" + text + "'");
        uint32_t qv = parse_uint(s.substr(1, bracket - 1));
        std::string rest = s.substr(bracket + 5);
        uint32_t e = 1;
        if (!rest.empty()) {
            if (rest[0] != '^') throw usage_error("cannot parse ring notation: '" + text + "'");
            e = parse_uint(rest.substr(1));
        }
        uint32_t p, f;
        factor_prime_power(qv, p, f);
        return RingSpec::polynomial(p, f, e);
    }
    throw usage_error("cannot parse ring notation: '" + text + "' (expected Z/p^e or F_q[t]/t^e)");
}

// A ring element bound to its ring; convenience value type for the public API.
struct RingElem {
    uint32_t code = 0;
    RingSpec ring;

    RingElem() = default;
    RingElem(uint32_t c, RingSpec r) : code(c), ring(std::move(r)) {}

    friend RingElem operator+(const RingElem& a, const RingElem& b) {
        require_same(a, b);
        return {a.ring.add(a.code, b.code), a.ring};
    }
    friend RingElem operator-(const RingElem& a, const RingElem& b) {
        require_same(a, b);
        return {a.ring.sub(a.code, b.code), a.ring};
    }
    friend RingElem operator*(const RingElem& a, const RingElem& b) {
        require_same(a, b);
        return {a.ring.mul(a.code, b.code), a.ring};
    }
    RingElem operator-() const { return {ring.neg(code), ring}; }
    bool operator==(const RingElem& o) const { return ring == o.ring && code == o.code; }

    uint32_t valuation() const { return ring.valuation(code); }
    bool is_unit() const { return ring.is_unit(code); }
    RingElem inverse() const { return {ring.inv(code), ring}; }

    static void require_same(const RingElem& a, const RingElem& b) {
        if (a.ring != b.ring) throw usage_error("ring elements from different rings");
    }
};

} // namespace chainring
