#pragma once

// Evaluators for the limit distributions of cokernels of Haar random
// matrices: the square law c_0/|Aut A|, the rectangular law
// c_u/(|A|^u |Aut A|), and the general chain-ring law
// (1/(|A|^u |Aut A|)) prod_{i=d(A)+u+1}^inf (1 - q^{-i}).
// Every value carries a certified relative bound for the truncated tail.

#include <cmath>
#include <vector>

#include "concrete_module.hpp"
#include "module_type.hpp"

namespace chainring {

struct TruncatedValue {
    double value = 0;
    double tail_bound = 0; // rigorous bound on the relative truncation error

    double abs_bound() const { return value * tail_bound; }
};

// c_u(q) = prod_{i=u+1}^inf (1 - q^{-i}), truncated after `terms` factors.
// Tail: 1 - prod_{i>T}(1-q^{-i}) <= sum_{i>T} q^{-i}/(1-q^{-i})
//     <= q^{-T} / ((q-1)(1-q^{-(T+1)})).
inline TruncatedValue c_constant(uint32_t q, uint32_t u, uint32_t terms = 64) {
    if (terms < 1) throw usage_error("c_constant needs at least one factor");
    if (q < 2) throw usage_error("c_constant needs q >= 2");
    long double prod = 1.0L;
    long double qi = std::pow(static_cast<long double>(q), -static_cast<long double>(u + 1));
    for (uint32_t i = 0; i < terms; ++i) {
        prod *= (1.0L - qi);
        qi /= q;
    }
    uint32_t T = u + terms;
    long double qT = std::pow(static_cast<long double>(q), -static_cast<long double>(T));
    long double tail = qT / ((q - 1) * (1.0L - qT / q));
    // fold in float rounding slack: one ulp per factor
    long double slack = terms * 1e-18L;
    return {static_cast<double>(prod), static_cast<double>(tail + slack)};
}

// Eq-style product starting at index `start`: prod_{i=start}^inf (1 - q^{-i})
inline TruncatedValue tail_product(uint32_t q, uint32_t start, uint32_t terms = 64) {
    if (start < 1) throw usage_error("tail_product starts at i >= 1");
    return c_constant(q, start - 1, terms);
}

// Friedman-Washington / Cohen-Lenstra: c_0(p) / |Aut A| for a p-group type A
// (A presented over a Z/p^e ring whose residue field has p elements).
inline TruncatedValue friedman_washington_prob(const ModuleType& A, uint32_t p,
                                               uint32_t terms = 64) {
    if (A.ring().q() != p)
        throw usage_error("friedman_washington_prob: A must be a p-group type with residue size p");
    TruncatedValue c0 = c_constant(p, 0, terms);
    double aut = aut_count(A).get_d();
    return {c0.value / aut, c0.tail_bound};
}

// rectangular Haar law: c_u(p) / (|A|^u |Aut A|), u >= 0
inline TruncatedValue rectangular_prob(const ModuleType& A, uint32_t p, uint32_t u,
                                       uint32_t terms = 64) {
    if (A.ring().q() != p)
        throw usage_error("rectangular_prob: A must be a p-group type with residue size p");
    TruncatedValue cu = c_constant(p, u, terms);
    Int denom = aut_count(A);
    Int card = A.cardinality();
    for (uint32_t k = 0; k < u; ++k) denom *= card;
    return {cu.value / denom.get_d(), cu.tail_bound};
}

// Sawin-Wood law over a general chain ring, stated for u > 0:
// (1/(|A|^u |Aut A|)) prod_{i=d(A)+u+1}^inf (1 - q^{-i})
inline TruncatedValue sawin_wood_prob(const ModuleType& A, uint32_t u, uint32_t terms = 64) {
    if (u == 0) throw usage_error("sawin_wood_prob is stated for u > 0 only");
    uint32_t q = A.ring().q();
    TruncatedValue prod = tail_product(q, static_cast<uint32_t>(A.d_invariant()) + u + 1, terms);
    Int denom = aut_count(A);
    Int card = A.cardinality();
    for (uint32_t k = 0; k < u; ++k) denom *= card;
    return {prod.value / denom.get_d(), prod.tail_bound};
}

// The u = 0 Haar limit over a general chain ring, used by the `dist` table:
// (1/|Aut A|) prod_{i=d(A)+1}^inf (1 - q^{-i}). For d(A) = 0 this reduces to
// c_0(q)/|Aut A|; the d(A) offset accounts for classes with free summands
// (it matches the classical F_q corank law and the Z_p truncation argument).
inline TruncatedValue haar_square_prob(const ModuleType& A, uint32_t terms = 64) {
    uint32_t q = A.ring().q();
    TruncatedValue prod = tail_product(q, static_cast<uint32_t>(A.d_invariant()) + 1, terms);
    return {prod.value / aut_count(A).get_d(), prod.tail_bound};
}

inline TruncatedValue haar_limit_prob(const ModuleType& A, uint32_t u, uint32_t terms = 64) {
    return u == 0 ? haar_square_prob(A, terms) : sawin_wood_prob(A, u, terms);
}

} // namespace chainring
