#pragma once

// Brute-force oracles for the test suite. Maps A -> B are enumerated from
// generator-image tuples; `all_hom_tables_checked` validates additivity and
// R-linearity pointwise (exhaustive ground truth, small modules only), while
// `hom_tables` keeps only the order condition pi^{lambda_i} b_i = 0. The two
// must agree, which test_modules asserts at small sizes before the larger
// sweeps lean on the faster one. Spans are exhausted by coefficient vectors.

#include <cmath>
#include <set>
#include <vector>

#include "chainring/concrete_module.hpp"
#include "chainring/matrix.hpp"

namespace chainring::oracles {

inline std::vector<uint32_t> table_of(const ConcreteModule& a, const ConcreteModule& b,
                                      const std::vector<uint32_t>& images) {
    std::vector<uint32_t> table(a.size());
    for (uint32_t x = 0; x < a.size(); ++x) {
        uint32_t acc = 0;
        for (size_t i = 0; i < a.factors(); ++i)
            acc = b.add(acc, b.scalar(a.factor_code(x, i), images[i]));
        table[x] = acc;
    }
    return table;
}

inline bool is_hom_table(const ConcreteModule& a, const ConcreteModule& b,
                         const std::vector<uint32_t>& f) {
    for (uint32_t x = 0; x < a.size(); ++x)
        for (uint32_t y = 0; y < a.size(); ++y)
            if (f[a.add(x, y)] != b.add(f[x], f[y])) return false;
    for (uint32_t r = 0; r < a.ring().size(); ++r)
        for (uint32_t x = 0; x < a.size(); ++x)
            if (f[a.scalar(r, x)] != b.scalar(r, f[x])) return false;
    return true;
}

template <class Fn>
void for_each_image_tuple(const ConcreteModule& a, const ConcreteModule& b, Fn&& fn) {
    size_t gens = a.factors();
    std::vector<uint32_t> images(gens, 0);
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == gens) { fn(images); return; }
        for (uint32_t img = 0; img < b.size(); ++img) {
            images[i] = img;
            rec(i + 1);
        }
    };
    rec(0);
}

// ground truth: every function induced by a generator-image tuple that is a
// genuine R-module homomorphism, validated pointwise
inline std::vector<std::vector<uint32_t>> all_hom_tables_checked(const ConcreteModule& a,
                                                                 const ConcreteModule& b) {
    std::vector<std::vector<uint32_t>> homs;
    for_each_image_tuple(a, b, [&](const std::vector<uint32_t>& images) {
        auto table = table_of(a, b, images);
        if (is_hom_table(a, b, table)) homs.push_back(std::move(table));
    });
    return homs;
}

// faster enumeration: keep tuples whose images satisfy pi^{lambda_i} b_i = 0
inline std::vector<std::vector<uint32_t>> hom_tables(const ConcreteModule& a,
                                                     const ConcreteModule& b) {
    std::vector<std::vector<uint32_t>> homs;
    const RingSpec& R = a.ring();
    for_each_image_tuple(a, b, [&](const std::vector<uint32_t>& images) {
        for (size_t i = 0; i < images.size(); ++i)
            if (b.scalar(R.pi(a.factor_exponent(i)), images[i]) != 0) return;
        homs.push_back(table_of(a, b, images));
    });
    return homs;
}

// streaming counts over the order-condition enumeration; surjectivity via
// the submodule generated by the images
inline void brute_counts(const ConcreteModule& a, const ConcreteModule& b, uint64_t& homs,
                         uint64_t& surs) {
    homs = surs = 0;
    const RingSpec& R = a.ring();
    for_each_image_tuple(a, b, [&](const std::vector<uint32_t>& images) {
        for (size_t i = 0; i < images.size(); ++i)
            if (b.scalar(R.pi(a.factor_exponent(i)), images[i]) != 0) return;
        ++homs;
        if (b.submodule_from(images).size() == b.size()) ++surs;
    });
}

inline uint64_t brute_hom_count(const ConcreteModule& a, const ConcreteModule& b) {
    uint64_t h, s;
    brute_counts(a, b, h, s);
    return h;
}

inline uint64_t brute_sur_count(const ConcreteModule& a, const ConcreteModule& b) {
    uint64_t h, s;
    brute_counts(a, b, h, s);
    return s;
}

inline uint64_t brute_aut_count(const ConcreteModule& a) {
    // endomorphisms of a finite module: surjective == bijective
    uint64_t h, s;
    brute_counts(a, a, h, s);
    return s;
}

// #Hom(A, B) computed cheaply to gate feasibility of the enumerations above
inline double hom_enumeration_cost(const ConcreteModule& a, const ConcreteModule& b) {
    return std::pow(static_cast<double>(b.size()), static_cast<double>(a.factors()));
}

// every element of the column span, by exhausting coefficient vectors
inline std::set<std::vector<uint32_t>> brute_column_span(const MatrixOverR& m) {
    const RingSpec& R = m.ring;
    std::set<std::vector<uint32_t>> span;
    std::vector<uint32_t> coeff(m.cols, 0);
    for (;;) {
        std::vector<uint32_t> v(m.rows, 0);
        for (uint32_t i = 0; i < m.rows; ++i)
            for (uint32_t j = 0; j < m.cols; ++j)
                v[i] = R.add(v[i], R.mul(m.at(i, j), coeff[j]));
        span.insert(v);
        uint32_t j = 0;
        while (j < m.cols && ++coeff[j] == R.size()) coeff[j++] = 0;
        if (j == m.cols) break;
    }
    return span;
}

} // namespace chainring::oracles
