#pragma once

// Isomorphism classes of finite modules over a chain ring R. Over a chain
// ring every finite module is a direct sum of cyclic factors R/pi^a, so a
// class is a non-increasing partition lambda with parts in [1, e].

#include <algorithm>
#include <functional>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "ring.hpp"

namespace chainring {

class ModuleType {
public:
    ModuleType() = default;

    ModuleType(std::vector<uint32_t> lambda, RingSpec ring)
        : lambda_(std::move(lambda)), ring_(std::move(ring)) {
        std::sort(lambda_.begin(), lambda_.end(), std::greater<>());
        for (auto a : lambda_)
            if (a < 1 || a > ring_.e())
                throw usage_error("module exponent out of range [1, e]");
    }

    static ModuleType zero(RingSpec ring) { return ModuleType({}, std::move(ring)); }

    static ModuleType free_module(uint32_t rank, const RingSpec& ring) {
        return ModuleType(std::vector<uint32_t>(rank, ring.e()), ring);
    }

    const std::vector<uint32_t>& lambda() const { return lambda_; }
    const RingSpec& ring() const { return ring_; }
    uint32_t factors() const { return static_cast<uint32_t>(lambda_.size()); }
    bool is_zero() const { return lambda_.empty(); }
    bool is_cyclic() const { return lambda_.size() <= 1; }

    Int cardinality() const {
        Int c = 1;
        for (auto a : lambda_) for (uint32_t i = 0; i < a; ++i) c *= ring_.q();
        return c;
    }

    uint32_t free_rank() const {
        return static_cast<uint32_t>(std::count(lambda_.begin(), lambda_.end(), ring_.e()));
    }

    // generators minus relations of the minimal presentation; over a chain
    // ring the relations pi^a with a = e are vacuous, so this is the free rank
    int d_invariant() const { return static_cast<int>(free_rank()); }

    bool operator==(const ModuleType& o) const { return lambda_ == o.lambda_ && ring_ == o.ring_; }
    bool operator!=(const ModuleType& o) const { return !(*this == o); }

    // shorthand "[2,1]"; the zero module prints "[]"
    std::string str() const {
        std::string s = "[";
        for (size_t i = 0; i < lambda_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(lambda_[i]);
        }
        return s + "]";
    }

    std::string long_str() const {
        if (lambda_.empty()) return "0";
        std::string s;
        for (size_t i = 0; i < lambda_.size(); ++i) {
            if (i) s += " + ";
            s += "R/pi^" + std::to_string(lambda_[i]);
        }
        return s;
    }

    // accepts "[a,b,...]" or "R/pi^a + R/pi^b + ..."
    static ModuleType parse(const std::string& text, const RingSpec& ring) {
        std::string s;
        for (char c : text) if (!isspace(static_cast<unsigned char>(c))) s += c;
        std::vector<uint32_t> lam;
        if (!s.empty() && s[0] == '[') {
            if (s.back() != ']') throw usage_error("bad module type: '" + text + "'");
            std::stringstream ss(s.substr(1, s.size() - 2));
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) lam.push_back(static_cast<uint32_t>(std::stoul(tok)));
        } else if (s == "0") {
            // zero module
        } else {
            std::stringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, '+')) {
                if (tok.rfind("R/pi^", 0) != 0) throw usage_error("bad module type: '" + text + "'");
                lam.push_back(static_cast<uint32_t>(std::stoul(tok.substr(5))));
            }
        }
        return ModuleType(std::move(lam), ring);
    }

private:
    std::vector<uint32_t> lambda_;
    RingSpec ring_;
};

inline Int gl_order(uint32_t m, uint32_t q) {
    // |GL_m(F_q)| = prod_{i<m} (q^m - q^i)
    Int qm = 1;
    for (uint32_t i = 0; i < m; ++i) qm *= q;
    Int out = 1, qi = 1;
    for (uint32_t i = 0; i < m; ++i) { out *= (qm - qi); qi *= q; }
    return out;
}

// |Aut(A)| by the type-lambda formula: an endomorphism matrix (phi_ij) with
// phi_ij in Hom(R/pi^{a_j}, R/pi^{a_i}) is invertible iff its reduction
// mod pi is, and the reduction pattern is block-triangular in the equal-part
// blocks. Cross-validated against brute force in the test suite.
inline Int aut_count(const ModuleType& A) {
    const auto& lam = A.lambda();
    uint32_t q = A.ring().q();
    long exp_sum = 0;
    for (auto a : lam)
        for (auto b : lam) exp_sum += std::min(a, b);
    Int out = 1;
    size_t i = 0;
    while (i < lam.size()) {
        size_t j = i;
        while (j < lam.size() && lam[j] == lam[i]) ++j;
        uint32_t m = static_cast<uint32_t>(j - i);
        out *= gl_order(m, q);
        exp_sum -= static_cast<long>(m) * m;
        i = j;
    }
    for (long k = 0; k < exp_sum; ++k) out *= q;
    return out;
}

// #Hom(A, B) = q^{sum_{i,j} min(a_i, b_j)}
inline Int hom_count(const ModuleType& A, const ModuleType& B) {
    if (A.ring() != B.ring()) throw usage_error("hom_count requires a common ring");
    uint32_t q = A.ring().q();
    Int out = 1;
    for (auto a : A.lambda())
        for (auto b : B.lambda())
            for (uint32_t k = 0; k < std::min(a, b); ++k) out *= q;
    return out;
}

// every module type over `ring` with sum of exponents at most max_log,
// ordered by cardinality then lexicographically
inline std::vector<ModuleType> enumerate_types(const RingSpec& ring, uint32_t max_log) {
    std::vector<ModuleType> out;
    std::vector<uint32_t> lam;
    std::function<void(uint32_t, uint32_t)> rec = [&](uint32_t remaining, uint32_t max_part) {
        out.emplace_back(lam, ring);
        for (uint32_t part = std::min(remaining, max_part); part >= 1; --part) {
            lam.push_back(part);
            rec(remaining - part, part);
            lam.pop_back();
        }
    };
    rec(max_log, ring.e());
    std::sort(out.begin(), out.end(), [](const ModuleType& a, const ModuleType& b) {
        Int ca = a.cardinality(), cb = b.cardinality();
        if (ca != cb) return ca < cb;
        return a.lambda() < b.lambda();
    });
    return out;
}

inline std::vector<ModuleType> enumerate_types_up_to_card(const RingSpec& ring, uint64_t max_card) {
    std::vector<ModuleType> out;
    for (auto& t : enumerate_types(ring, 12))
        if (t.cardinality() <= static_cast<unsigned long>(max_card)) out.push_back(std::move(t));
    return out;
}

} // namespace chainring
