#pragma once

// Explicit finite modules M = sum_i R/pi^{lambda_i}: element arithmetic on
// mixed-radix indices, exhaustive subgroup / submodule enumeration by
// breadth-first closure, and the Moebius function of the submodule lattice.

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "module_type.hpp"

namespace chainring {

constexpr uint32_t kDefaultEnumerationCap = 256;

class ConcreteModule;

// An additive subgroup (possibly an R-submodule) of a ConcreteModule, stored
// as a sorted element list plus a bitmask for O(1) membership.
struct Subgroup {
    std::vector<uint32_t> elems;
    std::vector<uint64_t> bits;
    bool is_R_module = false;

    uint32_t size() const { return static_cast<uint32_t>(elems.size()); }
    bool contains(uint32_t x) const { return (bits[x >> 6] >> (x & 63)) & 1; }
    bool contains_all(const Subgroup& o) const {
        for (size_t w = 0; w < bits.size(); ++w)
            if ((o.bits[w] & ~bits[w]) != 0) return false;
        return true;
    }
    bool same_elements(const Subgroup& o) const { return bits == o.bits; }
};

class ConcreteModule {
public:
    explicit ConcreteModule(ModuleType type, uint32_t size_cap = 1u << 16)
        : type_(std::move(type)), ring_(type_.ring()), lam_(type_.lambda()) {
        uint64_t size = 1;
        fsize_.resize(lam_.size());
        radix_.resize(lam_.size());
        for (size_t i = 0; i < lam_.size(); ++i) {
            uint64_t fs = 1;
            for (uint32_t k = 0; k < lam_[i]; ++k) fs *= ring_.q();
            fsize_[i] = static_cast<uint32_t>(fs);
            radix_[i] = static_cast<uint32_t>(size);
            size *= fs;
            if (size > size_cap)
                throw resource_error("module too large: |M| exceeds cap " + std::to_string(size_cap));
        }
        size_ = static_cast<uint32_t>(size);
    }

    const ModuleType& type() const { return type_; }
    const RingSpec& ring() const { return ring_; }
    uint32_t size() const { return size_; }
    uint32_t factors() const { return static_cast<uint32_t>(lam_.size()); }
    uint32_t factor_exponent(size_t i) const { return lam_[i]; }
    uint32_t factor_size(size_t i) const { return fsize_[i]; }

    uint32_t factor_code(uint32_t x, size_t i) const { return x / radix_[i] % fsize_[i]; }

    uint32_t encode(const std::vector<uint32_t>& codes) const {
        uint32_t x = 0;
        for (size_t i = 0; i < codes.size(); ++i) x += codes[i] * radix_[i];
        return x;
    }

    uint32_t add(uint32_t x, uint32_t y) const {
        uint32_t out = 0;
        for (size_t i = 0; i < lam_.size(); ++i) {
            uint32_t s = ring_.add(factor_code(x, i), factor_code(y, i));
            uint32_t quot, rem;
            ring_.divrem_pi(s, lam_[i], quot, rem);
            out += rem * radix_[i];
        }
        return out;
    }

    uint32_t neg(uint32_t x) const {
        uint32_t out = 0;
        for (size_t i = 0; i < lam_.size(); ++i) {
            uint32_t quot, rem;
            ring_.divrem_pi(ring_.neg(factor_code(x, i)), lam_[i], quot, rem);
            out += rem * radix_[i];
        }
        return out;
    }

    uint32_t sub(uint32_t x, uint32_t y) const { return add(x, neg(y)); }

    // scalar action of the ring code r
    uint32_t scalar(uint32_t r, uint32_t x) const {
        uint32_t out = 0;
        for (size_t i = 0; i < lam_.size(); ++i) {
            uint32_t quot, rem;
            ring_.divrem_pi(ring_.mul(r, factor_code(x, i)), lam_[i], quot, rem);
            out += rem * radix_[i];
        }
        return out;
    }

    uint32_t generator(size_t i) const { return radix_[i]; }

    std::string elem_str(uint32_t x) const {
        std::string s = "(";
        for (size_t i = 0; i < lam_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(factor_code(x, i));
        }
        return s + ")";
    }

    // --- subgroup / submodule machinery ---

    Subgroup trivial_subgroup() const {
        Subgroup s;
        s.elems = {0};
        s.bits.assign(words(), 0);
        s.bits[0] = 1;
        s.is_R_module = true;
        return s;
    }

    Subgroup full_subgroup() const {
        Subgroup s;
        s.elems.resize(size_);
        for (uint32_t x = 0; x < size_; ++x) s.elems[x] = x;
        s.bits.assign(words(), 0);
        for (uint32_t x = 0; x < size_; ++x) s.bits[x >> 6] |= 1ull << (x & 63);
        s.is_R_module = true;
        return s;
    }

    // subgroup generated by an existing subgroup and one further element:
    // the union of the cosets k*x + S
    Subgroup extend_subgroup(const Subgroup& s, uint32_t x) const {
        Subgroup t = s;
        uint32_t y = x;
        while (!t.contains(y)) {
            for (uint32_t e : s.elems) insert(t, add(y, e));
            y = add(y, x);
        }
        finish(t);
        return t;
    }

    // submodule generated by a submodule and one further element: S + Rx
    Subgroup extend_submodule(const Subgroup& s, uint32_t x) const {
        Subgroup t = s;
        for (uint32_t r = 0; r < ring_.size(); ++r) {
            uint32_t rx = scalar(r, x);
            if (t.contains(rx)) continue;
            for (uint32_t e : s.elems) insert(t, add(rx, e));
        }
        finish(t);
        t.is_R_module = true;
        return t;
    }

    Subgroup subgroup_from(const std::vector<uint32_t>& gens) const {
        Subgroup s = trivial_subgroup();
        for (uint32_t g : gens) s = extend_subgroup(s, g);
        s.is_R_module = check_R_closed(s);
        return s;
    }

    Subgroup submodule_from(const std::vector<uint32_t>& gens) const {
        Subgroup s = trivial_subgroup();
        for (uint32_t g : gens) s = extend_submodule(s, g);
        return s;
    }

    Subgroup pi_power_submodule(uint32_t k) const {
        Subgroup s = trivial_subgroup();
        uint32_t pik = ring_.pi(k);
        for (uint32_t x = 0; x < size_; ++x) insert(s, scalar(pik, x));
        finish(s);
        s.is_R_module = true;
        return s;
    }

    bool check_R_closed(const Subgroup& s) const {
        for (uint32_t e : s.elems)
            for (uint32_t r = 0; r < ring_.size(); ++r)
                if (!s.contains(scalar(r, e))) return false;
        return true;
    }

    // complete duplicate-free list of additive subgroups (BFS closure)
    std::vector<Subgroup> enumerate_subgroups(uint32_t cap = kDefaultEnumerationCap) const {
        check_cap(cap);
        return enumerate_closed([this](const Subgroup& s, uint32_t x) { return extend_subgroup(s, x); }, true);
    }

    std::vector<Subgroup> enumerate_submodules(uint32_t cap = kDefaultEnumerationCap) const {
        check_cap(cap);
        auto out = enumerate_closed(
            [this](const Subgroup& s, uint32_t x) { return extend_submodule(s, x); }, false);
        for (auto& s : out) s.is_R_module = true;
        return out;
    }

    // canonical coset representative (least element of x + N) for every x
    std::vector<uint32_t> coset_reps(const Subgroup& n) const {
        std::vector<uint32_t> rep(size_, size_);
        for (uint32_t x = 0; x < size_; ++x) {
            if (rep[x] != size_) continue;
            for (uint32_t e : n.elems) rep[add(x, e)] = x;
        }
        return rep;
    }

    // isomorphism type of an R-closed subgroup, recovered from the pi-torsion
    // profile #{x in C : pi^j x = 0} = q^{sum_i min(lambda_i, j)}
    ModuleType subgroup_type(const Subgroup& c) const {
        uint32_t e = ring_.e();
        std::vector<uint32_t> s(e + 1, 0);
        for (uint32_t j = 0; j <= e; ++j) {
            uint32_t pij = ring_.pi(j);
            uint32_t cnt = 0;
            for (uint32_t x : c.elems)
                if (scalar(pij, x) == 0) ++cnt;
            s[j] = exact_log_q(cnt);
        }
        return type_from_torsion(s);
    }

    // isomorphism type of M/N for a submodule N
    ModuleType quotient_type(const Subgroup& n) const {
        uint32_t e = ring_.e();
        std::vector<uint32_t> s(e + 1, 0);
        for (uint32_t j = 0; j <= e; ++j) {
            uint32_t pij = ring_.pi(j);
            uint32_t cnt = 0;
            for (uint32_t x = 0; x < size_; ++x)
                if (n.contains(scalar(pij, x))) ++cnt;
            s[j] = exact_log_q(cnt / n.size());
        }
        return type_from_torsion(s);
    }

private:
    size_t words() const { return (size_ + 63) / 64; }

    void insert(Subgroup& s, uint32_t x) const {
        if (!s.contains(x)) {
            s.bits[x >> 6] |= 1ull << (x & 63);
            s.elems.push_back(x);
        }
    }

    static void finish(Subgroup& s) { std::sort(s.elems.begin(), s.elems.end()); }

    void check_cap(uint32_t cap) const {
        if (size_ > cap)
            throw resource_error("enumeration cap exceeded: |M| = " + std::to_string(size_) +
                                 " > " + std::to_string(cap));
    }

    std::vector<Subgroup> enumerate_closed(
        const std::function<Subgroup(const Subgroup&, uint32_t)>& extend, bool mark_R) const {
        struct BitsHash {
            size_t operator()(const std::vector<uint64_t>& b) const {
                uint64_t h = 0x243F6A8885A308D3ull;
                for (auto w : b) h = splitmix64(h ^ w);
                return static_cast<size_t>(h);
            }
        };
        std::unordered_set<std::vector<uint64_t>, BitsHash> seen;
        std::vector<Subgroup> out;
        std::queue<size_t> work;
        out.push_back(trivial_subgroup());
        seen.insert(out[0].bits);
        work.push(0);
        while (!work.empty()) {
            size_t idx = work.front();
            work.pop();
            for (uint32_t x = 1; x < size_; ++x) {
                if (out[idx].contains(x)) continue;
                Subgroup t = extend(out[idx], x);
                if (seen.insert(t.bits).second) {
                    out.push_back(std::move(t));
                    work.push(out.size() - 1);
                }
            }
        }
        if (mark_R)
            for (auto& s : out) s.is_R_module = check_R_closed(s);
        std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
            if (a.elems.size() != b.elems.size()) return a.elems.size() < b.elems.size();
            return a.elems < b.elems;
        });
        return out;
    }

    uint32_t exact_log_q(uint32_t n) const {
        uint32_t l = 0;
        while (n > 1) {
            if (n % ring_.q()) throw domain_error("subgroup size is not a q-power; not R-closed?");
            n /= ring_.q();
            ++l;
        }
        return l;
    }

    ModuleType type_from_torsion(const std::vector<uint32_t>& s) const {
        // parts >= j count is s[j] - s[j-1]
        uint32_t e = ring_.e();
        std::vector<uint32_t> lam;
        for (uint32_t j = 1; j <= e; ++j) {
            uint32_t ge_j = s[j] - s[j - 1];
            uint32_t ge_j1 = j < e ? s[j + 1] - s[j] : 0;
            for (uint32_t k = 0; k < ge_j - ge_j1; ++k) lam.push_back(j);
        }
        return ModuleType(std::move(lam), ring_);
    }

    ModuleType type_;
    RingSpec ring_;
    std::vector<uint32_t> lam_, fsize_, radix_;
    uint32_t size_ = 1;
};

// The submodule lattice with containment, covers, and the Moebius function
// computed by recursive sieving with memoization.
class SubmoduleLattice {
public:
    explicit SubmoduleLattice(const ConcreteModule& m, uint32_t cap = kDefaultEnumerationCap)
        : module_(&m), subs_(m.enumerate_submodules(cap)) {
        size_t n = subs_.size();
        leq_.assign(n, std::vector<bool>(n, false));
        for (size_t a = 0; a < n; ++a)
            for (size_t b = 0; b < n; ++b)
                leq_[a][b] = subs_[b].contains_all(subs_[a]);
    }

    const std::vector<Subgroup>& submodules() const { return subs_; }
    const ConcreteModule& module() const { return *module_; }
    size_t count() const { return subs_.size(); }
    bool leq(size_t a, size_t b) const { return leq_[a][b]; }

    size_t index_of(const Subgroup& s) const {
        for (size_t i = 0; i < subs_.size(); ++i)
            if (subs_[i].same_elements(s)) return i;
        throw domain_error("subgroup is not a submodule of this lattice");
    }

    size_t bottom() const { return 0; }
    size_t top() const { return subs_.size() - 1; }

    std::vector<size_t> above(size_t a) const {
        std::vector<size_t> out;
        for (size_t b = 0; b < subs_.size(); ++b)
            if (leq_[a][b]) out.push_back(b);
        return out;
    }

    // minimal submodules strictly containing a
    std::vector<size_t> covers(size_t a) const {
        std::vector<size_t> up;
        for (size_t b = 0; b < subs_.size(); ++b)
            if (b != a && leq_[a][b]) up.push_back(b);
        std::vector<size_t> out;
        for (size_t b : up) {
            bool minimal = true;
            for (size_t c : up)
                if (c != b && leq_[c][b]) { minimal = false; break; }
            if (minimal) out.push_back(b);
        }
        return out;
    }

    // Moebius function of the lattice: mu(a,a) = 1,
    // mu(a,b) = -sum_{a <= c < b} mu(a,c)
    Int mobius(size_t a, size_t b) const {
        if (!leq_[a][b]) return 0;
        if (a == b) return 1;
        uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        Int acc = 0;
        for (size_t c = 0; c < subs_.size(); ++c)
            if (c != b && leq_[a][c] && leq_[c][b]) acc -= mobius(a, c);
        memo_.emplace(key, acc);
        return acc;
    }

private:
    const ConcreteModule* module_;
    std::vector<Subgroup> subs_;
    std::vector<std::vector<bool>> leq_;
    mutable std::unordered_map<uint64_t, Int> memo_;
};

// R-submodule spanned by a tuple of elements
inline Subgroup span_of(const ConcreteModule& m, const std::vector<uint32_t>& elems) {
    return m.submodule_from(elems);
}

inline bool spans(const ConcreteModule& m, const std::vector<uint32_t>& elems) {
    return span_of(m, elems).size() == m.size();
}

// #Sur(A, B) by Moebius inclusion-exclusion over the submodule lattice of B:
// #Sur(A,B) = sum_{C <= B} mu(C, B) #Hom(A, C)
inline Int sur_count(const ModuleType& A, const ModuleType& B,
                     uint32_t cap = kDefaultEnumerationCap) {
    if (A.ring() != B.ring()) throw usage_error("sur_count requires a common ring");
    if (B.is_zero()) return 1;
    ConcreteModule bm(B);
    SubmoduleLattice lat(bm, cap);
    Int out = 0;
    size_t topi = lat.top();
    for (size_t c = 0; c < lat.count(); ++c) {
        Int mu = lat.mobius(c, topi);
        if (mu == 0) continue;
        out += mu * hom_count(A, bm.subgroup_type(lat.submodules()[c]));
    }
    return out;
}

} // namespace chainring
