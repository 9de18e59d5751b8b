#pragma once

// Exact signed measures on a finite module M and their orthogonal
// decomposition P(M) = sum_N V(M,N) over submodules with M/N a Fourier
// module (over a chain ring: M/N cyclic, since the dualizing module is
// omega = R and its submodules omega_I = pi^{e-j}R are the cyclic R/pi^j).
//
// For a Fourier N the interval [N, M] of the submodule lattice is a chain,
// so Moebius inversion collapses to
//     nu_N = proj_N nu - proj_{N'} nu
// with N' the unique minimal submodule above N. The general Moebius-inversion
// construction is kept alongside for cross-validation on small modules.
//
// All arithmetic here is exact rational; inequality checks compare squares.

#include <functional>
#include <map>
#include <memory>
#include <optional>

#include "concrete_module.hpp"
#include "rng.hpp"

namespace chainring {

struct SignedMeasure {
    std::shared_ptr<const ConcreteModule> module;
    std::vector<Rational> w;

    SignedMeasure() = default;
    SignedMeasure(std::shared_ptr<const ConcreteModule> m, std::vector<Rational> weights)
        : module(std::move(m)), w(std::move(weights)) {
        if (w.size() != module->size()) throw usage_error("measure size mismatch");
    }

    static SignedMeasure zero(std::shared_ptr<const ConcreteModule> m) {
        size_t n = m->size();
        return SignedMeasure(std::move(m), std::vector<Rational>(n, Rational(0)));
    }
    static SignedMeasure delta(std::shared_ptr<const ConcreteModule> m, uint32_t x) {
        auto out = zero(std::move(m));
        out.w[x] = 1;
        return out;
    }
    static SignedMeasure uniform(std::shared_ptr<const ConcreteModule> m) {
        size_t n = m->size();
        return SignedMeasure(std::move(m), std::vector<Rational>(n, Rational(1, static_cast<long>(n))));
    }

    Rational mass() const {
        Rational s = 0;
        for (const auto& x : w) s += x;
        return s;
    }
    bool is_probability() const {
        for (const auto& x : w)
            if (x < 0) return false;
        return mass() == 1;
    }
    bool is_zero() const {
        for (const auto& x : w)
            if (x != 0) return false;
        return true;
    }

    SignedMeasure& operator+=(const SignedMeasure& o) {
        for (size_t i = 0; i < w.size(); ++i) w[i] += o.w[i];
        return *this;
    }
    SignedMeasure& operator-=(const SignedMeasure& o) {
        for (size_t i = 0; i < w.size(); ++i) w[i] -= o.w[i];
        return *this;
    }
};

inline void require_same_module(const SignedMeasure& a, const SignedMeasure& b) {
    if (a.module.get() != b.module.get() && a.module->type() != b.module->type())
        throw usage_error("measures live on different modules");
}

inline Rational inner_product(const SignedMeasure& a, const SignedMeasure& b) {
    require_same_module(a, b);
    Rational s = 0;
    for (size_t i = 0; i < a.w.size(); ++i) s += a.w[i] * b.w[i];
    return s;
}

inline Rational l1_norm(const SignedMeasure& a) {
    Rational s = 0;
    for (const auto& x : a.w) s += abs(x);
    return s;
}
inline Rational l2_norm_sq(const SignedMeasure& a) { return inner_product(a, a); }
inline Rational linf_norm(const SignedMeasure& a) {
    Rational m = 0;
    for (const auto& x : a.w) m = std::max(m, abs(x));
    return m;
}
inline Rational tv_distance(const SignedMeasure& a, const SignedMeasure& b) {
    require_same_module(a, b);
    Rational s = 0;
    for (size_t i = 0; i < a.w.size(); ++i) s += abs(a.w[i] - b.w[i]);
    return s / 2;
}

// average of nu over N-cosets; N must be an R-submodule
inline SignedMeasure proj(const Subgroup& n, const SignedMeasure& nu) {
    if (!n.is_R_module) throw usage_error("proj requires an R-submodule");
    const ConcreteModule& m = *nu.module;
    auto reps = m.coset_reps(n);
    std::vector<Rational> sums(m.size(), Rational(0));
    for (uint32_t x = 0; x < m.size(); ++x) sums[reps[x]] += nu.w[x];
    Rational inv_n(1, static_cast<long>(n.size()));
    std::vector<Rational> out(m.size());
    for (uint32_t x = 0; x < m.size(); ++x) out[x] = sums[reps[x]] * inv_n;
    return SignedMeasure(nu.module, std::move(out));
}

// Fourier modules over a chain ring are exactly the submodules of omega = R,
// i.e. the cyclic modules
inline bool fourier_module_test(const ModuleType& a) { return a.is_cyclic(); }

// omega_I for I = (pi^j), realized inside omega = R (the ring as a module
// over itself) as the annihilator submodule pi^{e-j} R; |omega_I| = |R/I|
// and I -> omega_I reverses inclusions
inline Subgroup dualizing_submodule(const ConcreteModule& r_as_module, uint32_t j) {
    const RingSpec& R = r_as_module.ring();
    if (r_as_module.factors() != 1 || r_as_module.factor_exponent(0) != R.e())
        throw usage_error("dualizing_submodule expects R as a module over itself");
    return r_as_module.pi_power_submodule(R.e() - j);
}

// dim V(M,N) by the dimension formula: |(R/I)*| for M/N ~ omega_I = R/pi^j
inline Int space_dimension_formula(const ModuleType& quotient) {
    if (quotient.is_zero()) return 1;
    if (!quotient.is_cyclic()) return 0;
    uint32_t q = quotient.ring().q(), j = quotient.lambda()[0];
    Int out = q - 1;
    for (uint32_t k = 1; k < j; ++k) out *= q;
    return out;
}

// dim V(Q, 0) constructed as the null space of the stacked cover-averaging
// maps, by exact rational elimination
inline Int dim_v0_constructed(const ModuleType& q_type) {
    ConcreteModule q(q_type);
    SubmoduleLattice lat(q);
    auto minimal = lat.covers(lat.bottom());
    std::vector<std::vector<Rational>> rows;
    for (size_t mi : minimal) {
        const Subgroup& n = lat.submodules()[mi];
        auto reps = q.coset_reps(n);
        std::map<uint32_t, size_t> slot;
        for (uint32_t x = 0; x < q.size(); ++x)
            if (!slot.count(reps[x])) { size_t s = slot.size(); slot[reps[x]] = s; }
        std::vector<std::vector<Rational>> block(slot.size(), std::vector<Rational>(q.size(), Rational(0)));
        for (uint32_t x = 0; x < q.size(); ++x) block[slot[reps[x]]][x] = 1;
        for (auto& r : block) rows.push_back(std::move(r));
    }
    // rank by Gaussian elimination over Q
    size_t rank = 0, cols = q.size();
    for (size_t c = 0; c < cols && rank < rows.size(); ++c) {
        size_t piv = rank;
        while (piv < rows.size() && rows[piv][c] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[rank], rows[piv]);
        Rational inv = Rational(1) / rows[rank][c];
        for (size_t j = c; j < cols; ++j) rows[rank][j] *= inv;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][c] == 0) continue;
            Rational f = rows[r][c];
            for (size_t j = c; j < cols; ++j) rows[r][j] -= f * rows[rank][j];
        }
        ++rank;
    }
    return Int(static_cast<long>(q.size() - rank));
}

// --- homomorphisms to the cyclic Fourier modules omega_I = R/pi^j ---

// all homs M -> R/pi^j as tuples of generator images (codes < q^j);
// the image of generator i must be killed by pi^{lambda_i}
inline std::vector<std::vector<uint32_t>> enumerate_homs_to_cyclic(const ConcreteModule& m,
                                                                   uint32_t j) {
    const RingSpec& R = m.ring();
    std::vector<std::vector<uint32_t>> allowed(m.factors());
    uint32_t target_size = 1;
    for (uint32_t k = 0; k < j; ++k) target_size *= R.q();
    for (size_t i = 0; i < m.factors(); ++i) {
        uint32_t need = j > m.factor_exponent(i) ? j - m.factor_exponent(i) : 0;
        for (uint32_t b = 0; b < target_size; ++b)
            if (b == 0 || R.valuation(b) >= need) allowed[i].push_back(b);
    }
    std::vector<std::vector<uint32_t>> out;
    std::vector<uint32_t> cur(m.factors(), 0);
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == m.factors()) { out.push_back(cur); return; }
        for (uint32_t b : allowed[i]) { cur[i] = b; rec(i + 1); }
    };
    rec(0);
    return out;
}

inline uint32_t apply_hom_to_cyclic(const ConcreteModule& m, const std::vector<uint32_t>& images,
                                    uint32_t j, uint32_t x) {
    const RingSpec& R = m.ring();
    uint32_t acc = 0;
    for (size_t i = 0; i < m.factors(); ++i)
        acc = R.add(acc, R.mul(m.factor_code(x, i), images[i]));
    uint32_t quot, rem;
    R.divrem_pi(acc, j, quot, rem);
    return rem;
}

inline bool hom_is_surjective(const ConcreteModule& m, const std::vector<uint32_t>& images,
                              uint32_t j) {
    if (j == 0) return true;
    for (uint32_t b : images)
        if (b != 0 && m.ring().valuation(b) == 0) return true;
    return false;
}

inline Subgroup hom_kernel(const ConcreteModule& m, const std::vector<uint32_t>& images,
                           uint32_t j) {
    std::vector<uint32_t> elems;
    for (uint32_t x = 0; x < m.size(); ++x)
        if (apply_hom_to_cyclic(m, images, j, x) == 0) elems.push_back(x);
    return m.submodule_from(elems);
}

// representatives of Sur(M, omega_I)/R^* for I = (pi^j), lexicographically
// least surjection per unit orbit
inline std::vector<std::vector<uint32_t>> chi_classes(const ConcreteModule& m, uint32_t j) {
    const RingSpec& R = m.ring();
    std::vector<uint32_t> units;
    uint32_t target_size = 1;
    for (uint32_t k = 0; k < j; ++k) target_size *= R.q();
    for (uint32_t u = 1; u < target_size; ++u)
        if (R.valuation(u) == 0) units.push_back(u);
    std::vector<std::vector<uint32_t>> reps;
    for (const auto& images : enumerate_homs_to_cyclic(m, j)) {
        if (!hom_is_surjective(m, images, j)) continue;
        bool least = true;
        for (uint32_t u : units) {
            std::vector<uint32_t> other(images.size());
            for (size_t i = 0; i < images.size(); ++i) {
                uint32_t quot, rem;
                R.divrem_pi(R.mul(u, images[i]), j, quot, rem);
                other[i] = rem;
            }
            if (other < images) { least = false; break; }
        }
        if (least) reps.push_back(images);
    }
    return reps;
}

inline size_t sur_to_cyclic_count(const ConcreteModule& m, uint32_t j) {
    size_t c = 0;
    for (const auto& images : enumerate_homs_to_cyclic(m, j))
        if (hom_is_surjective(m, images, j)) ++c;
    return c;
}

// --- the decomposition machinery ---

struct DecompositionComponent {
    size_t n_index = 0;             // index of N in the submodule lattice
    ModuleType quotient;            // M/N, a cyclic module R/pi^j
    uint32_t j = 0;                 // exponent of the quotient (0 for N = M)
    std::vector<uint32_t> chi;      // lex-least surjection M -> R/pi^j with kernel N
    Int ambient_dim;                // dim V(M,N)
    SignedMeasure component;
};

struct MainInequalityReport {
    Rational lhs;     // (1/|M/IM|) sum |nu_N|_1 over M/N ~ omega_I
    Rational rhs_sq;  // |nu mod I|_2^2 / |(R/I)^*|
    bool holds = false;
};

struct L1BoundReport {
    std::vector<size_t> n_indices;
    std::vector<Rational> l1_values;
    std::vector<Int> im_sizes;
    bool holds = false;
};

class MeasureDecomposer {
public:
    explicit MeasureDecomposer(std::shared_ptr<const ConcreteModule> m,
                               uint32_t cap = kDefaultEnumerationCap)
        : module_(std::move(m)), lat_(*module_, cap) {
        const auto& subs = lat_.submodules();
        quotients_.reserve(subs.size());
        for (const auto& n : subs) quotients_.push_back(module_->quotient_type(n));
        for (size_t i = 0; i < subs.size(); ++i) {
            if (!quotients_[i].is_cyclic()) continue;
            FourierSite site;
            site.n_index = i;
            site.j = quotients_[i].is_zero() ? 0 : quotients_[i].lambda()[0];
            if (site.j > 0) {
                auto up = lat_.covers(i);
                if (up.size() != 1)
                    throw domain_error("cyclic quotient without a unique cover; lattice corrupt");
                site.cover = up[0];
            } else {
                site.cover = i; // N = M, no strictly larger submodule
            }
            sites_.push_back(site);
        }
        reps_.assign(subs.size(), {});
    }

    const SubmoduleLattice& lattice() const { return lat_; }
    const std::shared_ptr<const ConcreteModule>& module() const { return module_; }
    const ModuleType& quotient_type(size_t idx) const { return quotients_[idx]; }

    SignedMeasure proj_by_index(const SignedMeasure& nu, size_t idx) const {
        const auto& reps = coset_reps(idx);
        const ConcreteModule& m = *module_;
        std::vector<Rational> sums(m.size(), Rational(0));
        for (uint32_t x = 0; x < m.size(); ++x) sums[reps[x]] += nu.w[x];
        Rational invn(1, static_cast<long>(lat_.submodules()[idx].size()));
        std::vector<Rational> out(m.size());
        for (uint32_t x = 0; x < m.size(); ++x) out[x] = sums[reps[x]] * invn;
        return SignedMeasure(nu.module, std::move(out));
    }

    // components over every N with M/N Fourier; the remaining V(M,N) vanish
    // (checked against the full Moebius construction in the test suite)
    std::vector<DecompositionComponent> decompose(const SignedMeasure& nu) const {
        check_module(nu);
        std::vector<DecompositionComponent> out;
        out.reserve(sites_.size());
        for (const auto& site : sites_) {
            DecompositionComponent c;
            c.n_index = site.n_index;
            c.quotient = quotients_[site.n_index];
            c.j = site.j;
            c.ambient_dim = space_dimension_formula(c.quotient);
            c.chi = chi_for(site);
            SignedMeasure comp = proj_by_index(nu, site.n_index);
            if (site.j > 0) comp -= proj_by_index(nu, site.cover);
            c.component = std::move(comp);
            out.push_back(std::move(c));
        }
        return out;
    }

    // nu_N by full Moebius inversion over the submodule lattice:
    // nu_N = sum_{N' >= N} mu(N, N') proj_{N'} nu
    SignedMeasure component_via_mobius(const SignedMeasure& nu, size_t n_index) const {
        check_module(nu);
        SignedMeasure acc = SignedMeasure::zero(nu.module);
        for (size_t b : lat_.above(n_index)) {
            Int mu = lat_.mobius(n_index, b);
            if (mu == 0) continue;
            Rational muq{mu};
            SignedMeasure p = proj_by_index(nu, b);
            for (size_t i = 0; i < acc.w.size(); ++i) acc.w[i] += muq * p.w[i];
        }
        return acc;
    }

    // pushforward (nu mod I) onto M/IM for I = (pi^j); returns coset masses
    std::vector<Rational> pushforward_mod(const SignedMeasure& nu, uint32_t j) const {
        check_module(nu);
        const ConcreteModule& m = *module_;
        Subgroup im = m.pi_power_submodule(j);
        auto reps = m.coset_reps(im);
        std::map<uint32_t, size_t> slot;
        for (uint32_t x = 0; x < m.size(); ++x)
            if (!slot.count(reps[x])) { size_t s = slot.size(); slot[reps[x]] = s; }
        std::vector<Rational> out(slot.size(), Rational(0));
        for (uint32_t x = 0; x < m.size(); ++x) out[slot[reps[x]]] += nu.w[x];
        return out;
    }

    // sum of nu_N over {N : M/N ~ omega_I}; lies in P(M, IM)
    SignedMeasure isotypic_projection(const SignedMeasure& nu, uint32_t j) const {
        check_module(nu);
        SignedMeasure acc = SignedMeasure::zero(nu.module);
        for (const auto& site : sites_) {
            if (site.j != j) continue;
            SignedMeasure comp = proj_by_index(nu, site.n_index);
            if (site.j > 0) comp -= proj_by_index(nu, site.cover);
            acc += comp;
        }
        return acc;
    }

    // (1/|M/IM|) sum_{M/N ~ omega_I} |nu_N|_1  <=  |nu mod I|_2 / sqrt(|(R/I)^*|),
    // compared exactly via squares
    MainInequalityReport verify_main_inequality(const SignedMeasure& nu, uint32_t j) const {
        check_module(nu);
        MainInequalityReport rep;
        Rational sum_l1 = 0;
        for (const auto& site : sites_) {
            if (site.j != j) continue;
            SignedMeasure comp = proj_by_index(nu, site.n_index);
            if (site.j > 0) comp -= proj_by_index(nu, site.cover);
            sum_l1 += l1_norm(comp);
        }
        auto push = pushforward_mod(nu, j);
        Rational l2sq = 0;
        for (const auto& x : push) l2sq += x * x;
        long cosets = static_cast<long>(push.size());
        rep.lhs = sum_l1 / cosets;
        Int units = unit_count(j);
        rep.rhs_sq = l2sq / Rational(units);
        rep.holds = rep.lhs * rep.lhs <= rep.rhs_sq;
        return rep;
    }

    // |nu_chi|_1 <= sqrt(|im chi|) for probability nu, compared via squares
    L1BoundReport verify_l1_bound(const SignedMeasure& nu) const {
        check_module(nu);
        if (!nu.is_probability()) throw usage_error("verify_l1_bound needs a probability measure");
        L1BoundReport rep;
        rep.holds = true;
        for (const auto& site : sites_) {
            SignedMeasure comp = proj_by_index(nu, site.n_index);
            if (site.j > 0) comp -= proj_by_index(nu, site.cover);
            Rational l1 = l1_norm(comp);
            Int im = 1;
            for (uint32_t k = 0; k < site.j; ++k) im *= module_->ring().q();
            rep.n_indices.push_back(site.n_index);
            rep.l1_values.push_back(l1);
            rep.im_sizes.push_back(im);
            if (l1 * l1 > Rational(im)) rep.holds = false;
        }
        return rep;
    }

    Int unit_count(uint32_t j) const {
        if (j == 0) return 1;
        Int out = module_->ring().q() - 1;
        for (uint32_t k = 1; k < j; ++k) out *= module_->ring().q();
        return out;
    }

    size_t fourier_site_count() const { return sites_.size(); }

private:
    struct FourierSite {
        size_t n_index = 0;
        size_t cover = 0;
        uint32_t j = 0;
    };

    void check_module(const SignedMeasure& nu) const {
        if (nu.module.get() != module_.get() && nu.module->type() != module_->type())
            throw usage_error("measure does not live on this decomposer's module");
    }

    const std::vector<uint32_t>& coset_reps(size_t idx) const {
        if (reps_[idx].empty())
            reps_[idx] = module_->coset_reps(lat_.submodules()[idx]);
        return reps_[idx];
    }

    std::vector<uint32_t> chi_for(const FourierSite& site) const {
        if (site.j == 0) return {};
        auto it = chi_cache_.find(site.n_index);
        if (it != chi_cache_.end()) return it->second;
        const Subgroup& n = lat_.submodules()[site.n_index];
        std::vector<uint32_t> best;
        for (const auto& images : enumerate_homs_to_cyclic(*module_, site.j)) {
            if (!hom_is_surjective(*module_, images, site.j)) continue;
            bool matches = true;
            for (uint32_t x = 0; x < module_->size() && matches; ++x) {
                bool in_ker = apply_hom_to_cyclic(*module_, images, site.j, x) == 0;
                if (in_ker != n.contains(x)) matches = false;
            }
            if (matches && (best.empty() || images < best)) best = images;
        }
        if (best.empty()) throw domain_error("no surjection with the requested kernel");
        chi_cache_.emplace(site.n_index, best);
        return best;
    }

    std::shared_ptr<const ConcreteModule> module_;
    SubmoduleLattice lat_;
    std::vector<ModuleType> quotients_;
    std::vector<FourierSite> sites_;
    mutable std::vector<std::vector<uint32_t>> reps_;
    mutable std::map<size_t, std::vector<uint32_t>> chi_cache_;
};

// --- random measures for the property sweeps ---

inline SignedMeasure random_signed_measure(std::shared_ptr<const ConcreteModule> m, Substream& s,
                                           long num_range = 100, long den = 100) {
    std::vector<Rational> w(m->size());
    for (auto& x : w)
        x = make_rational(static_cast<long>(s.uniform_below(2 * num_range + 1)) - num_range, den);
    return SignedMeasure(std::move(m), std::move(w));
}

inline SignedMeasure random_probability_measure(std::shared_ptr<const ConcreteModule> m,
                                                Substream& s, long num_range = 100) {
    std::vector<Rational> w(m->size());
    Rational total = 0;
    for (auto& x : w) {
        x = Rational(static_cast<long>(s.uniform_below(num_range)) + 1);
        total += x;
    }
    for (auto& x : w) x /= total;
    return SignedMeasure(std::move(m), std::move(w));
}

} // namespace chainring
