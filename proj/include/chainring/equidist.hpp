#pragma once

// Fourier analysis of R-valued entry laws on finite modules: epsilon-
// equidistribution, the Type 1/2/3 classification of spanning tuples, the
// constants alpha, beta, T, theta, the entry-law hypothesis checks, and the
// exact moment-tail sum
//     sum_{f in Sur(R^l, M)} max( P(f(M_{l,k}) = 0) - ((1+eps0)/|M|)^k, 0 )
// with P(f(M) = 0) = (mass at 0 of the law of sum_i m_i xi_i)^k.
//
// Coefficient magnitudes are exact squared rationals whenever every
// character order divides 4 (all p = 2 rings with e <= 2, and elementary
// 2-groups); otherwise quad-precision complex arithmetic with a reported
// comparison slack.

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "concrete_module.hpp"
#include "rng.hpp"

#if defined(__SIZEOF_FLOAT128__) && !defined(CHAINRING_NO_QUADMATH)
#include <quadmath.h>
namespace chainring { using qfloat = __float128; }
#define CHAINRING_QCOS cosq
#define CHAINRING_QSIN sinq
#else
#include <cmath>
namespace chainring { using qfloat = long double; }
#define CHAINRING_QCOS cosl
#define CHAINRING_QSIN sinl
#endif

namespace chainring {

constexpr double kFourierSlack = 1e-20;

struct EntryDistribution {
    RingSpec ring;
    std::vector<std::pair<uint32_t, Rational>> support; // (code, probability)

    EntryDistribution() = default;
    EntryDistribution(RingSpec r, std::vector<std::pair<uint32_t, Rational>> s)
        : ring(std::move(r)), support(std::move(s)) {
        validate();
    }

    static EntryDistribution haar(const RingSpec& r) {
        std::vector<std::pair<uint32_t, Rational>> s;
        for (uint32_t a = 0; a < r.size(); ++a)
            s.emplace_back(a, Rational(1, static_cast<long>(r.size())));
        return EntryDistribution(r, std::move(s));
    }

    static EntryDistribution uniform_on(const RingSpec& r, const std::vector<uint32_t>& elems) {
        std::vector<std::pair<uint32_t, Rational>> s;
        for (uint32_t a : elems) s.emplace_back(a, Rational(1, static_cast<long>(elems.size())));
        return EntryDistribution(r, std::move(s));
    }

    // "0:1/2,1:1/2"
    static EntryDistribution parse(const std::string& text, const RingSpec& r) {
        std::vector<std::pair<uint32_t, Rational>> s;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            auto colon = tok.find(':');
            if (colon == std::string::npos) throw usage_error("bad entry distribution: '" + text + "'");
            std::string el, pr;
            for (char c : tok.substr(0, colon)) if (!isspace(static_cast<unsigned char>(c))) el += c;
            for (char c : tok.substr(colon + 1)) if (!isspace(static_cast<unsigned char>(c))) pr += c;
            s.emplace_back(r.parse_elem(el), parse_rational(pr));
        }
        return EntryDistribution(r, std::move(s));
    }

    std::string str() const {
        std::string s;
        for (size_t i = 0; i < support.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(support[i].first) + ":" + support[i].second.get_str();
        }
        return s;
    }

    std::vector<Rational> dense() const {
        std::vector<Rational> out(ring.size(), Rational(0));
        for (const auto& [a, p] : support) out[a] = p;
        return out;
    }

    void validate() const {
        Rational total = 0;
        std::vector<bool> seen(ring.size(), false);
        for (const auto& [a, p] : support) {
            if (a >= ring.size()) throw usage_error("support element out of range");
            if (seen[a]) throw usage_error("duplicate support element");
            seen[a] = true;
            if (p <= 0) throw usage_error("probabilities must be positive");
            total += p;
        }
        if (total != 1) throw usage_error("probabilities must sum to 1");
    }
};

// --- non-degeneracy checks on the entry law ---

enum class HypothesisStatus { ok, translate_of_ideal, translate_of_subring };

struct HypothesisReport {
    HypothesisStatus status = HypothesisStatus::ok;
    uint32_t translate = 0;            // support lies in translate + witness
    std::vector<uint32_t> witness;     // ideal or sub-rng elements
    bool witness_unital = false;       // the witness sub-rng contains 1
    std::string describe() const {
        switch (status) {
            case HypothesisStatus::ok: return "ok";
            case HypothesisStatus::translate_of_ideal: return "translate-of-ideal";
            case HypothesisStatus::translate_of_subring: return "translate-of-subring";
        }
        return "?";
    }
};

// all sub-rngs of R: additive subgroups closed under multiplication
// (1 not required; the stabilizer of a subgroup need not be unital)
inline std::vector<Subgroup> enumerate_subrngs(const RingSpec& R) {
    ConcreteModule rm(ModuleType({R.e()}, R)); // R as a module over itself
    std::vector<Subgroup> out;
    for (auto& s : rm.enumerate_subgroups()) {
        bool closed = true;
        for (uint32_t x : s.elems) {
            for (uint32_t y : s.elems)
                if (!s.contains(R.mul(x, y))) { closed = false; break; }
            if (!closed) break;
        }
        if (closed) out.push_back(std::move(s));
    }
    return out;
}

inline HypothesisReport hypothesis_check(const EntryDistribution& xi) {
    const RingSpec& R = xi.ring;
    uint32_t s0 = xi.support.front().first;
    std::vector<uint32_t> shifted;
    for (const auto& [a, p] : xi.support) shifted.push_back(R.sub(a, s0));
    // proper ideals, smallest first (most informative witness)
    auto ideals = R.enumerate_ideals();
    for (uint32_t j = R.e(); j >= 1; --j) {
        bool inside = true;
        for (uint32_t d : shifted)
            if (R.valuation(d) < j) { inside = false; break; }
        if (inside) return {HypothesisStatus::translate_of_ideal, s0, ideals[j]};
    }
    for (const auto& s : enumerate_subrngs(R)) {
        if (s.size() == R.size()) continue;
        bool inside = true;
        for (uint32_t d : shifted)
            if (!s.contains(d)) { inside = false; break; }
        if (inside)
            return {HypothesisStatus::translate_of_subring, s0, s.elems, s.contains(R.one())};
    }
    return {};
}

// --- norms, beta, alpha, theta ---

struct NormsReport {
    Rational l2_sq;       // |xi mod m|_2^2
    Rational linf;        // |xi mod m|_inf
    Rational inv_char;    // 1/char(R/m)
    Rational beta;        // 1 - max(linf, 1/char)
    double theta_bound;   // max(sqrt(l2_sq), linf, 1/char): admissible theta > this
};

inline NormsReport norms_and_theta(const EntryDistribution& xi) {
    const RingSpec& R = xi.ring;
    std::vector<Rational> res(R.q(), Rational(0));
    for (const auto& [a, p] : xi.support) res[R.residue(a)] += p;
    NormsReport out;
    out.l2_sq = 0;
    out.linf = 0;
    for (const auto& m : res) {
        out.l2_sq += m * m;
        out.linf = std::max(out.linf, m);
    }
    out.inv_char = Rational(1, static_cast<long>(R.p()));
    Rational m2 = std::max(out.linf, out.inv_char);
    out.beta = 1 - m2;
    out.theta_bound = std::max(std::sqrt(out.l2_sq.get_d()), m2.get_d());
    return out;
}

// smallest non-zero mass of (xi mod ann M); ann M = (pi^{lambda_1})
inline Rational alpha_for_module(const EntryDistribution& xi, const ModuleType& M) {
    const RingSpec& R = xi.ring;
    uint32_t j = M.is_zero() ? 0 : M.lambda()[0];
    std::map<uint32_t, Rational> masses;
    for (const auto& [a, p] : xi.support) {
        uint32_t quot, rem;
        R.divrem_pi(a, j, quot, rem);
        masses[rem] += p;
    }
    Rational alpha = 1;
    for (const auto& [r, m] : masses)
        if (m > 0) alpha = std::min(alpha, m);
    return alpha;
}

struct ConvergenceParams {
    Rational eps0{1, 10};
    Rational eps{1, 20};
    Rational eps_prime{1, 5};
    double theta = 0;

    static ConvergenceParams defaults(const EntryDistribution& xi) {
        ConvergenceParams p;
        double bound = norms_and_theta(xi).theta_bound;
        p.theta = (bound + 1.0) / 2.0;
        return p;
    }

    void validate() const {
        if (!(eps > 0 && eps < eps0)) throw usage_error("need 0 < eps < eps0");
        if (!(eps_prime > 0)) throw usage_error("need eps' > 0");
    }
};

// --- characters of the additive group of a ConcreteModule ---

// decompose the additive group into cyclic factors of orders d_k: for Z/p^e
// rings one factor p^{lambda_i} per module factor; for F_q[t]/t^e rings
// f * lambda_i factors of order p each
class GroupCharacters {
public:
    explicit GroupCharacters(const ConcreteModule& m) : m_(&m) {
        const RingSpec& R = m.ring();
        for (size_t i = 0; i < m.factors(); ++i) {
            if (R.kind() == RingKind::modular) {
                uint32_t d = 1;
                for (uint32_t k = 0; k < m.factor_exponent(i); ++k) d *= R.p();
                orders_.push_back(d);
            } else {
                for (uint32_t k = 0; k < m.factor_exponent(i) * R.f(); ++k)
                    orders_.push_back(R.p());
            }
        }
        if (orders_.empty()) orders_.push_back(1);
        lcm_ = 1;
        for (uint32_t d : orders_) lcm_ = std::lcm(lcm_, d);
        exact_ = lcm_ == 1 || lcm_ == 2 || lcm_ == 4;
        coords_.assign(m.size(), {});
        for (uint32_t x = 0; x < m.size(); ++x) coords_[x] = coords_of(x);
    }

    uint32_t count() const { return m_->size(); }
    bool exact() const { return exact_; }
    uint32_t lcm() const { return lcm_; }

    // angle numerator: chi_t(x) = exp(2 pi i * angle(t,x) / lcm)
    uint32_t angle(uint32_t t, uint32_t x) const {
        const auto& tc = coords_[t];
        const auto& xc = coords_[x];
        uint64_t acc = 0;
        for (size_t k = 0; k < orders_.size(); ++k)
            acc += static_cast<uint64_t>(tc[k]) * xc[k] * (lcm_ / orders_[k]) % lcm_;
        return static_cast<uint32_t>(acc % lcm_);
    }

private:
    std::vector<uint32_t> coords_of(uint32_t x) const {
        const RingSpec& R = m_->ring();
        std::vector<uint32_t> out;
        for (size_t i = 0; i < m_->factors(); ++i) {
            uint32_t code = m_->factor_code(x, i);
            if (R.kind() == RingKind::modular) {
                out.push_back(code);
            } else {
                for (uint32_t k = 0; k < m_->factor_exponent(i) * R.f(); ++k) {
                    out.push_back(code % R.p());
                    code /= R.p();
                }
            }
        }
        if (out.empty()) out.push_back(0);
        return out;
    }

    const ConcreteModule* m_;
    std::vector<uint32_t> orders_;
    std::vector<std::vector<uint32_t>> coords_;
    uint32_t lcm_ = 1;
    bool exact_ = true;
};

// one Fourier coefficient; exact Gaussian-rational when character orders
// divide 4, quad-precision complex otherwise
struct FourierValue {
    bool exact = true;
    Rational re, im;          // exact mode
    qfloat re_f = 0, im_f = 0; // approx mode

    Rational magnitude_sq_exact() const { return re * re + im * im; }
    double magnitude_sq() const {
        if (exact) return magnitude_sq_exact().get_d();
        return static_cast<double>(re_f * re_f + im_f * im_f);
    }
    bool is_exact_one() const { return exact && re == 1 && im == 0; }
};

// all Fourier coefficients of a law on M, indexed by character index
inline std::vector<FourierValue> fourier_coefficients(const ConcreteModule& m,
                                                      const GroupCharacters& chars,
                                                      const std::vector<Rational>& law) {
    std::vector<FourierValue> out(chars.count());
    uint32_t L = chars.lcm();
    for (uint32_t t = 0; t < chars.count(); ++t) {
        FourierValue v;
        v.exact = chars.exact();
        if (v.exact) {
            for (uint32_t x = 0; x < m.size(); ++x) {
                if (law[x] == 0) continue;
                uint32_t ang = chars.angle(t, x) * (4 / L) % 4; // quarter turns
                switch (ang) {
                    case 0: v.re += law[x]; break;
                    case 1: v.im += law[x]; break;
                    case 2: v.re -= law[x]; break;
                    case 3: v.im -= law[x]; break;
                }
            }
        } else {
            qfloat two_pi = static_cast<qfloat>(2.0L) * static_cast<qfloat>(3.14159265358979323846264338327950288L);
            for (uint32_t x = 0; x < m.size(); ++x) {
                if (law[x] == 0) continue;
                qfloat ang = two_pi * static_cast<qfloat>(chars.angle(t, x)) / static_cast<qfloat>(L);
                qfloat w = static_cast<qfloat>(law[x].get_d());
                v.re_f += w * CHAINRING_QCOS(ang);
                v.im_f += w * CHAINRING_QSIN(ang);
            }
        }
        out[t] = v;
    }
    return out;
}

// exact test for coefficient == 1: the character is trivial on the support
inline bool coefficient_is_one(const ConcreteModule& m, const GroupCharacters& chars, uint32_t t,
                               const std::vector<Rational>& law) {
    for (uint32_t x = 0; x < m.size(); ++x)
        if (law[x] != 0 && chars.angle(t, x) != 0) return false;
    return true;
}

// --- entry-law normalization and tuple laws ---

// translate by -s0 and scale by (s1 - s0)^{-1} so that {0,1} lie in the
// support; fails when the support sits in a translate of the maximal ideal
inline EntryDistribution normalize_entry_distribution(const EntryDistribution& xi) {
    const RingSpec& R = xi.ring;
    uint32_t s0 = xi.support.front().first;
    uint32_t s1 = R.size();
    for (const auto& [a, p] : xi.support)
        if (R.is_unit(R.sub(a, s0))) { s1 = a; break; }
    if (s1 == R.size())
        throw domain_error("entry distribution is concentrated on a translate of the maximal ideal");
    uint32_t uinv = R.inv(R.sub(s1, s0));
    std::vector<std::pair<uint32_t, Rational>> out;
    for (const auto& [a, p] : xi.support) out.emplace_back(R.mul(uinv, R.sub(a, s0)), p);
    std::sort(out.begin(), out.end());
    return EntryDistribution(R, std::move(out));
}

// law of sum_i m_i zeta_i on M by exact convolution; dists[i] gives zeta_i
inline std::vector<Rational> law_of_tuple(const ConcreteModule& m,
                                          const std::vector<uint32_t>& tuple,
                                          const std::vector<const EntryDistribution*>& dists) {
    std::vector<Rational> law(m.size(), Rational(0));
    law[0] = 1;
    for (size_t i = 0; i < tuple.size(); ++i) {
        std::vector<Rational> next(m.size(), Rational(0));
        for (const auto& [s, p] : dists[i]->support) {
            uint32_t shift = m.scalar(s, tuple[i]);
            for (uint32_t x = 0; x < m.size(); ++x) {
                if (law[x] == 0) continue;
                next[m.add(x, shift)] += law[x] * p;
            }
        }
        law = std::move(next);
    }
    return law;
}

inline std::vector<Rational> law_of_tuple(const ConcreteModule& m,
                                          const std::vector<uint32_t>& tuple,
                                          const EntryDistribution& xi) {
    std::vector<const EntryDistribution*> dists(tuple.size(), &xi);
    return law_of_tuple(m, tuple, dists);
}

// --- Type 1/2/3 classification ---

enum class TupleType : uint8_t { type1 = 1, type2 = 2, type3 = 3 };

struct TupleClassification {
    TupleType type = TupleType::type1;
    bool spans = false;
    Rational linf;             // sup norm of the (normalized) law
    uint32_t witness_char = 0; // character backing the tag
    double witness_mag_sq = 0; // its squared magnitude
    bool borderline = false;   // a float comparison fell inside the slack band
};

// classify a tuple by the Fourier coefficients of sum_i m_i xi'_i, with xi'
// the normalized entry law (spec: normalization happens before
// classification; magnitudes are translation-invariant)
inline TupleClassification classify_tuple(const ConcreteModule& m,
                                          const std::vector<uint32_t>& tuple,
                                          const EntryDistribution& xi, const Rational& eps) {
    if (eps <= 0) throw usage_error("classification needs eps > 0");
    EntryDistribution norm = normalize_entry_distribution(xi);
    auto law = law_of_tuple(m, tuple, norm);
    GroupCharacters chars(m);
    auto coeffs = fourier_coefficients(m, chars, law);

    TupleClassification out;
    out.spans = spans(m, tuple);
    for (uint32_t x = 0; x < m.size(); ++x) out.linf = std::max(out.linf, law[x]);

    Rational small_sq = (eps / static_cast<long>(m.size())) * (eps / static_cast<long>(m.size()));
    bool any_one = false, any_large = false;
    for (uint32_t t = 1; t < chars.count(); ++t) {
        if (coefficient_is_one(m, chars, t, law)) {
            any_one = true;
            out.witness_char = t;
            continue;
        }
        bool small;
        if (chars.exact()) {
            small = coeffs[t].magnitude_sq_exact() <= small_sq;
        } else {
            double mag = coeffs[t].magnitude_sq();
            double thr = small_sq.get_d();
            if (std::abs(mag - thr) < kFourierSlack) out.borderline = true;
            small = mag <= thr;
        }
        if (!small) {
            any_large = true;
            out.witness_char = t;
            out.witness_mag_sq = coeffs[t].magnitude_sq();
        }
    }
    out.type = any_large ? TupleType::type3 : (any_one ? TupleType::type2 : TupleType::type1);
    return out;
}

// smallest positive integer T with C <= (eps/|M|)^{1/T}, where C is the
// largest non-one coefficient magnitude of m*xi over all m in M (T = 1 when
// every coefficient is 1 or 0-free... i.e. no non-one coefficients exist)
inline uint32_t t_constant(const ConcreteModule& m, const EntryDistribution& xi,
                           const Rational& eps, uint32_t t_cap = 1u << 20) {
    EntryDistribution norm = normalize_entry_distribution(xi);
    GroupCharacters chars(m);
    Rational best_sq = 0;
    double best_sq_f = 0;
    bool any = false;
    for (uint32_t mm = 0; mm < m.size(); ++mm) {
        auto law = law_of_tuple(m, {mm}, norm);
        auto coeffs = fourier_coefficients(m, chars, law);
        for (uint32_t t = 0; t < chars.count(); ++t) {
            if (coefficient_is_one(m, chars, t, law)) continue;
            any = true;
            if (chars.exact())
                best_sq = std::max(best_sq, coeffs[t].magnitude_sq_exact());
            else
                best_sq_f = std::max(best_sq_f, coeffs[t].magnitude_sq());
        }
    }
    if (!any) return 1;
    Rational target = eps / static_cast<long>(m.size());
    Rational target_sq = target * target;
    if (chars.exact()) {
        if (best_sq == 0) return 1;
        Rational power = best_sq;
        for (uint32_t T = 1; T <= t_cap; ++T) {
            if (power <= target_sq) return T;
            power *= best_sq;
        }
    } else {
        double power = best_sq_f;
        for (uint32_t T = 1; T <= t_cap; ++T) {
            if (power <= target_sq.get_d() + kFourierSlack) return T;
            power *= best_sq_f;
        }
    }
    throw resource_error("t_constant exceeded iteration cap");
}

// --- the moment-tail sum ---

struct MomentTailResult {
    Rational total;
    Rational per_type[3]{};        // partial sums by tuple type
    uint64_t type_counts[3]{};     // spanning tuples per type
    uint64_t spanning_tuples = 0;
    bool classified = false;
};

namespace detail {

struct TailSummer {
    const ConcreteModule& m;
    const std::vector<const EntryDistribution*>& dists;
    uint32_t l, k;
    Rational threshold_pow; // ((1+eps0)/|M|)^k
    Rational eps;
    bool classify;
    const EntryDistribution* xi_for_classification;
    MomentTailResult result;
    std::vector<uint32_t> tuple;

    void run() {
        std::vector<Rational> law0(m.size(), Rational(0));
        law0[0] = 1;
        rec(0, law0, m.trivial_subgroup());
    }

    void rec(uint32_t depth, const std::vector<Rational>& law, const Subgroup& span) {
        if (depth == l) {
            if (span.size() != m.size()) return;
            ++result.spanning_tuples;
            Rational mass0 = law[0];
            Rational term = 0;
            if (mass0 > 0) {
                Rational p = 1;
                for (uint32_t i = 0; i < k; ++i) p *= mass0;
                if (p > threshold_pow) term = p - threshold_pow;
            }
            result.total += term;
            if (classify) {
                auto cls = classify_tuple(m, tuple, *xi_for_classification, eps);
                size_t idx = static_cast<size_t>(cls.type) - 1;
                result.per_type[idx] += term;
                ++result.type_counts[idx];
            }
            return;
        }
        for (uint32_t mm = 0; mm < m.size(); ++mm) {
            tuple[depth] = mm;
            std::vector<Rational> next(m.size(), Rational(0));
            for (const auto& [s, p] : dists[depth]->support) {
                uint32_t shift = m.scalar(s, mm);
                for (uint32_t x = 0; x < m.size(); ++x) {
                    if (law[x] == 0) continue;
                    next[m.add(x, shift)] += law[x] * p;
                }
            }
            Subgroup nspan = span.contains(mm) ? span : m.extend_submodule(span, mm);
            rec(depth + 1, next, nspan);
        }
    }
};

} // namespace detail

inline MomentTailResult moment_tail_sum_mixed(const ConcreteModule& m,
                                              const std::vector<const EntryDistribution*>& dists,
                                              uint32_t l, uint32_t k, const Rational& eps0,
                                              const Rational& eps, bool classify,
                                              const EntryDistribution* xi_for_classification,
                                              uint64_t budget = 10'000'000ull) {
    if (dists.size() != l) throw usage_error("need one entry law per coordinate");
    double tuples = std::pow(static_cast<double>(m.size()), static_cast<double>(l));
    if (tuples > static_cast<double>(budget))
        throw resource_error("moment-tail enumeration budget exceeded: |M|^l too large");
    Rational thr = (Rational(1) + eps0) / static_cast<long>(m.size());
    Rational thr_pow = 1;
    for (uint32_t i = 0; i < k; ++i) thr_pow *= thr;
    detail::TailSummer summer{m, dists, l, k, thr_pow, eps, classify, xi_for_classification, {}, {}};
    summer.tuple.assign(l, 0);
    summer.result.classified = classify;
    summer.run();
    return summer.result;
}

inline MomentTailResult moment_tail_sum(const ConcreteModule& m, const EntryDistribution& xi,
                                        uint32_t l, uint32_t k, const Rational& eps0,
                                        const Rational& eps, bool classify = true,
                                        uint64_t budget = 10'000'000ull) {
    std::vector<const EntryDistribution*> dists(l, &xi);
    return moment_tail_sum_mixed(m, dists, l, k, eps0, eps, classify, &xi, budget);
}

// moment-tail sum with the coordinates in `pattern` replaced by Haar entries
inline MomentTailResult uniform_replacement_check(const ConcreteModule& m,
                                                  const EntryDistribution& xi,
                                                  const std::vector<bool>& pattern, uint32_t l,
                                                  uint32_t k, const Rational& eps0,
                                                  const Rational& eps,
                                                  uint64_t budget = 10'000'000ull) {
    if (pattern.size() != l) throw usage_error("pattern length must equal l");
    EntryDistribution haar = EntryDistribution::haar(m.ring());
    std::vector<const EntryDistribution*> dists(l);
    for (uint32_t i = 0; i < l; ++i) dists[i] = pattern[i] ? &haar : &xi;
    return moment_tail_sum_mixed(m, dists, l, k, eps0, eps, false, &xi, budget);
}

// #{m in M : m * support(xi) inside pi} for the subgroup-stabilizer lemma
inline uint32_t stabilizer_count(const ConcreteModule& m, const EntryDistribution& xi,
                                 const Subgroup& pi) {
    uint32_t count = 0;
    for (uint32_t mm = 0; mm < m.size(); ++mm) {
        bool in = true;
        for (const auto& [s, p] : xi.support)
            if (!pi.contains(m.scalar(s, mm))) { in = false; break; }
        if (in) ++count;
    }
    return count;
}

} // namespace chainring
