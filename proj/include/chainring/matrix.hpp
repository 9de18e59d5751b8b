#pragma once

// Dense linear algebra over a chain ring: Smith normal form with optional
// transforms, cokernel classification, exact determinant via fraction-free
// elimination on the Euclidean lift (Z or F_q[t]), and the Howell canonical
// form of column spans with coset reduction.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "concrete_module.hpp"
#include "module_type.hpp"
#include "ring.hpp"

namespace chainring {

struct MatrixOverR {
    uint32_t rows = 0, cols = 0;
    std::vector<uint32_t> a; // row-major codes
    RingSpec ring;

    MatrixOverR() = default;
    MatrixOverR(uint32_t n, uint32_t m, RingSpec r)
        : rows(n), cols(m), a(static_cast<size_t>(n) * m, 0), ring(std::move(r)) {}

    uint32_t& at(uint32_t i, uint32_t j) { return a[static_cast<size_t>(i) * cols + j]; }
    uint32_t at(uint32_t i, uint32_t j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static MatrixOverR identity(uint32_t n, const RingSpec& r) {
        MatrixOverR m(n, n, r);
        for (uint32_t i = 0; i < n; ++i) m.at(i, i) = r.one();
        return m;
    }

    bool operator==(const MatrixOverR& o) const {
        return rows == o.rows && cols == o.cols && ring == o.ring && a == o.a;
    }

    // rows separated by ';', entries by ','
    static MatrixOverR parse(const std::string& text, const RingSpec& ring) {
        std::vector<std::vector<uint32_t>> rowsv;
        std::stringstream ss(text);
        std::string rowtok;
        while (std::getline(ss, rowtok, ';')) {
            std::vector<uint32_t> row;
            std::stringstream rs(rowtok);
            std::string etok;
            while (std::getline(rs, etok, ',')) {
                std::string t;
                for (char c : etok) if (!isspace(static_cast<unsigned char>(c))) t += c;
                row.push_back(ring.parse_elem(t));
            }
            if (!row.empty()) rowsv.push_back(std::move(row));
        }
        if (rowsv.empty()) throw usage_error("empty matrix");
        MatrixOverR m(static_cast<uint32_t>(rowsv.size()), static_cast<uint32_t>(rowsv[0].size()), ring);
        for (uint32_t i = 0; i < m.rows; ++i) {
            if (rowsv[i].size() != m.cols) throw usage_error("ragged matrix rows");
            for (uint32_t j = 0; j < m.cols; ++j) m.at(i, j) = rowsv[i][j];
        }
        return m;
    }

    std::string str() const {
        std::string s;
        for (uint32_t i = 0; i < rows; ++i) {
            if (i) s += ";";
            for (uint32_t j = 0; j < cols; ++j) {
                if (j) s += ",";
                s += std::to_string(at(i, j));
            }
        }
        return s;
    }
};

struct SmithForm {
    std::vector<uint32_t> exponents;             // ascending, length min(n, m)
    std::optional<MatrixOverR> U, V;             // U * M * V = diag(pi^a_i)
};

namespace detail {

inline void row_sub(MatrixOverR& m, uint32_t dst, uint32_t src, uint32_t q) {
    const RingSpec& R = m.ring;
    for (uint32_t j = 0; j < m.cols; ++j)
        m.at(dst, j) = R.sub(m.at(dst, j), R.mul(q, m.at(src, j)));
}
inline void col_sub(MatrixOverR& m, uint32_t dst, uint32_t src, uint32_t q) {
    const RingSpec& R = m.ring;
    for (uint32_t i = 0; i < m.rows; ++i)
        m.at(i, dst) = R.sub(m.at(i, dst), R.mul(q, m.at(i, src)));
}
inline void row_scale(MatrixOverR& m, uint32_t i, uint32_t u) {
    for (uint32_t j = 0; j < m.cols; ++j) m.at(i, j) = m.ring.mul(u, m.at(i, j));
}
inline void row_swap(MatrixOverR& m, uint32_t i1, uint32_t i2) {
    for (uint32_t j = 0; j < m.cols; ++j) std::swap(m.at(i1, j), m.at(i2, j));
}
inline void col_swap(MatrixOverR& m, uint32_t j1, uint32_t j2) {
    for (uint32_t i = 0; i < m.rows; ++i) std::swap(m.at(i, j1), m.at(i, j2));
}

} // namespace detail

// Pivot on the entry of minimal valuation (leftmost-topmost tie-break); in a
// chain ring that entry divides every other entry in the submatrix, so one
// elimination pass per pivot suffices and the exponents come out ascending.
inline SmithForm smith_normal_form(const MatrixOverR& input, bool with_transforms = false) {
    const RingSpec& R = input.ring;
    MatrixOverR d = input;
    uint32_t n = d.rows, m = d.cols, mn = std::min(n, m);
    SmithForm out;
    out.exponents.assign(mn, R.e());
    if (with_transforms) {
        out.U = MatrixOverR::identity(n, R);
        out.V = MatrixOverR::identity(m, R);
    }
    for (uint32_t k = 0; k < mn; ++k) {
        uint32_t best_i = n, best_j = m, best_v = R.e() + 1;
        for (uint32_t i = k; i < n; ++i)
            for (uint32_t j = k; j < m; ++j) {
                uint32_t v = R.valuation(d.at(i, j));
                if (v < best_v) { best_v = v; best_i = i; best_j = j; }
            }
        if (best_v >= R.e()) break; // remaining submatrix is zero
        if (best_i != k) {
            detail::row_swap(d, k, best_i);
            if (out.U) detail::row_swap(*out.U, k, best_i);
        }
        if (best_j != k) {
            detail::col_swap(d, k, best_j);
            if (out.V) detail::col_swap(*out.V, k, best_j);
        }
        uint32_t u = R.inv(R.unit_part(d.at(k, k)));
        detail::row_scale(d, k, u);
        if (out.U) detail::row_scale(*out.U, k, u);
        // now d(k,k) = pi^best_v exactly
        for (uint32_t i = k + 1; i < n; ++i) {
            uint32_t x = d.at(i, k);
            if (!x) continue;
            uint32_t q = R.mul_pi_pow(R.unit_part(x), R.valuation(x) - best_v);
            detail::row_sub(d, i, k, q);
            if (out.U) detail::row_sub(*out.U, i, k, q);
        }
        for (uint32_t j = k + 1; j < m; ++j) {
            uint32_t x = d.at(k, j);
            if (!x) continue;
            uint32_t q = R.mul_pi_pow(R.unit_part(x), R.valuation(x) - best_v);
            detail::col_sub(d, j, k, q);
            if (out.V) detail::col_sub(*out.V, j, k, q);
        }
        out.exponents[k] = best_v;
    }
    return out;
}

// R^n / columnspan(M): cyclic factor R/pi^{a_i} per Smith exponent, plus one
// free factor R per missing column when n > m
inline ModuleType cokernel(const MatrixOverR& m) {
    auto snf = smith_normal_form(m);
    std::vector<uint32_t> lam;
    for (auto a : snf.exponents)
        if (a > 0) lam.push_back(a);
    for (uint32_t i = m.cols; i < m.rows; ++i) lam.push_back(m.ring.e());
    return ModuleType(std::move(lam), m.ring);
}

namespace detail {

template <class T>
T bareiss_det(std::vector<std::vector<T>>& b, const T& one, const T& zero) {
    size_t n = b.size();
    if (n == 0) return one;
    int sign = 1;
    T prev = one;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (b[k][k] == zero) {
            size_t pi = n, pj = n;
            for (size_t i = k; i < n && pi == n; ++i)
                for (size_t j = k; j < n; ++j)
                    if (!(b[i][j] == zero)) { pi = i; pj = j; break; }
            if (pi == n) return zero;
            if (pi != k) { std::swap(b[pi], b[k]); sign = -sign; }
            if (pj != k) {
                for (size_t i = 0; i < n; ++i) std::swap(b[i][pj], b[i][k]);
                sign = -sign;
            }
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                b[i][j] = (b[k][k] * b[i][j] - b[i][k] * b[k][j]) / prev;
        prev = b[k][k];
    }
    T det = b[n - 1][n - 1];
    if (sign < 0) det = zero - det;
    return det;
}

// dense polynomial over F_q with exact division; the lift of F_q[t]/(t^e)
struct FqPoly {
    const RingSpec* R = nullptr; // for residue-field tables
    std::vector<uint16_t> c;

    void trim() { while (!c.empty() && c.back() == 0) c.pop_back(); }
    bool operator==(const FqPoly& o) const { return c == o.c; }

    friend FqPoly operator*(const FqPoly& a, const FqPoly& b) {
        FqPoly out{a.R, {}};
        if (a.c.empty() || b.c.empty()) return out;
        out.c.assign(a.c.size() + b.c.size() - 1, 0);
        for (size_t i = 0; i < a.c.size(); ++i) {
            if (!a.c[i]) continue;
            for (size_t j = 0; j < b.c.size(); ++j)
                if (b.c[j])
                    out.c[i + j] = static_cast<uint16_t>(
                        a.R->fq_add(out.c[i + j], a.R->fq_mul(a.c[i], b.c[j])));
        }
        out.trim();
        return out;
    }
    friend FqPoly operator-(const FqPoly& a, const FqPoly& b) {
        FqPoly out{a.R ? a.R : b.R, {}};
        out.c.assign(std::max(a.c.size(), b.c.size()), 0);
        uint32_t p = out.R->p(), f = out.R->f();
        auto fq_neg = [&](uint32_t x) {
            uint32_t r = 0, mul = 1;
            for (uint32_t k = 0; k < f; ++k) {
                uint32_t dig = x % p;
                r += (dig ? p - dig : 0) * mul;
                x /= p; mul *= p;
            }
            return r;
        };
        for (size_t i = 0; i < out.c.size(); ++i) {
            uint32_t av = i < a.c.size() ? a.c[i] : 0;
            uint32_t bv = i < b.c.size() ? b.c[i] : 0;
            out.c[i] = static_cast<uint16_t>(out.R->fq_add(av, fq_neg(bv)));
        }
        out.trim();
        return out;
    }
    // exact division (remainder known to vanish)
    friend FqPoly operator/(const FqPoly& a, const FqPoly& b) {
        if (b.c.empty()) throw domain_error("polynomial division by zero");
        FqPoly rem = a, quot{a.R, {}};
        if (a.c.size() < b.c.size()) {
            if (!a.c.empty()) throw domain_error("inexact polynomial division");
            return quot;
        }
        quot.c.assign(a.c.size() - b.c.size() + 1, 0);
        uint32_t lead_inv = a.R->fq_inv(b.c.back());
        for (size_t d = rem.c.size(); d >= b.c.size(); --d) {
            if (rem.c.size() < d || rem.c[d - 1] == 0) continue;
            uint32_t coef = a.R->fq_mul(rem.c[d - 1], lead_inv);
            size_t shift = d - b.c.size();
            quot.c[shift] = static_cast<uint16_t>(coef);
            FqPoly sub{a.R, {}};
            sub.c.assign(shift + 1, 0);
            sub.c[shift] = static_cast<uint16_t>(coef);
            rem = rem - sub * b;
        }
        if (!rem.c.empty()) throw domain_error("inexact polynomial division");
        quot.trim();
        return quot;
    }
};

} // namespace detail

// Exact determinant: lift to the Euclidean cover (Z with canonical
// representatives, or F_q[t]) and run Bareiss fraction-free elimination,
// reducing modulo pi^e only at the end. Integer intermediates are minors, so
// a 63-bit Hadamard check decides between int64 and GMP.
inline RingElem determinant(const MatrixOverR& m) {
    if (m.rows != m.cols) throw usage_error("determinant requires a square matrix");
    const RingSpec& R = m.ring;
    uint32_t n = m.rows;
    if (n == 0) return {R.one(), R};

    if (R.kind() == RingKind::modular) {
        // Hadamard bound on the minors; the elimination multiplies two of
        // them before the exact division, so int64 needs 2*logbound < 63
        double logbound = 0;
        for (uint32_t i = 0; i < n; ++i) {
            double s = 0;
            for (uint32_t j = 0; j < n; ++j) s += static_cast<double>(m.at(i, j)) * m.at(i, j);
            logbound += 0.5 * std::log2(s + 1.0);
        }
        Int det;
        if (logbound < 30) {
            std::vector<std::vector<int64_t>> b(n, std::vector<int64_t>(n));
            for (uint32_t i = 0; i < n; ++i)
                for (uint32_t j = 0; j < n; ++j) b[i][j] = m.at(i, j);
            det = Int(static_cast<long>(detail::bareiss_det<int64_t>(b, 1, 0)));
        } else {
            std::vector<std::vector<Int>> b(n, std::vector<Int>(n));
            for (uint32_t i = 0; i < n; ++i)
                for (uint32_t j = 0; j < n; ++j) b[i][j] = m.at(i, j);
            det = detail::bareiss_det<Int>(b, Int(1), Int(0));
        }
        Int mod(static_cast<unsigned long>(R.size()));
        det %= mod;
        if (det < 0) det += mod;
        return {static_cast<uint32_t>(det.get_ui()), R};
    }

    // polynomial kind: coefficients never grow, only degrees do
    using detail::FqPoly;
    std::vector<std::vector<FqPoly>> b(n, std::vector<FqPoly>(n));
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t j = 0; j < n; ++j) {
            FqPoly p{&R, {}};
            uint32_t code = m.at(i, j);
            for (uint32_t k = 0; k < R.e(); ++k) {
                uint32_t quot, rem;
                R.divrem_pi(code, 1, quot, rem);
                p.c.push_back(static_cast<uint16_t>(rem));
                code = quot;
            }
            p.trim();
            b[i][j] = std::move(p);
        }
    FqPoly one{&R, {1}}, zero{&R, {}};
    FqPoly det = detail::bareiss_det<FqPoly>(b, one, zero);
    uint32_t out = 0;
    for (uint32_t k = 0; k < std::min<size_t>(R.e(), det.c.size()); ++k)
        out = R.add(out, R.mul_pi_pow(det.c[k], k));
    return {out, R};
}

// ---------------------------------------------------------------------------
// Howell form of a column span.
//
// Internally rows are echelonized over R^n with annihilator completion, so
// that every span element's leading index is a pivot index; entries at pivot
// columns of the other rows are then reduced to canonical representatives
// mod pi^{a}. Two matrices have equal column spans iff their forms agree, and
// successive pivot reduction yields a canonical coset representative.

struct HowellForm {
    uint32_t n = 0;                              // ambient R^n
    RingSpec ring;
    std::vector<std::vector<uint32_t>> rows;     // generators, by pivot column
    std::vector<uint32_t> pivot_col, pivot_val;

    Int span_size() const {
        Int s = 1;
        for (auto v : pivot_val)
            for (uint32_t k = 0; k < ring.e() - v; ++k) s *= ring.q();
        return s;
    }

    Int coset_count() const {
        Int total = 1;
        for (uint32_t k = 0; k < ring.e() * n; ++k) total *= ring.q();
        return total / span_size();
    }

    // canonical representative of v + span
    std::vector<uint32_t> reduce(std::vector<uint32_t> v) const {
        for (size_t t = 0; t < rows.size(); ++t) {
            uint32_t c = pivot_col[t], a = pivot_val[t];
            uint32_t quot, rem;
            ring.divrem_pi(v[c], a, quot, rem);
            if (quot)
                for (uint32_t j = 0; j < n; ++j)
                    v[j] = ring.sub(v[j], ring.mul(quot, rows[t][j]));
        }
        return v;
    }

    std::string key() const {
        std::string s = std::to_string(n) + ":";
        for (size_t t = 0; t < rows.size(); ++t) {
            if (t) s += ";";
            for (uint32_t j = 0; j < n; ++j) {
                if (j) s += ",";
                s += std::to_string(rows[t][j]);
            }
        }
        return s;
    }
};

inline HowellForm howell_of_rows(std::vector<std::vector<uint32_t>> pending, uint32_t n,
                                 const RingSpec& R) {
    std::vector<std::vector<uint32_t>> rows;   // working pivot rows
    std::vector<int> piv(n, -1);               // column -> row index
    std::vector<uint32_t> pval(n, 0);

    auto normalize = [&](std::vector<uint32_t>& v, uint32_t c) {
        uint32_t u = R.inv(R.unit_part(v[c]));
        for (auto& x : v) x = R.mul(u, x);
    };
    auto scaled = [&](const std::vector<uint32_t>& v, uint32_t k) {
        std::vector<uint32_t> out(v.size());
        for (size_t j = 0; j < v.size(); ++j) out[j] = R.mul_pi_pow(v[j], k);
        return out;
    };

    while (!pending.empty()) {
        std::vector<uint32_t> v = std::move(pending.back());
        pending.pop_back();
        for (uint32_t c = 0; c < n;) {
            if (v[c] == 0) { ++c; continue; }
            uint32_t b = R.valuation(v[c]);
            if (piv[c] < 0) {
                normalize(v, c);
                if (b > 0) pending.push_back(scaled(v, R.e() - b));
                piv[c] = static_cast<int>(rows.size());
                pval[c] = b;
                rows.push_back(std::move(v));
                v.clear();
                break;
            }
            uint32_t a = pval[c];
            if (b < a) {
                // incoming row has the better pivot; swap roles
                normalize(v, c);
                std::swap(rows[static_cast<size_t>(piv[c])], v);
                pval[c] = b;
                pending.push_back(scaled(rows[static_cast<size_t>(piv[c])], R.e() - b));
                a = b;
                b = R.valuation(v[c]);
            }
            uint32_t q = R.mul_pi_pow(R.unit_part(v[c]), b - a);
            const auto& w = rows[static_cast<size_t>(piv[c])];
            for (uint32_t j = 0; j < n; ++j) v[j] = R.sub(v[j], R.mul(q, w[j]));
        }
    }

    HowellForm out;
    out.n = n;
    out.ring = R;
    for (uint32_t c = 0; c < n; ++c) {
        if (piv[c] < 0) continue;
        out.rows.push_back(rows[static_cast<size_t>(piv[c])]);
        out.pivot_col.push_back(c);
        out.pivot_val.push_back(pval[c]);
    }
    // reduce entries at pivot columns of the other rows to canonical reps
    for (size_t t = 0; t < out.rows.size(); ++t) {
        uint32_t c = out.pivot_col[t], a = out.pivot_val[t];
        for (size_t s = 0; s < out.rows.size(); ++s) {
            if (s == t) continue;
            uint32_t quot, rem;
            R.divrem_pi(out.rows[s][c], a, quot, rem);
            if (quot)
                for (uint32_t j = 0; j < out.n; ++j)
                    out.rows[s][j] = R.sub(out.rows[s][j], R.mul(quot, out.rows[t][j]));
        }
    }
    return out;
}

inline HowellForm howell_of_columns(const MatrixOverR& m) {
    std::vector<std::vector<uint32_t>> cols(m.cols, std::vector<uint32_t>(m.rows));
    for (uint32_t j = 0; j < m.cols; ++j)
        for (uint32_t i = 0; i < m.rows; ++i) cols[j][i] = m.at(i, j);
    return howell_of_rows(std::move(cols), m.rows, m.ring);
}

// canonical generators of the column span, returned as columns
inline MatrixOverR howell_form(const MatrixOverR& m) {
    HowellForm h = howell_of_columns(m);
    MatrixOverR out(m.rows, static_cast<uint32_t>(h.rows.size()), m.ring);
    for (uint32_t j = 0; j < out.cols; ++j)
        for (uint32_t i = 0; i < out.rows; ++i) out.at(i, j) = h.rows[j][i];
    return out;
}

} // namespace chainring
