#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chainring/matrix.hpp"
#include "chainring/rng.hpp"
#include "oracles.hpp"

using namespace chainring;

namespace {

MatrixOverR random_matrix(const RingSpec& R, uint32_t n, uint32_t m, Substream& s) {
    MatrixOverR out(n, m, R);
    for (auto& x : out.a) x = static_cast<uint32_t>(s.uniform_below(R.size()));
    return out;
}

// random invertible matrix built from elementary operations, with its
// determinant tracked alongside (swap flips the sign, scaling multiplies)
MatrixOverR random_invertible_tracked(const RingSpec& R, uint32_t n, Substream& s,
                                      uint32_t& det_out) {
    MatrixOverR m = MatrixOverR::identity(n, R);
    auto units = R.enumerate_units();
    uint32_t det = R.one();
    for (uint32_t step = 0; step < 6 * n; ++step) {
        uint32_t i = static_cast<uint32_t>(s.uniform_below(n));
        uint32_t j = static_cast<uint32_t>(s.uniform_below(n));
        switch (s.uniform_below(3)) {
            case 0:
                if (i != j) {
                    detail::row_swap(m, i, j);
                    det = R.neg(det);
                }
                break;
            case 1: {
                uint32_t u = units[s.uniform_below(units.size())];
                detail::row_scale(m, i, u);
                det = R.mul(det, u);
                break;
            }
            default:
                if (i != j)
                    detail::row_sub(m, i, j, static_cast<uint32_t>(s.uniform_below(R.size())));
                break;
        }
    }
    det_out = det;
    return m;
}

// random invertible matrix as a product of elementary operations
MatrixOverR random_invertible(const RingSpec& R, uint32_t n, Substream& s) {
    MatrixOverR m = MatrixOverR::identity(n, R);
    auto units = R.enumerate_units();
    for (uint32_t step = 0; step < 4 * n; ++step) {
        uint32_t i = static_cast<uint32_t>(s.uniform_below(n));
        uint32_t j = static_cast<uint32_t>(s.uniform_below(n));
        switch (s.uniform_below(3)) {
            case 0:
                if (i != j) detail::row_swap(m, i, j);
                break;
            case 1:
                detail::row_scale(m, i, units[s.uniform_below(units.size())]);
                break;
            default:
                if (i != j)
                    detail::row_sub(m, i, j, static_cast<uint32_t>(s.uniform_below(R.size())));
                break;
        }
    }
    return m;
}

MatrixOverR matmul(const MatrixOverR& a, const MatrixOverR& b) {
    const RingSpec& R = a.ring;
    MatrixOverR out(a.rows, b.cols, R);
    for (uint32_t i = 0; i < a.rows; ++i)
        for (uint32_t j = 0; j < b.cols; ++j) {
            uint32_t acc = 0;
            for (uint32_t k = 0; k < a.cols; ++k)
                acc = R.add(acc, R.mul(a.at(i, k), b.at(k, j)));
            out.at(i, j) = acc;
        }
    return out;
}

// cofactor-expansion determinant computed directly in R (division-free, so
// valid over any commutative ring); independent of the Bareiss-on-lift route
uint32_t cofactor_det_rec(const MatrixOverR& m, const std::vector<uint32_t>& rows,
                          const std::vector<uint32_t>& cols) {
    const RingSpec& R = m.ring;
    if (rows.empty()) return R.one();
    uint32_t acc = 0;
    uint32_t r0 = rows[0];
    std::vector<uint32_t> subrows(rows.begin() + 1, rows.end());
    for (size_t c = 0; c < cols.size(); ++c) {
        uint32_t entry = m.at(r0, cols[c]);
        if (!entry) continue;
        std::vector<uint32_t> subcols;
        for (size_t k = 0; k < cols.size(); ++k)
            if (k != c) subcols.push_back(cols[k]);
        uint32_t term = R.mul(entry, cofactor_det_rec(m, subrows, subcols));
        acc = c % 2 ? R.sub(acc, term) : R.add(acc, term);
    }
    return acc;
}

uint32_t cofactor_det(const MatrixOverR& m) {
    std::vector<uint32_t> idx(m.rows);
    for (uint32_t i = 0; i < m.rows; ++i) idx[i] = i;
    return cofactor_det_rec(m, idx, idx);
}

} // namespace

TEST_CASE("smith normal form examples") {
    auto z8 = RingSpec::parse("Z/8");
    CHECK(smith_normal_form(MatrixOverR::identity(3, z8)).exponents ==
          std::vector<uint32_t>{0, 0, 0});
    CHECK(smith_normal_form(MatrixOverR::parse("2,0;0,4", z8)).exponents ==
          std::vector<uint32_t>{1, 2});
    CHECK(smith_normal_form(MatrixOverR::parse("2,3;0,2", z8)).exponents ==
          std::vector<uint32_t>{0, 2});
}

TEST_CASE("smith transforms satisfy U M V = D with invertible U, V") {
    Substream s = Substream::derive(11, {0});
    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2"), RingSpec::parse("Z/9")}) {
        for (int trial = 0; trial < 25; ++trial) {
            uint32_t n = 1 + static_cast<uint32_t>(s.uniform_below(4));
            uint32_t m = 1 + static_cast<uint32_t>(s.uniform_below(4));
            MatrixOverR a = random_matrix(R, n, m, s);
            SmithForm f = smith_normal_form(a, true);
            MatrixOverR d = matmul(matmul(*f.U, a), *f.V);
            for (uint32_t i = 0; i < n; ++i)
                for (uint32_t j = 0; j < m; ++j)
                    CHECK(d.at(i, j) == (i == j ? R.pi(f.exponents[i]) : 0u));
            for (uint32_t k = 0; k + 1 < f.exponents.size(); ++k)
                CHECK(f.exponents[k] <= f.exponents[k + 1]);
            // transforms invertible: their Smith exponents all vanish
            for (auto e : smith_normal_form(*f.U).exponents) CHECK(e == 0);
            for (auto e : smith_normal_form(*f.V).exponents) CHECK(e == 0);
        }
    }
}

TEST_CASE("cokernel examples and free part bookkeeping") {
    auto z8 = RingSpec::parse("Z/8");
    auto z4 = RingSpec::parse("Z/4");
    CHECK(cokernel(MatrixOverR::identity(3, z8)).is_zero());
    CHECK(cokernel(MatrixOverR::parse("2,0;0,4", z8)).str() == "[2,1]");
    CHECK(cokernel(MatrixOverR(2, 3, z4)).str() == "[2,2]");
    CHECK(cokernel(MatrixOverR(3, 1, z4)).free_rank() >= 2); // n - m free copies
}

TEST_CASE("cokernel is invariant under invertible row/column action") {
    Substream s = Substream::derive(12, {0});
    for (auto R : {RingSpec::parse("Z/4"), RingSpec::parse("F2[t]/t^2"), RingSpec::parse("Z/9")}) {
        for (int trial = 0; trial < 30; ++trial) {
            uint32_t n = 2 + static_cast<uint32_t>(s.uniform_below(3));
            uint32_t m = 2 + static_cast<uint32_t>(s.uniform_below(3));
            MatrixOverR a = random_matrix(R, n, m, s);
            MatrixOverR u = random_invertible(R, n, s);
            MatrixOverR v = random_invertible(R, m, s);
            CHECK(cokernel(matmul(matmul(u, a), v)) == cokernel(a));
        }
    }
}

TEST_CASE("span size times cokernel size is |R|^n (brute force)") {
    Substream s = Substream::derive(13, {0});
    for (auto R : {RingSpec::parse("Z/4"), RingSpec::parse("Z/8"), RingSpec::parse("F2[t]/t^2")}) {
        for (int trial = 0; trial < 20; ++trial) {
            uint32_t n = 1 + static_cast<uint32_t>(s.uniform_below(3));
            uint32_t m = 1 + static_cast<uint32_t>(s.uniform_below(9 / n));
            MatrixOverR a = random_matrix(R, n, m, s);
            auto span = oracles::brute_column_span(a);
            Int total = 1;
            for (uint32_t i = 0; i < n; ++i) total *= R.size();
            CHECK(Int(static_cast<unsigned long>(span.size())) * cokernel(a).cardinality() ==
                  total);
            // Howell form spans the same set
            auto h = howell_of_columns(a);
            CHECK(h.span_size() == Int(static_cast<unsigned long>(span.size())));
            for (const auto& v : span) {
                auto r = h.reduce(v);
                bool zero = std::all_of(r.begin(), r.end(), [](uint32_t x) { return x == 0; });
                CHECK(zero);
            }
        }
    }
}

TEST_CASE("determinant examples and the unit criterion") {
    auto z8 = RingSpec::parse("Z/8");
    CHECK(determinant(MatrixOverR::identity(3, z8)).code == 1);
    CHECK(determinant(MatrixOverR::parse("2,3;0,2", z8)).code == 4);
    CHECK(determinant(MatrixOverR::parse("0,0;1,5", z8)).code == 0);
    CHECK_THROWS_AS(determinant(MatrixOverR(2, 3, z8)), usage_error);

    Substream s = Substream::derive(14, {0});
    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2"), RingSpec::parse("Z/9"),
                   RingSpec::parse("F2[t]/t^3")}) {
        for (int trial = 0; trial < 40; ++trial) {
            uint32_t n = 1 + static_cast<uint32_t>(s.uniform_below(4));
            MatrixOverR a = random_matrix(R, n, n, s);
            uint32_t d = determinant(a).code;
            CHECK(d == cofactor_det(a));
            CHECK(R.is_unit(d) == cokernel(a).is_zero());
        }
    }
}

TEST_CASE("determinant at sizes forcing the big-integer lift") {
    // 16x16 over Z/9 exceeds the 63-bit Hadamard budget, so Bareiss runs on
    // GMP integers; the tracked determinant of an elementary product is the
    // independent reference
    Substream s = Substream::derive(18, {0});
    for (auto R : {RingSpec::parse("Z/9"), RingSpec::parse("Z/8")}) {
        for (int trial = 0; trial < 3; ++trial) {
            uint32_t want = 0;
            MatrixOverR u = random_invertible_tracked(R, 16, s, want);
            CHECK(determinant(u).code == want);
        }
    }
}

TEST_CASE("howell form canonicalizes column spans") {
    auto z4 = RingSpec::parse("Z/4");
    auto h1 = howell_form(MatrixOverR::parse("2,0;0,2", z4));
    auto h2 = howell_form(MatrixOverR::parse("2,2;0,2", z4));
    CHECK(h1 == h2);
    CHECK(howell_form(MatrixOverR::identity(2, z4)) == MatrixOverR::identity(2, z4));
    auto hz = howell_form(MatrixOverR(3, 2, z4));
    CHECK(hz.cols == 0);

    Substream s = Substream::derive(15, {0});
    for (auto R : {RingSpec::parse("Z/4"), RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2")}) {
        for (int trial = 0; trial < 30; ++trial) {
            uint32_t n = 1 + static_cast<uint32_t>(s.uniform_below(4));
            uint32_t m = 1 + static_cast<uint32_t>(s.uniform_below(4));
            MatrixOverR a = random_matrix(R, n, m, s);
            MatrixOverR h = howell_form(a);
            // idempotent
            CHECK(howell_form(h) == h);
            // right multiplication by an invertible matrix preserves the span
            MatrixOverR g = random_invertible(R, m, s);
            CHECK(howell_form(matmul(a, g)) == h);
            // appending a span member changes nothing
            auto span = oracles::brute_column_span(a);
            auto it = span.begin();
            std::advance(it, s.uniform_below(span.size()));
            MatrixOverR widened(n, m + 1, R);
            for (uint32_t i = 0; i < n; ++i) {
                for (uint32_t j = 0; j < m; ++j) widened.at(i, j) = a.at(i, j);
                widened.at(i, m) = (*it)[i];
            }
            CHECK(howell_form(widened) == h);
        }
    }
}

TEST_CASE("howell forms agree exactly when spans agree") {
    // both directions: the form is a complete span invariant
    Substream s = Substream::derive(17, {0});
    for (auto R : {RingSpec::parse("Z/4"), RingSpec::parse("F2[t]/t^2"), RingSpec::parse("Z/9")}) {
        std::vector<MatrixOverR> pool;
        for (int trial = 0; trial < 16; ++trial)
            pool.push_back(random_matrix(R, 2, 1 + static_cast<uint32_t>(s.uniform_below(3)), s));
        std::vector<std::set<std::vector<uint32_t>>> spans;
        std::vector<MatrixOverR> forms;
        for (const auto& a : pool) {
            spans.push_back(oracles::brute_column_span(a));
            forms.push_back(howell_form(a));
        }
        for (size_t a = 0; a < pool.size(); ++a)
            for (size_t b = a + 1; b < pool.size(); ++b)
                CHECK((spans[a] == spans[b]) == (forms[a] == forms[b]));
    }
}

TEST_CASE("howell reduction labels cosets consistently") {
    Substream s = Substream::derive(16, {0});
    for (auto R : {RingSpec::parse("Z/4"), RingSpec::parse("F2[t]/t^2")}) {
        for (int trial = 0; trial < 10; ++trial) {
            uint32_t n = 2;
            MatrixOverR a = random_matrix(R, n, 2, s);
            auto h = howell_of_columns(a);
            auto span = oracles::brute_column_span(a);
            // v ~ w iff v - w in span iff reduce(v) == reduce(w)
            std::vector<std::vector<uint32_t>> all;
            std::vector<uint32_t> v(n);
            for (uint32_t x = 0; x < R.size(); ++x)
                for (uint32_t y = 0; y < R.size(); ++y) all.push_back({x, y});
            for (const auto& a1 : all)
                for (const auto& a2 : all) {
                    std::vector<uint32_t> diff{R.sub(a1[0], a2[0]), R.sub(a1[1], a2[1])};
                    bool same_coset = span.count(diff) > 0;
                    CHECK(same_coset == (h.reduce(a1) == h.reduce(a2)));
                }
        }
    }
}

TEST_CASE("matrix text form round-trips") {
    auto z8 = RingSpec::parse("Z/8");
    auto m = MatrixOverR::parse("2,3;0,2", z8);
    CHECK(m.str() == "2,3;0,2");
    CHECK(MatrixOverR::parse(m.str(), z8) == m);
    CHECK_THROWS_AS(MatrixOverR::parse("1,2;3", z8), usage_error);
    CHECK_THROWS_AS(MatrixOverR::parse("9", z8), usage_error);
}
