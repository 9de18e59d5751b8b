#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chainring/measures.hpp"

using namespace chainring;

namespace {

std::shared_ptr<const ConcreteModule> mod_of(const char* ring, std::vector<uint32_t> lam) {
    auto R = RingSpec::parse(ring);
    return std::make_shared<ConcreteModule>(ModuleType(std::move(lam), R));
}

bool equal_measures(const SignedMeasure& a, const SignedMeasure& b) {
    for (size_t i = 0; i < a.w.size(); ++i)
        if (a.w[i] != b.w[i]) return false;
    return true;
}

} // namespace

TEST_CASE("norms, inner products, tv") {
    auto m = mod_of("Z/2", {1});
    auto d0 = SignedMeasure::delta(m, 0);
    CHECK(inner_product(d0, d0) == 1);
    CHECK(tv_distance(SignedMeasure::uniform(m), d0) == Rational(1, 2));
    auto m4 = mod_of("Z/4", {2});
    CHECK(l2_norm_sq(SignedMeasure::uniform(m4)) == Rational(1, 4));
    auto other = SignedMeasure::delta(mod_of("Z/4", {1, 1}), 0);
    CHECK_THROWS_AS(inner_product(SignedMeasure::delta(m4, 0), other), usage_error);
}

TEST_CASE("proj averages over cosets") {
    auto m = mod_of("Z/4", {2});
    auto d1 = SignedMeasure::delta(m, 1);
    // proj_M sends any probability measure to uniform
    auto pm = proj(m->full_subgroup(), d1);
    CHECK(equal_measures(pm, SignedMeasure::uniform(m)));
    // proj_0 is the identity
    CHECK(equal_measures(proj(m->trivial_subgroup(), d1), d1));
    // proj_{2M}(delta_1) = (delta_1 + delta_3)/2
    auto p = proj(m->submodule_from({2}), d1);
    CHECK(p.w[0] == 0);
    CHECK(p.w[1] == Rational(1, 2));
    CHECK(p.w[2] == 0);
    CHECK(p.w[3] == Rational(1, 2));
    // mass preserved, idempotent, composition law
    CHECK(p.mass() == 1);
    auto n1 = m->submodule_from({2});
    CHECK(equal_measures(proj(n1, proj(n1, d1)), proj(n1, d1)));
    // proj needs a genuine submodule
    auto f4 = mod_of("F4[t]/t", {1});
    Subgroup line = f4->subgroup_from({1}); // F2 subset of F4, not F4-stable
    CHECK_FALSE(line.is_R_module);
    CHECK_THROWS_AS(proj(line, SignedMeasure::delta(f4, 0)), usage_error);
}

TEST_CASE("proj composition across different submodules") {
    auto m = mod_of("Z/4", {2, 1});
    Substream s = Substream::derive(21, {0});
    auto subs = m->enumerate_submodules();
    for (int trial = 0; trial < 5; ++trial) {
        auto nu = random_signed_measure(m, s);
        for (const auto& n1 : subs)
            for (const auto& n2 : subs) {
                std::vector<uint32_t> gens = n1.elems;
                gens.insert(gens.end(), n2.elems.begin(), n2.elems.end());
                auto nsum = m->submodule_from(gens);
                CHECK(equal_measures(proj(n1, proj(n2, nu)), proj(nsum, nu)));
            }
    }
}

TEST_CASE("decomposition of delta_0 on Z/4 matches the hand computation") {
    auto m = mod_of("Z/4", {2});
    MeasureDecomposer dec(m);
    auto comps = dec.decompose(SignedMeasure::delta(m, 0));
    REQUIRE(comps.size() == 3);
    // ordered bottom-up in the lattice: N = 0, N = 2M, N = M
    CHECK(comps[0].component.w == std::vector<Rational>{Rational(1, 2), 0, Rational(-1, 2), 0});
    CHECK(comps[1].component.w ==
          std::vector<Rational>{Rational(1, 4), Rational(-1, 4), Rational(1, 4), Rational(-1, 4)});
    CHECK(comps[2].component.w ==
          std::vector<Rational>{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)});
    CHECK(comps[0].ambient_dim == 2);
    CHECK(comps[1].ambient_dim == 1);
    CHECK(comps[2].ambient_dim == 1);
}

TEST_CASE("uniform measure decomposes into the total-mass component only") {
    auto m = mod_of("Z/4", {2, 1});
    MeasureDecomposer dec(m);
    auto comps = dec.decompose(SignedMeasure::uniform(m));
    for (const auto& c : comps) {
        if (c.j == 0)
            CHECK(equal_measures(c.component, SignedMeasure::uniform(m)));
        else
            CHECK(c.component.is_zero());
    }
}

TEST_CASE("chain-shortcut components agree with full Moebius inversion") {
    Substream s = Substream::derive(22, {0});
    for (const char* ring : {"Z/4", "Z/8", "F4[t]/t", "F2[t]/t^2"}) {
        auto R = RingSpec::parse(ring);
        for (const auto& t : enumerate_types_up_to_card(R, 16)) {
            if (t.is_zero()) continue;
            auto m = std::make_shared<ConcreteModule>(t);
            MeasureDecomposer dec(m);
            for (int trial = 0; trial < 5; ++trial) {
                auto nu = random_signed_measure(m, s);
                auto comps = dec.decompose(nu);
                for (const auto& c : comps)
                    CHECK(equal_measures(c.component, dec.component_via_mobius(nu, c.n_index)));
                // non-Fourier N: the Moebius component vanishes
                for (size_t idx = 0; idx < dec.lattice().count(); ++idx)
                    if (!dec.quotient_type(idx).is_cyclic())
                        CHECK(dec.component_via_mobius(nu, idx).is_zero());
            }
        }
    }
}

TEST_CASE("reconstruction, orthogonality, annihilation") {
    Substream s = Substream::derive(23, {0});
    for (const char* ring : {"Z/4", "F4[t]/t"}) {
        auto R = RingSpec::parse(ring);
        for (const auto& t : enumerate_types_up_to_card(R, 16)) {
            if (t.is_zero()) continue;
            auto m = std::make_shared<ConcreteModule>(t);
            MeasureDecomposer dec(m);
            const auto& lat = dec.lattice();
            for (int trial = 0; trial < 20; ++trial) {
                auto nu = random_signed_measure(m, s);
                auto comps = dec.decompose(nu);
                SignedMeasure sum = SignedMeasure::zero(m);
                for (const auto& c : comps) sum += c.component;
                CHECK(equal_measures(sum, nu));
                for (size_t a = 0; a < comps.size(); ++a)
                    for (size_t b = a + 1; b < comps.size(); ++b)
                        CHECK(inner_product(comps[a].component, comps[b].component) == 0);
                // proj_{N'} nu_N = 0 for every submodule N' not inside N
                for (const auto& c : comps)
                    for (size_t idx = 0; idx < lat.count(); ++idx) {
                        if (lat.leq(idx, c.n_index)) continue;
                        CHECK(proj(lat.submodules()[idx], c.component).is_zero());
                    }
            }
        }
    }
}

TEST_CASE("fourier characterization and dimension audit") {
    auto z4 = RingSpec::parse("Z/4");
    auto f4 = RingSpec::parse("F4[t]/t");
    CHECK(fourier_module_test(ModuleType({1}, z4)));
    CHECK(fourier_module_test(ModuleType::zero(z4)));
    CHECK_FALSE(fourier_module_test(ModuleType({1, 1}, z4)));

    // dim V(k, 0) = #k - 1
    CHECK(space_dimension_formula(ModuleType({1}, f4)) == 3);
    CHECK(dim_v0_constructed(ModuleType({1}, f4)) == 3);
    // dim V(M, 0) = |(Z/4)^*| = 2 for M = Z/4
    CHECK(space_dimension_formula(ModuleType({2}, z4)) == 2);
    CHECK(dim_v0_constructed(ModuleType({2}, z4)) == 2);
    // k^n is not Fourier for n > 1
    CHECK(dim_v0_constructed(ModuleType({1, 1}, z4)) == 0);
    CHECK(dim_v0_constructed(ModuleType({1, 1}, f4)) == 0);

    for (auto R : {z4, f4, RingSpec::parse("Z/8")}) {
        for (const auto& t : enumerate_types_up_to_card(R, 64)) {
            if (t.is_zero()) continue;
            ConcreteModule m(t);
            SubmoduleLattice lat(m);
            // constructed dimensions per distinct quotient type
            std::map<std::string, Int> dim_cache;
            Int total = 0;
            for (size_t idx = 0; idx < lat.count(); ++idx) {
                ModuleType q = m.quotient_type(lat.submodules()[idx]);
                auto [it, fresh] = dim_cache.try_emplace(q.str(), 0);
                if (fresh) {
                    it->second = dim_v0_constructed(q);
                    CHECK(it->second == space_dimension_formula(q));
                    CHECK((it->second != 0) == q.is_cyclic());
                }
                total += it->second;
            }
            CAPTURE(R.notation());
            CAPTURE(t.str());
            CHECK(total == Int(static_cast<unsigned long>(m.size())));
        }
    }
}

TEST_CASE("dualizing submodules omega_I") {
    // omega = R; omega_I = pi^{e-j} R has |omega_I| = |R/I| = q^j, and
    // I -> omega_I is an inclusion-reversing bijection
    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2")}) {
        ConcreteModule rm(ModuleType({R.e()}, R));
        std::vector<Subgroup> omega;
        for (uint32_t j = 0; j <= R.e(); ++j) {
            Subgroup s = dualizing_submodule(rm, j);
            Int want = 1;
            for (uint32_t k = 0; k < j; ++k) want *= R.q();
            CHECK(Int(static_cast<unsigned long>(s.size())) == want);
            if (!omega.empty()) CHECK(omega.back().contains_all(s) == false);
            for (const auto& prev : omega) CHECK(s.contains_all(prev));
            omega.push_back(std::move(s));
        }
        // distinct ideals give distinct submodules
        for (size_t a = 0; a < omega.size(); ++a)
            for (size_t b = a + 1; b < omega.size(); ++b)
                CHECK_FALSE(omega[a].same_elements(omega[b]));
        // omega_I is R as a module over R/I: type [j]
        for (uint32_t j = 1; j <= R.e(); ++j)
            CHECK(rm.subgroup_type(dualizing_submodule(rm, j)).str() ==
                  ModuleType({j}, R).str());
    }
    ConcreteModule wrong(ModuleType({1, 1}, RingSpec::parse("Z/4")));
    CHECK_THROWS_AS(dualizing_submodule(wrong, 1), usage_error);
}

TEST_CASE("chi classes partition the surjections by unit orbits") {
    auto z4 = RingSpec::parse("Z/4");
    auto R_as_mod = std::make_shared<ConcreteModule>(ModuleType({2}, z4));
    CHECK(chi_classes(*R_as_mod, 1).size() == 1);
    auto k2 = std::make_shared<ConcreteModule>(ModuleType({1, 1}, RingSpec::parse("Z/2")));
    CHECK(chi_classes(*k2, 1).size() == 3);
    auto zero = std::make_shared<ConcreteModule>(ModuleType::zero(z4));
    CHECK(chi_classes(*zero, 1).empty());

    for (const char* ring : {"Z/4", "F4[t]/t", "Z/8"}) {
        auto R = RingSpec::parse(ring);
        for (const auto& t : enumerate_types_up_to_card(R, 16)) {
            if (t.is_zero()) continue;
            ConcreteModule m(t);
            for (uint32_t j = 1; j <= R.e(); ++j) {
                size_t classes = chi_classes(m, j).size();
                size_t surs = sur_to_cyclic_count(m, j);
                Int units = R.q() - 1;
                for (uint32_t k = 1; k < j; ++k) units *= R.q();
                CHECK(Int(static_cast<unsigned long>(classes)) * units ==
                      Int(static_cast<unsigned long>(surs)));
            }
        }
    }
}

TEST_CASE("decomposition components carry the lex-least kernel surjection") {
    auto m = mod_of("Z/4", {2, 1});
    MeasureDecomposer dec(m);
    auto comps = dec.decompose(SignedMeasure::delta(m, 0));
    for (const auto& c : comps) {
        if (c.j == 0) continue;
        const Subgroup& n = dec.lattice().submodules()[c.n_index];
        REQUIRE(c.chi.size() == m->factors());
        CHECK(hom_is_surjective(*m, c.chi, c.j));
        for (uint32_t x = 0; x < m->size(); ++x)
            CHECK((apply_hom_to_cyclic(*m, c.chi, c.j, x) == 0) == n.contains(x));
    }
}

TEST_CASE("main inequality and the L1 bound on probability measures") {
    auto m = mod_of("Z/4", {2});
    MeasureDecomposer dec(m);
    // nu = 0
    auto zero = SignedMeasure::zero(m);
    for (uint32_t j = 0; j <= 2; ++j) {
        auto rep = dec.verify_main_inequality(zero, j);
        CHECK(rep.holds);
        CHECK(rep.lhs == 0);
    }
    // nu = delta_0 - uniform at I = m
    auto nu = SignedMeasure::delta(m, 0);
    nu -= SignedMeasure::uniform(m);
    CHECK(dec.verify_main_inequality(nu, 1).holds);
    // delta_0: |nu_chi|_1 = 1 <= sqrt(|im chi|) in {1, sqrt 2, 2}
    auto rep = dec.verify_l1_bound(SignedMeasure::delta(m, 0));
    CHECK(rep.holds);
    for (const auto& v : rep.l1_values) CHECK(v == 1);
    CHECK_THROWS_AS(dec.verify_l1_bound(nu), usage_error); // not a probability

    Substream s = Substream::derive(24, {0});
    for (const char* ring : {"Z/4", "F4[t]/t", "Z/8", "F2[t]/t^2"}) {
        auto R = RingSpec::parse(ring);
        for (const auto& t : enumerate_types_up_to_card(R, 16)) {
            if (t.is_zero()) continue;
            auto mm = std::make_shared<ConcreteModule>(t);
            MeasureDecomposer d2(mm);
            for (int trial = 0; trial < 40; ++trial) {
                auto rnd = random_signed_measure(mm, s);
                for (uint32_t j = 0; j <= R.e(); ++j) CHECK(d2.verify_main_inequality(rnd, j).holds);
                CHECK(d2.verify_l1_bound(random_probability_measure(mm, s)).holds);
            }
        }
    }
}

TEST_CASE("decomposer refuses modules over the lattice cap") {
    auto big = std::make_shared<ConcreteModule>(
        ModuleType({2, 2, 2, 2, 2}, RingSpec::parse("Z/4")));
    CHECK(big->size() == 1024);
    CHECK_THROWS_AS(MeasureDecomposer dec(big), resource_error);
}

TEST_CASE("isotypic projections") {
    auto m = mod_of("Z/4", {2});
    MeasureDecomposer dec(m);
    Substream s = Substream::derive(25, {0});
    auto nu = random_signed_measure(m, s);
    // I = (1): the total-mass piece, uniform * mass
    auto w0 = dec.isotypic_projection(nu, 0);
    auto expect = SignedMeasure::uniform(m);
    for (auto& x : expect.w) x *= nu.mass();
    CHECK(equal_measures(w0, expect));
    // completeness over all ideals
    SignedMeasure total = SignedMeasure::zero(m);
    for (uint32_t j = 0; j <= 2; ++j) total += dec.isotypic_projection(nu, j);
    CHECK(equal_measures(total, nu));
    // W-spaces pairwise orthogonal
    for (uint32_t j1 = 0; j1 <= 2; ++j1)
        for (uint32_t j2 = j1 + 1; j2 <= 2; ++j2)
            CHECK(inner_product(dec.isotypic_projection(nu, j1),
                                dec.isotypic_projection(nu, j2)) == 0);
    // isotypic piece dimensions on Z/4 are 1, 1, 2
    CHECK(dec.unit_count(0) == 1);
    CHECK(space_dimension_formula(ModuleType({1}, RingSpec::parse("Z/4"))) == 1);
    CHECK(space_dimension_formula(ModuleType({2}, RingSpec::parse("Z/4"))) == 2);
}
