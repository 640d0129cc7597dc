#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsemi/io.hpp>
#include <unsemi/lift.hpp>
#include <unsemi/parser.hpp>

#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace unsemi;
using testutil::xvars;

namespace {

Lift compile_text(const std::string& text) { return compile(to_nnf(parse_formula(text))); }

/// Oracle grid check of the completeness half: every exact in-set grid point
/// must admit a witness with tiny residual. Grid is rational, step hi-lo/(n-1).
void check_completeness_on_grid(const Lift& L, const FormulaPtr& f, Rational lo, Rational hi,
                                int n, double tol = 1e-10) {
    Rational step = (hi - lo) / Rational(n - 1);
    std::size_t m = L.base_dim;
    REQUIRE(m <= 2);
    std::vector<std::vector<Rational>> pts;
    if (m == 1) {
        for (int i = 0; i < n; ++i) pts.push_back({lo + step * i});
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pts.push_back({lo + step * i, lo + step * j});
    }
    for (const auto& x : pts) {
        if (!eval_point(*f, x)) continue;
        SynthResult s = synth_witness(L, x);
        std::vector<double> xf;
        for (const auto& c : x) xf.push_back(to_double(c));
        CHECK(residual(L, xf, s.aux) <= tol);
    }
}

std::vector<int> witness_slots(const Lift& L) {
    std::vector<int> slots;
    if (L.witness) detail::collect_slots(*L.witness, slots);
    return slots;
}

} // namespace

TEST_CASE("lift_eq") {
    auto vars = xvars(1);
    Polynomial x = Polynomial::variable(vars, 0);
    Lift L = lift_eq(x);
    CHECK(L.aux_dim == 0);
    CHECK(L.P == x);
    auto s = synth_witness(L, {Rational(0)});
    CHECK(s.exact);
    CHECK(s.aux.empty());
    CHECK_THROWS_AS(synth_witness(L, {Rational(1)}), WitnessUndefined);

    // unit circle projects to itself
    auto vars2 = xvars(2);
    Polynomial circ = Polynomial::variable(vars2, 0).pow(2) +
                      Polynomial::variable(vars2, 1).pow(2) -
                      Polynomial::constant(vars2, Rational(1));
    Lift C = lift_eq(circ);
    CHECK(C.P == circ);
    CHECK(C.aux_dim == 0);

    // empty set compiles fine
    Polynomial never = x * x + Polynomial::constant(vars, Rational(1));
    Lift E = lift_eq(never);
    CHECK(E.P == never);
}

TEST_CASE("lift_ge") {
    auto vars = xvars(1);
    Polynomial x = Polynomial::variable(vars, 0);
    Polynomial one = Polynomial::constant(vars, Rational(1));
    AuxAllocator alloc;
    Lift L = lift_ge(one - x * x, alloc);
    CHECK(L.aux_dim == 1);
    // endpoints have t = 0, interior +-sqrt(1-x^2)
    auto s = synth_witness(L, {Rational(1)});
    CHECK(s.exact);
    CHECK(s.aux_exact[0] == 0);
    auto s2 = synth_witness(L, {Rational(0)});
    CHECK(s2.exact);
    CHECK(s2.aux_exact[0] == 1);
    CHECK_THROWS_AS(synth_witness(L, {Rational(2)}), WitnessUndefined);

    AuxAllocator a2;
    Lift parab = lift_ge(x, a2);
    auto s3 = synth_witness(parab, {Rational(4)});
    CHECK(s3.aux_exact[0] == 2);
}

TEST_CASE("lift_ne") {
    auto vars = xvars(1);
    Polynomial x = Polynomial::variable(vars, 0);
    AuxAllocator alloc;
    Lift L = lift_ne(x, alloc);
    auto s = synth_witness(L, {Rational(2)});
    CHECK(s.exact);
    CHECK(s.aux_exact[0] == Rational(1, 2));
    CHECK(residual_exact(L, {Rational(2)}, s.aux_exact) == 0);
    CHECK_THROWS_AS(synth_witness(L, {Rational(0)}), WitnessUndefined);

    AuxAllocator a2;
    Lift nonzero = lift_ne(x * x + Polynomial::constant(vars, Rational(1)), a2);
    auto s2 = synth_witness(nonzero, {Rational(1)});
    CHECK(s2.aux_exact[0] == Rational(1, 2)); // 1/(1+1)
}

TEST_CASE("lift_gt") {
    auto vars = xvars(1);
    Polynomial x = Polynomial::variable(vars, 0);
    AuxAllocator alloc;
    Lift L = lift_gt(x, alloc);
    auto s = synth_witness(L, {Rational(4)});
    CHECK(s.exact);
    CHECK(s.aux_exact[0] == Rational(1, 2));
    CHECK(residual_exact(L, {Rational(4)}, s.aux_exact) == 0);

    // p = -x1^2: t^2 p <= 0 < 1 everywhere, so the projection is empty;
    // the infimum of |P| over the aux box is 1
    AuxAllocator a2;
    Lift E = lift_gt(-(x * x), a2);
    for (double t = -10; t <= 10; t += 0.7)
        CHECK(std::abs(E.P.eval(std::vector<double>{0.5, t})) >= 1.0);

    AuxAllocator a3;
    Lift full = lift_gt(Polynomial::constant(vars, Rational(1)), a3);
    auto s2 = synth_witness(full, {Rational(-7)});
    CHECK(s2.aux_exact[0] == 1);
}

TEST_CASE("lift_and") {
    // [-1,1] n [0,inf) = [0,1], oracle grid check on [-2,2] step 0.01
    auto f = parse_formula("1 - x1^2 >= 0 & x1 >= 0");
    Lift L = compile(to_nnf(f));
    check_completeness_on_grid(L, f, Rational(-2), Rational(2), 401);
    CHECK(L.aux_dim == 2);

    // conjunction with full space preserves projection on grid points
    auto fa = parse_formula("1 - x1^2 >= 0");
    auto fb = parse_formula("1 - x1^2 >= 0 & 0 = 0");
    Lift La = compile(to_nnf(fa));
    Lift Lb = compile(to_nnf(fb));
    for (int i = -20; i <= 20; ++i) {
        Rational x(i, 10);
        CHECK(eval_point(*fa, {x}) == eval_point(*fb, {x}));
        if (eval_point(*fb, {x})) {
            auto s = synth_witness(Lb, {x});
            CHECK(residual(Lb, {to_double(x)}, s.aux) <= 1e-10);
        }
    }

    // (x1=0) & (x1-1=0) is empty: P = x^2 + (x-1)^2 has infimum 1/2
    Lift E = compile_text("x1 = 0 & x1 - 1 = 0");
    CHECK(E.aux_dim == 0);
    for (double x = -3; x <= 3; x += 0.01)
        CHECK(E.P.eval(std::vector<double>{x}) >= 0.5 - 1e-12);
}

TEST_CASE("lift_or") {
    SUBCASE("two points, no aux: product of squares") {
        Lift L = compile_text("x1 = 0 | x1 - 1 = 0");
        CHECK(L.aux_dim == 0);
        auto vars = xvars(1);
        Polynomial x = Polynomial::variable(vars, 0);
        Polynomial expect = (x * x) * ((x - Polynomial::constant(vars, Rational(1))) *
                                       (x - Polynomial::constant(vars, Rational(1))));
        CHECK(L.P == expect);
    }
    SUBCASE("[-1,0] u [0,1] = [-1,1] on 201-point grid") {
        auto f = parse_formula("(x1 >= 0 & 1 - x1 >= 0) | (-x1 >= 0 & x1 + 1 >= 0)");
        Lift L = compile(to_nnf(f));
        check_completeness_on_grid(L, f, Rational(-2), Rational(2), 201);
    }
    SUBCASE("empty union A behaves as A pointwise") {
        auto f = parse_formula("x1^2 + 1 = 0 | x1 >= 0");
        Lift L = compile(to_nnf(f));
        for (int i = -10; i <= 10; ++i) {
            Rational x(i, 5);
            bool in = eval_point(*f.get(), {x});
            CHECK(in == (x >= 0));
            if (in) {
                auto s = synth_witness(L, {x});
                CHECK(residual(L, {to_double(x)}, s.aux) <= 1e-10);
            }
        }
    }
}

TEST_CASE("compile examples") {
    SUBCASE("interval") {
        Lift L = compile_text("x1 >= 0 & 1 - x1 >= 0");
        CHECK(L.aux_dim == 2);
        CHECK(L.P.degree() == 4);
        // P = (t1^2 - x1)^2 + (t2^2 - 1 + x1)^2
        auto vars = std::vector<std::string>{"x1", "t1", "t2"};
        Polynomial x = Polynomial::variable(vars, 0);
        Polynomial t1 = Polynomial::variable(vars, 1);
        Polynomial t2 = Polynomial::variable(vars, 2);
        Polynomial one = Polynomial::constant(vars, Rational(1));
        Polynomial expect = (t1 * t1 - x) * (t1 * t1 - x) +
                            (t2 * t2 - one + x) * (t2 * t2 - one + x);
        CHECK(L.P == expect);
    }
    SUBCASE("single equation has no aux") {
        Lift L = compile_text("x1 = 0");
        CHECK(L.aux_dim == 0);
        CHECK(L.P.degree() == 1);
    }
    SUBCASE("annulus") {
        auto f = parse_formula("x1^2 + x2^2 - 1 >= 0 & 4 - x1^2 - x2^2 >= 0");
        Lift L = compile(to_nnf(f));
        CHECK(L.aux_dim == 2);
        check_completeness_on_grid(L, f, Rational(-3), Rational(3), 61);
    }
}

TEST_CASE("witness aux slots partition the aux block") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        // depth 2: the or-combinator squares its operands, so deep random
        // formulas explode combinatorially and test nothing extra
        auto f = testutil::rand_formula(rng, 2, 2);
        Lift L = compile(to_nnf(f));
        auto slots = witness_slots(L);
        std::set<int> uniq(slots.begin(), slots.end());
        CHECK(uniq.size() == slots.size());
        CHECK(slots.size() == L.aux_dim);
        for (int s : slots) {
            CHECK(s >= 0);
            CHECK(s < static_cast<int>(L.aux_dim));
        }
    }
}

TEST_CASE("degree accounting per construction") {
    auto dand = [](const Lift& a, const Lift& b) {
        return 2 * std::max(a.P.degree(), b.P.degree());
    };
    auto dor = [](const Lift& a, const Lift& b) {
        auto fa = b.aux_dim > 0 ? std::max(2 * a.P.degree(), 2u) : 2 * a.P.degree();
        auto fb = a.aux_dim > 0 ? std::max(2 * b.P.degree(), 2u) : 2 * b.P.degree();
        return fa + fb;
    };
    AuxAllocator alloc;
    auto vars = xvars(1);
    Polynomial x = Polynomial::variable(vars, 0);
    Polynomial one = Polynomial::constant(vars, Rational(1));
    Lift a = lift_ge(one - x * x, alloc);
    Lift b = lift_ge(x, alloc);
    CHECK(lift_and(a, b).P.degree() == dand(a, b));
    CHECK(lift_or(a, b).P.degree() == dor(a, b));

    AuxAllocator a2;
    Lift c = lift_eq(x);
    Lift d = lift_gt(x * x * x - one, a2);
    CHECK(lift_and(c, d).P.degree() == dand(c, d));
    CHECK(lift_or(c, d).P.degree() == dor(c, d));
}

TEST_CASE("compile determinism: byte-identical serialization") {
    std::string text = "(x1 >= 0 & 1 - x1 >= 0) | x1 + 2 = 0";
    Lift L1 = compile(to_nnf(parse_formula(text)));
    Lift L2 = compile(to_nnf(parse_formula(text)));
    CHECK(lift_json(L1).dump() == lift_json(L2).dump());
}

TEST_CASE("lift serialization round trip") {
    std::mt19937_64 rng(37);
    for (int i = 0; i < 30; ++i) {
        auto f = testutil::rand_formula(rng, 2, 2);
        Lift L = compile(to_nnf(f));
        Lift R = lift_from_json(Json::parse(lift_json(L).dump()));
        CHECK(lift_json(R).dump() == lift_json(L).dump());
        // behavioral check: same witness on a shared in-set point, if any
        for (int t = 0; t < 20; ++t) {
            auto x = testutil::rand_point(rng, 2);
            if (!L.source || !eval_point(*L.source, x)) continue;
            auto s1 = synth_witness(L, x);
            auto s2 = synth_witness(R, x);
            CHECK(s1.aux == s2.aux);
            break;
        }
    }
}

TEST_CASE("exact witnesses for EQ/NE-only formulas") {
    std::mt19937_64 rng(41);
    int done = 0;
    while (done < 300) {
        auto x = testutil::rand_point(rng, 2);
        auto f = testutil::rand_eqne_formula_true_at(rng, 2, x, 2, true);
        REQUIRE(eval_point(*f, x));
        Lift L = compile(to_nnf(f));
        SynthResult s = synth_witness(L, x);
        CHECK(s.exact);
        CHECK(residual_exact(L, x, s.aux_exact) == 0);
        ++done;
    }
}

TEST_CASE("naive ell>0 difference over-projects (restriction regression)") {
    // Y = R via p == 0 (aux y unused), Z = {x : exists z, xz - 1 = 0} = R \ {0}.
    // Naive Lemma-style difference lift: t(xz - 1) - 1 = 0 over (x, z, t).
    auto vars = std::vector<std::string>{"x1", "z", "t"};
    Polynomial x = Polynomial::variable(vars, 0);
    Polynomial z = Polynomial::variable(vars, 1);
    Polynomial t = Polynomial::variable(vars, 2);
    Polynomial one = Polynomial::constant(vars, Rational(1));
    Polynomial naive = t * (x * z - one) - one;
    // The point (1/2, 0, -1) lies on it: t q = (-1)(-1) = 1.
    CHECK(naive.eval({Rational(1, 2), Rational(0), Rational(-1)}) == 0);
    // so 1/2 is in the naive projection even though Y - Z = {0}.

    // The compiler's NNF route gives a lift whose projection is exactly {0}.
    auto f = parse_formula("0 = 0 \\ x1 != 0");
    Lift L = compile(to_nnf(f));
    for (int i = -200; i <= 200; ++i) {
        Rational xi(i, 100);
        CHECK(eval_point(*f, {xi}) == (xi == 0));
    }
    auto s = synth_witness(L, {Rational(0)});
    CHECK(residual_exact(L, {Rational(0)}, s.aux_exact) == 0);
    CHECK_THROWS_AS(synth_witness(L, {Rational(1, 2)}), WitnessUndefined);
}

TEST_CASE("or-witness fills first true branch, zeroes the other") {
    auto f = parse_formula("x1 != 0 | 1 - x1^2 >= 0");
    Lift L = compile(to_nnf(f));
    REQUIRE(L.aux_dim == 2);
    // x = 1/2 lies in both branches: left (ne) filled, right zeroed
    auto s = synth_witness(L, {Rational(1, 2)});
    CHECK(s.aux_exact[0] == Rational(2));
    CHECK(s.aux_exact[1] == 0);
    // x = 0 lies only in the right branch: left zeroed
    auto s2 = synth_witness(L, {Rational(0)});
    CHECK(s2.aux_exact[0] == 0);
    CHECK(s2.aux_exact[1] == 1);
}
