#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsemi/gadget.hpp>
#include <unsemi/lift.hpp>
#include <unsemi/parser.hpp>
#include <unsemi/verify.hpp>

#include <cmath>

using namespace unsemi;

namespace {

/// m = 1, k = 1 lift with two isolated variety points (0,0) and (0,1):
/// P = x^2 + (y(y-1))^2, projection {0}, witness pins y = 0.
Lift two_point_lift() {
    std::vector<std::string> vars{"x1", "t1"};
    Polynomial x = Polynomial::variable(vars, 0);
    Polynomial y = Polynomial::variable(vars, 1);
    Polynomial one = Polynomial::constant(vars, Rational(1));
    Polynomial q = y * (y - one);
    Lift L;
    L.P = x * x + q * q;
    L.base_dim = 1;
    L.aux_dim = 1;
    L.source = parse_formula("x1 = 0");
    L.source_text = "x1 = 0";
    L.witness = WitnessNode::fixed_leaf(0, Rational(0));
    return L;
}

/// Three isolated points (0,0), (0,1), (0,2): P = x^2 + (y(y-1)(y-2))^2.
Lift three_point_lift() {
    std::vector<std::string> vars{"x1", "t1"};
    Polynomial x = Polynomial::variable(vars, 0);
    Polynomial y = Polynomial::variable(vars, 1);
    Polynomial one = Polynomial::constant(vars, Rational(1));
    Polynomial two = Polynomial::constant(vars, Rational(2));
    Polynomial q = y * (y - one) * (y - two);
    Lift L;
    L.P = x * x + q * q;
    L.base_dim = 1;
    L.aux_dim = 1;
    L.source = parse_formula("x1 = 0");
    L.source_text = "x1 = 0";
    L.witness = WitnessNode::fixed_leaf(0, Rational(0));
    return L;
}

VerifyConfig gadget_config() {
    VerifyConfig cfg;
    cfg.box = {{Rational(-2), Rational(2)}};
    return cfg;
}

} // namespace

TEST_CASE("build_normalizing_affine") {
    SUBCASE("already normalized") {
        AffineMap A = build_normalizing_affine({Rational(0), Rational(0)},
                                               {Rational(1), Rational(0)});
        CHECK(A.apply({Rational(0), Rational(0)}) ==
              std::vector<Rational>{Rational(0), Rational(0)});
        CHECK(A.apply({Rational(1), Rational(0)}) ==
              std::vector<Rational>{Rational(1), Rational(0)});
    }
    SUBCASE("k = 1 scaling") {
        AffineMap A = build_normalizing_affine({Rational(2)}, {Rational(5)});
        CHECK(A.apply({Rational(2)}) == std::vector<Rational>{Rational(0)});
        CHECK(A.apply({Rational(5)}) == std::vector<Rational>{Rational(1)});
    }
    SUBCASE("k = 2 with pivot on second coordinate") {
        AffineMap A = build_normalizing_affine({Rational(1), Rational(1)},
                                               {Rational(1), Rational(3)});
        CHECK(A.apply({Rational(1), Rational(1)}) ==
              std::vector<Rational>{Rational(0), Rational(0)});
        CHECK(A.apply({Rational(1), Rational(3)}) ==
              std::vector<Rational>{Rational(1), Rational(0)});
        CHECK(A.determinant() != 0);
    }
    SUBCASE("exact anchoring on random pairs") {
        std::mt19937_64 rng(53);
        for (int i = 0; i < 200; ++i) {
            std::size_t k = 1 + rng() % 4;
            std::vector<Rational> y1, y2;
            for (std::size_t j = 0; j < k; ++j) {
                y1.push_back(Rational(static_cast<long>(rng() % 19) - 9,
                                      static_cast<long>(rng() % 4) + 1));
                y2.push_back(Rational(static_cast<long>(rng() % 19) - 9,
                                      static_cast<long>(rng() % 4) + 1));
            }
            if (y1 == y2) continue;
            AffineMap A = build_normalizing_affine(y1, y2);
            CHECK(A.apply(y1) == std::vector<Rational>(k, Rational(0)));
            auto e1 = std::vector<Rational>(k, Rational(0));
            e1[0] = 1;
            CHECK(A.apply(y2) == e1);
            CHECK(A.determinant() != 0);
        }
    }
    SUBCASE("degenerate inputs rejected") {
        CHECK_THROWS_AS(build_normalizing_affine({Rational(3)}, {Rational(3)}), PairError);
        CHECK_THROWS_AS(build_normalizing_affine({}, {}), PairError);
    }
}

TEST_CASE("circle geometry: both normalized images annihilate the bridged polynomial") {
    Lift L = two_point_lift();
    WitnessPair w{{Rational(0)}, {Rational(0)}, {Rational(1)}};
    Lift B = circle_bridge(L, w);
    CHECK(B.aux_dim == 2);
    CHECK(B.base_dim == 1);
    // (x, v, t) = (0, 0, 0) and (0, 1, 0)
    CHECK(B.P.eval(std::vector<Rational>{Rational(0), Rational(0), Rational(0)}) == 0);
    CHECK(B.P.eval(std::vector<Rational>{Rational(0), Rational(1), Rational(0)}) == 0);
    // a circle midpoint: v = 1/2, t = 1/2 satisfies v^2 + t^2 = v
    CHECK(B.P.eval(std::vector<Rational>{Rational(0), Rational(1, 2), Rational(1, 2)}) == 0);
    // off-circle, off-variety point stays off
    CHECK(B.P.eval(std::vector<Rational>{Rational(0), Rational(1, 2), Rational(2)}) != 0);
}

TEST_CASE("bridge rejects invalid pairs") {
    Lift L = two_point_lift();
    CHECK_THROWS_AS(circle_bridge(L, {{Rational(0)}, {Rational(0)}, {Rational(0)}}), PairError);
    // off-variety
    CHECK_THROWS_AS(circle_bridge(L, {{Rational(0)}, {Rational(0)}, {Rational(1, 2)}}), PairError);
    // dimension mismatch
    CHECK_THROWS_AS(circle_bridge(L, {{Rational(0), Rational(0)}, {Rational(0)}, {Rational(1)}}),
                    PairError);
}

TEST_CASE("bridge connects the two-point variety") {
    Lift L = two_point_lift();
    VerifyConfig cfg = gadget_config();
    auto before = estimate_components(L, cfg);
    CHECK(before.count == 2);

    WitnessPair w{{Rational(0)}, {Rational(0)}, {Rational(1)}};
    Lift B = circle_bridge(L, w);
    auto after = estimate_components(B, cfg);
    CHECK(after.count == 1);
}

TEST_CASE("dense circle samples plus both witness images form one component") {
    Lift L = two_point_lift();
    WitnessPair w{{Rational(0)}, {Rational(0)}, {Rational(1)}};
    Lift B = circle_bridge(L, w);
    VerifyConfig cfg = gadget_config();
    // 256 circle samples: v = (1 + cos a)/2, t = (sin a)/2
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 256; ++i) {
        double a = 2 * 3.14159265358979323846 * i / 256;
        pts.push_back({0.0, 0.5 + 0.5 * std::cos(a), 0.5 * std::sin(a)});
    }
    pts.push_back({0.0, 0.0, 0.0});
    pts.push_back({0.0, 1.0, 0.0});
    auto est = components_of(pts, cfg, B.base_dim, 0.05);
    CHECK(est.count == 1);
}

TEST_CASE("projection is preserved by bridging") {
    Lift L = two_point_lift();
    WitnessPair w{{Rational(0)}, {Rational(0)}, {Rational(1)}};
    Lift B = circle_bridge(L, w);
    VerifyConfig cfg = gadget_config();
    auto f = parse_formula("x1 = 0");
    auto before = check_projection(*f, L, cfg);
    auto after = check_projection(*f, B, cfg);
    CHECK(before.grid_classes == after.grid_classes);
    CHECK(before.in_set_witnessed == before.in_set_grid_points);
    CHECK(after.in_set_witnessed == after.in_set_grid_points);
    CHECK(before.sound_misses == 0);
    // the bridged product is degree-6 flat around its zero set, so points
    // with |P| <= delta can sit up to ~delta^(1/6) = 0.046 off the base set;
    // widen the boundary band accordingly for the soundness half
    VerifyConfig wide = cfg;
    wide.eps_boundary = 0.05;
    auto after_wide = check_projection(*f, B, wide);
    CHECK(after_wide.sound_misses == 0);
}

TEST_CASE("reduce_components") {
    SUBCASE("empty pair list leaves the lift unchanged") {
        Lift L = two_point_lift();
        Lift R = reduce_components(L, {});
        CHECK(R.P == L.P);
        CHECK(R.aux_dim == L.aux_dim);
    }
    SUBCASE("single pair: 2 -> 1") {
        Lift L = two_point_lift();
        VerifyConfig cfg = gadget_config();
        Lift R = reduce_components(L, {{{Rational(0)}, {Rational(0)}, {Rational(1)}}});
        CHECK(estimate_components(L, cfg).count == 2);
        CHECK(estimate_components(R, cfg).count == 1);
    }
    SUBCASE("three points, two pairs chain through the accumulated affine") {
        // the iterated product has degree 36; its |P| <= delta neighborhood is
        // far too wide for sample clustering, so check the exact algebra:
        // both anchors of the second bridge and a midpoint of each circle
        // must be exact zeros, and the pinned witness must stay exact.
        Lift L = three_point_lift();
        std::vector<WitnessPair> pairs{
            {{Rational(0)}, {Rational(0)}, {Rational(1)}},
            {{Rational(0)}, {Rational(1)}, {Rational(2)}},
        };
        Lift R = reduce_components(L, pairs);
        CHECK(R.aux_dim == 3);
        // second-stage coordinates (x, w1, w2, t2): anchors at w = 0 and e1
        CHECK(R.P.eval(std::vector<Rational>{0, 0, 0, 0}) == 0);
        CHECK(R.P.eval(std::vector<Rational>{0, 1, 0, 0}) == 0);
        // midpoint of the second circle: w1^2 + t2^2 = w1
        CHECK(R.P.eval(std::vector<Rational>{0, Rational(1, 2), 0, Rational(1, 2)}) == 0);
        auto s = synth_witness(R, {Rational(0)});
        REQUIRE(s.exact);
        CHECK(residual_exact(R, {Rational(0)}, s.aux_exact) == 0);
        CHECK_THROWS_AS(synth_witness(R, {Rational(1)}), WitnessUndefined);
    }
    SUBCASE("stale pair reported with index") {
        Lift L = two_point_lift();
        std::vector<WitnessPair> pairs{
            {{Rational(0)}, {Rational(0)}, {Rational(1)}},
            {{Rational(0)}, {Rational(0)}, {Rational(1, 3)}}, // never on the variety
        };
        try {
            reduce_components(L, pairs);
            FAIL("expected StalePairError");
        } catch (const StalePairError& e) {
            CHECK(e.index == 1);
        }
    }
}

TEST_CASE("bridged witness program stays exact on the anchor point") {
    Lift L = two_point_lift();
    WitnessPair w{{Rational(0)}, {Rational(0)}, {Rational(1)}};
    Lift B = circle_bridge(L, w);
    auto s = synth_witness(B, {Rational(0)});
    REQUIRE(s.exact);
    CHECK(residual_exact(B, {Rational(0)}, s.aux_exact) == 0);
}
