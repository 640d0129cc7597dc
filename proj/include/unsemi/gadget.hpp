#ifndef UNSEMI_GADGET_HPP
#define UNSEMI_GADGET_HPP

#include "affine.hpp"
#include "lift.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsemi {

/// Two lifted points sharing the same base projection, expected to sit in
/// distinct connected components of the variety.
struct WitnessPair {
    std::vector<Rational> x;
    std::vector<Rational> y1;
    std::vector<Rational> y2;
};

struct PairError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invertible A with A(y1) = 0 and A(y2) = e1, exact. Pivots on the largest
/// component of d = y2 - y1: swap that coordinate to the front, then apply
/// the elementary matrix sending d to e1.
inline AffineMap build_normalizing_affine(const std::vector<Rational>& y1,
                                          const std::vector<Rational>& y2) {
    const std::size_t k = y1.size();
    if (k == 0) throw PairError("no auxiliary space to normalize (k = 0)");
    if (y2.size() != k) throw PairError("witness point dimension mismatch");
    std::vector<Rational> d(k);
    for (std::size_t i = 0; i < k; ++i) d[i] = y2[i] - y1[i];
    std::size_t piv = 0;
    for (std::size_t i = 1; i < k; ++i)
        if (abs(d[i]) > abs(d[piv])) piv = i;
    if (d[piv] == 0) throw PairError("degenerate pair: y1 = y2");
    std::swap(d[0], d[piv]);
    // E sends the permuted d to e1: row 0 divides by d1, row i>0 subtracts
    // (d_i/d1) times coordinate 1.
    std::vector<std::vector<Rational>> m(k, std::vector<Rational>(k, Rational(0)));
    m[0][piv] = Rational(1) / d[0];
    for (std::size_t i = 1; i < k; ++i) {
        std::size_t src = (i == piv) ? 0 : i; // permutation 0<->piv
        m[i][src] = 1;
        m[i][piv] -= d[i] / d[0];
    }
    std::vector<Rational> off(k, Rational(0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) off[i] -= m[i][j] * y1[j];
    return AffineMap(std::move(m), std::move(off));
}

/// Exact-arithmetic validation of a pair against a lift; returns an error
/// message naming the violated check, or empty when valid.
inline std::string validate_pair(const Lift& L, const WitnessPair& w, double delta) {
    if (w.x.size() != L.base_dim) return "dimension: base point length mismatch";
    if (w.y1.size() != L.aux_dim || w.y2.size() != L.aux_dim)
        return "dimension: aux point length mismatch";
    if (L.aux_dim == 0) return "dimension: lift has no auxiliary variables";
    if (w.y1 == w.y2) return "degenerate pair: y1 = y2";
    for (const auto* y : {&w.y1, &w.y2}) {
        Rational r = residual_exact(L, w.x, *y);
        if (to_double(abs(r)) > delta)
            return "off-variety: |P(x," + std::string(y == &w.y1 ? "y1" : "y2") +
                   ")| exceeds delta";
    }
    return {};
}

/// Splice the bridging circle into a lift above the shared projection point
/// of a witness pair. The new polynomial on one extra variable t is
/// P' = (Q(u,v)² + t²) · C(u,v,t) with Q the affinely normalized P and
/// C = Σ(uᵢ−xᵢ)² + (v₁²+t²−v₁)² + Σ_{i≥2} vᵢ²; its zero set is the
/// transformed variety at t = 0 united with a circle joining the two
/// normalized witness images (x,0,0) and (x,e₁,0). Projection unchanged.
inline Lift circle_bridge(const Lift& L, const WitnessPair& w, double delta = 1e-8) {
    if (auto err = validate_pair(L, w, delta); !err.empty()) throw PairError(err);
    const std::size_t m = L.base_dim, k = L.aux_dim;
    auto A = std::make_shared<AffineMap>(build_normalizing_affine(w.y1, w.y2));

    std::vector<std::size_t> block(k);
    for (std::size_t i = 0; i < k; ++i) block[i] = m + i;
    Polynomial Q = substitute_affine(L.P, block, *A);

    // fresh t name: one past the existing aux block, skipping collisions
    std::size_t tn = k + 1;
    std::string tname = "t" + std::to_string(tn);
    while (std::find(L.P.vars().begin(), L.P.vars().end(), tname) != L.P.vars().end())
        tname = "t" + std::to_string(++tn);
    auto vars = detail::with_aux(L.P.vars(), {tname});
    Q = Q.extend_to(vars);
    Polynomial t = Polynomial::variable(vars, m + k);

    Polynomial C(vars);
    for (std::size_t i = 0; i < m; ++i) {
        Polynomial u = Polynomial::variable(vars, i) - Polynomial::constant(vars, w.x[i]);
        C = C + u * u;
    }
    Polynomial v1 = Polynomial::variable(vars, m);
    Polynomial circ = v1 * v1 + t * t - v1;
    C = C + circ * circ;
    for (std::size_t i = 1; i < k; ++i) {
        Polynomial vi = Polynomial::variable(vars, m + i);
        C = C + vi * vi;
    }

    Lift out;
    out.P = (Q * Q + t * t) * C;
    out.base_dim = m;
    out.aux_dim = k + 1;
    out.source = L.source;
    out.source_text = L.source_text;
    if (L.witness) out.witness = WitnessNode::bridge_node(L.witness, A, static_cast<int>(k));
    return out;
}

struct StalePairError : std::runtime_error {
    std::size_t index;
    StalePairError(std::size_t i, const std::string& why)
        : std::runtime_error("witness pair " + std::to_string(i) + " failed re-validation: " + why),
          index(i) {}
};

/// Apply one bridge per pair. Pairs are given in the original lift's aux
/// coordinates; each is mapped through the affine maps of the bridges
/// already applied and zero-extended in their t slots before validation.
inline Lift reduce_components(const Lift& L, const std::vector<WitnessPair>& pairs,
                              double delta = 1e-8) {
    Lift cur = L;
    std::vector<std::shared_ptr<const AffineMap>> applied;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        WitnessPair mapped = pairs[i];
        for (const auto& A : applied) {
            mapped.y1 = A->apply(mapped.y1);
            mapped.y1.push_back(Rational(0));
            mapped.y2 = A->apply(mapped.y2);
            mapped.y2.push_back(Rational(0));
        }
        if (auto err = validate_pair(cur, mapped, delta); !err.empty())
            throw StalePairError(i, err);
        auto A = std::make_shared<AffineMap>(build_normalizing_affine(mapped.y1, mapped.y2));
        cur = circle_bridge(cur, mapped, delta);
        applied.push_back(std::move(A));
    }
    return cur;
}

} // namespace unsemi

#endif // UNSEMI_GADGET_HPP
