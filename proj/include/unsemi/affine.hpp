#ifndef UNSEMI_AFFINE_HPP
#define UNSEMI_AFFINE_HPP

#include "polynomial.hpp"
#include "rational.hpp"

#include <stdexcept>
#include <vector>

namespace unsemi {

/// Invertible affine map v ↦ M·v + b with exact rational entries.
/// Invertibility is checked at construction (exact determinant).
class AffineMap {
public:
    AffineMap(std::vector<std::vector<Rational>> matrix, std::vector<Rational> offset)
        : mat_(std::move(matrix)), off_(std::move(offset)) {
        const std::size_t k = mat_.size();
        if (k == 0) throw std::invalid_argument("affine map dimension must be >= 1");
        if (off_.size() != k) throw std::invalid_argument("offset length mismatch");
        for (const auto& row : mat_)
            if (row.size() != k) throw std::invalid_argument("matrix must be square");
        if (determinant() == 0) throw std::invalid_argument("singular affine matrix");
    }

    static AffineMap identity(std::size_t k) {
        std::vector<std::vector<Rational>> m(k, std::vector<Rational>(k, Rational(0)));
        for (std::size_t i = 0; i < k; ++i) m[i][i] = 1;
        return AffineMap(std::move(m), std::vector<Rational>(k, Rational(0)));
    }

    std::size_t dim() const { return mat_.size(); }
    const std::vector<std::vector<Rational>>& matrix() const { return mat_; }
    const std::vector<Rational>& offset() const { return off_; }

    Rational determinant() const {
        auto a = mat_;
        const std::size_t k = a.size();
        Rational det(1);
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t piv = col;
            while (piv < k && a[piv][col] == 0) ++piv;
            if (piv == k) return Rational(0);
            if (piv != col) { std::swap(a[piv], a[col]); det = -det; }
            det *= a[col][col];
            for (std::size_t r = col + 1; r < k; ++r) {
                if (a[r][col] == 0) continue;
                Rational f = a[r][col] / a[col][col];
                for (std::size_t c = col; c < k; ++c) a[r][c] -= f * a[col][c];
            }
        }
        return det;
    }

    std::vector<Rational> apply(const std::vector<Rational>& v) const {
        const std::size_t k = dim();
        if (v.size() != k) throw std::invalid_argument("affine apply: length mismatch");
        std::vector<Rational> r(k, Rational(0));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) r[i] += mat_[i][j] * v[j];
            r[i] += off_[i];
        }
        return r;
    }

    /// Exact inverse: A⁻¹(v) = M⁻¹·v − M⁻¹·b.
    AffineMap inverse() const {
        const std::size_t k = dim();
        // Gauss-Jordan on [M | I].
        auto a = mat_;
        std::vector<std::vector<Rational>> inv(k, std::vector<Rational>(k, Rational(0)));
        for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1;
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t piv = col;
            while (piv < k && a[piv][col] == 0) ++piv;
            if (piv == k) throw std::invalid_argument("singular affine matrix");
            std::swap(a[piv], a[col]);
            std::swap(inv[piv], inv[col]);
            Rational d = a[col][col];
            for (std::size_t c = 0; c < k; ++c) { a[col][c] /= d; inv[col][c] /= d; }
            for (std::size_t r = 0; r < k; ++r) {
                if (r == col || a[r][col] == 0) continue;
                Rational f = a[r][col];
                for (std::size_t c = 0; c < k; ++c) {
                    a[r][c] -= f * a[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
        std::vector<Rational> noff(k, Rational(0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) noff[i] -= inv[i][j] * off_[j];
        return AffineMap(std::move(inv), std::move(noff));
    }

private:
    std::vector<std::vector<Rational>> mat_;
    std::vector<Rational> off_;
};

/// Compose p with A⁻¹ on a block of variables: the returned q satisfies
/// q(.., v, ..) = p(.., A⁻¹(v), ..). Degree is unchanged. `block` lists the
/// indices (into p's variable list) of the transformed block, in order.
inline Polynomial substitute_affine(const Polynomial& p,
                                    const std::vector<std::size_t>& block,
                                    const AffineMap& A) {
    if (block.size() != A.dim())
        throw std::invalid_argument("block size does not match affine dimension");
    const AffineMap inv = A.inverse();
    const auto& vars = p.vars();
    std::vector<bool> in_block(vars.size(), false);
    for (auto i : block) {
        if (i >= vars.size()) throw std::invalid_argument("block index out of range");
        in_block[i] = true;
    }
    // Linear replacement polynomial for each block variable.
    std::vector<Polynomial> repl;
    repl.reserve(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) {
        Polynomial L = Polynomial::constant(vars, inv.offset()[i]);
        for (std::size_t j = 0; j < block.size(); ++j)
            L = L + Polynomial::variable(vars, block[j]) * inv.matrix()[i][j];
        repl.push_back(std::move(L));
    }
    Polynomial result(vars);
    for (const auto& [m, c] : p.terms()) {
        Polynomial term(vars);
        Monomial rest(vars.size(), 0);
        for (std::size_t i = 0; i < m.size(); ++i)
            if (!in_block[i]) rest[i] = m[i];
        term.add_term(rest, c);
        for (std::size_t bi = 0; bi < block.size(); ++bi) {
            std::uint32_t e = m[block[bi]];
            if (e > 0) term = term * repl[bi].pow(e);
        }
        result = result + term;
    }
    return result;
}

} // namespace unsemi

#endif // UNSEMI_AFFINE_HPP
