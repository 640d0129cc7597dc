#ifndef UNSEMI_POLYNOMIAL_HPP
#define UNSEMI_POLYNOMIAL_HPP

#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace unsemi {

using Monomial = std::vector<std::uint32_t>;

/// Graded-lexicographic order: compare total degree first, then exponents
/// lexicographically. Fixes the canonical term order used everywhere.
struct GrlexLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        std::uint64_t ta = 0, tb = 0;
        for (auto e : a) ta += e;
        for (auto e : b) tb += e;
        if (ta != tb) return ta < tb;
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

/// Sparse multivariate polynomial with exact rational coefficients over a
/// fixed, ordered variable list. Immutable in spirit: all operations return
/// new values. No stored coefficient is ever zero.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    static Polynomial constant(std::vector<std::string> vars, const Rational& c) {
        Polynomial p(std::move(vars));
        p.add_term(Monomial(p.vars_.size(), 0), c);
        return p;
    }

    static Polynomial variable(std::vector<std::string> vars, std::size_t idx) {
        Polynomial p(std::move(vars));
        if (idx >= p.vars_.size()) throw std::invalid_argument("variable index out of range");
        Monomial m(p.vars_.size(), 0);
        m[idx] = 1;
        p.add_term(m, Rational(1));
        return p;
    }

    const std::vector<std::string>& vars() const { return vars_; }
    std::size_t var_count() const { return vars_.size(); }
    const std::map<Monomial, Rational, GrlexLess>& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    /// Total degree; 0 for the zero polynomial and constants.
    std::uint32_t degree() const {
        std::uint32_t d = 0;
        for (const auto& [m, c] : terms_) {
            std::uint32_t t = 0;
            for (auto e : m) t += e;
            d = std::max(d, t);
        }
        return d;
    }

    void add_term(const Monomial& m, const Rational& c) {
        if (m.size() != vars_.size()) throw std::invalid_argument("exponent vector length mismatch");
        if (c == 0) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Polynomial operator+(const Polynomial& o) const {
        check_aligned(o);
        Polynomial r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }

    Polynomial operator-() const {
        Polynomial r(vars_);
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
        return r;
    }

    Polynomial operator-(const Polynomial& o) const { return *this + (-o); }

    Polynomial operator*(const Polynomial& o) const {
        check_aligned(o);
        Polynomial r(vars_);
        for (const auto& [ma, ca] : terms_) {
            for (const auto& [mb, cb] : o.terms_) {
                Monomial m(vars_.size());
                for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
                r.add_term(m, ca * cb);
            }
        }
        return r;
    }

    Polynomial operator*(const Rational& s) const {
        Polynomial r(vars_);
        if (s == 0) return r;
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
        return r;
    }

    Polynomial pow(std::uint32_t e) const {
        Polynomial r = constant(vars_, Rational(1));
        Polynomial base = *this;
        while (e > 0) {
            if (e & 1u) r = r * base;
            base = (e >>= 1) ? base * base : base;
        }
        return r;
    }

    bool operator==(const Polynomial& o) const {
        return vars_ == o.vars_ && terms_ == o.terms_;
    }
    bool operator!=(const Polynomial& o) const { return !(*this == o); }

    Rational eval(const std::vector<Rational>& pt) const {
        if (pt.size() != vars_.size()) throw std::invalid_argument("point length mismatch");
        Rational acc(0);
        for (const auto& [m, c] : terms_) {
            Rational t = c;
            for (std::size_t i = 0; i < m.size(); ++i)
                for (std::uint32_t e = 0; e < m[i]; ++e) t *= pt[i];
            acc += t;
        }
        return acc;
    }

    double eval(const std::vector<double>& pt) const {
        if (pt.size() != vars_.size()) throw std::invalid_argument("point length mismatch");
        double acc = 0;
        for (const auto& [m, c] : terms_) {
            double t = to_double(c);
            for (std::size_t i = 0; i < m.size(); ++i) {
                double b = pt[i];
                for (std::uint32_t e = 0; e < m[i]; ++e) t *= b;
            }
            acc += t;
        }
        return acc;
    }

    Polynomial derivative(std::size_t var) const {
        if (var >= vars_.size()) throw std::invalid_argument("variable index out of range");
        Polynomial r(vars_);
        for (const auto& [m, c] : terms_) {
            if (m[var] == 0) continue;
            Monomial d = m;
            d[var] -= 1;
            r.add_term(d, c * Rational(m[var]));
        }
        return r;
    }

    std::vector<Polynomial> gradient() const {
        std::vector<Polynomial> g;
        g.reserve(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) g.push_back(derivative(i));
        return g;
    }

    /// Reinterpret over a wider/reordered variable list. Every current
    /// variable must appear in new_vars.
    Polynomial extend_to(const std::vector<std::string>& new_vars) const {
        std::vector<std::size_t> where(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            auto it = std::find(new_vars.begin(), new_vars.end(), vars_[i]);
            if (it == new_vars.end())
                throw std::invalid_argument("alignment error: variable " + vars_[i] + " missing from target list");
            where[i] = static_cast<std::size_t>(it - new_vars.begin());
        }
        Polynomial r(new_vars);
        for (const auto& [m, c] : terms_) {
            Monomial nm(new_vars.size(), 0);
            for (std::size_t i = 0; i < m.size(); ++i) nm[where[i]] = m[i];
            r.add_term(nm, c);
        }
        return r;
    }

    /// Canonical text form, leading (highest grlex) term first.
    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::ostringstream out;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [m, c] = *it;
            Rational a = c;
            if (first) {
                if (a < 0) { out << "-"; a = -a; }
            } else {
                out << (a < 0 ? " - " : " + ");
                if (a < 0) a = -a;
            }
            first = false;
            bool is_const = std::all_of(m.begin(), m.end(), [](std::uint32_t e) { return e == 0; });
            bool wrote_coeff = false;
            if (is_const || a != 1) {
                out << unsemi::to_string(a);
                wrote_coeff = true;
            }
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] == 0) continue;
                if (wrote_coeff) out << "*";
                out << vars_[i];
                if (m[i] > 1) out << "^" << m[i];
                wrote_coeff = true;
            }
        }
        return out.str();
    }

private:
    void check_aligned(const Polynomial& o) const {
        if (vars_ != o.vars_)
            throw std::invalid_argument("alignment error: operand variable lists differ");
    }

    std::vector<std::string> vars_;
    std::map<Monomial, Rational, GrlexLess> terms_;
};

inline Polynomial operator*(const Rational& s, const Polynomial& p) { return p * s; }

} // namespace unsemi

#endif // UNSEMI_POLYNOMIAL_HPP
