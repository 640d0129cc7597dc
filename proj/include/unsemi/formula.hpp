#ifndef UNSEMI_FORMULA_HPP
#define UNSEMI_FORMULA_HPP

#include "polynomial.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsemi {

/// Sign condition of an atom: the atom's polynomial compared against 0.
enum class Rel { Eq, Ge, Gt, Le, Lt, Ne };

inline const char* rel_text(Rel r) {
    switch (r) {
        case Rel::Eq: return "=";
        case Rel::Ge: return ">=";
        case Rel::Gt: return ">";
        case Rel::Le: return "<=";
        case Rel::Lt: return "<";
        case Rel::Ne: return "!=";
    }
    return "?";
}

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Quantifier-free semialgebraic description. Atoms hold polynomials over
/// the base variables x1..xm; And/Or have >=2 children, Not one, Diff two.
struct Formula {
    enum class Kind { Atom, And, Or, Not, Diff };

    Kind kind;
    Polynomial poly; // Atom only
    Rel rel = Rel::Eq;
    std::vector<FormulaPtr> children;

    static FormulaPtr atom(Polynomial p, Rel r) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::Atom;
        f->poly = std::move(p);
        f->rel = r;
        return f;
    }
    static FormulaPtr conj(std::vector<FormulaPtr> cs) { return node(Kind::And, std::move(cs)); }
    static FormulaPtr disj(std::vector<FormulaPtr> cs) { return node(Kind::Or, std::move(cs)); }
    static FormulaPtr negation(FormulaPtr c) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::Not;
        f->children = {std::move(c)};
        return f;
    }
    static FormulaPtr difference(FormulaPtr a, FormulaPtr b) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::Diff;
        f->children = {std::move(a), std::move(b)};
        return f;
    }

    std::size_t base_dim() const {
        if (kind == Kind::Atom) return poly.var_count();
        return children.front()->base_dim();
    }

private:
    static FormulaPtr node(Kind k, std::vector<FormulaPtr> cs) {
        if (cs.size() < 2) throw std::invalid_argument("and/or needs >= 2 children");
        auto f = std::make_shared<Formula>();
        f->kind = k;
        f->children = std::move(cs);
        return f;
    }
};

inline bool holds(Rel r, int sign) {
    switch (r) {
        case Rel::Eq: return sign == 0;
        case Rel::Ge: return sign >= 0;
        case Rel::Gt: return sign > 0;
        case Rel::Le: return sign <= 0;
        case Rel::Lt: return sign < 0;
        case Rel::Ne: return sign != 0;
    }
    return false;
}

/// Exact membership, rational arithmetic throughout.
inline bool eval_point(const Formula& f, const std::vector<Rational>& x) {
    switch (f.kind) {
        case Formula::Kind::Atom: {
            Rational v = f.poly.eval(x);
            return holds(f.rel, v < 0 ? -1 : (v > 0 ? 1 : 0));
        }
        case Formula::Kind::And:
            for (const auto& c : f.children)
                if (!eval_point(*c, x)) return false;
            return true;
        case Formula::Kind::Or:
            for (const auto& c : f.children)
                if (eval_point(*c, x)) return true;
            return false;
        case Formula::Kind::Not:
            return !eval_point(*f.children[0], x);
        case Formula::Kind::Diff:
            return eval_point(*f.children[0], x) && !eval_point(*f.children[1], x);
    }
    return false;
}

enum class TriBool { False, True, Boundary };

/// Float membership with a boundary band: Boundary whenever some atom value
/// lies within tau of 0, so near-zero-set points are never misclassified.
inline TriBool eval_point(const Formula& f, const std::vector<double>& x, double tau) {
    switch (f.kind) {
        case Formula::Kind::Atom: {
            double v = f.poly.eval(x);
            if (std::abs(v) <= tau) return TriBool::Boundary;
            return holds(f.rel, v < 0 ? -1 : 1) ? TriBool::True : TriBool::False;
        }
        case Formula::Kind::And: {
            TriBool r = TriBool::True;
            for (const auto& c : f.children) {
                TriBool v = eval_point(*c, x, tau);
                if (v == TriBool::False) return TriBool::False;
                if (v == TriBool::Boundary) r = TriBool::Boundary;
            }
            return r;
        }
        case Formula::Kind::Or: {
            TriBool r = TriBool::False;
            for (const auto& c : f.children) {
                TriBool v = eval_point(*c, x, tau);
                if (v == TriBool::True) return TriBool::True;
                if (v == TriBool::Boundary) r = TriBool::Boundary;
            }
            return r;
        }
        case Formula::Kind::Not: {
            TriBool v = eval_point(*f.children[0], x, tau);
            if (v == TriBool::Boundary) return TriBool::Boundary;
            return v == TriBool::True ? TriBool::False : TriBool::True;
        }
        case Formula::Kind::Diff: {
            TriBool a = eval_point(*f.children[0], x, tau);
            TriBool b = eval_point(*f.children[1], x, tau);
            if (a == TriBool::False || b == TriBool::True) return TriBool::False;
            if (a == TriBool::Boundary || b == TriBool::Boundary) return TriBool::Boundary;
            return TriBool::True;
        }
    }
    return TriBool::False;
}

/// Smallest |atom value| over all atoms, float arithmetic. Used to flag
/// points inside the boundary-ambiguity band.
inline double min_abs_atom(const Formula& f, const std::vector<double>& x) {
    if (f.kind == Formula::Kind::Atom) return std::abs(f.poly.eval(x));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : f.children) best = std::min(best, min_abs_atom(*c, x));
    return best;
}

/// Negation normal form: Not/Diff eliminated, atom relations restricted to
/// {Eq, Ge, Gt, Ne}. Pointwise-equivalent to the source formula.
struct NnfFormula {
    FormulaPtr root;
};

namespace detail {

inline FormulaPtr nnf_rec(const Formula& f, bool neg) {
    switch (f.kind) {
        case Formula::Kind::Atom: {
            Rel r = f.rel;
            Polynomial p = f.poly;
            if (neg) {
                switch (r) {
                    case Rel::Eq: r = Rel::Ne; break;
                    case Rel::Ne: r = Rel::Eq; break;
                    case Rel::Ge: r = Rel::Gt; p = -p; break; // ¬(p>=0) ⇒ −p>0
                    case Rel::Gt: r = Rel::Ge; p = -p; break; // ¬(p>0) ⇒ −p>=0
                    case Rel::Le: r = Rel::Gt; break;         // ¬(p<=0) ⇒ p>0
                    case Rel::Lt: r = Rel::Ge; break;         // ¬(p<0) ⇒ p>=0
                }
            } else {
                switch (r) {
                    case Rel::Le: r = Rel::Ge; p = -p; break;
                    case Rel::Lt: r = Rel::Gt; p = -p; break;
                    default: break;
                }
            }
            return Formula::atom(std::move(p), r);
        }
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            bool conj = (f.kind == Formula::Kind::And) != neg;
            std::vector<FormulaPtr> cs;
            cs.reserve(f.children.size());
            for (const auto& c : f.children) cs.push_back(nnf_rec(*c, neg));
            return conj ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
        }
        case Formula::Kind::Not:
            return nnf_rec(*f.children[0], !neg);
        case Formula::Kind::Diff: {
            // A \ B = A ∧ ¬B; negated: ¬A ∨ B.
            FormulaPtr a = nnf_rec(*f.children[0], neg);
            FormulaPtr b = nnf_rec(*f.children[1], !neg);
            return neg ? Formula::disj({a, b}) : Formula::conj({a, b});
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace detail

inline NnfFormula to_nnf(const Formula& f) { return NnfFormula{detail::nnf_rec(f, false)}; }
inline NnfFormula to_nnf(const FormulaPtr& f) { return to_nnf(*f); }

/// Structural NNF check: no Not/Diff nodes, no Le/Lt atoms.
inline bool is_nnf(const Formula& f) {
    switch (f.kind) {
        case Formula::Kind::Atom:
            return f.rel == Rel::Eq || f.rel == Rel::Ge || f.rel == Rel::Gt || f.rel == Rel::Ne;
        case Formula::Kind::And:
        case Formula::Kind::Or:
            for (const auto& c : f.children)
                if (!is_nnf(*c)) return false;
            return true;
        default:
            return false;
    }
}

/// Reinterpret every atom over a wider variable list (no-op when already
/// aligned). Used when rereading printed formulas whose text mentions fewer
/// variables than the surrounding context.
inline FormulaPtr extend_formula(const Formula& f, const std::vector<std::string>& vars) {
    if (f.kind == Formula::Kind::Atom) return Formula::atom(f.poly.extend_to(vars), f.rel);
    std::vector<FormulaPtr> cs;
    cs.reserve(f.children.size());
    for (const auto& c : f.children) cs.push_back(extend_formula(*c, vars));
    switch (f.kind) {
        case Formula::Kind::And: return Formula::conj(std::move(cs));
        case Formula::Kind::Or: return Formula::disj(std::move(cs));
        case Formula::Kind::Not: return Formula::negation(cs[0]);
        case Formula::Kind::Diff: return Formula::difference(cs[0], cs[1]);
        default: throw std::logic_error("unreachable");
    }
}

/// Canonical text form; parse(print(f)) == f on canonical output.
inline std::string print_formula(const Formula& f) {
    std::ostringstream out;
    switch (f.kind) {
        case Formula::Kind::Atom:
            out << f.poly.to_string() << " " << rel_text(f.rel) << " 0";
            break;
        case Formula::Kind::And:
        case Formula::Kind::Diff: {
            const char* sep = (f.kind == Formula::Kind::And) ? " & " : " \\ ";
            for (std::size_t i = 0; i < f.children.size(); ++i) {
                if (i) out << sep;
                const Formula& c = *f.children[i];
                bool paren = c.kind == Formula::Kind::Or || c.kind == Formula::Kind::And ||
                             c.kind == Formula::Kind::Diff;
                out << (paren ? "(" : "") << print_formula(c) << (paren ? ")" : "");
            }
            break;
        }
        case Formula::Kind::Or:
            for (std::size_t i = 0; i < f.children.size(); ++i) {
                if (i) out << " | ";
                const Formula& c = *f.children[i];
                bool paren = c.kind == Formula::Kind::Or;
                out << (paren ? "(" : "") << print_formula(c) << (paren ? ")" : "");
            }
            break;
        case Formula::Kind::Not:
            out << "!(" << print_formula(*f.children[0]) << ")";
            break;
    }
    return out.str();
}

} // namespace unsemi

#endif // UNSEMI_FORMULA_HPP
