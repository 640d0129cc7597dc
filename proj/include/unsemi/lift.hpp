#ifndef UNSEMI_LIFT_HPP
#define UNSEMI_LIFT_HPP

#include "affine.hpp"
#include "formula.hpp"
#include "polynomial.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsemi {

struct WitnessNode;
using WitnessPtr = std::shared_ptr<const WitnessNode>;

/// Recipe that turns an in-set base point into auxiliary coordinates placing
/// a lifted point on the variety. Leaves own disjoint aux slots; Or nodes
/// fill the first true branch and zero the rest; Bridge wraps an inner
/// program with the normalizing affine map plus a fresh t slot.
struct WitnessNode {
    enum class Kind { Eq, Ge, Gt, Ne, Fixed, And, Or, Bridge };

    Kind kind;
    int slot = -1;                          // leaf slot; Bridge: the t slot
    Polynomial poly;                        // leaf atom polynomial (base vars)
    Rational value;                         // Fixed
    std::vector<WitnessPtr> children;       // And/Or children; Bridge: {inner}
    std::vector<FormulaPtr> branches;       // Or: membership formula per child
    std::shared_ptr<const AffineMap> affine; // Bridge

    static WitnessPtr eq_leaf(Polynomial p) {
        auto w = std::make_shared<WitnessNode>();
        w->kind = Kind::Eq;
        w->poly = std::move(p);
        return w;
    }
    static WitnessPtr ge_leaf(int slot, Polynomial p) { return leaf(Kind::Ge, slot, std::move(p)); }
    static WitnessPtr gt_leaf(int slot, Polynomial p) { return leaf(Kind::Gt, slot, std::move(p)); }
    static WitnessPtr ne_leaf(int slot, Polynomial p) { return leaf(Kind::Ne, slot, std::move(p)); }
    static WitnessPtr fixed_leaf(int slot, Rational v) {
        auto w = std::make_shared<WitnessNode>();
        w->kind = Kind::Fixed;
        w->slot = slot;
        w->value = std::move(v);
        return w;
    }
    static WitnessPtr and_node(WitnessPtr a, WitnessPtr b) {
        auto w = std::make_shared<WitnessNode>();
        w->kind = Kind::And;
        w->children = {std::move(a), std::move(b)};
        return w;
    }
    static WitnessPtr or_node(WitnessPtr a, FormulaPtr fa, WitnessPtr b, FormulaPtr fb) {
        auto w = std::make_shared<WitnessNode>();
        w->kind = Kind::Or;
        w->children = {std::move(a), std::move(b)};
        w->branches = {std::move(fa), std::move(fb)};
        return w;
    }
    static WitnessPtr bridge_node(WitnessPtr inner, std::shared_ptr<const AffineMap> A, int t_slot) {
        auto w = std::make_shared<WitnessNode>();
        w->kind = Kind::Bridge;
        w->children = {std::move(inner)};
        w->affine = std::move(A);
        w->slot = t_slot;
        return w;
    }

private:
    static WitnessPtr leaf(Kind k, int slot, Polynomial p) {
        auto w = std::make_shared<WitnessNode>();
        w->kind = k;
        w->slot = slot;
        w->poly = std::move(p);
        return w;
    }
};

/// A single polynomial over base × auxiliary space whose real zero set
/// projects onto the source formula's set, plus the witness program that
/// certifies the completeness half of that contract.
struct Lift {
    Polynomial P;          // over vars x1..xm, t1..tk
    std::size_t base_dim = 0;
    std::size_t aux_dim = 0;
    FormulaPtr source;     // may be null for hand-built lifts
    std::string source_text;
    WitnessPtr witness;    // may be null for hand-built lifts

    std::vector<std::string> aux_names() const {
        return {P.vars().begin() + static_cast<std::ptrdiff_t>(base_dim), P.vars().end()};
    }
};

/// Hands out globally unique auxiliary variables t1, t2, ... within one
/// compilation; slot numbering follows allocation order.
class AuxAllocator {
public:
    std::pair<std::string, int> fresh() {
        int slot = next_++;
        return {"t" + std::to_string(slot + 1), slot};
    }
    int count() const { return next_; }

private:
    int next_ = 0;
};

namespace detail {

inline std::vector<std::string> base_vars(std::size_t m) {
    std::vector<std::string> v;
    v.reserve(m);
    for (std::size_t i = 1; i <= m; ++i) v.push_back("x" + std::to_string(i));
    return v;
}

inline std::vector<std::string> with_aux(const std::vector<std::string>& base,
                                         const std::vector<std::string>& aux) {
    std::vector<std::string> v = base;
    v.insert(v.end(), aux.begin(), aux.end());
    return v;
}

} // namespace detail

/// p = 0: the zero set projects to itself; no auxiliary variables.
inline Lift lift_eq(const Polynomial& p) {
    Lift L;
    L.P = p;
    L.base_dim = p.var_count();
    L.aux_dim = 0;
    L.witness = WitnessNode::eq_leaf(p);
    L.source = Formula::atom(p, Rel::Eq);
    return L;
}

/// p >= 0 via t² = p(x); witness t = √p(x).
inline Lift lift_ge(const Polynomial& p, AuxAllocator& alloc) {
    auto [name, slot] = alloc.fresh();
    auto vars = detail::with_aux(p.vars(), {name});
    Polynomial t = Polynomial::variable(vars, vars.size() - 1);
    Lift L;
    L.P = t * t - p.extend_to(vars);
    L.base_dim = p.var_count();
    L.aux_dim = 1;
    L.witness = WitnessNode::ge_leaf(slot, p);
    L.source = Formula::atom(p, Rel::Ge);
    return L;
}

/// p > 0 via t²·p = 1; witness t = 1/√p(x).
inline Lift lift_gt(const Polynomial& p, AuxAllocator& alloc) {
    auto [name, slot] = alloc.fresh();
    auto vars = detail::with_aux(p.vars(), {name});
    Polynomial t = Polynomial::variable(vars, vars.size() - 1);
    Lift L;
    L.P = t * t * p.extend_to(vars) - Polynomial::constant(vars, Rational(1));
    L.base_dim = p.var_count();
    L.aux_dim = 1;
    L.witness = WitnessNode::gt_leaf(slot, p);
    L.source = Formula::atom(p, Rel::Gt);
    return L;
}

/// p != 0 via t·p = 1; witness t = 1/p(x).
inline Lift lift_ne(const Polynomial& p, AuxAllocator& alloc) {
    auto [name, slot] = alloc.fresh();
    auto vars = detail::with_aux(p.vars(), {name});
    Polynomial t = Polynomial::variable(vars, vars.size() - 1);
    Lift L;
    L.P = t * p.extend_to(vars) - Polynomial::constant(vars, Rational(1));
    L.base_dim = p.var_count();
    L.aux_dim = 1;
    L.witness = WitnessNode::ne_leaf(slot, p);
    L.source = Formula::atom(p, Rel::Ne);
    return L;
}

namespace detail {

inline std::vector<std::string> merged_vars(const Lift& a, const Lift& b) {
    if (a.base_dim != b.base_dim)
        throw std::invalid_argument("lift combination: base dimensions differ");
    auto vars = std::vector<std::string>(a.P.vars().begin(),
                                         a.P.vars().begin() + static_cast<std::ptrdiff_t>(a.base_dim));
    for (const auto& n : a.aux_names()) vars.push_back(n);
    for (const auto& n : b.aux_names()) {
        if (std::find(vars.begin(), vars.end(), n) != vars.end())
            throw std::invalid_argument("lift combination: aux blocks not disjoint (" + n + ")");
        vars.push_back(n);
    }
    return vars;
}

inline Polynomial sum_sq_vars(const std::vector<std::string>& vars,
                              std::size_t from, std::size_t count) {
    Polynomial s(vars);
    for (std::size_t i = 0; i < count; ++i) {
        Polynomial v = Polynomial::variable(vars, from + i);
        s = s + v * v;
    }
    return s;
}

} // namespace detail

/// Intersection: P = P_a² + P_b² on the disjoint union of aux blocks.
inline Lift lift_and(const Lift& a, const Lift& b) {
    auto vars = detail::merged_vars(a, b);
    Polynomial pa = a.P.extend_to(vars);
    Polynomial pb = b.P.extend_to(vars);
    Lift L;
    L.P = pa * pa + pb * pb;
    L.base_dim = a.base_dim;
    L.aux_dim = a.aux_dim + b.aux_dim;
    if (a.witness && b.witness) L.witness = WitnessNode::and_node(a.witness, b.witness);
    if (a.source && b.source) L.source = Formula::conj({a.source, b.source});
    return L;
}

/// Union: P = (P_a² + Σ z_j²)·(P_b² + Σ y_i²), y = a's aux block, z = b's.
/// A point of the zero set either kills the first factor (on a's variety
/// with b's aux zeroed) or the second, so the projection is the union.
inline Lift lift_or(const Lift& a, const Lift& b) {
    auto vars = detail::merged_vars(a, b);
    Polynomial pa = a.P.extend_to(vars);
    Polynomial pb = b.P.extend_to(vars);
    std::size_t m = a.base_dim;
    Polynomial zsq = detail::sum_sq_vars(vars, m + a.aux_dim, b.aux_dim);
    Polynomial ysq = detail::sum_sq_vars(vars, m, a.aux_dim);
    Lift L;
    L.P = (pa * pa + zsq) * (pb * pb + ysq);
    L.base_dim = m;
    L.aux_dim = a.aux_dim + b.aux_dim;
    if (a.witness && b.witness && a.source && b.source)
        L.witness = WitnessNode::or_node(a.witness, a.source, b.witness, b.source);
    if (a.source && b.source) L.source = Formula::disj({a.source, b.source});
    return L;
}

/// Compile an NNF formula into a Lift by structural recursion; n-ary nodes
/// fold left through the binary combinators, aux slots are numbered by a
/// depth-first left-to-right walk.
inline Lift compile(const NnfFormula& f) {
    if (!is_nnf(*f.root)) throw std::invalid_argument("compile requires NNF input");
    AuxAllocator alloc;
    struct Rec {
        AuxAllocator& alloc;
        Lift operator()(const Formula& f) const {
            switch (f.kind) {
                case Formula::Kind::Atom:
                    switch (f.rel) {
                        case Rel::Eq: return lift_eq(f.poly);
                        case Rel::Ge: return lift_ge(f.poly, alloc);
                        case Rel::Gt: return lift_gt(f.poly, alloc);
                        case Rel::Ne: return lift_ne(f.poly, alloc);
                        default: throw std::logic_error("non-NNF relation");
                    }
                case Formula::Kind::And:
                case Formula::Kind::Or: {
                    Lift acc = (*this)(*f.children[0]);
                    for (std::size_t i = 1; i < f.children.size(); ++i) {
                        Lift next = (*this)(*f.children[i]);
                        acc = f.kind == Formula::Kind::And ? lift_and(acc, next)
                                                           : lift_or(acc, next);
                    }
                    return acc;
                }
                default:
                    throw std::logic_error("non-NNF node");
            }
        }
    } rec{alloc};
    Lift L = rec(*f.root);
    L.source = f.root;
    L.source_text = print_formula(*f.root);
    return L;
}

struct WitnessUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Result of witness synthesis: float coordinates always; exact rational
/// coordinates whenever every active leaf admits them (all EQ/NE/Fixed, or
/// GE/GT on perfect squares).
struct SynthResult {
    std::vector<double> aux;
    bool exact = false;
    std::vector<Rational> aux_exact; // valid iff exact
};

namespace detail {

struct SynthState {
    const std::vector<Rational>& x;
    std::vector<Rational> exact;
    std::vector<double> flt;
    std::vector<bool> has_exact;
};

inline void zero_fill(const WitnessNode& w, SynthState& st);

inline void set_slot(SynthState& st, int slot, const Rational& v) {
    st.exact[static_cast<std::size_t>(slot)] = v;
    st.flt[static_cast<std::size_t>(slot)] = to_double(v);
    st.has_exact[static_cast<std::size_t>(slot)] = true;
}

inline void set_slot(SynthState& st, int slot, double v) {
    st.flt[static_cast<std::size_t>(slot)] = v;
    st.has_exact[static_cast<std::size_t>(slot)] = false;
}

inline void synth_rec(const WitnessNode& w, SynthState& st) {
    switch (w.kind) {
        case WitnessNode::Kind::Eq:
            return;
        case WitnessNode::Kind::Ge: {
            Rational v = w.poly.eval(st.x);
            if (v < 0) throw WitnessUndefined("ge-leaf polynomial negative at point");
            if (auto r = exact_sqrt(v)) set_slot(st, w.slot, *r);
            else set_slot(st, w.slot, std::sqrt(to_double(v)));
            return;
        }
        case WitnessNode::Kind::Gt: {
            Rational v = w.poly.eval(st.x);
            if (v <= 0) throw WitnessUndefined("gt-leaf polynomial not positive at point");
            if (auto r = exact_sqrt(v)) set_slot(st, w.slot, Rational(1) / *r);
            else set_slot(st, w.slot, 1.0 / std::sqrt(to_double(v)));
            return;
        }
        case WitnessNode::Kind::Ne: {
            Rational v = w.poly.eval(st.x);
            if (v == 0) throw WitnessUndefined("ne-leaf polynomial vanishes at point");
            set_slot(st, w.slot, Rational(1) / v);
            return;
        }
        case WitnessNode::Kind::Fixed:
            set_slot(st, w.slot, w.value);
            return;
        case WitnessNode::Kind::And:
            for (const auto& c : w.children) synth_rec(*c, st);
            return;
        case WitnessNode::Kind::Or: {
            bool taken = false;
            for (std::size_t i = 0; i < w.children.size(); ++i) {
                if (!taken && eval_point(*w.branches[i], st.x)) {
                    synth_rec(*w.children[i], st);
                    taken = true;
                } else {
                    zero_fill(*w.children[i], st);
                }
            }
            if (!taken) throw WitnessUndefined("point in no branch of or-node");
            return;
        }
        case WitnessNode::Kind::Bridge: {
            const auto& A = *w.affine;
            SynthState inner{st.x,
                             std::vector<Rational>(A.dim(), Rational(0)),
                             std::vector<double>(A.dim(), 0.0),
                             std::vector<bool>(A.dim(), false)};
            synth_rec(*w.children[0], inner);
            bool all_exact = std::all_of(inner.has_exact.begin(), inner.has_exact.end(),
                                         [](bool b) { return b; });
            if (all_exact) {
                auto v = A.apply(inner.exact);
                for (std::size_t i = 0; i < v.size(); ++i) set_slot(st, static_cast<int>(i), v[i]);
            } else {
                for (std::size_t i = 0; i < A.dim(); ++i) {
                    double acc = to_double(A.offset()[i]);
                    for (std::size_t j = 0; j < A.dim(); ++j)
                        acc += to_double(A.matrix()[i][j]) * inner.flt[j];
                    set_slot(st, static_cast<int>(i), acc);
                }
            }
            set_slot(st, w.slot, Rational(0));
            return;
        }
    }
}

inline void zero_fill(const WitnessNode& w, SynthState& st) {
    switch (w.kind) {
        case WitnessNode::Kind::Eq:
            return;
        case WitnessNode::Kind::Ge:
        case WitnessNode::Kind::Gt:
        case WitnessNode::Kind::Ne:
        case WitnessNode::Kind::Fixed:
            set_slot(st, w.slot, Rational(0));
            return;
        case WitnessNode::Kind::And:
        case WitnessNode::Kind::Or:
            for (const auto& c : w.children) zero_fill(*c, st);
            return;
        case WitnessNode::Kind::Bridge:
            zero_fill(*w.children[0], st);
            set_slot(st, w.slot, Rational(0));
            return;
    }
}

/// Collect the aux slots owned by a witness subtree.
inline void collect_slots(const WitnessNode& w, std::vector<int>& out) {
    switch (w.kind) {
        case WitnessNode::Kind::Eq:
            return;
        case WitnessNode::Kind::Ge:
        case WitnessNode::Kind::Gt:
        case WitnessNode::Kind::Ne:
        case WitnessNode::Kind::Fixed:
            out.push_back(w.slot);
            return;
        case WitnessNode::Kind::And:
        case WitnessNode::Kind::Or:
            for (const auto& c : w.children) collect_slots(*c, out);
            return;
        case WitnessNode::Kind::Bridge:
            // a bridge re-owns every slot below it plus its own t slot
            collect_slots(*w.children[0], out);
            out.push_back(w.slot);
            return;
    }
}

} // namespace detail

/// Produce auxiliary coordinates for an in-set base point. Exact when every
/// active leaf value is rational; otherwise float with |P| at roundoff scale.
inline SynthResult synth_witness(const Lift& L, const std::vector<Rational>& x) {
    if (!L.witness) throw WitnessUndefined("lift carries no witness program");
    if (x.size() != L.base_dim) throw std::invalid_argument("base point length mismatch");
    if (L.source && !eval_point(*L.source, x))
        throw WitnessUndefined("point is not in the lift's set");
    detail::SynthState st{x,
                          std::vector<Rational>(L.aux_dim, Rational(0)),
                          std::vector<double>(L.aux_dim, 0.0),
                          std::vector<bool>(L.aux_dim, false)};
    // slots untouched by any leaf (aux-free subtrees) stay exact zeros
    std::fill(st.has_exact.begin(), st.has_exact.end(), true);
    std::vector<int> slots;
    if (L.aux_dim > 0) {
        detail::collect_slots(*L.witness, slots);
        for (int s : slots) st.has_exact[static_cast<std::size_t>(s)] = false;
    }
    detail::synth_rec(*L.witness, st);
    SynthResult r;
    r.aux = st.flt;
    r.exact = std::all_of(st.has_exact.begin(), st.has_exact.end(), [](bool b) { return b; });
    if (r.exact) r.aux_exact = st.exact;
    return r;
}

/// |P(x, aux)| in float arithmetic.
inline double residual(const Lift& L, const std::vector<double>& x, const std::vector<double>& aux) {
    std::vector<double> pt = x;
    pt.insert(pt.end(), aux.begin(), aux.end());
    return std::abs(L.P.eval(pt));
}

inline Rational residual_exact(const Lift& L, const std::vector<Rational>& x,
                               const std::vector<Rational>& aux) {
    std::vector<Rational> pt = x;
    pt.insert(pt.end(), aux.begin(), aux.end());
    return L.P.eval(pt);
}

} // namespace unsemi

#endif // UNSEMI_LIFT_HPP
