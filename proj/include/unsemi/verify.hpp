#ifndef UNSEMI_VERIFY_HPP
#define UNSEMI_VERIFY_HPP

#include "formula.hpp"
#include "lift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace unsemi {

struct Interval {
    Rational lo, hi;
};

struct VerifyConfig {
    std::vector<Interval> box;          // per base variable
    std::size_t grid_res = 201;         // points per axis
    std::size_t n_samples = 10000;      // solver starts
    double delta_variety = 1e-8;        // |P| acceptance
    double tau_membership = 1e-6;       // float-oracle boundary band
    double eps_boundary = 1e-3;         // classification exclusion band
    double eps_proximity = 0.05;        // component-graph edge radius
    std::uint64_t seed = 0;
    Interval aux_box{Rational(-10), Rational(10)}; // per aux variable

    void check() const {
        if (grid_res < 2) throw std::invalid_argument("grid_res must be >= 2");
        if (delta_variety <= 0 || tau_membership <= 0 || eps_boundary <= 0 || eps_proximity <= 0)
            throw std::invalid_argument("tolerances must be > 0");
        for (const auto& iv : box)
            if (!(iv.lo < iv.hi)) throw std::invalid_argument("degenerate box interval");
        if (!(aux_box.lo < aux_box.hi)) throw std::invalid_argument("degenerate aux box");
    }
};

struct VerifyReport {
    std::size_t in_set_witnessed = 0;
    std::size_t in_set_witness_failed = 0;
    std::size_t sound_hits = 0;
    std::size_t sound_misses = 0;
    std::size_t boundary_skipped = 0;
    std::size_t accepted_points = 0;
    std::size_t in_set_grid_points = 0;
    std::size_t grid_points_examined = 0;
    int component_estimate = 0;
    bool empty_variety_warning = false;
    std::vector<std::string> failures; // capped at 100

    // every grid point is examined (and classified), as is every accepted
    // solver sample
    std::size_t examined() const { return grid_points_examined + accepted_points; }
    bool has_failures() const { return in_set_witness_failed > 0 || sound_misses > 0; }
    bool has_warnings() const { return empty_variety_warning; }
    /// CI contract: 0 = pass, 1 = failures, 2 = warnings only.
    int exit_status() const { return has_failures() ? 1 : (has_warnings() ? 2 : 0); }

    void record_failure(std::string s) {
        if (failures.size() < 100) failures.push_back(std::move(s));
    }
};

namespace detail {

/// Flat coefficient/exponent arrays for fast repeated float evaluation.
struct CompiledPoly {
    std::size_t nvars = 0;
    std::uint32_t max_exp = 0;
    std::vector<double> coeff;
    std::vector<std::uint32_t> exps; // row-major, nvars per term

    explicit CompiledPoly(const Polynomial& p) : nvars(p.var_count()) {
        for (const auto& [m, c] : p.terms()) {
            coeff.push_back(to_double(c));
            exps.insert(exps.end(), m.begin(), m.end());
            for (auto e : m) max_exp = std::max(max_exp, e);
        }
    }

    // 80-bit accumulation: expanded high-degree lifts have terms around 1e8
    // at box scale, so plain double evaluation carries ~1e-7 noise and the
    // delta_variety = 1e-8 acceptance test would be undecidable
    double eval(const double* pt) const {
        long double acc = 0;
        const std::uint32_t* e = exps.data();
        for (double c : coeff) {
            long double t = c;
            for (std::size_t i = 0; i < nvars; ++i, ++e) {
                long double b = pt[i];
                for (std::uint32_t k = *e; k > 0; --k) t *= b;
            }
            acc += t;
        }
        return static_cast<double>(acc);
    }

    /// Evaluation against a precomputed power table: pows[i*stride + k] holds
    /// x_i^k. Shared across P, gradient, and Hessian diagonal per point.
    double eval_pows(const long double* pows, std::size_t stride) const {
        long double acc = 0;
        const std::uint32_t* e = exps.data();
        for (double c : coeff) {
            long double t = c;
            for (std::size_t i = 0; i < nvars; ++i, ++e) t *= pows[i * stride + *e];
            acc += t;
        }
        return static_cast<double>(acc);
    }
};

/// Deterministic uniform double in [0,1) from a raw 64-bit draw; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Best small-denominator rational within tau of x (continued fraction
/// convergents, denominator capped). Lets the soundness pass decide
/// membership exactly: equality atoms are never float-true, so a sample
/// sitting numerically on {p = 0} would otherwise always be skipped.
inline std::optional<Rational> snap_rational(double x, double tau,
                                             long long qmax = 1000000) {
    if (!std::isfinite(x)) return std::nullopt;
    double v = x;
    long long p0 = 1, q0 = 0;
    long long p1 = static_cast<long long>(std::floor(v)), q1 = 1;
    v -= std::floor(v);
    for (int it = 0; it < 64; ++it) {
        Rational cand(p1, q1);
        if (std::abs(to_double(cand) - x) <= tau) return cand;
        if (v <= 0) break;
        v = 1.0 / v;
        double a = std::floor(v);
        if (a * static_cast<double>(q1) + static_cast<double>(q0) >
            static_cast<double>(qmax))
            break;
        long long ai = static_cast<long long>(a);
        long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        v -= a;
    }
    return std::nullopt;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace detail

class VarietySolver {
public:
    VarietySolver(const Lift& L, const VerifyConfig& cfg)
        : lift_(L), cfg_(cfg), p_(L.P), grad_() {
        cfg.check();
        if (cfg.box.size() != L.base_dim)
            throw std::invalid_argument("box dimension does not match lift base dimension");
        std::size_t v = 0;
        for (const auto& g : L.P.gradient()) {
            grad_.emplace_back(g);
            hess_.emplace_back(g.derivative(v++));
        }
        stride_ = p_.max_exp + 1;
        for (const auto& iv : cfg.box) {
            lo_.push_back(to_double(iv.lo));
            hi_.push_back(to_double(iv.hi));
        }
        for (std::size_t i = 0; i < L.aux_dim; ++i) {
            lo_.push_back(to_double(cfg.aux_box.lo));
            hi_.push_back(to_double(cfg.aux_box.hi));
        }
    }

    std::size_t dim() const { return lo_.size(); }

    /// Damped descent on P² with Gauss–Newton step scaling; max 500
    /// iterations, iterates clamped into the box.
    std::optional<std::vector<double>> solve(std::vector<double> z) const {
        if (z.size() != dim()) throw std::invalid_argument("start point length mismatch");
        clamp(z);
        double p = p_.eval(z.data());
        if (std::abs(p) <= cfg_.delta_variety) return z; // already on variety
        std::vector<double> g(dim()), trial(dim());
        std::vector<double> step(dim());
        std::vector<long double> pows(dim() * stride_);
        std::vector<double> entry; // iterate at which |P| first dropped below delta
        const double drift_cap2 = 0.05 * 0.05;
        // scalar Gauss-Newton keeps the sample distribution faithful to the
        // random starts; the per-coordinate preconditioned step is axis-biased
        // and herds trajectories toward axis-aligned spots on the variety, so
        // it is engaged only once plain GN stops making real progress (the
        // zigzag regime of mixed stiff/flat curvature)
        bool precond = false;
        double p_ref = std::abs(p);
        int stalled = 0;
        for (int iter = 0; iter < 500; ++iter) {
            fill_pows(z, pows);
            double gnorm2 = 0;
            for (std::size_t i = 0; i < dim(); ++i) {
                g[i] = grad_[i].eval_pows(pows.data(), stride_);
                gnorm2 += g[i] * g[i];
            }
            if (gnorm2 < 1e-300) return std::nullopt; // stationary off the variety
            if (!precond) {
                for (std::size_t i = 0; i < dim(); ++i) step[i] = p * g[i] / gnorm2;
            } else {
                // Jacobi-preconditioned Newton step on P²: per-coordinate
                // curvature g_i² + P·h_ii keeps stiff quadratic aux directions
                // from dominating the flat high-degree valley directions, which
                // would otherwise force tiny zigzag steps
                for (std::size_t i = 0; i < dim(); ++i) {
                    double ph = p * hess_[i].eval_pows(pows.data(), stride_);
                    double denom = g[i] * g[i] + ph;
                    if (!(denom > 0)) denom = g[i] * g[i] + std::abs(ph);
                    step[i] = denom > 1e-300 ? p * g[i] / denom : p * g[i] / gnorm2;
                }
            }
            double lambda = 1.0;
            bool moved = false;
            // keep halving past the first improvement and take the best step
            std::vector<double> best(dim());
            double pbest = p;
            for (int h = 0; h < 40; ++h) {
                for (std::size_t i = 0; i < dim(); ++i) trial[i] = z[i] - lambda * step[i];
                clamp(trial);
                fill_pows(trial, pows);
                double pt = p_.eval_pows(pows.data(), stride_);
                if (std::abs(pt) < std::abs(pbest)) {
                    best = trial;
                    pbest = pt;
                    moved = true;
                } else if (moved) {
                    break;
                }
                lambda *= 0.5;
            }
            if (moved) {
                z = best;
                p = pbest;
            } else if (!precond) {
                precond = true; // GN line search exhausted, retry preconditioned
                stalled = 0;
                continue;
            } else {
                return std::abs(p) <= cfg_.delta_variety
                           ? std::optional<std::vector<double>>(z)
                           : std::nullopt;
            }
            if (std::abs(p) <= 0.5 * p_ref) {
                p_ref = std::abs(p);
                stalled = 0;
            } else if (!precond && ++stalled >= 10) {
                precond = true;
                stalled = 0;
            }
            // past the acceptance threshold, keep polishing while the line
            // search makes progress: the product/SOS polynomials are flat
            // around their zero sets, so a point with |P| barely under delta
            // can still sit delta^(1/4) or worse away from the variety
            if (std::abs(p) <= 1e-15) return z;
            if (std::abs(p) <= cfg_.delta_variety) {
                if (entry.empty()) {
                    entry = z;
                } else {
                    // the polish phase is there to shrink the normal offset,
                    // which is at most ~delta^(1/6) for the degrees in play;
                    // longer travel is tangential drift along the variety that
                    // herds samples into a few attractors and wrecks the
                    // component-proximity statistics
                    double d2 = 0;
                    for (std::size_t i = 0; i < dim(); ++i) {
                        double t = z[i] - entry[i];
                        d2 += t * t;
                    }
                    if (d2 > drift_cap2) return z;
                }
            }
        }
        return std::abs(p) <= cfg_.delta_variety ? std::optional<std::vector<double>>(z)
                                                 : std::nullopt;
    }

    std::vector<double> random_start(std::mt19937_64& rng) const {
        std::vector<double> z(dim());
        for (std::size_t i = 0; i < dim(); ++i)
            z[i] = lo_[i] + (hi_[i] - lo_[i]) * detail::unit_uniform(rng);
        return z;
    }

    const std::vector<double>& lower() const { return lo_; }
    const std::vector<double>& upper() const { return hi_; }

private:
    void clamp(std::vector<double>& z) const {
        for (std::size_t i = 0; i < dim(); ++i) z[i] = std::clamp(z[i], lo_[i], hi_[i]);
    }

    void fill_pows(const std::vector<double>& z, std::vector<long double>& pows) const {
        for (std::size_t i = 0; i < dim(); ++i) {
            long double* row = pows.data() + i * stride_;
            row[0] = 1;
            for (std::size_t k = 1; k < stride_; ++k) row[k] = row[k - 1] * z[i];
        }
    }

    const Lift& lift_;
    const VerifyConfig& cfg_;
    detail::CompiledPoly p_;
    std::vector<detail::CompiledPoly> grad_;
    std::vector<detail::CompiledPoly> hess_; // diagonal second derivatives
    std::size_t stride_ = 1;
    std::vector<double> lo_, hi_;
};

inline std::optional<std::vector<double>> solve_on_variety(const Lift& L,
                                                           const std::vector<double>& start,
                                                           const VerifyConfig& cfg) {
    return VarietySolver(L, cfg).solve(start);
}

/// Exact rational grid coordinates: lo + i·(hi−lo)/(res−1) per axis.
inline std::vector<std::vector<Rational>> grid_points(const VerifyConfig& cfg) {
    std::vector<std::vector<Rational>> axes;
    for (const auto& iv : cfg.box) {
        std::vector<Rational> a;
        Rational step = (iv.hi - iv.lo) / Rational(static_cast<long>(cfg.grid_res - 1));
        for (std::size_t i = 0; i < cfg.grid_res; ++i)
            a.push_back(iv.lo + step * Rational(static_cast<long>(i)));
        axes.push_back(std::move(a));
    }
    std::vector<std::vector<Rational>> pts;
    std::vector<std::size_t> idx(axes.size(), 0);
    if (axes.empty()) return pts;
    for (;;) {
        std::vector<Rational> p;
        p.reserve(axes.size());
        for (std::size_t d = 0; d < axes.size(); ++d) p.push_back(axes[d][idx[d]]);
        pts.push_back(std::move(p));
        std::size_t d = axes.size();
        while (d > 0) {
            --d;
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
            if (d == 0) return pts;
        }
    }
}

/// All grid points of the box that are exactly in the formula's set.
inline std::vector<std::vector<Rational>> sample_formula(const Formula& f,
                                                         const VerifyConfig& cfg) {
    cfg.check();
    if (cfg.box.size() != f.base_dim())
        throw std::invalid_argument("box dimension does not match formula dimension");
    std::vector<std::vector<Rational>> in;
    for (auto& p : grid_points(cfg))
        if (eval_point(f, p)) in.push_back(std::move(p));
    return in;
}

/// Solver-accepted sample points on the variety, deterministic given seed.
inline std::vector<std::vector<double>> sample_variety(const Lift& L, const VerifyConfig& cfg) {
    VarietySolver solver(L, cfg);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::vector<double>> accepted;
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        auto start = solver.random_start(rng);
        if (auto pt = solver.solve(start)) accepted.push_back(std::move(*pt));
    }
    return accepted;
}

struct ComponentEstimate {
    int count = 0;
    bool empty_warning = false;
    std::vector<std::vector<double>> representatives;
};

/// Proximity-graph component count over a fixed point set. Base axes are
/// normalized by their box widths; aux axes are used raw (the aux box only
/// bounds the solver, it is not a natural length scale of the variety).
inline ComponentEstimate components_of(const std::vector<std::vector<double>>& pts,
                                       const VerifyConfig& cfg, std::size_t base_dim,
                                       double eps) {
    ComponentEstimate est;
    if (pts.empty()) {
        est.empty_warning = true;
        return est;
    }
    const std::size_t dim = pts[0].size();
    std::vector<double> inv_w(dim, 1.0);
    for (std::size_t i = 0; i < base_dim && i < cfg.box.size(); ++i)
        inv_w[i] = 1.0 / (to_double(cfg.box[i].hi) - to_double(cfg.box[i].lo));
    detail::UnionFind uf(pts.size());
    const double eps2 = eps * eps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double d2 = 0;
            for (std::size_t d = 0; d < dim; ++d) {
                double t = (pts[i][d] - pts[j][d]) * inv_w[d];
                d2 += t * t;
                if (d2 > eps2) break;
            }
            if (d2 <= eps2) uf.unite(i, j);
        }
    }
    std::vector<bool> seen(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::size_t r = uf.find(i);
        if (!seen[r]) {
            seen[r] = true;
            ++est.count;
            est.representatives.push_back(pts[i]);
        }
    }
    return est;
}

inline ComponentEstimate estimate_components(const Lift& L, const VerifyConfig& cfg) {
    auto accepted = sample_variety(L, cfg);
    return components_of(accepted, cfg, L.base_dim, cfg.eps_proximity);
}

/// Per-grid-point classification from the completeness pass.
enum class GridClass : std::uint8_t { OutOfSet = 0, Witnessed = 1, WitnessFailed = 2 };

struct ProjectionReport : VerifyReport {
    std::vector<GridClass> grid_classes; // one per grid point, row-major
};

/// The property-P contract check: completeness via witness synthesis on
/// in-set grid points, soundness via solver samples projected back through
/// the float membership oracle.
inline ProjectionReport check_projection(const Formula& f, const Lift& L,
                                         const VerifyConfig& cfg) {
    cfg.check();
    if (f.base_dim() != L.base_dim)
        throw std::invalid_argument("formula and lift base dimensions differ");
    if (cfg.box.size() != L.base_dim)
        throw std::invalid_argument("box dimension does not match base dimension");
    ProjectionReport rep;

    // Completeness pass
    for (auto& x : grid_points(cfg)) {
        ++rep.grid_points_examined;
        if (!eval_point(f, x)) {
            rep.grid_classes.push_back(GridClass::OutOfSet);
            continue;
        }
        ++rep.in_set_grid_points;
        bool ok = false;
        std::string why;
        try {
            SynthResult s = synth_witness(L, x);
            if (s.exact) {
                ok = residual_exact(L, x, s.aux_exact) == 0;
                if (!ok) {
                    // exact synthesis may still be checked in float band
                    std::vector<double> xf;
                    for (const auto& c : x) xf.push_back(to_double(c));
                    ok = residual(L, xf, s.aux) <= cfg.delta_variety;
                }
            } else {
                std::vector<double> xf;
                for (const auto& c : x) xf.push_back(to_double(c));
                ok = residual(L, xf, s.aux) <= cfg.delta_variety;
            }
            if (!ok) why = "residual above delta";
        } catch (const WitnessUndefined& e) {
            why = e.what();
        }
        if (ok) {
            ++rep.in_set_witnessed;
            rep.grid_classes.push_back(GridClass::Witnessed);
        } else {
            ++rep.in_set_witness_failed;
            rep.grid_classes.push_back(GridClass::WitnessFailed);
            std::ostringstream os;
            os << "completeness: x = (";
            for (std::size_t i = 0; i < x.size(); ++i)
                os << (i ? ", " : "") << to_string(x[i]);
            os << "): " << why;
            rep.record_failure(os.str());
        }
    }

    // Soundness pass
    auto accepted = sample_variety(L, cfg);
    rep.accepted_points = accepted.size();
    for (const auto& pt : accepted) {
        std::vector<double> xb(pt.begin(), pt.begin() + static_cast<std::ptrdiff_t>(L.base_dim));
        // exact fast path: if a small-denominator rational point within the
        // boundary-ambiguity radius is in the set, the sample is a resolved
        // hit; equality atoms are never float-true, and samples flowing to a
        // set endpoint from outside stall a flatness-limited distance short
        // of it, so both would otherwise always be skipped
        {
            std::vector<Rational> snapped;
            snapped.reserve(xb.size());
            bool all = true;
            for (double c : xb) {
                auto r = detail::snap_rational(c, cfg.eps_boundary);
                if (!r) {
                    all = false;
                    break;
                }
                snapped.push_back(*r);
            }
            if (all && eval_point(f, snapped)) {
                ++rep.sound_hits;
                continue;
            }
        }
        if (min_abs_atom(f, xb) <= cfg.eps_boundary) {
            ++rep.boundary_skipped;
            continue;
        }
        TriBool v = eval_point(f, xb, cfg.tau_membership);
        if (v == TriBool::True) {
            ++rep.sound_hits;
        } else if (v == TriBool::Boundary) {
            ++rep.boundary_skipped;
        } else {
            ++rep.sound_misses;
            std::ostringstream os;
            os << "soundness: projected point (";
            for (std::size_t i = 0; i < xb.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", xb[i]);
                os << (i ? ", " : "") << buf;
            }
            os << ") not in set";
            rep.record_failure(os.str());
        }
    }

    auto est = components_of(accepted, cfg, L.base_dim, cfg.eps_proximity);
    rep.component_estimate = est.count;
    rep.empty_variety_warning = est.empty_warning;
    return rep;
}

/// Fixed-field-order text rendering; byte-identical for identical inputs.
inline std::string report_text(const VerifyReport& r, const VerifyConfig& cfg) {
    std::ostringstream os;
    os << "verify report\n";
    os << "grid_res: " << cfg.grid_res << "\n";
    os << "n_samples: " << cfg.n_samples << "\n";
    os << "seed: " << cfg.seed << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", cfg.delta_variety);
    os << "delta_variety: " << buf << "\n";
    os << "in_set_grid_points: " << r.in_set_grid_points << "\n";
    os << "in_set_witnessed: " << r.in_set_witnessed << "\n";
    os << "in_set_witness_failed: " << r.in_set_witness_failed << "\n";
    os << "accepted_points: " << r.accepted_points << "\n";
    os << "sound_hits: " << r.sound_hits << "\n";
    os << "sound_misses: " << r.sound_misses << "\n";
    os << "boundary_skipped: " << r.boundary_skipped << "\n";
    os << "component_estimate: " << r.component_estimate << "\n";
    os << "note: component estimate is box-relative; compiled lifts need not be compact\n";
    if (r.empty_variety_warning) os << "warning: no solver-accepted points\n";
    os << "failures: " << r.failures.size() << "\n";
    for (const auto& s : r.failures) os << "  " << s << "\n";
    os << "status: " << (r.has_failures() ? "FAIL" : (r.has_warnings() ? "WARN" : "PASS")) << "\n";
    return os.str();
}

} // namespace unsemi

#endif // UNSEMI_VERIFY_HPP
