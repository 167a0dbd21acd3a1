#pragma once

// Determinant evaluation of the Benjamin-Ono solution for rational data.
//
// For t > 0 the projected solution is a ratio of two (N+1) x (N+1)
// determinants whose entries are contour integrals of exp(-i h / eps)
// against 1, u0, and the partial fractions 1/(z - p_k):
//
//   row 0  : the crossing contour C_0,
//   row n  : the sum of the loops around cuts 1..n with nontrivial loop
//            content, or the terminal ray alone when index n is exceptional.
//
// Three independent evaluation routes are provided: the determinant ratio,
// the logarithmic-derivative (tau) form of the Gaussian-rescaled matrix, and
// the linear-system resolvent whose first unknown is -Pi u.  They agree to
// quadrature accuracy and are cross-checked in the test suite.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/geometry.hpp"
#include "bodet/phase.hpp"
#include "bodet/quadrature.hpp"
#include "bodet/rational_data.hpp"
#include "bodet/scaled.hpp"

namespace bodet {

// weight adapter: branch-tracked exp(-i h(z)/eps) along a concrete path
struct PhaseWeight {
    const PhaseContext* ctx;
    using State = BranchState;
    void advance(State& s, cplx z) const { ctx->advance(s, z); }
    cplx log_value(const State& s) const { return ctx->eval_log_weight(s); }
};

struct SolveOptions {
    QuadratureSpec quad;
    double trunc_log10 = 18.0;   // contour truncation depth (decimal digits)
    double clearance_min = 0.35; // loop standoff cap
    double det_floor = 1e-12;    // row-normalized |det B| below this is singular
};

struct Matrices {
    std::vector<std::vector<ScaledComplex>> a, b;
    double max_rel_err = 0.0; // worst per-entry quadrature error, relative
    bool converged = true;
};

struct PiuResult {
    cplx piu;               // projected solution value
    double u = 0.0;         // physical solution 2 Re(Pi u)
    double cond = 1.0;      // pivot-ratio condition estimate of the worse matrix
    double det_b_norm = 0.0;// row-normalized |det B|
    int flag = 0;           // 0 ok, 1 quadrature tolerance not certified
};

struct ResolventResult {
    cplx a;              // constant term; equals -Pi u
    std::vector<cplx> v; // per-pole constants
    double cond = 1.0;
};

namespace detail {

// branch state at a contour's first vertex, continued from the anchor along the lead
inline BranchState lead_state(const PhaseContext& ctx, const Contour& c) {
    BranchState s = ctx.initial_state();
    for (const cplx z : c.lead) ctx.advance(s, z);
    return s;
}

// determinant of a scaled-entry matrix: per-row log-scales are split off so the
// elimination runs on O(1) mantissas
inline DetResult det_rows(const std::vector<std::vector<ScaledComplex>>& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<cplx>> plain(n, std::vector<cplx>(n));
    double esum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double emax = -std::numeric_limits<double>::infinity();
        for (const auto& v : m[r])
            if (!v.is_zero()) emax = std::max(emax, v.log_abs());
        if (!std::isfinite(emax)) emax = 0.0; // all-zero row: determinant vanishes
        esum += emax;
        for (std::size_t c = 0; c < n; ++c)
            plain[r][c] = ScaledComplex{m[r][c].m, m[r][c].e - emax}.to_complex();
    }
    return det_scaled(std::move(plain), esum);
}

} // namespace detail

class Solver {
  public:
    explicit Solver(const RationalData& raw) : geom_(build_cut_geometry(raw)) {}

    const CutGeometry& geometry() const { return geom_; }

    ContourSet contours(double t, double x, const SolveOptions& opts = {}) const {
        ContourParams params;
        params.t = t;
        params.x = x;
        params.trunc_log10 = opts.trunc_log10;
        params.clearance_min = opts.clearance_min;
        return build_contours(geom_, params);
    }

    Matrices assemble(double t, double x, const SolveOptions& opts = {}) const {
        const auto set = contours(t, x, opts);
        const PhaseContext ctx(geom_.data, t, x);
        const PhaseWeight w{&ctx};
        const std::size_t n = geom_.data.size();
        const std::size_t dim = n + 1;

        Matrices m;
        m.a.assign(dim, std::vector<ScaledComplex>(dim, ScaledComplex::zero()));
        m.b.assign(dim, std::vector<ScaledComplex>(dim, ScaledComplex::zero()));

        std::vector<PreFn> pres;
        pres.push_back([this](cplx z) { return eval_u0(geom_.data, z); });
        pres.push_back([](cplx) { return cplx(1.0, 0.0); });
        for (std::size_t k = 0; k < n; ++k) {
            const cplx p = geom_.data.poles[k];
            pres.push_back([p](cplx z) { return 1.0 / (z - p); });
        }

        auto add_row = [&](std::size_t r, const std::vector<IntegralResult>& batch) {
            m.a[r][0] = m.a[r][0] + batch[0].value;
            m.b[r][0] = m.b[r][0] + batch[1].value;
            for (std::size_t k = 1; k < dim; ++k) {
                m.a[r][k] = m.a[r][k] + batch[k + 1].value;
                m.b[r][k] = m.b[r][k] + batch[k + 1].value;
            }
            // An entry shrunk by cancellation may miss its own relative target
            // while its absolute error is negligible at the scale of its row
            // (which is what the determinant sees; conditioning is tracked
            // separately through cond / det_b_norm), or may have stalled at
            // the rounding floor O(eps * abs_mass) that no refinement beats.
            double row_log = kNegInfExp;
            for (const auto& res : batch)
                if (!res.value.is_zero()) row_log = std::max(row_log, res.value.log_abs());
            for (const auto& res : batch) {
                m.max_rel_err = std::max(m.max_rel_err, res.rel_err());
                bool certified = res.converged;
                if (!certified && !res.value.is_zero() && res.err > 0.0)
                    certified = std::log(res.err) + res.value.e <=
                                    std::log(opts.quad.rel_tol) + row_log ||
                                res.err <= 128.0 * 5e-16 * res.abs_mass;
                m.converged = m.converged && certified;
            }
        };

        add_row(0, integrate_path(w, detail::lead_state(ctx, set.c0), set.c0.vertices, pres,
                                  opts.quad));
        for (std::size_t q = 0; q < n; ++q) {
            if (set.loops[q]) {
                const auto batch = integrate_path(w, detail::lead_state(ctx, *set.loops[q]),
                                                  set.loops[q]->vertices, pres, opts.quad);
                for (std::size_t r = q + 1; r <= n; ++r)
                    if (!geom_.classes[r - 1].exceptional) add_row(r, batch);
            }
            if (set.rays[q]) {
                const auto batch = integrate_with_endpoint_singularity(
                    w, detail::lead_state(ctx, *set.rays[q]), set.rays[q]->vertices, pres,
                    set.rays[q]->end_exponent, opts.quad);
                add_row(q + 1, batch);
            }
        }
        return m;
    }

    PiuResult solution_det_ratio(double t, double x, const SolveOptions& opts = {}) const {
        const auto m = assemble(t, x, opts);
        const auto da = detail::det_rows(m.a);
        const auto db = detail::det_rows(m.b);
        PiuResult r;
        r.det_b_norm = db.det.is_zero() ? 0.0 : std::exp(db.det.log_abs() - logsum_rows(m.b));
        if (r.det_b_norm < opts.det_floor)
            throw SingularB("denominator determinant is numerically singular");
        r.piu = ratio(da.det, db.det);
        r.u = 2.0 * r.piu.real();
        r.cond = std::max(da.cond_estimate, db.cond_estimate);
        r.flag = m.converged ? 0 : 1;
        return r;
    }

    // Pi u as i eps d/dx log det of the matrix whose column k >= 1 is rescaled by
    // G_k = exp(i (x - p_{k-1})^2 / (4 t eps)).  The Jacobi expansion is assembled
    // numerically, column by column, without symbolic cancellation.
    cplx solution_tau_form(double t, double x, const SolveOptions& opts = {}) const {
        const auto m = assemble(t, x, opts);
        const std::size_t n = geom_.data.size();
        const double eps = geom_.data.epsilon;
        const auto g = gauss_scales(t, x);

        auto btau = m.b;
        for (std::size_t r = 0; r <= n; ++r)
            for (std::size_t k = 1; k <= n; ++k) btau[r][k] = btau[r][k] * g[k];
        const auto d = detail::det_rows(btau);

        cplx sum(0.0, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            auto bk = btau;
            for (std::size_t r = 0; r <= n; ++r) bk[r][k] = dx_column_entry(m, g, t, x, r, k);
            sum += ratio(detail::det_rows(bk).det, d.det);
        }
        return cplx(0.0, eps) * sum;
    }

    // log det of the Gaussian-rescaled matrix, for finite-difference derivative checks
    cplx log_det_btau(double t, double x, const SolveOptions& opts = {}) const {
        const auto m = assemble(t, x, opts);
        const std::size_t n = geom_.data.size();
        const auto g = gauss_scales(t, x);
        auto btau = m.b;
        for (std::size_t r = 0; r <= n; ++r)
            for (std::size_t k = 1; k <= n; ++k) btau[r][k] = btau[r][k] * g[k];
        const auto d = detail::det_rows(btau);
        if (d.det.is_zero()) throw SingularB("rescaled determinant vanished");
        return cplx(d.det.log_abs(), std::arg(d.det.m));
    }

    // first unknown of B w = -A_{:,0} is -Pi u; the rest are the pole constants
    ResolventResult solve_resolvent(double t, double x, const SolveOptions& opts = {}) const {
        const auto m = assemble(t, x, opts);
        const std::size_t dim = geom_.data.size() + 1;
        std::vector<std::vector<cplx>> bp(dim, std::vector<cplx>(dim));
        std::vector<cplx> rhs(dim);
        for (std::size_t r = 0; r < dim; ++r) {
            double emax = m.a[r][0].is_zero() ? -std::numeric_limits<double>::infinity()
                                              : m.a[r][0].log_abs();
            for (const auto& v : m.b[r])
                if (!v.is_zero()) emax = std::max(emax, v.log_abs());
            if (!std::isfinite(emax)) emax = 0.0;
            for (std::size_t c = 0; c < dim; ++c)
                bp[r][c] = ScaledComplex{m.b[r][c].m, m.b[r][c].e - emax}.to_complex();
            rhs[r] = -ScaledComplex{m.a[r][0].m, m.a[r][0].e - emax}.to_complex();
        }
        ResolventResult out;
        const auto sol = solve_scaled(std::move(bp), std::move(rhs));
        out.a = sol[0];
        out.v.assign(sol.begin() + 1, sol.end());
        out.cond = detail::det_rows(m.b).cond_estimate;
        return out;
    }

  private:
    CutGeometry geom_;

    static double logsum_rows(const std::vector<std::vector<ScaledComplex>>& m) {
        double esum = 0.0;
        for (const auto& row : m) {
            double emax = -std::numeric_limits<double>::infinity();
            for (const auto& v : row)
                if (!v.is_zero()) emax = std::max(emax, v.log_abs());
            esum += std::isfinite(emax) ? emax : 0.0;
        }
        return esum;
    }

    std::vector<ScaledComplex> gauss_scales(double t, double x) const {
        const std::size_t n = geom_.data.size();
        const double eps = geom_.data.epsilon;
        std::vector<ScaledComplex> g(n + 1, ScaledComplex::from(cplx(1.0, 0.0)));
        for (std::size_t k = 1; k <= n; ++k) {
            const cplx p = geom_.data.poles[k - 1];
            const cplx w = cplx(0.0, 1.0) * (x - p) * (x - p) / (4.0 * t * eps);
            g[k] = ScaledComplex::from(cplx(std::cos(w.imag()), std::sin(w.imag())), w.real());
        }
        return g;
    }

    // d/dx of column k of the rescaled matrix, from the assembled entries:
    //   k = 0 : -(i/eps) A_{:,0}
    //   k >= 1: G_k' B_{:,k} + G_k [ (i/(2 t eps)) B_{:,0} + (i (p-x)/(2 t eps)) B_{:,k} ]
    ScaledComplex dx_column_entry(const Matrices& m, const std::vector<ScaledComplex>& g,
                                  double t, double x, std::size_t r, std::size_t k) const {
        const double eps = geom_.data.epsilon;
        if (k == 0) return ScaledComplex::from(cplx(0.0, -1.0 / eps)) * m.a[r][0];
        const cplx p = geom_.data.poles[k - 1];
        const cplx q(0.0, 1.0 / (2.0 * t * eps));
        const ScaledComplex gp = ScaledComplex::from((x - p) * q) * g[k];
        return gp * m.b[r][k] +
               g[k] * (ScaledComplex::from(q) * m.b[r][0] +
                       ScaledComplex::from((p - x) * q) * m.b[r][k]);
    }
};

// ---- resolvent function on the real axis ----

// f(y) = -(i/(2 t eps)) exp(i h(y)/eps) * integral over the corridor path ending
// at y of (u0 + a + sum_k v_k/(z - p_k)) exp(-i h(z)/eps) dz.  It satisfies
//   2 i t eps f' + (y - x + 2 t u0(y)) f = u0(y) + a + sum_k v_k/(y - p_k)
// and y f(y) -> a as y -> -infinity.
inline cplx resolvent_f(const CutGeometry& g, double t, double x, cplx a,
                        const std::vector<cplx>& v, double y, const SolveOptions& opts = {}) {
    const PhaseContext ctx(g.data, t, x);
    const double eps = g.data.epsilon;
    const std::size_t n = g.data.size();

    double off_min = std::numeric_limits<double>::infinity();
    double coeff_sum = 0.0, mod_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        coeff_sum += 2.0 * std::abs(g.data.coeffs[i]);
        mod_max = std::max(mod_max, std::abs(g.data.poles[i]));
        for (const cplx vert : g.cuts[i].vertices) off_min = std::min(off_min, cut_offset(vert));
    }
    double lambda = opts.trunc_log10 * std::log(10.0) + 10.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double r_est = std::abs(x) + std::abs(y) + mod_max +
                             std::sqrt(4.0 * t * eps * lambda) + 10.0;
        lambda = opts.trunc_log10 * std::log(10.0) +
                 (coeff_sum / eps) * (std::log(2.0 + r_est + mod_max) + 2.0 * M_PI) +
                 std::log(1.0 + r_est) + 10.0;
    }
    const double ell_left = off_min - 0.25;
    const cplx wb(std::sqrt(2.0) * ell_left - g.delta0, g.delta0);
    const double s_in = detail::ray_truncation(wb, kCutDir, t, x, eps, 0.0, lambda);
    const std::vector<cplx> path = {wb + s_in * kCutDir, wb, cplx(y, 0.0)};

    std::vector<PreFn> pres{[&g, a, &v](cplx z) {
        cplx s = eval_u0(g.data, z) + a;
        for (std::size_t k = 0; k < v.size(); ++k) s += v[k] / (z - g.data.poles[k]);
        return s;
    }};
    const PhaseWeight w{&ctx};
    BranchState start = ctx.initial_state();
    ctx.advance(start, path.front());
    const auto batch = integrate_path(w, start, path, pres, opts.quad);

    BranchState end = ctx.initial_state();
    ctx.advance(end, cplx(y, 0.0)); // in-strip continuation: same branch as the path
    const cplx lw = ctx.eval_log_weight(end); // -i h(y)/eps
    const ScaledComplex eih{cplx(std::cos(-lw.imag()), std::sin(-lw.imag())), -lw.real()};
    const cplx pref = cplx(0.0, -1.0) / (2.0 * t * eps);
    return pref * (eih * batch[0].value).to_complex();
}

// residual of the resolvent ODE at a regular real point y (derivative by
// centered differences)
inline cplx resolvent_ode_residual(const CutGeometry& g, double t, double x, cplx a,
                                   const std::vector<cplx>& v, double y,
                                   const SolveOptions& opts = {}) {
    const double eps = g.data.epsilon;
    const double dlt = 3e-4;
    const cplx fp = (resolvent_f(g, t, x, a, v, y + dlt, opts) -
                     resolvent_f(g, t, x, a, v, y - dlt, opts)) /
                    (2.0 * dlt);
    const cplx fy = resolvent_f(g, t, x, a, v, y, opts);
    const cplx u0 = eval_u0(g.data, cplx(y, 0.0));
    cplx rhs = u0 + a;
    for (std::size_t k = 0; k < v.size(); ++k) rhs += v[k] / (cplx(y, 0.0) - g.data.poles[k]);
    return 2.0 * cplx(0.0, 1.0) * t * eps * fp + (y - x + 2.0 * t * u0) * fy - rhs;
}

// ---- top-level evaluation with time dispatch ----

// t > 0: determinant evaluation; t = 0: projection of the initial data;
// t < 0: spacetime reflection u(t,x) = u_R(-t,-x) with reflected data
inline cplx evaluate_piu(const RationalData& data, double t, double x,
                         const SolveOptions& opts = {}) {
    if (t > 0.0) return Solver(data).solution_det_ratio(t, x, opts).piu;
    if (t == 0.0) return szego_project(data, cplx(x, 0.0));
    return std::conj(Solver(reflect(data)).solution_det_ratio(-t, -x, opts).piu);
}

struct GridPoint {
    double t = 0.0, x = 0.0;
    cplx piu;
    double u = 0.0;
    double cond = 1.0;
    int flag = 0; // 0 ok, 1 uncertified quadrature, 2 geometry failure, 3 singular matrix
};

inline std::vector<GridPoint> evaluate_u_grid(const RationalData& data,
                                              const std::vector<double>& ts,
                                              const std::vector<double>& xs,
                                              const SolveOptions& opts = {}) {
    std::optional<Solver> fwd, bwd;
    std::vector<GridPoint> out;
    out.reserve(ts.size() * xs.size());
    for (const double t : ts) {
        for (const double x : xs) {
            GridPoint p;
            p.t = t;
            p.x = x;
            try {
                if (t > 0.0) {
                    if (!fwd) fwd.emplace(data);
                    const auto r = fwd->solution_det_ratio(t, x, opts);
                    p.piu = r.piu;
                    p.cond = r.cond;
                    p.flag = r.flag;
                } else if (t == 0.0) {
                    p.piu = szego_project(data, cplx(x, 0.0));
                } else {
                    if (!bwd) bwd.emplace(reflect(data));
                    const auto r = bwd->solution_det_ratio(-t, -x, opts);
                    p.piu = std::conj(r.piu);
                    p.cond = r.cond;
                    p.flag = r.flag;
                }
                p.u = 2.0 * p.piu.real();
            } catch (const SingularB&) {
                p.flag = 3;
                p.piu = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
                p.u = std::numeric_limits<double>::quiet_NaN();
            } catch (const Error&) {
                p.flag = 2;
                p.piu = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
                p.u = std::numeric_limits<double>::quiet_NaN();
            }
            out.push_back(p);
        }
    }
    return out;
}

} // namespace bodet
