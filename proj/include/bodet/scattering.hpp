#pragma once

// Long-time scattering harness for the datum u0(x) = -2/(1+x^2).
//
// In frames x = 2ty with velocity 2y < 0 the projected solution has the
// renormalized profile
//
//     phi(t,y) = e^{-i pi/4} sqrt(4 pi t) e^{i t y^2} Pi u(t, 2ty),
//
// which converges locally uniformly for y < 0 to the spectral function
//
//     psi_hat(-y) = alpha(-y) = 2 pi e^{-y} / (Ei(-2y) + i pi).
//
// The corresponding strong statement is L^2 convergence of u(t,.) to the
// free half-line evolution of the scattered profile u_+ = 2 Re(psi), whose
// Hardy part is the explicit Fourier multiplier
//
//     e^{-i t dxx} psi#(t,x) = e^{i pi/4} (4 pi t)^{-1/2}
//                              e^{-i x^2/(4t)} psi_hat(-x/(2t)),
//
// supported in x < 0.  This header evaluates both sides on scaled grids,
// the Jost solution m_-(x,lambda) of the Lax eigenvalue problem in closed
// form, the distorted Plancherel identity ||Pi u0||^2 = pi, and truncated
// tail-corrected conserved quantities  int u dx  and  int u^2 dx.
//
// Convergence of phi is slow near y = 0: the leading correction carried by
// the residue expansion of the column integrals is O(sqrt(1/t)/|y|) with an
// oscillatory factor, so pointwise deviations at moderate t are O(10^-1)
// and are not monotone between single t-doublings at fixed small |y|.  The
// regression values frozen in the tests were calibrated against a 40-digit
// independent evaluation of Pi u at the probe points.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/quadrature.hpp"
#include "bodet/rational_data.hpp"
#include "bodet/solver.hpp"
#include "bodet/special.hpp"

namespace bodet {

// the two reference N = 1 data sets with the pole at z = i
inline RationalData minus_soliton_datum() {
    RationalData d;
    d.poles = {cplx(0.0, 1.0)};
    d.coeffs = {cplx(0.0, 1.0)}; // u0 = -2/(1+x^2), exceptional index
    d.epsilon = 1.0;
    return d;
}

inline RationalData soliton_datum() {
    RationalData d;
    d.poles = {cplx(0.0, 1.0)};
    d.coeffs = {cplx(0.0, -1.0)}; // u0 = +2/(1+x^2), translating wave
    d.epsilon = 1.0;
    return d;
}

// one sample of the renormalized profile at velocity 2y
struct ProfileRecord {
    double t = 0.0;
    double y = 0.0;   // y < 0
    cplx phi;         // e^{-i pi/4} sqrt(4 pi t) e^{i t y^2} Pi u(t, 2ty)
    cplx target;      // psi_hat(-y)
    double deviation = 0.0; // |phi - target|
    int flag = 0;     // nonzero when the sample is uncertified
};

// profile sweep for the -2/(1+x^2) datum at fixed t > 0
inline std::vector<ProfileRecord> renormalized_profile(double t,
                                                       const std::vector<double>& ys,
                                                       const SolveOptions& opts = {}) {
    if (!(t > 0.0)) throw DomainError("renormalized_profile: requires t > 0");
    for (const double y : ys)
        if (!(y < 0.0)) throw DomainError("renormalized_profile: requires y < 0");

    const Solver solver(minus_soliton_datum());
    const double root = std::sqrt(4.0 * M_PI * t);
    std::vector<ProfileRecord> out;
    out.reserve(ys.size());
    for (const double y : ys) {
        ProfileRecord r;
        r.t = t;
        r.y = y;
        const auto s = solver.solution_det_ratio(t, 2.0 * t * y, opts);
        // assemble the phase in parts; t*y*y stays well below 2^53 here
        const double ph = t * y * y;
        const cplx rot(std::cos(ph), std::sin(ph));
        r.phi = root * cplx(M_SQRT1_2, -M_SQRT1_2) * rot * s.piu;
        r.target = psi_hat(-y);
        r.deviation = std::abs(r.phi - r.target);
        r.flag = s.flag;
        out.push_back(r);
    }
    return out;
}

// free half-line evolution of the chirped profile: the Hardy-part Fourier
// multiplier evaluated in closed form; identically zero for x >= 0 because
// the transform is supported on positive frequencies
inline cplx free_evolution_profile(double t, double x,
                                   const std::function<cplx(double)>& psi_hat_fn) {
    if (!(t > 0.0)) throw DomainError("free_evolution_profile: requires t > 0");
    if (x >= 0.0) return cplx(0.0, 0.0);
    const double ph = -x * x / (4.0 * t);
    const cplx rot(std::cos(ph), std::sin(ph));
    return cplx(M_SQRT1_2, M_SQRT1_2) / std::sqrt(4.0 * M_PI * t) * rot *
           psi_hat_fn(-x / (2.0 * t));
}

inline cplx free_evolution_profile(double t, double x) {
    return free_evolution_profile(t, x, [](double lam) { return psi_hat(lam); });
}

// residual grid scaled with t: x in [lo_factor*t, hi_factor*t], spacing
// bounded by one eighth of the local oscillation wavelength 4 pi t / |x|
// and by t/20, so both the chirp and the O(1/x) envelope are resolved
inline std::vector<double> scattering_grid(double t, double lo_factor = -4.0,
                                           double hi_factor = 0.5) {
    if (!(t > 0.0) || !(lo_factor < 0.0) || !(hi_factor <= 0.5) ||
        !(lo_factor < hi_factor))
        throw DomainError("scattering_grid: requires t > 0, lo < 0, lo < hi <= 0.5");
    std::vector<double> xs;
    double x = lo_factor * t;
    const double hi = hi_factor * t;
    while (x < hi) {
        xs.push_back(x);
        const double wavelength = 4.0 * M_PI * t / std::max(std::abs(x), 1.0);
        x += std::min(0.05 * t, wavelength / 8.0);
    }
    xs.push_back(hi);
    return xs;
}

// discrete-L^2 distance (trapezoid weights) between u(t,.) and twice the
// real part of the free evolution, over the given grid.  Any uncertified
// solver sample aborts the sweep: a residual assembled from flagged values
// would not witness convergence.
inline double scattering_residual(double t, const std::vector<double>& xs,
                                  const std::function<cplx(double)>& psi_hat_fn,
                                  const SolveOptions& opts = {}) {
    if (!(t > 0.0)) throw DomainError("scattering_residual: requires t > 0");
    if (xs.size() < 2) throw DomainError("scattering_residual: grid too small");

    const Solver solver(minus_soliton_datum());
    std::vector<double> diff2(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto s = solver.solution_det_ratio(t, xs[i], opts);
        if (s.flag != 0)
            throw Error("scattering_residual: uncertified sample at x = " +
                        std::to_string(xs[i]));
        const cplx free = free_evolution_profile(t, xs[i], psi_hat_fn);
        const double d = s.u - 2.0 * free.real();
        diff2[i] = d * d;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        acc += 0.5 * (diff2[i] + diff2[i + 1]) * (xs[i + 1] - xs[i]);
    return std::sqrt(acc);
}

inline double scattering_residual(double t, const std::vector<double>& xs,
                                  const SolveOptions& opts = {}) {
    return scattering_residual(t, xs, [](double lam) { return psi_hat(lam); }, opts);
}

// Jost solution of  -i m' - Pi(u0 m) = lambda m  for u0 = -2/(1+x^2),
// analytic and bounded in the upper half x-plane with e^{-i lambda x} m -> 1
// as x -> -infinity:
//
//     m_-(x,lambda) = (x+i)/(x-i) e^{i lambda x}
//                     [ int_x^i e^{-i lambda z}/(z+i) dz ]
//                     / [ e^{-lambda} (Ei(2 lambda) - i pi) ],
//
// the numerator path being the straight segment from x to i
inline cplx jost_m_minus(double x, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("jost_m_minus: requires lambda > 0");
    const LinExpWeight w{cplx(0.0, -lambda)};
    const std::vector<cplx> path = {cplx(x, 0.0), cplx(0.0, 1.0)};
    std::vector<PreFn> pres{[](cplx z) { return 1.0 / (z + cplx(0.0, 1.0)); }};
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    const auto num =
        integrate_path(w, w.state_at(path.front()), path, pres, spec)[0].value.to_complex();
    const cplx den = std::exp(-lambda) * cplx(expint_Ei(2.0 * lambda), -M_PI);
    const cplx x_c(x, 0.0);
    const cplx rot(std::cos(lambda * x), std::sin(lambda * x));
    return (x_c + cplx(0.0, 1.0)) / (x_c - cplx(0.0, 1.0)) * rot * num / den;
}

// pointwise residual of the first-order form of the eigenvalue equation,
//
//     m' + 2i/(1+x^2) m - i lambda m = c/(x-i),
//     c = -e^{lambda} / (Ei(2 lambda) - i pi),
//
// with the derivative taken by centered differences.  The right-hand side is
// the pole correction that turns u0*m into the Hardy projection Pi(u0 m).
inline cplx jost_ode_residual(double x, double lambda, double fd_step = 1e-4) {
    const cplx mp = jost_m_minus(x + fd_step, lambda);
    const cplx mm = jost_m_minus(x - fd_step, lambda);
    const cplx m = jost_m_minus(x, lambda);
    const cplx dm = (mp - mm) / (2.0 * fd_step);
    const cplx c = -std::exp(lambda) / cplx(expint_Ei(2.0 * lambda), -M_PI);
    return dm + cplx(0.0, 2.0) / (1.0 + x * x) * m - cplx(0.0, lambda) * m -
           c / (cplx(x, 0.0) - cplx(0.0, 1.0));
}

// distorted Plancherel identity for the projected datum Pi u0 = -i/(x+i):
// lhs = ||Pi u0||^2 = pi exactly; rhs = (1/2pi) int_0^inf |alpha|^2 dlambda
struct PlancherelCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline PlancherelCheck plancherel_norm_check() {
    PlancherelCheck out;
    out.lhs = M_PI;
    // |alpha|^2 vanishes ~ 1/log^2 at 0+ and decays like e^{-2 lambda} for
    // large lambda: the untruncated head below 1e-8 and tail beyond 60
    // contribute less than 1e-9 together
    const double cuts[] = {1e-8, 1e-5, 1e-2, 0.5, 2.0, 8.0, 60.0};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < std::size(cuts); ++i)
        acc += integrate_real(
                   [](double lam) {
                       const cplx a = alpha_lambda(lam);
                       return cplx(std::norm(a), 0.0);
                   },
                   cuts[i], cuts[i + 1], 1e-11)
                   .real();
    out.rhs = acc / (2.0 * M_PI);
    return out;
}

// same norm through the defining transform: (1/2pi) int |f~(lambda)|^2 with
// f~(lambda) = int f(x) m_-(x,lambda)* dx for f = Pi u0, both integrals by
// coarse deterministic rules.  The x-integrand is
//
//     f(x) m_-* = -i (x-i)/(x+i)^2 e^{-i lambda x} N(x)* / D*,
//     N(x) = int_x^i e^{-i lambda z}/(z+i) dz,
//
// where N is marched right-to-left by per-step Simpson of its derivative
// -e^{-i lambda x}/(x+i) and the |x| > x_half tails are closed by one
// integration by parts in the oscillatory factor.  The lambda integral is
// composite Simpson in log(lambda).  Expected agreement with the
// lambda-side quadrature is ~1e-2 (coarse x-march, IBP tail truncation).
inline double transform_norm_coarse(double x_half = 600.0, int n_lambda = 97) {
    if (!(x_half >= 100.0) || n_lambda < 9)
        throw DomainError("transform_norm_coarse: grid too coarse");
    if (n_lambda % 2 == 0) ++n_lambda; // Simpson needs an even interval count

    const cplx iden(0.0, 1.0);
    const double lam_lo = 0.01, lam_hi = 14.0;
    std::vector<double> lams(static_cast<std::size_t>(n_lambda));
    for (int j = 0; j < n_lambda; ++j)
        lams[static_cast<std::size_t>(j)] =
            lam_lo * std::pow(lam_hi / lam_lo, static_cast<double>(j) / (n_lambda - 1));

    std::vector<double> f2(lams.size()); // |f~(lambda)|^2
    for (std::size_t j = 0; j < lams.size(); ++j) {
        const double lam = lams[j];
        const cplx den = std::exp(-lam) * cplx(expint_Ei(2.0 * lam), -M_PI);
        const auto dN = [&](double x) { // leftward increment: N(x-h) = N(x) + int_{x-h}^x
            const cplx rot(std::cos(lam * x), -std::sin(lam * x));
            return rot / (cplx(x, 0.0) + iden);
        };
        // anchor N at the right end by adaptive quadrature along {x_half, i}
        const LinExpWeight w{cplx(0.0, -lam)};
        const std::vector<cplx> path = {cplx(x_half, 0.0), iden};
        std::vector<PreFn> pres{[&iden](cplx z) { return 1.0 / (z + iden); }};
        QuadratureSpec spec;
        spec.rel_tol = 1e-10;
        const cplx n_anchor =
            integrate_path(w, w.state_at(path.front()), path, pres, spec)[0].value.to_complex();
        cplx bigN = n_anchor;

        const double h = std::min(0.35, 2.0 * M_PI / (10.0 * lam));
        const auto g = [&](double x, cplx n_val) { // f(x) m_-(x,lambda)*
            const cplx xc(x, 0.0);
            const cplx rot(std::cos(lam * x), -std::sin(lam * x));
            return -iden * (xc - iden) / ((xc + iden) * (xc + iden)) * rot *
                   std::conj(n_val) / std::conj(den);
        };
        // trapezoid in x while marching N leftward, one Simpson step per cell
        cplx acc = 0.5 * h * g(x_half, bigN);
        double x = x_half;
        while (x > -x_half + 0.5 * h) {
            const double xm = x - 0.5 * h, xl = x - h;
            bigN += (h / 6.0) * (dN(x) + 4.0 * dN(xm) + dN(xl)); // N grows leftward
            const double wgt = (xl > -x_half + 0.5 * h) ? 1.0 : 0.5;
            acc += wgt * h * g(xl, bigN);
            x = xl;
        }
        // tails by one integration by parts in the oscillatory factor: with
        // G = g e^{+i lam x} slowly varying (flat N limits at both ends),
        // int_L^inf g dx ~ g(L)/(i lam) and int_-inf^-L g dx ~ -g(-L)/(i lam)
        acc += g(x_half, n_anchor) / (iden * lam);
        acc -= g(x, bigN) / (iden * lam);
        f2[j] = std::norm(acc);
    }
    // Simpson in log-lambda: int |f~|^2 dlambda = int |f~|^2 lambda dlog
    const double du = std::log(lam_hi / lam_lo) / (n_lambda - 1);
    double total = 0.0;
    for (std::size_t j = 0; j < lams.size(); ++j) {
        const double w =
            (j == 0 || j + 1 == lams.size()) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        total += w * f2[j] * lams[j];
    }
    return total * du / 3.0 / (2.0 * M_PI);
}

// conserved quantities on a truncated grid with algebraic tail correction
struct ConservedRow {
    double t = 0.0;
    double integral_u = 0.0;  // int u dx
    double integral_u2 = 0.0; // int u^2 dx
    bool tail_ok = true;      // tail fit residual small enough to certify
};

// int u and int u^2 at each requested time.  The density is sampled by a
// composite Simpson core (fine enough for the chirp at scale 4 pi t eps /
// |x|) and geometrically graded wings; beyond half_width the densities are
// closed by fitted tails  u ~ c2/x^2 + c3/x^3  and  u^2 ~ d4/x^4 + d5/x^5,
// which is the exact decay family for rational data.  tail_ok is cleared
// when the wing samples do not fit that family to ~2%, e.g. when the
// dispersive support has outrun half_width.
inline std::vector<ConservedRow> conserved_quantities(const RationalData& data,
                                                      const std::vector<double>& ts,
                                                      double half_width = 300.0,
                                                      const SolveOptions& opts = {}) {
    if (!(half_width >= 50.0))
        throw DomainError("conserved_quantities: half_width below 50");
    for (const double t : ts)
        if (t < 0.0) throw DomainError("conserved_quantities: requires t >= 0");

    std::optional<Solver> solver;
    std::vector<ConservedRow> rows;
    rows.reserve(ts.size());
    for (const double t : ts) {
        // u(t,x) via the determinant ratio (t > 0) or the projection (t = 0)
        const auto u_at = [&](double x) -> double {
            if (t == 0.0) return 2.0 * szego_project(data, cplx(x, 0.0)).real();
            if (!solver) solver.emplace(data);
            const auto r = solver->solution_det_ratio(t, x, opts);
            if (r.flag != 0)
                throw Error("conserved_quantities: uncertified sample at x = " +
                            std::to_string(x));
            return r.u;
        };

        double mod_max = 0.0, re_max = 0.0;
        for (const cplx p : data.poles) {
            mod_max = std::max(mod_max, std::abs(p));
            re_max = std::max(re_max, std::abs(p.real()));
        }
        const double eps = data.epsilon;
        // dispersive support scale: velocity band ~ O(1) widened by t
        const double core =
            std::min(std::max({20.0 + mod_max, 40.0 * t * eps, re_max + 10.0}),
                     0.5 * half_width);
        const double h_core =
            (t > 0.0) ? std::min(0.05, 0.4 * M_PI * t * eps / core) : 0.05;

        // composite Simpson over [-core, core]
        std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * core / h_core));
        if (n % 2 == 1) ++n;
        const double h = 2.0 * core / static_cast<double>(n);
        double iu = 0.0, iu2 = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            const double x = -core + static_cast<double>(k) * h;
            const double w = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            const double u = u_at(x);
            iu += w * u;
            iu2 += w * u * u;
        }
        iu *= h / 3.0;
        iu2 *= h / 3.0;

        // geometric wings out to +-half_width, trapezoid in x
        const double ratio = 1.02;
        std::vector<double> xs_w, us_p, us_m; // |x| grid, u at +x, u at -x
        for (double x = core; x < half_width * (1.0 + 1e-12); x *= ratio) {
            xs_w.push_back(x);
            us_p.push_back(u_at(x));
            us_m.push_back(u_at(-x));
        }
        if (xs_w.back() < half_width) {
            xs_w.push_back(half_width);
            us_p.push_back(u_at(half_width));
            us_m.push_back(u_at(-half_width));
        }
        for (std::size_t k = 0; k + 1 < xs_w.size(); ++k) {
            const double dx = xs_w[k + 1] - xs_w[k];
            iu += 0.5 * dx * (us_p[k] + us_p[k + 1] + us_m[k] + us_m[k + 1]);
            iu2 += 0.5 * dx *
                   (us_p[k] * us_p[k] + us_p[k + 1] * us_p[k + 1] + us_m[k] * us_m[k] +
                    us_m[k + 1] * us_m[k + 1]);
        }

        // tail fits over the last wing samples on each side: least squares of
        // u x^2 = c2 + c3/x (signed x), so  int_{|x|>W} u dx = (c2p+c2m)/W
        // -+ (c3p-c3m)/(2W^2) and similarly d4/(3W^3) for the square
        const std::size_t m_fit = std::min<std::size_t>(8, xs_w.size());
        double c2[2] = {0.0, 0.0}, c3[2] = {0.0, 0.0};
        double d4[2] = {0.0, 0.0}, d5[2] = {0.0, 0.0};
        double fit_res = 0.0, fit_scale = 0.0;
        for (int side = 0; side < 2; ++side) {
            const auto& us = side == 0 ? us_p : us_m;
            double s00 = 0.0, s01 = 0.0, s11 = 0.0, b0 = 0.0, b1 = 0.0;
            double q0 = 0.0, q1 = 0.0; // same normal equations for u^2 x^4
            for (std::size_t k = xs_w.size() - m_fit; k < xs_w.size(); ++k) {
                const double x = side == 0 ? xs_w[k] : -xs_w[k];
                const double v = us[k] * x * x;
                const double v2 = us[k] * us[k] * x * x * x * x;
                const double a1 = 1.0 / x;
                s00 += 1.0;
                s01 += a1;
                s11 += a1 * a1;
                b0 += v;
                b1 += v * a1;
                q0 += v2;
                q1 += v2 * a1;
            }
            const double det = s00 * s11 - s01 * s01;
            c2[side] = (b0 * s11 - b1 * s01) / det;
            c3[side] = (s00 * b1 - s01 * b0) / det;
            d4[side] = (q0 * s11 - q1 * s01) / det;
            d5[side] = (s00 * q1 - s01 * q0) / det;
            for (std::size_t k = xs_w.size() - m_fit; k < xs_w.size(); ++k) {
                const double x = side == 0 ? xs_w[k] : -xs_w[k];
                fit_res = std::max(fit_res,
                                   std::abs(us[k] * x * x - (c2[side] + c3[side] / x)));
                fit_scale = std::max(fit_scale, std::abs(us[k] * x * x));
            }
        }
        const double w_end = half_width;
        // right tail: int_W^inf (c2/x^2 + c3/x^3) = c2/W + c3/(2W^2);
        // left tail mirrors with x -> -x
        iu += c2[0] / w_end + c3[0] / (2.0 * w_end * w_end);
        iu += c2[1] / w_end - c3[1] / (2.0 * w_end * w_end);
        iu2 += d4[0] / (3.0 * w_end * w_end * w_end) +
               d5[0] / (4.0 * w_end * w_end * w_end * w_end);
        iu2 += d4[1] / (3.0 * w_end * w_end * w_end) -
               d5[1] / (4.0 * w_end * w_end * w_end * w_end);

        ConservedRow row;
        row.t = t;
        row.integral_u = iu;
        row.integral_u2 = iu2;
        row.tail_ok = fit_res <= 0.02 * std::max(fit_scale, 1e-12);
        rows.push_back(row);
    }
    return rows;
}

} // namespace bodet
