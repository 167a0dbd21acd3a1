#pragma once

// Closed-form special functions attached to the -2/(1+x^2) datum and the
// M-soliton family: the exponential integral Ei on (0,inf), the dispersive
// profile F(y), the spectral pair alpha/beta, physicists' Hermite polynomials,
// and the two-integral M-soliton evaluation
//
//     u(t,x) = -(2/M) Im d/dx log[ P_2 I^(M) - P_1 I^(M+1) ],
//
// where I^(Q) = int_{C0} e^{-iM(z-x)^2/(4t)} (z+i)^M (z-i)^{-Q} dz over a
// contour entering at arg z = 3pi/4, crossing the real axis below the pole
// z = i, and leaving at arg z = -pi/4, and P_k are polynomial second-row
// factors given by finite Hermite sums.  The x-derivative uses the exact
// identity  d/dx I^(Q) = iM/(2t) [ I^(Q-1) + (i-x) I^(Q) ]  (differentiation
// under the integral sign), never finite differences.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/quadrature.hpp"

namespace bodet {

// Euler-Mascheroni constant, 20 significant digits
inline constexpr double kEulerGamma = 0.57721566490153286061;

// principal-value exponential integral Ei(k) for k > 0.  Convergent series
// gamma + ln k + sum k^j/(j j!) up to the switch point (all terms positive, no
// cancellation), truncated asymptotic expansion e^k/k sum m!/k^m beyond; the
// two overlap to better than 1e-13 near the switch.
inline double expint_Ei(double k) {
    if (!(k > 0.0)) throw DomainError("expint_Ei requires k > 0");
    constexpr double k_switch = 40.0;
    if (k <= k_switch) {
        double sum = k, term = k;
        for (int j = 1; term > 1e-18 * sum; ++j) {
            term *= k * j / ((j + 1.0) * (j + 1.0));
            sum += term;
        }
        return kEulerGamma + std::log(k) + sum;
    }
    double sum = 1.0, term = 1.0;
    for (int m = 1; ; ++m) {
        const double next = term * m / k;
        if (next >= term) break; // smallest term of the divergent tail
        term = next;
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::exp(k) / k * sum;
}

// dispersive profile F(y) = e^y (pi i + Ei(-2y)) for y < 0; Im F = pi e^y
// exactly because Ei is real on (0,inf)
inline cplx profile_F(double y) {
    if (!(y < 0.0)) throw DomainError("profile_F requires y < 0");
    const double ey = std::exp(y);
    return {ey * expint_Ei(-2.0 * y), ey * M_PI};
}

// spectral functions of the datum u0(x) = -2/(1+x^2) at epsilon = 1
inline cplx alpha_lambda(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("alpha_lambda requires lambda > 0");
    return 2.0 * M_PI * std::exp(lambda) / cplx(expint_Ei(2.0 * lambda), M_PI);
}

inline cplx beta_lambda(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("beta_lambda requires lambda > 0");
    return cplx(0.0, 2.0 * M_PI) * std::exp(lambda) / cplx(expint_Ei(2.0 * lambda), -M_PI);
}

// the weak-limit profile psi-hat coincides with alpha on (0,inf)
inline cplx psi_hat(double lambda) { return alpha_lambda(lambda); }

struct SpectralValue {
    double lambda = 0.0;
    cplx alpha;
    cplx beta; // reflection coefficient; -i beta = conj(alpha) for this datum
};

inline SpectralValue spectral_value(double lambda) {
    return {lambda, alpha_lambda(lambda), beta_lambda(lambda)};
}

// physicists' Hermite polynomial H_n(w) by the three-term recurrence
inline cplx hermite_H(int n, cplx w, int n_max = 64) {
    if (n < 0) throw DomainError("hermite_H requires n >= 0");
    if (n > n_max) throw OrderTooLarge("hermite_H order exceeds n_max");
    cplx prev(1.0, 0.0);
    if (n == 0) return prev;
    cplx cur = 2.0 * w;
    for (int j = 1; j < n; ++j) {
        const cplx next = 2.0 * w * cur - 2.0 * static_cast<double>(j) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int j = 2; j <= n; ++j) f *= j;
    return f;
}

// Second-row factors of the reduced determinant (k = 1 or 2) and their exact
// x-derivatives:
//   P_k = 2 pi i M! (2i)^(2-k) sum_{n=0}^{M+k-2} (2 i w s)^n H_n(w s (x-i))
//                                  / (n! (M+k-2-n)! (n+2-k)!),
// with s = sqrt(M/(4t)) and w = e^{-3 pi i/4}; only the Hermite argument
// depends on x, so dP_k/dx follows from H_n' = 2 n H_{n-1}.
inline void msoliton_row_factor(int m_count, double t, double x, int k, cplx& p, cplx& dp) {
    const double sigma = std::sqrt(m_count / (4.0 * t));
    const cplx om(-M_SQRT1_2, -M_SQRT1_2); // e^{-3 pi i/4}
    const cplx zeta = om * sigma * cplx(x, -1.0);
    const cplx step = cplx(0.0, 2.0) * om * sigma;
    const int n_top = m_count + k - 2;
    const int cap = std::max(64, n_top);
    cplx sum(0.0, 0.0), dsum(0.0, 0.0), pw(1.0, 0.0);
    for (int n = 0; n <= n_top; ++n) {
        const double denom =
            factorial(n) * factorial(n_top - n) * factorial(n + 2 - k);
        sum += pw * hermite_H(n, zeta, cap) / denom;
        if (n >= 1)
            dsum += pw * (2.0 * n) * hermite_H(n - 1, zeta, cap) * om * sigma / denom;
        pw *= step;
    }
    const cplx front = cplx(0.0, 2.0 * M_PI) * factorial(m_count) *
                       (k == 1 ? cplx(0.0, 2.0) : cplx(1.0, 0.0));
    p = front * sum;
    dp = front * dsum;
}

} // namespace detail

struct MSolitonEval {
    double u = 0.0;       // solution value -(2/M) Im(W'/W)
    cplx det_btilde;      // W = P2 I^(M) - P1 I^(M+1)
    cplx ddx_det_btilde;  // exact x-derivative of W
    cplx p1, p2;          // second-row polynomial factors
    cplx i_m, i_m1;       // the two C0 integrals I^(M), I^(M+1)
    std::vector<cplx> g;  // Gaussian moments G_P = int Gauss (z-i)^{-P}, P = 0..M+2
    double quad_rel_err = 0.0;  // worst quadrature error, relative
    double identity_resid = 0.0; // worst internal-identity residual, relative
    bool converged = true;
};

inline QuadratureSpec msoliton_quadrature() {
    QuadratureSpec s;
    s.rel_tol = 1e-12;
    return s;
}

// Evaluate the M-soliton solution (datum p = i, c = -i, epsilon = 1/M) at
// t > 0.  One weight pass computes I^(M-1), I^(M), I^(M+1) and the moments
// G_1..G_{M+2}; G_0 is the exact Gaussian e^{-i pi/4} 2 sqrt(pi t/M).  Two
// exact identities are then verified internally and folded into `converged`:
// the integration-by-parts recursion
//   (P-1) G_P = iM/(2t) ((x-i) G_{P-1} - G_{P-2}),
// whose P = 1 case is the statement dG_0/dx = 0, and the binomial reduction
//   I^(Q) = sum_m C(M,m) (2i)^{M-m} G_{Q-m}
// (the latter checked with a 3^M-scaled tolerance: its alternating terms lose
// about M log2(3) bits to cancellation, which is why the direct quadrature of
// I^(Q) is the production value rather than the reduction).
inline MSolitonEval m_soliton_eval(int m_count, double t, double x,
                                   const QuadratureSpec& spec = msoliton_quadrature()) {
    if (m_count < 1) throw DomainError("m_soliton_eval requires M >= 1");
    if (m_count > 150) throw OrderTooLarge("m_soliton_eval: M! exceeds double range");
    if (!(t > 0.0)) throw DomainError("m_soliton_eval requires t > 0");

    const cplx ii(0.0, 1.0);
    const int m = m_count;

    // contour: enter along e^{3 pi i/4}, run along the real axis below the
    // pole z = i, leave along e^{-pi i/4}; the Gaussian has modulus 1 on the
    // axis and decays like exp(-M s^2/(4t)) along the rays
    const double a = std::min(x, 0.0) - 1.0;
    const double b = std::max(x, 0.0) + 1.0;
    const double lam = std::log(10.0) * 18.0 + 8.0 + m; // weight + pre-factor budget
    const double s = std::sqrt(4.0 * t * lam / m) + 2.0;
    const cplx din(-M_SQRT1_2, M_SQRT1_2);
    const cplx dout(M_SQRT1_2, -M_SQRT1_2);
    const std::vector<cplx> verts{cplx(a, 0.0) + s * din, cplx(a, 0.0), cplx(b, 0.0),
                                  cplx(b, 0.0) + s * dout};

    std::vector<PreFn> pres;
    for (int q = m - 1; q <= m + 1; ++q)
        pres.push_back([m, q, ii](cplx z) {
            return std::pow(z + ii, m) * std::pow(z - ii, -q);
        });
    for (int p = 1; p <= m + 2; ++p)
        pres.push_back([p, ii](cplx z) { return std::pow(z - ii, -p); });

    const GaussWeight w{t, x, 1.0, static_cast<double>(m)};
    const auto res = integrate_path(w, w.state_at(verts.front()), verts, pres, spec);

    MSolitonEval out;
    for (const auto& r : res) {
        out.quad_rel_err = std::max(out.quad_rel_err, r.rel_err());
        out.converged = out.converged && r.converged;
    }
    const cplx i_mm1 = res[0].value.to_complex();
    out.i_m = res[1].value.to_complex();
    out.i_m1 = res[2].value.to_complex();
    out.g.assign(m + 3, cplx(0.0, 0.0));
    out.g[0] = 2.0 * std::sqrt(M_PI * t / m) * cplx(M_SQRT1_2, -M_SQRT1_2);
    for (int p = 1; p <= m + 2; ++p) out.g[p] = res[2 + p].value.to_complex();

    // internal identity checks
    double gscale = 0.0;
    for (const auto& v : out.g) gscale = std::max(gscale, std::abs(v));
    const cplx half_mass(0.0, m / (2.0 * t)); // iM/(2t)
    for (int p = 2; p <= m + 2; ++p) {
        const cplx lhs = (p - 1.0) * out.g[p];
        const cplx rhs = half_mass * (cplx(x, -1.0) * out.g[p - 1] - out.g[p - 2]);
        out.identity_resid = std::max(out.identity_resid, std::abs(lhs - rhs) / gscale);
    }
    if (out.identity_resid > 1e-7) out.converged = false;
    std::vector<cplx> pow2i(m + 1);
    pow2i[0] = 1.0;
    for (int j = 1; j <= m; ++j) pow2i[j] = pow2i[j - 1] * cplx(0.0, 2.0);
    for (int q = m; q <= m + 1; ++q) {
        cplx acc(0.0, 0.0);
        double coeff = 1.0, amag = 0.0;
        for (int j = 0; j <= m; ++j) {
            const cplx term = coeff * pow2i[m - j] * out.g[q - j];
            acc += term;
            amag += std::abs(term);
            coeff = coeff * (m - j) / (j + 1.0);
        }
        const cplx ref = (q == m) ? out.i_m : out.i_m1;
        const double tol = 1e-9 * std::max(amag, std::abs(ref));
        if (std::abs(acc - ref) > std::max(tol, 1e-7 * std::abs(ref))) out.converged = false;
    }

    cplx dp1, dp2;
    detail::msoliton_row_factor(m, t, x, 1, out.p1, dp1);
    detail::msoliton_row_factor(m, t, x, 2, out.p2, dp2);
    const cplx di_m = half_mass * (i_mm1 + cplx(-x, 1.0) * out.i_m);
    const cplx di_m1 = half_mass * (out.i_m + cplx(-x, 1.0) * out.i_m1);

    out.det_btilde = out.p2 * out.i_m - out.p1 * out.i_m1;
    out.ddx_det_btilde = dp2 * out.i_m + out.p2 * di_m - dp1 * out.i_m1 - out.p1 * di_m1;
    out.u = -2.0 / m * std::imag(out.ddx_det_btilde / out.det_btilde);
    return out;
}

inline double m_soliton_oracle(int m_count, double t, double x) {
    return m_soliton_eval(m_count, t, x).u;
}

} // namespace bodet
