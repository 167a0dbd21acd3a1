#pragma once

// Adaptive panel quadrature for contour integrals of pre(z) * exp(w(z)), where the
// log-weight w is supplied by a Weight object that continues its own state along the
// path (branch tracking for the phase weight, plain evaluation otherwise).  Panels are
// seeded by phase equidistribution (bounded oscillation and amplitude change per panel),
// integrated with an embedded Gauss7/Kronrod15 pair on the mantissa pre(z)*exp(w - ref),
// and refined greedily.  All magnitudes are carried as (mantissa, natural-log exponent).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/scaled.hpp"

namespace bodet {

struct QuadratureSpec {
    double rel_tol = 1e-10;      // per-integral relative error target
    double phase_budget = 2.0 * M_PI; // max oscillation (radians) per seed panel
    double amp_budget = 2.0;     // max log-magnitude change per seed panel
    long max_evals = 4000000;    // refinement cap per integrate call
    double grading_ratio = 0.5;  // geometric mesh ratio toward singular endpoints
    double stub_tol = 1e-12;     // dropped-stub budget for singular endpoints
};

struct IntegralResult {
    ScaledComplex value;
    double err = 0.0;      // absolute error estimate in units of exp(value-scale)
    double abs_mass = 0.0; // L1 mass of the panel sums, same units as err; the
                           // rounding floor of err is O(eps * abs_mass), so a
                           // non-converged result with err at that floor cannot
                           // be improved by further refinement
    long evals = 0;
    bool converged = true;
    double max_log_weight = kNegInfExp;   // max Re w over all nodes
    double start_log_weight = kNegInfExp; // Re w at first path vertex
    double end_log_weight = kNegInfExp;   // Re w at last path vertex

    // error relative to the value magnitude
    double rel_err() const {
        if (value.is_zero()) return err == 0.0 ? 0.0 : 1.0;
        return err / std::abs(value.m);
    }
};

using PreFn = std::function<cplx(cplx)>;

namespace detail {

// Gauss7/Kronrod15 nodes and weights on [-1,1] (symmetric half)
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class Weight>
struct Panel {
    typename Weight::State s0; // weight state at point a
    cplx a, b;
    std::vector<cplx> val;     // mantissa integrals per integrand
    std::vector<double> err;   // |K15-G7| per integrand, mantissa units
    std::vector<double> l1;    // sum of |w_i f_i|, the rounding-floor scale of err
    double ref = kNegInfExp;   // log scale of the mantissas
    double priority = 0.0;
};

template <class Weight>
void eval_panel(const Weight& w, const std::vector<PreFn>& pres, Panel<Weight>& p) {
    const std::size_t k = pres.size();
    const cplx mid = 0.5 * (p.a + p.b);
    const cplx half = 0.5 * (p.b - p.a);
    cplx z[15];
    z[7] = mid;
    for (int j = 0; j < 7; ++j) {
        z[j] = mid - kXgk[j] * half;
        z[14 - j] = mid + kXgk[j] * half;
    }
    cplx wv[15];
    std::vector<cplx> pv(15 * k);
    double ref = kNegInfExp;
    for (int j = 0; j < 15; ++j) {
        auto s = p.s0;
        w.advance(s, z[j]);
        wv[j] = w.log_value(s);
        if (!std::isfinite(wv[j].real()) || !std::isfinite(wv[j].imag()))
            throw NonFiniteIntegrand("non-finite log-weight on panel");
        if (wv[j].real() > ref) ref = wv[j].real();
        for (std::size_t q = 0; q < k; ++q) {
            const cplx v = pres[q](z[j]);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NonFiniteIntegrand("non-finite integrand factor on panel");
            pv[15 * q + j] = v;
        }
    }
    cplx f[15];
    p.val.assign(k, cplx(0.0, 0.0));
    p.err.assign(k, 0.0);
    p.l1.assign(k, 0.0);
    p.ref = ref;
    for (std::size_t q = 0; q < k; ++q) {
        for (int j = 0; j < 15; ++j) {
            const cplx e = wv[j] - ref;
            f[j] = pv[15 * q + j] * std::exp(cplx(e.real(), 0.0)) *
                   cplx(std::cos(e.imag()), std::sin(e.imag()));
        }
        cplx resk = kWgk[7] * f[7];
        cplx resg = kWg[3] * f[7];
        double absk = kWgk[7] * std::abs(f[7]);
        for (int j = 0; j < 7; ++j) {
            resk += kWgk[j] * (f[j] + f[14 - j]);
            absk += kWgk[j] * (std::abs(f[j]) + std::abs(f[14 - j]));
        }
        for (int j = 1; j < 7; j += 2) resg += kWg[j / 2] * (f[j] + f[14 - j]);
        p.val[q] = resk * half;
        p.err[q] = std::abs(resk - resg) * std::abs(half);
        p.l1[q] = absk * std::abs(half);
    }
}

// Seed panels along [a,b]: bisect until both the oscillation and the amplitude
// change over each half stay within budget (midpoint check guards aliasing).
template <class Weight>
void seed_segment(const Weight& w, const typename Weight::State& sa, cplx a, cplx b,
                  cplx wa, const QuadratureSpec& spec, int depth,
                  std::vector<Panel<Weight>>& out) {
    const cplx mid = 0.5 * (a + b);
    auto sm = sa;
    w.advance(sm, mid);
    const cplx wm = w.log_value(sm);
    auto sb = sm;
    w.advance(sb, b);
    const cplx wb = w.log_value(sb);
    const double osc = std::abs(wm.imag() - wa.imag()) + std::abs(wb.imag() - wm.imag());
    const double amp = std::abs(wm.real() - wa.real()) + std::abs(wb.real() - wm.real());
    if (depth < 48 && (osc > spec.phase_budget || amp > spec.amp_budget)) {
        seed_segment(w, sa, a, mid, wa, spec, depth + 1, out);
        seed_segment(w, sm, mid, b, wm, spec, depth + 1, out);
        return;
    }
    Panel<Weight> p;
    p.s0 = sa;
    p.a = a;
    p.b = b;
    out.push_back(std::move(p));
}

} // namespace detail

// Integrate pres[q](z) * exp(w(z)) dz along the polyline through `vertices`,
// starting from the weight state `start` positioned at vertices.front().
template <class Weight>
std::vector<IntegralResult> integrate_path(const Weight& w,
                                           const typename Weight::State& start,
                                           const std::vector<cplx>& vertices,
                                           const std::vector<PreFn>& pres,
                                           const QuadratureSpec& spec) {
    using detail::Panel;
    const std::size_t k = pres.size();
    std::vector<IntegralResult> res(k);
    if (vertices.size() < 2 || k == 0) return res;

    std::vector<Panel<Weight>> panels;
    auto s = start;
    auto wlog = w.log_value(s);
    const double start_log = wlog.real();
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
        if (vertices[i + 1] == vertices[i]) continue;
        detail::seed_segment(w, s, vertices[i], vertices[i + 1], wlog, spec, 0, panels);
        w.advance(s, vertices[i + 1]);
        wlog = w.log_value(s);
    }
    const double end_log = wlog.real();

    long evals = 0;
    for (auto& p : panels) {
        detail::eval_panel(w, pres, p);
        evals += 15;
    }

    // running totals at a common reference exponent
    double gref = kNegInfExp;
    for (const auto& p : panels) gref = std::max(gref, p.ref);
    if (gref == kNegInfExp) gref = 0.0;
    std::vector<cplx> total(k, cplx(0.0, 0.0));
    std::vector<double> errsum(k, 0.0), l1sum(k, 0.0);
    auto add_panel = [&](const Panel<Weight>& p, double sign) {
        const double f = std::exp(p.ref - gref);
        if (f == 0.0) return;
        for (std::size_t q = 0; q < k; ++q) {
            total[q] += sign * p.val[q] * f;
            errsum[q] += sign * p.err[q] * f;
            l1sum[q] += sign * p.l1[q] * f;
        }
    };
    auto priority = [&](const Panel<Weight>& p) {
        double worst = 0.0;
        const double f = std::exp(p.ref - gref);
        for (std::size_t q = 0; q < k; ++q) worst = std::max(worst, p.err[q] * f);
        return worst;
    };

    auto cmp = [](const std::pair<double, std::size_t>& x, const std::pair<double, std::size_t>& y) {
        return x.first < y.first;
    };
    std::priority_queue<std::pair<double, std::size_t>, std::vector<std::pair<double, std::size_t>>,
                        decltype(cmp)>
        heap(cmp);
    for (std::size_t i = 0; i < panels.size(); ++i) {
        add_panel(panels[i], +1.0);
        heap.push({priority(panels[i]), i});
    }

    auto converged = [&]() {
        for (std::size_t q = 0; q < k; ++q) {
            const double mag = std::abs(total[q]);
            const double noise = 4.0 * 5e-16 * l1sum[q];
            if (errsum[q] > std::max(spec.rel_tol * mag, noise)) return false;
        }
        return true;
    };

    bool ok = true;
    while (!converged()) {
        if (evals >= spec.max_evals || heap.empty()) {
            ok = false;
            break;
        }
        auto [pr, idx] = heap.top();
        heap.pop();
        if (pr != priority(panels[idx])) { // stale entry
            heap.push({priority(panels[idx]), idx});
            continue;
        }
        if (pr <= 0.0) {
            ok = false;
            break;
        }
        // Retire panels whose error estimate sits at the rounding floor of
        // their own node sums: splitting them cannot reduce errsum further.
        // The floor is well above machine epsilon because node values inherit
        // ulp-scale errors from the oscillatory phase evaluation.
        {
            const auto& p = panels[idx];
            bool saturated = true;
            for (std::size_t q = 0; q < k && saturated; ++q)
                saturated = p.err[q] <= 64.0 * 5e-16 * p.l1[q];
            if (saturated) continue;
        }
        Panel<Weight> left = panels[idx];
        const cplx mid = 0.5 * (left.a + left.b);
        Panel<Weight> right;
        right.s0 = left.s0;
        w.advance(right.s0, mid);
        right.a = mid;
        right.b = left.b;
        left.b = mid;
        add_panel(panels[idx], -1.0);
        detail::eval_panel(w, pres, left);
        detail::eval_panel(w, pres, right);
        evals += 30;
        panels[idx] = std::move(left);
        add_panel(panels[idx], +1.0);
        heap.push({priority(panels[idx]), idx});
        panels.push_back(std::move(right));
        add_panel(panels.back(), +1.0);
        heap.push({priority(panels.back()), panels.size() - 1});
    }

    double maxw = kNegInfExp;
    for (const auto& p : panels) maxw = std::max(maxw, p.ref);
    for (std::size_t q = 0; q < k; ++q) {
        res[q].value = ScaledComplex::from(total[q], gref);
        // err is stored in units of exp(value.e); for a zero value keep gref units
        const double to_value_units =
            res[q].value.is_zero() ? 1.0 : std::exp(gref - res[q].value.e);
        res[q].err = errsum[q] * to_value_units;
        res[q].abs_mass = l1sum[q] * to_value_units;
        res[q].evals = evals;
        const double mag = std::abs(total[q]);
        const double noise = 4.0 * 5e-16 * l1sum[q];
        res[q].converged = ok || errsum[q] <= std::max(spec.rel_tol * mag, noise);
        res[q].max_log_weight = maxw;
        res[q].start_log_weight = start_log;
        res[q].end_log_weight = end_log;
    }
    return res;
}

// Variant for a path whose FINAL vertex is an endpoint where the integrand behaves
// like (z - z_end)^a * analytic.  The final segment is replaced by a geometrically
// graded mesh toward the endpoint and an excluded stub whose contribution is bounded
// by stub_tol relative to the local integrand scale.  Requires Re(a) > -1.
template <class Weight>
std::vector<IntegralResult> integrate_with_endpoint_singularity(
    const Weight& w, const typename Weight::State& start, const std::vector<cplx>& vertices,
    const std::vector<PreFn>& pres, double end_exponent, const QuadratureSpec& spec) {
    if (end_exponent <= -1.0)
        throw NonIntegrableEndpoint("endpoint exponent must exceed -1 for integrability");
    if (vertices.size() < 2) return std::vector<IntegralResult>(pres.size());

    const cplx zs = vertices.back();
    const cplx v = vertices[vertices.size() - 2];
    const double len = std::abs(zs - v);
    if (len == 0.0) throw NonIntegrableEndpoint("degenerate final segment");

    // stub size: eta^(a+1) <= stub_tol relative to the approach scale
    const double ap1 = end_exponent + 1.0;
    double eta = std::pow(spec.stub_tol, 1.0 / ap1);
    eta = std::min(eta, 0.25);
    const double rho = spec.grading_ratio;
    int levels = static_cast<int>(std::ceil(std::log(eta) / std::log(rho)));
    // keep the innermost vertex a representable distance away from the endpoint
    const double eta_floor = 1e-13 * (1.0 + std::abs(zs)) / len;
    if (eta_floor < 1.0)
        levels = std::min(levels,
                          static_cast<int>(std::floor(std::log(eta_floor) / std::log(rho))));
    levels = std::clamp(levels, 1, 250);
    const double eta_achieved = std::pow(rho, static_cast<double>(levels));

    std::vector<cplx> graded(vertices.begin(), vertices.end() - 1);
    for (int j = 1; j <= levels; ++j)
        graded.push_back(zs + (v - zs) * std::pow(rho, static_cast<double>(j)));
    auto res = integrate_path(w, start, graded, pres, spec);
    const double stub_rel = std::pow(eta_achieved, ap1);
    if (stub_rel > spec.stub_tol) {
        for (auto& r : res) {
            r.err += stub_rel * std::abs(r.value.m);
            if (stub_rel > spec.rel_tol) r.converged = false;
        }
    }
    return res;
}

// trivial weight: w(z) = 0 (plain complex quadrature along a polyline)
struct UnitWeight {
    struct State {
        cplx z;
    };
    State state_at(cplx z) const { return {z}; }
    void advance(State& s, cplx z) const { s.z = z; }
    cplx log_value(const State&) const { return {0.0, 0.0}; }
};

// w(z) = k z (linear exponential, e.g. Fourier kernels)
struct LinExpWeight {
    cplx k;
    struct State {
        cplx z;
    };
    State state_at(cplx z) const { return {z}; }
    void advance(State& s, cplx z) const { s.z = z; }
    cplx log_value(const State& s) const { return k * s.z; }
};

// w(z) = -i m (z - x)^2 / (4 t eps) (pure Gaussian phase)
struct GaussWeight {
    double t, x, eps = 1.0, mass = 1.0;
    struct State {
        cplx z;
    };
    State state_at(cplx z) const { return {z}; }
    void advance(State& s, cplx z) const { s.z = z; }
    cplx log_value(const State& s) const {
        const cplx d = s.z - x;
        return cplx(0.0, -mass) * d * d / (4.0 * t * eps);
    }
};

// adaptive quadrature of a real- or complex-valued function on a real interval
inline cplx integrate_real(const std::function<cplx(double)>& f, double a, double b,
                           double rel_tol = 1e-12) {
    QuadratureSpec spec;
    spec.rel_tol = rel_tol;
    spec.amp_budget = 1e300; // no exponential weight; seed only on request
    UnitWeight w;
    std::vector<PreFn> pres{[&f](cplx z) { return f(z.real()); }};
    // seed with a few panels so features away from the midpoint are seen
    std::vector<cplx> verts;
    const int seeds = 8;
    for (int i = 0; i <= seeds; ++i)
        verts.emplace_back(a + (b - a) * static_cast<double>(i) / seeds, 0.0);
    auto r = integrate_path(w, w.state_at(verts.front()), verts, pres, spec);
    return r[0].value.to_complex();
}

} // namespace bodet
