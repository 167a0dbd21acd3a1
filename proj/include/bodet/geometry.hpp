#pragma once

// Branch-cut geometry and integration contours.
//
// Each pole p_n carries a cut asymptotic to the direction exp(3 i pi/4); cuts are
// ordered left-to-right near infinity by the transverse offset Re(z exp(-i pi/4)).
// When a straight ray would collide with another cut or pass near a foreign pole,
// the offending cut receives a short initial dog-leg that shifts its asymptotic
// ray to the left.  Conjugate poles carry horizontal leftward cuts, which never
// interact with the upper family and constrain only the lower corridor of C_0.
//
// Contours realized per matrix row:
//   C_0             from infinity at 3pi/4 (left of every cut) to infinity at -pi/4,
//                   crossing the real axis near the Gaussian saddle y = x,
//   C_n generic     counterclockwise U-loop around cut n (row n sums loops 1..n),
//   C_n exceptional ray from infinity at 3pi/4 terminating at p_n.
//
// Every contour carries a lead polyline from the real-axis branch anchor to its
// first vertex.  Leads pin the branch of the phase and must not cross any cut
// with a nontrivial jump; they are found by a visibility route around the cut
// polylines whenever the direct segment is blocked.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/rational_data.hpp"

namespace bodet {

inline const cplx kCutDir = cplx(-1.0, 1.0) / std::sqrt(2.0); // exp(3 i pi/4)
inline const cplx kOutDir = cplx(1.0, -1.0) / std::sqrt(2.0); // exp(-i pi/4)

// ---- segment utilities ----

inline double dist_point_segment(cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double u = ((p.real() - a.real()) * d.real() + (p.imag() - a.imag()) * d.imag()) / len2;
    u = std::clamp(u, 0.0, 1.0);
    return std::abs(p - (a + u * d));
}

inline bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
    auto orient = [](cplx p, cplx q, cplx r) {
        const double v = (q.real() - p.real()) * (r.imag() - p.imag()) -
                         (q.imag() - p.imag()) * (r.real() - p.real());
        if (v > 0.0) return 1;
        if (v < 0.0) return -1;
        return 0;
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    return false; // collinear grazing contact does not count as a crossing
}

inline double dist_segment_segment(cplx a, cplx b, cplx c, cplx d) {
    if (segments_cross(a, b, c, d)) return 0.0;
    return std::min(std::min(dist_point_segment(c, a, b), dist_point_segment(d, a, b)),
                    std::min(dist_point_segment(a, c, d), dist_point_segment(b, c, d)));
}

inline double dist_polyline_polyline(const std::vector<cplx>& u, const std::vector<cplx>& v) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        for (std::size_t j = 0; j + 1 < v.size(); ++j)
            best = std::min(best, dist_segment_segment(u[i], u[i + 1], v[j], v[j + 1]));
    return best;
}

inline double dist_point_polyline(cplx p, const std::vector<cplx>& v) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < v.size(); ++j)
        best = std::min(best, dist_point_segment(p, v[j], v[j + 1]));
    return best;
}

// ---- cuts ----

struct Cut {
    std::size_t pole = 0;       // index into the canonical data
    std::vector<cplx> vertices; // p_n [, dog-leg vertex]; final vertex continues as a ray
    double offset_inf = 0.0;    // asymptotic transverse offset of the ray

    // polyline with the ray truncated at arclength s_far past the last vertex
    std::vector<cplx> sampled(double s_far) const {
        std::vector<cplx> v = vertices;
        v.push_back(vertices.back() + s_far * kCutDir);
        return v;
    }
};

struct CutGeometry {
    RationalData data; // canonical (left-to-right) order
    std::vector<IndexClass> classes;
    std::vector<Cut> cuts;  // one per pole, same order
    double delta0 = 0.0;    // corridor half-height: min Im(p)/2
    double delta = 0.0;     // lower-half-plane margin of the cut family
    double sep_need = 0.0;  // enforced pairwise cut separation
    double span = 0.0;      // geometric extent used for sampling windows

    // true when exp(-i h/eps) extends continuously across cut n
    bool jump_trivial(std::size_t n) const {
        return classes[n].exceptional || classes[n].integer_order.has_value();
    }
};

inline CutGeometry build_cut_geometry(const RationalData& raw) {
    validate(raw);
    CutGeometry g;
    g.data = canonical(raw);
    g.classes = classify(g.data);
    const std::size_t n = g.data.size();

    double im_min = g.data.poles.front().imag(), mod_max = 0.0, pair_min = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        im_min = std::min(im_min, g.data.poles[i].imag());
        mod_max = std::max(mod_max, std::abs(g.data.poles[i]));
        for (std::size_t j = i + 1; j < n; ++j)
            pair_min = std::min(pair_min, std::abs(g.data.poles[i] - g.data.poles[j]));
    }
    g.delta0 = 0.5 * im_min;
    g.delta = 0.5 * im_min;
    // a dog-leg at angle theta off the ray direction can clear a pole sitting
    // ON the ray by at most pair_min*sin(theta), so the demanded separation
    // must stay below sin(pi/10) ~ 0.31 of the closest pole pair at any scale
    g.sep_need = std::min(0.35, 0.25 * pair_min);
    g.span = 10.0 * (1.0 + mod_max);

    g.cuts.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.cuts[i].pole = i;
        g.cuts[i].vertices = {g.data.poles[i]};
        g.cuts[i].offset_inf = cut_offset(g.data.poles[i]);
    }
    if (n == 1) return g;

    // collision repair: left dog-legs with escalating shifts
    const double theta = M_PI / 10.0;
    std::vector<int> attempts(n, 0);
    const double s_far = 4.0 * g.span;
    for (int iter = 0; iter < 400; ++iter) {
        int offender = -1;
        for (std::size_t i = 0; i < n && offender < 0; ++i) {
            const auto pi = g.cuts[i].sampled(s_far);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                if (dist_point_polyline(g.data.poles[k], pi) < g.sep_need) {
                    offender = static_cast<int>(i); // this cut shadows a foreign pole
                    break;
                }
            }
        }
        if (offender < 0) {
            for (std::size_t i = 0; i < n && offender < 0; ++i)
                for (std::size_t j = i + 1; j < n && offender < 0; ++j) {
                    const auto pi = g.cuts[i].sampled(s_far);
                    const auto pj = g.cuts[j].sampled(s_far);
                    if (dist_polyline_polyline(pi, pj) < g.sep_need) {
                        // pure proximity: bend the cut nearer to infinity along the ray
                        const double proj_i = (g.data.poles[i] * std::conj(kCutDir)).real();
                        const double proj_j = (g.data.poles[j] * std::conj(kCutDir)).real();
                        offender = static_cast<int>(proj_i > proj_j ? i : j);
                    }
                }
        }
        if (offender < 0) return g;
        int& k = attempts[offender];
        if (++k > 12)
            throw GeometryInfeasible("cut collision could not be repaired by dog-legs");
        const cplx p = g.data.poles[offender];
        // the +1/2 keeps attempt k strictly past the k*sep_need acceptance line
        const double len = (k + 0.5) * g.sep_need / std::sin(theta);
        const cplx dir = kCutDir * cplx(std::cos(theta), std::sin(theta));
        g.cuts[offender].vertices = {p, p + len * dir};
        g.cuts[offender].offset_inf = cut_offset(g.cuts[offender].vertices.back());
    }
    throw GeometryInfeasible("cut collision repair did not converge");
}

// ---- contours ----

enum class ContourKind { c0, loop, ray };

struct Contour {
    ContourKind kind = ContourKind::c0;
    std::size_t cut = 0;        // owning cut for loops and rays
    std::vector<cplx> lead;     // branch-continuation path from the anchor (not integrated)
    std::vector<cplx> vertices; // integrated polyline
    bool graded_end = false;    // terminal endpoint is a power-law singularity
    double end_exponent = 0.0;  // min power of the entry integrands at the endpoint
};

struct ContourParams {
    double t = 1.0;
    double x = 0.0;
    double trunc_log10 = 18.0;   // relative magnitude target at truncation endpoints
    double clearance_min = 0.35; // cap on the loop standoff
};

struct ContourSet {
    Contour c0;
    std::vector<std::optional<Contour>> loops; // per cut; engaged iff jump nontrivial
    std::vector<std::optional<Contour>> rays;  // per cut; engaged iff exceptional
    double standoff = 0.0;
    double delta_cross = 0.0;
    double lambda = 0.0; // truncation decay target (natural log units)
};

namespace detail {

// Length s along direction d (d^2 = -i) from w0 such that the Gaussian exponent
// Re(-i (z-x)^2)/(4 t eps) drops to e_ref - lambda.
inline double ray_truncation(cplx w0, cplx d, double t, double x, double eps, double e_ref,
                             double lambda) {
    const cplx u = w0 - x;
    const double gamma = (cplx(0.0, -1.0) * u * u).real();
    const double beta = (cplx(0.0, -1.0) * u * d).real();
    const double q = 4.0 * t * eps;
    const double disc = beta * beta + gamma - q * (e_ref - lambda);
    const double s = beta + std::sqrt(std::max(disc, 0.0));
    return std::max(s, 1e-3 * (1.0 + std::sqrt(q * lambda)));
}

inline double gauss_exponent(cplx z, double t, double x, double eps) {
    const cplx u = z - x;
    return (cplx(0.0, -1.0) * u * u).real() / (4.0 * t * eps);
}

// intersection of the two offset lines {a + s d1} and {b + s d2}
inline cplx line_intersect(cplx a, cplx d1, cplx b, cplx d2) {
    const double det = d1.real() * (-d2.imag()) - (-d2.real()) * d1.imag();
    if (std::abs(det) < 1e-14) return 0.5 * (a + b); // near-parallel: midpoint fallback
    const cplx r = b - a;
    const double s = (r.real() * (-d2.imag()) + d2.real() * r.imag()) / det;
    return a + s * d1;
}

// side-offset polyline of a cut (side = +1 left of the cut direction, -1 right),
// from the pole end outward to arclength s_far along the final ray
inline std::vector<cplx> offset_polyline(const Cut& cut, double delta, int side, double s_far) {
    std::vector<cplx> dirs;
    for (std::size_t i = 0; i + 1 < cut.vertices.size(); ++i) {
        cplx d = cut.vertices[i + 1] - cut.vertices[i];
        dirs.push_back(d / std::abs(d));
    }
    dirs.push_back(kCutDir);
    const cplx rot = side > 0 ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
    std::vector<cplx> out;
    out.push_back(cut.vertices.front() + delta * dirs.front() * rot);
    for (std::size_t i = 1; i < cut.vertices.size(); ++i) {
        const cplx n1 = dirs[i - 1] * rot, n2 = dirs[i] * rot;
        out.push_back(line_intersect(cut.vertices[i - 1] + delta * n1, dirs[i - 1],
                                     cut.vertices[i] + delta * n2, dirs[i]));
    }
    out.push_back(cut.vertices.back() + s_far * kCutDir + delta * dirs.back() * rot);
    return out;
}

inline bool path_step_clear(cplx a, cplx b, const std::vector<std::vector<cplx>>& obstacles) {
    for (const auto& poly : obstacles)
        for (std::size_t s = 0; s + 1 < poly.size(); ++s)
            if (segments_cross(a, b, poly[s], poly[s + 1])) return false;
    return true;
}

inline bool edge_clears_poles(cplx a, cplx b, const std::vector<cplx>& poles, double clear) {
    for (const cplx q : poles) {
        // an edge may terminate at a pole (terminal ray ascent); only interior
        // proximity is forbidden
        if (std::abs(a - q) < 1e-12 || std::abs(b - q) < 1e-12) continue;
        if (dist_point_segment(q, a, b) < clear) return false;
    }
    return true;
}

// Shortest obstacle-avoiding polyline from a to b: direct segment when clear,
// otherwise Dijkstra over a visibility graph whose nodes surround the obstacle
// corners at radius `inflate`.  Obstacle rays must be truncated above every
// height the route may use, so no path can sneak around a truncation endpoint.
// Every edge also keeps `pole_clear` distance from the phase singularities
// (node rings are centrally symmetric, so an unchecked chord could pass
// straight through the pole at a ring's center).  `pole_clear` must stay below
// `inflate`*cos(pi/8) or adjacent ring nodes lose their connecting chords.
inline std::vector<cplx> route_clear(cplx a, cplx b,
                                     const std::vector<std::vector<cplx>>& obstacles,
                                     double inflate,
                                     const std::vector<cplx>& poles, double pole_clear) {
    const auto edge_ok = [&](cplx u, cplx v) {
        return path_step_clear(u, v, obstacles) && edge_clears_poles(u, v, poles, pole_clear);
    };
    if (edge_ok(a, b)) return {a, b};
    std::vector<cplx> nodes{a, b};
    for (const auto& poly : obstacles)
        for (std::size_t v = 0; v + 1 < poly.size(); ++v) // skip the truncation endpoint
            for (int k = 0; k < 8; ++k) {
                const double th = 0.25 * M_PI * k + 0.125 * M_PI;
                nodes.push_back(poly[v] + inflate * cplx(std::cos(th), std::sin(th)));
            }
    const std::size_t nn = nodes.size();
    std::vector<double> dist(nn, 1e300);
    std::vector<int> prev(nn, -1);
    std::vector<char> done(nn, 0);
    dist[0] = 0.0;
    for (;;) {
        int u = -1;
        double best = 1e300;
        for (std::size_t i = 0; i < nn; ++i)
            if (!done[i] && dist[i] < best) {
                best = dist[i];
                u = static_cast<int>(i);
            }
        if (u < 0 || u == 1) break;
        done[u] = 1;
        for (std::size_t v = 0; v < nn; ++v) {
            if (done[v]) continue;
            const double w = dist[u] + std::abs(nodes[v] - nodes[u]);
            if (w >= dist[v]) continue;
            if (!edge_ok(nodes[u], nodes[v])) continue;
            dist[v] = w;
            prev[v] = u;
        }
    }
    if (prev[1] < 0) throw GeometryInfeasible("no cut-free lead path exists");
    std::vector<cplx> path;
    for (int v = 1; v >= 0; v = prev[v]) {
        path.push_back(nodes[v]);
        if (prev[v] < 0) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace detail

inline ContourSet build_contours(const CutGeometry& g, const ContourParams& params) {
    const double t = params.t, x = params.x, eps = g.data.epsilon;
    if (!(t > 0.0)) throw DomainError("contours require t > 0");
    const std::size_t n = g.data.size();

    // standoff from the repaired cut separations
    const double s_far_chk = 4.0 * g.span;
    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = g.cuts[i].sampled(s_far_chk);
        for (std::size_t j = i + 1; j < n; ++j)
            min_sep = std::min(min_sep, dist_polyline_polyline(pi, g.cuts[j].sampled(s_far_chk)));
        for (std::size_t k = 0; k < n; ++k)
            if (k != i) min_sep = std::min(min_sep, dist_point_polyline(g.data.poles[k], pi));
    }
    double standoff = std::min(params.clearance_min, 0.9 * g.delta0);
    if (std::isfinite(min_sep)) standoff = std::min(standoff, 0.45 * min_sep);

    ContourSet set;
    set.standoff = standoff;
    set.delta_cross = std::min(g.delta0, std::sqrt(t * eps));

    // truncation decay target, with margin for the logarithmic part of the phase
    double coeff_sum = 0.0, mod_max = 0.0, re_max = -1e300, re_min = 1e300;
    double off_min_full = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        coeff_sum += 2.0 * std::abs(g.data.coeffs[i]);
        mod_max = std::max(mod_max, std::abs(g.data.poles[i]));
        re_max = std::max(re_max, g.data.poles[i].real());
        re_min = std::min(re_min, g.data.poles[i].real());
        for (const cplx v : g.cuts[i].vertices)
            off_min_full = std::min(off_min_full, cut_offset(v));
    }
    double lambda = params.trunc_log10 * std::log(10.0) + 10.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double r_est = std::abs(x) + mod_max + std::sqrt(4.0 * t * eps * lambda) + 10.0;
        lambda = params.trunc_log10 * std::log(10.0) +
                 (coeff_sum / eps) * (std::log(2.0 + r_est + mod_max) + 2.0 * M_PI) +
                 std::log(1.0 + r_est) + 10.0;
    }
    set.lambda = lambda;

    const double d0 = g.delta0, dc = set.delta_cross;
    const double margin = std::max(standoff, 0.25);
    const double ell_left = off_min_full - margin;
    // leads start at the branch anchor of the phase (real axis, far left of every pole);
    // the strip |Im z| <= delta0 is cut-free, so in-strip polylines never cross a cut
    const cplx anchor(re_min - 10.0 * (1.0 + mod_max), 0.0);
    auto gexp = [&](cplx z) { return detail::gauss_exponent(z, t, x, eps); };

    // ---- C_0: saddle-adapted crossing ----
    {
        Contour c;
        c.kind = ContourKind::c0;
        const cplx zx(x, dc);
        const cplx zy(x + 2.0 * dc, -dc);
        const double x_right = std::max(x + 2.0 * dc, re_max + margin);
        const cplx zz(x_right, -dc);
        std::vector<cplx> body;
        const double ell_sad = cut_offset(zx);
        if (ell_sad <= ell_left) {
            body = {zx, zy, zz};
        } else {
            const cplx wb(std::sqrt(2.0) * ell_left - d0, d0);
            body = {wb, cplx(x, d0), zx, zy, zz};
        }
        double e_ref = 0.0;
        for (const cplx v : body) e_ref = std::max(e_ref, gexp(v));
        const double s_in = detail::ray_truncation(body.front(), kCutDir, t, x, eps, e_ref, lambda);
        const double s_out = detail::ray_truncation(body.back(), kOutDir, t, x, eps, e_ref, lambda);
        c.vertices.push_back(body.front() + s_in * kCutDir);
        for (const cplx v : body) c.vertices.push_back(v);
        c.vertices.push_back(body.back() + s_out * kOutDir);
        set.c0 = std::move(c);
    }

    set.loops.assign(n, std::nullopt);
    set.rays.assign(n, std::nullopt);

    for (std::size_t m = 0; m < n; ++m) {
        const cplx p = g.data.poles[m];
        if (g.classes[m].exceptional) {
            // ---- exceptional terminal ray: descend far left, run the corridor,
            //      then ascend to the pole (routed around foreign cuts below) ----
            Contour c;
            c.kind = ContourKind::ray;
            c.cut = m;
            c.graded_end = true;
            c.end_exponent =
                static_cast<double>(exceptional_vanish_order(g.data.coeffs[m], eps)) - 1.0;
            // corridor start: left of every cut, and also left of the Gaussian
            // saddle, so the entry ray decays monotonically.  A start right of
            // the saddle would send the ray across the amplitude hump near
            // z = x/2 + i|x|/2, whose weight exp(x^2/(8 t eps)) dwarfs the row.
            const double wx = std::min(std::sqrt(2.0) * ell_left - d0, x - 2.0 * dc);
            const cplx wb(wx, d0);
            std::vector<cplx> approach = {wb, cplx(p.real(), d0)}; // ascent appended later
            double e_ref = std::max(gexp(p), std::max(gexp(approach[0]), gexp(approach[1])));
            const double s_in =
                detail::ray_truncation(approach.front(), kCutDir, t, x, eps, e_ref, lambda);
            c.vertices.push_back(approach.front() + s_in * kCutDir);
            for (const cplx v : approach) c.vertices.push_back(v);
            set.rays[m] = std::move(c);
            continue;
        }
        if (g.classes[m].integer_order.has_value()) {
            // integer order: exp(-i h/eps) is single-valued across this cut, the
            // U-loop's far tails cancel exactly, and the loop collapses to a small
            // counterclockwise ring around the pole.  The ring also avoids the
            // Gaussian amplitude hump that straight exp(3 i pi/4) tails would
            // cross whenever the saddle lies far left of the pole cluster.
            // The radius shrinks like t/|x - Re p| once the Gaussian magnitude
            // slope gets steep: the ring value is residue-sized, and a wide
            // ring at large |x| buries it under exponentially larger node
            // values whose cancellation double precision cannot resolve.
            Contour c;
            c.kind = ContourKind::loop;
            c.cut = m;
            const double slope = std::abs(x - p.real()) / (2.0 * t * eps);
            const double r_ring =
                std::min(standoff, std::max(4.0 / std::max(slope, 1.0), 1e-8));
            const int ring_segments = 12;
            for (int a = 0; a <= ring_segments; ++a) {
                const double th = -0.5 * M_PI + 2.0 * M_PI * a / ring_segments;
                c.vertices.push_back(p + r_ring * cplx(std::cos(th), std::sin(th)));
            }
            set.loops[m] = std::move(c);
            continue;
        }
        // ---- counterclockwise U-loop around cut m ----
        Contour c;
        c.kind = ContourKind::loop;
        c.cut = m;
        const auto left = detail::offset_polyline(g.cuts[m], standoff, +1, 1.0);
        const auto right = detail::offset_polyline(g.cuts[m], standoff, -1, 1.0);
        double e_ref = gexp(p + standoff * kOutDir);
        for (std::size_t v = 0; v + 1 < left.size(); ++v) e_ref = std::max(e_ref, gexp(left[v]));
        for (std::size_t v = 0; v + 1 < right.size(); ++v) e_ref = std::max(e_ref, gexp(right[v]));
        const cplx ray_base_l = left[left.size() - 2];
        const cplx ray_base_r = right[right.size() - 2];
        const double s_l = detail::ray_truncation(ray_base_l, kCutDir, t, x, eps, e_ref, lambda);
        const double s_r = detail::ray_truncation(ray_base_r, kCutDir, t, x, eps, e_ref, lambda);

        // in along the left side toward the pole
        c.vertices.push_back(ray_base_l + s_l * kCutDir);
        for (std::size_t v = left.size() - 1; v-- > 0;) c.vertices.push_back(left[v]);
        // arc around the pole, sweeping away from the cut
        const cplx d0dir = (g.cuts[m].vertices.size() > 1)
                               ? (g.cuts[m].vertices[1] - p) / std::abs(g.cuts[m].vertices[1] - p)
                               : kCutDir;
        const double alpha = std::arg(d0dir);
        const int arc_segments = 6;
        for (int a = 1; a <= arc_segments; ++a) {
            const double th = alpha + 0.5 * M_PI + M_PI * static_cast<double>(a) / arc_segments;
            c.vertices.push_back(p + standoff * cplx(std::cos(th), std::sin(th)));
        }
        // out along the right side
        for (std::size_t v = 1; v + 1 < right.size(); ++v) c.vertices.push_back(right[v]);
        c.vertices.push_back(ray_base_r + s_r * kCutDir);
        set.loops[m] = std::move(c);
    }

    // ---- obstacle set for lead routing: cuts with nontrivial jumps, rays
    //      truncated above every height a route may reach ----
    double h_cap = d0;
    auto cap_with = [&](const std::vector<cplx>& vs) {
        for (const cplx v : vs) h_cap = std::max(h_cap, v.imag());
    };
    cap_with(set.c0.vertices);
    for (const auto& l : set.loops)
        if (l) cap_with(l->vertices);
    for (const auto& r : set.rays)
        if (r) cap_with(r->vertices);
    h_cap += g.span;
    std::vector<std::vector<cplx>> obstacles;
    for (std::size_t k = 0; k < n; ++k) {
        if (g.jump_trivial(k)) continue;
        const double rise = h_cap - g.cuts[k].vertices.back().imag();
        obstacles.push_back(g.cuts[k].sampled(std::max(1.0, rise / kCutDir.imag())));
    }
    const double inflate = 0.8 * standoff;
    const double pole_clear = 0.6 * standoff; // below inflate*cos(pi/8)
    std::vector<cplx> keep_out;
    for (std::size_t k = 0; k < n; ++k) {
        keep_out.push_back(g.data.poles[k]);
        keep_out.push_back(std::conj(g.data.poles[k]));
    }
    auto route = [&](cplx from, cplx to) {
        return detail::route_clear(from, to, obstacles, inflate, keep_out, pole_clear);
    };

    // finish the exceptional rays: routed ascent from the corridor to the pole
    for (std::size_t m = 0; m < n; ++m) {
        if (!set.rays[m]) continue;
        auto& c = *set.rays[m];
        const auto ascent = route(c.vertices.back(), g.data.poles[m]);
        for (std::size_t v = 1; v < ascent.size(); ++v) c.vertices.push_back(ascent[v]);
    }

    // leads; a ring tighter than the routing clearance is reached by routing
    // to a staging point at standoff and descending radially (the lead only
    // transports the branch state, it is not integrated)
    set.c0.lead = route(anchor, set.c0.vertices.front());
    for (auto& l : set.loops)
        if (l) {
            const cplx front = l->vertices.front();
            const cplx pc = g.data.poles[l->cut];
            if (std::abs(front - pc) < pole_clear) {
                const cplx dir = (front - pc) / std::abs(front - pc);
                l->lead = route(anchor, pc + standoff * dir);
                l->lead.push_back(front);
            } else {
                l->lead = route(anchor, front);
            }
        }
    for (auto& r : set.rays)
        if (r) r->lead = route(anchor, r->vertices.front());

    // ---- validation: no piece may cross a cut with a nontrivial jump, and no
    //      piece may pass a pole closer than the clearance floor ----
    const double s_far = 4.0 * g.span + std::abs(x) + std::sqrt(4.0 * t * eps * lambda) + h_cap;
    auto check_piece = [&](const Contour& c) {
        for (std::size_t k = 0; k < n; ++k) {
            if (g.jump_trivial(k)) continue;
            auto scan = [&](const std::vector<cplx>& path, const std::vector<cplx>& ck) {
                for (std::size_t i = 0; i + 1 < path.size(); ++i)
                    for (std::size_t s = 0; s + 1 < ck.size(); ++s)
                        if (segments_cross(path[i], path[i + 1], ck[s], ck[s + 1]))
                            throw GeometryInfeasible("contour crosses a branch cut");
            };
            const cplx pbar = std::conj(g.data.poles[k]);
            const std::vector<cplx> lower = {pbar, pbar - s_far};
            scan(c.lead, lower);
            scan(c.vertices, lower);
            const auto ck = g.cuts[k].sampled(s_far);
            scan(c.lead, ck);
            scan(c.vertices, ck);
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (c.kind == ContourKind::loop && c.cut == k) continue; // wraps pole k by design
            const cplx pk = g.data.poles[k];
            for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
                if (c.kind == ContourKind::ray && c.cut == k && i + 2 == c.vertices.size())
                    continue;
                if (dist_point_segment(pk, c.vertices[i], c.vertices[i + 1]) <
                    0.5 * std::min(standoff, g.delta0))
                    throw SingularityTooClose("contour passes too close to a pole");
            }
        }
    };
    check_piece(set.c0);
    for (const auto& l : set.loops)
        if (l) check_piece(*l);
    for (const auto& r : set.rays)
        if (r) check_piece(*r);
    return set;
}

} // namespace bodet
