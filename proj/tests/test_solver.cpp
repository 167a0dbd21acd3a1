// Solver tests: determinant evaluation against the closed-form solitons, the
// three-route agreement (determinant ratio, tau form, resolvent), derivative
// and reflection identities, and contour-deformation invariance.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "bodet/errors.hpp"
#include "bodet/solver.hpp"

using namespace bodet;

namespace {

RationalData exceptional_lump() { // u0(x) = -2/(1+x^2): i*c/eps = -1, so the
    RationalData d;                // only index is exceptional; this datum
    d.poles = {cplx(0.0, 1.0)};    // disperses rather than translating
    d.coeffs = {cplx(0.0, 1.0)};
    d.epsilon = 1.0;
    return d;
}

RationalData soliton_plus() { // u0(x) = 2/(1+x^2); u(t,x) = 2/(1+(x-t)^2)
    RationalData d;
    d.poles = {cplx(0.0, 1.0)};
    d.coeffs = {cplx(0.0, -1.0)};
    d.epsilon = 1.0;
    return d;
}

RationalData generic_two_pole() {
    RationalData d;
    d.poles = {cplx(0.0, 1.0), cplx(-1.0, 2.0)};
    d.coeffs = {cplx(0.7, 0.2), cplx(-0.3, 0.1)};
    d.epsilon = 0.8;
    return d;
}

} // namespace

TEST_CASE("exceptional-index data matches an independent quadrature oracle") {
    // index 1 is exceptional: the second row is the terminal ray alone.  The
    // reference values are 35-digit adaptive-quadrature evaluations of the two
    // contour integrals (straight line through the saddle plus the ray into
    // the pole), cross-checked against the exact Gaussian value of the
    // column-reduced first entry.
    Solver solver(exceptional_lump());
    const struct {
        double t, x;
        cplx want;
    } pts[] = {
        {1.0, 0.0, {-0.29358864485304351, -0.24124823588956565}},
        {0.5, 1.2, {-0.23853063470972400, -0.30347859690226832}},
        {2.0, -1.5, {-0.28982367769818166, -0.15880445384163955}},
    };
    for (const auto& p : pts) {
        const auto r = solver.solution_det_ratio(p.t, p.x);
        INFO("t=" << p.t << " x=" << p.x);
        REQUIRE(std::abs(r.piu - p.want) < 1e-8 * (1.0 + std::abs(p.want)));
        REQUIRE(r.u == Catch::Approx(2.0 * p.want.real()).margin(1e-8));
        REQUIRE(r.flag == 0);
        REQUIRE(r.det_b_norm > 1e-6);
    }
}

TEST_CASE("integer-order soliton matches its closed form") {
    // index 1 has integer order: the loop contour carries the whole second row
    Solver solver(soliton_plus());
    for (const auto& [t, x] : {std::pair{1.0, 0.0}, {0.7, -0.4}, {1.6, 2.1}}) {
        const auto r = solver.solution_det_ratio(t, x);
        const cplx want = cplx(0.0, 1.0) / cplx(x - t, 1.0);
        INFO("t=" << t << " x=" << x);
        REQUIRE(std::abs(r.piu - want) < 1e-8 * (1.0 + std::abs(want)));
        REQUIRE(r.u == Catch::Approx(2.0 / (1.0 + (x - t) * (x - t))).margin(1e-8));
    }
}

TEST_CASE("time dispatch covers zero and negative times") {
    // t = 0: the projection of the initial data itself
    const auto lump = exceptional_lump();
    REQUIRE(std::abs(evaluate_piu(lump, 0.0, 0.7) - cplx(0.0, -1.0) / cplx(0.7, 1.0)) < 1e-14);
    // t < 0: the soliton's closed form holds for every time
    const double t = -0.7, x = 0.4;
    const cplx want = cplx(0.0, 1.0) / cplx(x - t, 1.0);
    REQUIRE(std::abs(evaluate_piu(soliton_plus(), t, x) - want) < 1e-8);
    // t < 0 on dispersive data: the reflected evaluation must agree with the
    // conjugated quadrature-oracle value at (-t, -x)
    const cplx oracle(-0.41484400110843034, 0.24692903724405479);
    REQUIRE(std::abs(evaluate_piu(lump, t, x) - oracle) < 1e-8);
}

TEST_CASE("three evaluation routes agree on generic data") {
    Solver solver(generic_two_pole());
    for (const auto& [t, x] : {std::pair{0.9, 0.3}, {0.6, -1.1}}) {
        const auto r = solver.solution_det_ratio(t, x);
        INFO("t=" << t << " x=" << x);

        const cplx tau = solver.solution_tau_form(t, x);
        REQUIRE(std::abs(tau - r.piu) < 1e-8 * (1.0 + std::abs(r.piu)));

        const auto res = solver.solve_resolvent(t, x);
        REQUIRE(std::abs(res.a + r.piu) < 1e-8 * (1.0 + std::abs(r.piu)));
    }
}

TEST_CASE("tau form matches a finite-difference derivative of log det") {
    Solver solver(generic_two_pole());
    const double t = 0.9, x = 0.3, eps = 0.8, dlt = 1e-3;
    const cplx piu = solver.solution_det_ratio(t, x).piu;
    cplx diff = solver.log_det_btau(t, x + dlt) - solver.log_det_btau(t, x - dlt);
    diff = cplx(diff.real(), std::remainder(diff.imag(), 2.0 * M_PI));
    const cplx fd = cplx(0.0, eps) * diff / (2.0 * dlt);
    REQUIRE(std::abs(fd - piu) < 1e-4 * (1.0 + std::abs(piu)));
}

TEST_CASE("solution is invariant under parabolic rescaling of the data") {
    // u -> mu*u(mu^2 t, mu x) maps solutions to solutions and divides the
    // poles by mu (coefficients and epsilon unchanged), so the two
    // evaluations below must agree while running entirely different cut and
    // contour geometries
    const auto d = generic_two_pole();
    const double mu = 2.0;
    RationalData scaled = d;
    for (auto& p : scaled.poles) p /= mu;
    Solver fine(scaled), coarse(d);
    const double t = 0.3, x = 0.25;
    const cplx a = fine.solution_det_ratio(t, x).piu;
    const cplx b = mu * coarse.solution_det_ratio(mu * mu * t, mu * x).piu;
    REQUIRE(std::abs(a - b) < 1e-8 * (1.0 + std::abs(a)));
}

TEST_CASE("solution value is invariant under contour deformation") {
    Solver solver(generic_two_pole());
    const double t = 0.9, x = 0.3;
    SolveOptions wide, tight;
    tight.clearance_min = 0.18; // different standoff, offsets, arcs, truncations
    const cplx a = solver.solution_det_ratio(t, x, wide).piu;
    const cplx b = solver.solution_det_ratio(t, x, tight).piu;
    REQUIRE(std::abs(a - b) < 1e-8 * (1.0 + std::abs(a)));
}

TEST_CASE("resolvent function satisfies its differential identity") {
    Solver solver(generic_two_pole());
    const auto& g = solver.geometry();
    const double t = 0.9, x = 0.3;
    const auto res = solver.solve_resolvent(t, x);
    double scale = 1.0 + std::abs(res.a);
    for (const cplx v : res.v) scale += std::abs(v);
    for (const double y : {-3.0, 0.7, 2.2}) {
        const cplx r = resolvent_ode_residual(g, t, x, res.a, res.v, y);
        INFO("y=" << y);
        REQUIRE(std::abs(r) < 1e-6 * scale);
    }
}

TEST_CASE("resolvent function decays to its constant term") {
    Solver solver(generic_two_pole());
    const auto& g = solver.geometry();
    const double t = 0.9, x = 0.3;
    const auto res = solver.solve_resolvent(t, x);
    const double y = -1000.0;
    const cplx yf = y * resolvent_f(g, t, x, res.a, res.v, y);
    REQUIRE(std::abs(yf - res.a) < 2e-2 * (1.0 + std::abs(res.a)));
}

TEST_CASE("grid evaluation dispatches all time signs with clean flags") {
    const auto grid = evaluate_u_grid(soliton_plus(), {-0.5, 0.0, 0.8}, {-1.0, 0.5});
    REQUIRE(grid.size() == 6);
    for (const auto& p : grid) {
        INFO("t=" << p.t << " x=" << p.x);
        REQUIRE(p.flag == 0);
        REQUIRE(std::isfinite(p.u));
        const double want = 2.0 / (1.0 + (p.x - p.t) * (p.x - p.t));
        REQUIRE(p.u == Catch::Approx(want).margin(1e-8));
        REQUIRE(p.u == Catch::Approx(2.0 * p.piu.real()));
    }
}
