// Scattering-harness tests: the renormalized profile against its spectral
// target, the free half-line evolution identity, discrete-L^2 residuals with
// zero- and phase-twisted controls, the closed-form Jost solution and its
// eigenvalue equation, the distorted Plancherel identity by two quadrature
// routes, and tail-corrected conserved quantities.
//
// Profile regression bands were calibrated against a 40-digit independent
// evaluation of Pi u at the probe points; convergence of phi toward the
// target is O(sqrt(1/t)/|y|) with an oscillatory factor, so the bands are
// wide and the trend assertions span a t-doubling or more.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/scattering.hpp"
#include "bodet/special.hpp"

using namespace bodet;

namespace {

double deviation_at(double t, double y) {
    return renormalized_profile(t, {y}).front().deviation;
}

} // namespace

TEST_CASE("reference data sets project to the expected initial values") {
    const auto ms = minus_soliton_datum();
    const auto so = soliton_datum();
    // u0(0) = 2 Re Pi u0(0) = 2 Re(c/(0-i))
    REQUIRE(2.0 * (ms.coeffs[0] / (cplx(0.0, 0.0) - ms.poles[0])).real() ==
            Catch::Approx(-2.0));
    REQUIRE(2.0 * (so.coeffs[0] / (cplx(0.0, 0.0) - so.poles[0])).real() ==
            Catch::Approx(2.0));
}

TEST_CASE("profile target equals the spectral function") {
    const auto recs = renormalized_profile(100.0, {-1.0});
    const cplx want = 2.0 * M_PI * std::exp(1.0) / cplx(expint_Ei(2.0), M_PI);
    REQUIRE(std::abs(recs.front().target - want) < 1e-14);
    REQUIRE(recs.front().deviation ==
            Catch::Approx(std::abs(recs.front().phi - recs.front().target)));
    REQUIRE(recs.front().flag == 0);
}

TEST_CASE("profile deviation regression bands at the probe points") {
    // frozen from the calibration study (oracle-confirmed solver values):
    //   dev(100,-1) = 0.4137   dev(400,-1) = 0.0632
    //   dev(100,-2) = 0.0696   dev(400,-2) = 0.0392
    REQUIRE(deviation_at(100.0, -1.0) == Catch::Approx(0.4137).margin(0.01));
    REQUIRE(deviation_at(400.0, -1.0) == Catch::Approx(0.0632).margin(0.008));
}

TEST_CASE("profile deviation decreases over t-doublings away from y = 0") {
    REQUIRE(deviation_at(400.0, -1.0) < deviation_at(100.0, -1.0));
    REQUIRE(deviation_at(400.0, -2.0) < deviation_at(100.0, -2.0));
}

TEST_CASE("profile deviation at y = -0.5 decays only across wider t spans") {
    // the oscillatory correction makes 100 -> 400 non-monotone at this y:
    // dev(100) = 0.2386, dev(400) = 0.2487, dev(1600) = 0.1422
    const double d100 = deviation_at(100.0, -0.5);
    const double d400 = deviation_at(400.0, -0.5);
    const double d1600 = deviation_at(1600.0, -0.5);
    REQUIRE(d400 == Catch::Approx(0.2487).margin(0.01));
    REQUIRE(d1600 < d400);
    REQUIRE(d1600 < d100);
}

TEST_CASE("profile rejects nonpositive t and nonnegative y") {
    REQUIRE_THROWS_AS(renormalized_profile(0.0, {-1.0}), DomainError);
    REQUIRE_THROWS_AS(renormalized_profile(1.0, {0.0}), DomainError);
    REQUIRE_THROWS_AS(renormalized_profile(1.0, {-1.0, 0.5}), DomainError);
}

TEST_CASE("free evolution assembles its closed-form factors") {
    const double t = 100.0, x = -200.0; // y = -1: phase -x^2/(4t) = -t
    const cplx got = free_evolution_profile(t, x);
    const cplx want = cplx(M_SQRT1_2, M_SQRT1_2) / std::sqrt(4.0 * M_PI * t) *
                      cplx(std::cos(t), -std::sin(t)) * alpha_lambda(1.0);
    REQUIRE(std::abs(got - want) < 1e-14);
    // unimodular prefactors: modulus is |psi_hat(-x/2t)| / sqrt(4 pi t)
    REQUIRE(std::abs(got) ==
            Catch::Approx(std::abs(psi_hat(1.0)) / std::sqrt(4.0 * M_PI * t)));
}

TEST_CASE("free evolution vanishes on the right half-line") {
    REQUIRE(free_evolution_profile(3.0, 0.0) == cplx(0.0, 0.0));
    REQUIRE(free_evolution_profile(3.0, 7.5) == cplx(0.0, 0.0));
    REQUIRE_THROWS_AS(free_evolution_profile(0.0, -1.0), DomainError);
}

TEST_CASE("scattering grid resolves the local chirp wavelength") {
    const double t = 25.0;
    const auto xs = scattering_grid(t);
    REQUIRE(xs.front() == Catch::Approx(-4.0 * t));
    REQUIRE(xs.back() == Catch::Approx(0.5 * t));
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double dx = xs[i + 1] - xs[i];
        REQUIRE(dx > 0.0);
        const double wavelength = 4.0 * M_PI * t / std::max(std::abs(xs[i]), 1.0);
        REQUIRE(dx <= wavelength / 8.0 + 1e-12);
    }
    REQUIRE_THROWS_AS(scattering_grid(-1.0), DomainError);
    REQUIRE_THROWS_AS(scattering_grid(10.0, 1.0), DomainError);
}

TEST_CASE("scattering residual shrinks between t = 25 and t = 100") {
    const double r25 = scattering_residual(25.0, scattering_grid(25.0, -4.0, 0.0));
    const double r100 = scattering_residual(100.0, scattering_grid(100.0, -4.0, 0.0));
    REQUIRE(r100 < r25);
}

TEST_CASE("residual controls: zero target saturates, phase twist degrades") {
    const double t = 25.0;
    const double u0_norm = std::sqrt(2.0 * M_PI); // ||u0||_{L^2}, int 4/(1+x^2)^2
    const auto xs = scattering_grid(t, -6.0, 0.5); // lambda <= 3 keeps 92% of mass
    const double plain = scattering_residual(t, xs);
    const double zero =
        scattering_residual(t, xs, [](double) { return cplx(0.0, 0.0); });
    const double twisted = scattering_residual(t, xs, [](double lam) {
        return psi_hat(lam) * cplx(std::cos(M_PI / 3.0), std::sin(M_PI / 3.0));
    });
    REQUIRE(zero >= 0.9 * u0_norm); // nothing converges to the zero profile
    REQUIRE(zero <= 1.02 * u0_norm); // bounded by the conserved norm
    REQUIRE(twisted > plain);
}

TEST_CASE("Jost solution satisfies its boundary normalization") {
    const double lam = 1.0, x = -1000.0;
    const cplx m = jost_m_minus(x, lam);
    const cplx rot(std::cos(lam * x), -std::sin(lam * x));
    REQUIRE(std::abs(rot * m - 1.0) < 1e-2);
    REQUIRE_THROWS_AS(jost_m_minus(0.0, 0.0), DomainError);
    REQUIRE_THROWS_AS(jost_m_minus(0.0, -1.0), DomainError);
}

TEST_CASE("Jost solution has equal end moduli") {
    for (const double lam : {0.5, 1.0, 2.0}) {
        const double left = std::abs(jost_m_minus(-1000.0, lam));
        const double right = std::abs(jost_m_minus(1000.0, lam));
        REQUIRE(std::abs(left - right) < 1e-2);
    }
}

TEST_CASE("Jost solution satisfies the eigenvalue equation pointwise") {
    for (const double lam : {0.5, 1.0, 2.0})
        for (const double x : {-10.0, -3.0, -0.5, 0.0, 0.5, 3.0, 10.0})
            REQUIRE(std::abs(jost_ode_residual(x, lam)) < 1e-6);
}

TEST_CASE("distorted Plancherel identity holds to quadrature accuracy") {
    const auto pc = plancherel_norm_check();
    REQUIRE(pc.lhs == M_PI);
    REQUIRE(std::abs(pc.rhs - M_PI) < 1e-6);
}

TEST_CASE("transform route reproduces the spectral-side norm coarsely") {
    const auto pc = plancherel_norm_check();
    const double via_transform = transform_norm_coarse();
    REQUIRE(std::abs(via_transform - pc.rhs) < 1e-2 * pc.rhs);
}

TEST_CASE("conserved quantities reproduce the soliton invariants") {
    const auto rows = conserved_quantities(soliton_datum(), {2.0}, 100.0);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].tail_ok);
    // int 2/((x-t)^2+1) = 2 pi and int 4/((x-t)^2+1)^2 = 2 pi
    REQUIRE(rows[0].integral_u == Catch::Approx(2.0 * M_PI).margin(2e-4));
    REQUIRE(rows[0].integral_u2 == Catch::Approx(2.0 * M_PI).margin(2e-4));
}

TEST_CASE("conserved quantities are stable in the truncation half-width") {
    const auto a = conserved_quantities(soliton_datum(), {0.5}, 200.0);
    const auto b = conserved_quantities(soliton_datum(), {0.5}, 400.0);
    REQUIRE(std::abs(a[0].integral_u - b[0].integral_u) < 1e-5);
    REQUIRE(std::abs(a[0].integral_u2 - b[0].integral_u2) < 1e-5);
}

TEST_CASE("conserved quantities at t = 0 use the projected datum") {
    const auto rows = conserved_quantities(minus_soliton_datum(), {0.0}, 300.0);
    REQUIRE(rows[0].tail_ok);
    REQUIRE(rows[0].integral_u == Catch::Approx(-2.0 * M_PI).margin(1e-4));
    REQUIRE(rows[0].integral_u2 == Catch::Approx(2.0 * M_PI).margin(1e-4));
}

TEST_CASE("tail flag clears when the window cannot hold the support") {
    // at t = 2 the dispersive tail still oscillates at |x| = 30, far from the
    // algebraic family the fit assumes, so the window [-60, 60] is too small
    const auto rows = conserved_quantities(minus_soliton_datum(), {2.0}, 60.0);
    REQUIRE_FALSE(rows[0].tail_ok);
    REQUIRE_THROWS_AS(conserved_quantities(minus_soliton_datum(), {2.0}, 40.0),
                      DomainError);
    REQUIRE_THROWS_AS(conserved_quantities(minus_soliton_datum(), {-1.0}, 300.0),
                      DomainError);
}
