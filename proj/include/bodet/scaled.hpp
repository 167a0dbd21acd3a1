#pragma once

// Log-scaled complex arithmetic.  A ScaledComplex holds value = m * exp(e)
// with the mantissa kept near unit magnitude, so products of quantities whose
// magnitudes span thousands of decades never overflow or underflow.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "bodet/errors.hpp"

namespace bodet {

using cplx = std::complex<double>;

constexpr double kNegInfExp = -std::numeric_limits<double>::infinity();

struct ScaledComplex {
    cplx m{0.0, 0.0}; // mantissa, |m| in [1, e) after normalize(); 0 allowed
    double e = kNegInfExp; // natural-log scale; value = m * exp(e)

    static ScaledComplex zero() { return {}; }

    static ScaledComplex from(cplx v) {
        ScaledComplex s{v, 0.0};
        s.normalize();
        return s;
    }

    static ScaledComplex from(cplx mantissa, double exponent) {
        ScaledComplex s{mantissa, exponent};
        s.normalize();
        return s;
    }

    void normalize() {
        const double a = std::abs(m);
        if (a == 0.0 || !std::isfinite(a)) {
            if (a == 0.0) {
                m = 0.0;
                e = kNegInfExp;
            }
            return;
        }
        const double k = std::floor(std::log(a));
        if (k != 0.0) {
            m *= std::exp(-k);
            e += k;
        }
    }

    bool is_zero() const { return m == cplx(0.0, 0.0); }

    // log of |value|; -inf for zero
    double log_abs() const { return is_zero() ? kNegInfExp : e + std::log(std::abs(m)); }

    // value as a plain complex; saturates to 0 or +-inf outside double range
    cplx to_complex() const {
        if (is_zero()) return {0.0, 0.0};
        return m * std::exp(e);
    }
};

inline ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero() || b.is_zero()) return ScaledComplex::zero();
    return ScaledComplex::from(a.m * b.m, a.e + b.e);
}

inline ScaledComplex operator*(const ScaledComplex& a, cplx b) {
    return a * ScaledComplex::from(b);
}

inline ScaledComplex operator/(const ScaledComplex& a, const ScaledComplex& b) {
    if (b.is_zero()) throw SingularB("division by zero scaled value");
    if (a.is_zero()) return ScaledComplex::zero();
    return ScaledComplex::from(a.m / b.m, a.e - b.e);
}

inline ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double e = std::max(a.e, b.e);
    return ScaledComplex::from(a.m * std::exp(a.e - e) + b.m * std::exp(b.e - e), e);
}

inline ScaledComplex operator-(const ScaledComplex& a) {
    ScaledComplex r = a;
    r.m = -r.m;
    return r;
}

inline ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b) { return a + (-b); }

// ratio of two scaled values as a plain complex
inline cplx ratio(const ScaledComplex& num, const ScaledComplex& den) {
    if (den.is_zero()) throw SingularB("ratio with zero denominator");
    if (num.is_zero()) return {0.0, 0.0};
    return (num.m / den.m) * std::exp(num.e - den.e);
}

struct DetResult {
    ScaledComplex det;      // includes row/col exponents supplied by the caller
    double pivot_max = 0.0; // largest |pivot| over elimination (mantissa units)
    double pivot_min = 0.0; // smallest |pivot|
    double cond_estimate = std::numeric_limits<double>::infinity();
};

// Determinant of a mantissa matrix by partially pivoted elimination.
// extra_exponent carries the sum of row/column log-scales split off beforehand.
inline DetResult det_scaled(std::vector<std::vector<cplx>> a, double extra_exponent = 0.0) {
    const std::size_t n = a.size();
    DetResult r;
    ScaledComplex det = ScaledComplex::from(cplx(1.0, 0.0), extra_exponent);
    double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k][k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a[i][k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) {
            r.det = ScaledComplex::zero();
            r.pivot_max = pmax;
            r.pivot_min = 0.0;
            return r;
        }
        if (piv != k) {
            std::swap(a[piv], a[k]);
            det.m = -det.m;
        }
        pmax = std::max(pmax, best);
        pmin = std::min(pmin, best);
        det = det * ScaledComplex::from(a[k][k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = a[i][k] / a[k][k];
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    r.det = det;
    r.pivot_max = pmax;
    r.pivot_min = pmin;
    r.cond_estimate = (pmin > 0.0) ? pmax / pmin : std::numeric_limits<double>::infinity();
    return r;
}

// Solve a x = b by partially pivoted elimination on plain mantissas.
inline std::vector<cplx> solve_scaled(std::vector<std::vector<cplx>> a, std::vector<cplx> b) {
    const std::size_t n = a.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k][k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a[i][k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) throw SingularB("singular matrix in solve");
        if (piv != k) {
            std::swap(a[piv], a[k]);
            std::swap(b[piv], b[k]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = a[i][k] / a[k][k];
            if (f == cplx(0.0, 0.0)) continue;
            b[i] -= f * b[k];
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t i = n; i-- > 0;) {
        cplx s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

} // namespace bodet
