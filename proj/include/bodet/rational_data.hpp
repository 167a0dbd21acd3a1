#pragma once

// Rational initial data u0(x) = sum_n [ c_n/(x - p_n) + conj(c_n)/(x - conj(p_n)) ]
// with simple poles p_n in the upper half-plane.  Index classification distinguishes
// poles whose coefficient ratio i*c_n/eps is a strictly negative integer (exceptional)
// or a nonnegative integer (integer order M), which changes the contour topology.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "bodet/errors.hpp"

namespace bodet {

using cplx = std::complex<double>;

inline constexpr double kPoleImMargin = 1e-8;     // minimum Im(p_n)
inline constexpr double kDuplicateTol = 1e-12;    // pole coincidence tolerance
inline constexpr double kIntegralityTol = 1e-12;  // |i c/eps - round| for classification

struct RationalData {
    std::vector<cplx> poles;  // Im(p_n) > 0
    std::vector<cplx> coeffs; // paired with poles
    double epsilon = 1.0;     // dispersion coefficient, > 0

    std::size_t size() const { return poles.size(); }
};

struct IndexClass {
    bool exceptional = false;              // i*c_n/eps is a strictly negative integer
    std::optional<int> integer_order;      // M when i*c_n/eps == M with M >= 0
};

inline void validate(const RationalData& data) {
    if (!(data.epsilon > 0.0) || !std::isfinite(data.epsilon))
        throw NonpositiveEpsilon("epsilon must be positive and finite");
    if (data.poles.empty()) throw Error("data must contain at least one pole");
    if (data.poles.size() != data.coeffs.size())
        throw Error("poles and coefficients must be paired");
    for (std::size_t n = 0; n < data.poles.size(); ++n) {
        const cplx p = data.poles[n];
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) ||
            !std::isfinite(data.coeffs[n].real()) || !std::isfinite(data.coeffs[n].imag()))
            throw Error("non-finite pole or coefficient");
        if (p.imag() < kPoleImMargin)
            throw PoleInLowerHalfPlane("pole " + std::to_string(n) +
                                       " has Im(p) below the admissible margin");
    }
    for (std::size_t i = 0; i < data.poles.size(); ++i)
        for (std::size_t j = i + 1; j < data.poles.size(); ++j)
            if (std::abs(data.poles[i] - data.poles[j]) <= kDuplicateTol)
                throw DuplicatePole("poles " + std::to_string(i) + " and " + std::to_string(j) +
                                    " coincide");
}

inline IndexClass classify_one(cplx c, double eps) {
    const cplx w = cplx(0.0, 1.0) * c / eps;
    IndexClass cls;
    if (std::abs(w.imag()) > kIntegralityTol) return cls;
    const double r = std::round(w.real());
    if (std::abs(w.real() - r) > kIntegralityTol) return cls;
    if (r <= -1.0) {
        cls.exceptional = true;
    } else if (r >= 0.0) {
        cls.integer_order = static_cast<int>(r);
    }
    return cls;
}

inline std::vector<IndexClass> classify(const RationalData& data) {
    std::vector<IndexClass> out;
    out.reserve(data.size());
    for (const cplx c : data.coeffs) out.push_back(classify_one(c, data.epsilon));
    return out;
}

// positive vanishing order of exp(-i h / eps) at an exceptional pole: -(i c/eps)
inline int exceptional_vanish_order(cplx c, double eps) {
    const cplx w = cplx(0.0, 1.0) * c / eps;
    return static_cast<int>(std::llround(-w.real()));
}

// Sort key for the left-to-right ordering of the straight branch cuts near
// infinity: ascending Re(p * exp(-i pi/4)), ties by ascending Im(p).
inline double cut_offset(cplx p) { return (p.real() + p.imag()) / std::sqrt(2.0); }

inline std::vector<std::size_t> canonical_order(const RationalData& data) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double ka = cut_offset(data.poles[a]), kb = cut_offset(data.poles[b]);
        if (ka != kb) return ka < kb;
        return data.poles[a].imag() < data.poles[b].imag();
    });
    return idx;
}

inline RationalData canonical(const RationalData& data) {
    const auto idx = canonical_order(data);
    RationalData out;
    out.epsilon = data.epsilon;
    out.poles.reserve(data.size());
    out.coeffs.reserve(data.size());
    for (std::size_t i : idx) {
        out.poles.push_back(data.poles[i]);
        out.coeffs.push_back(data.coeffs[i]);
    }
    return out;
}

// Involution mapping the solution u(t,x) to u(-t,-x): poles -> -conj(p),
// coefficients -> -conj(c).  Applying it twice returns the original data.
inline RationalData reflect(const RationalData& data) {
    RationalData out;
    out.epsilon = data.epsilon;
    out.poles.reserve(data.size());
    out.coeffs.reserve(data.size());
    for (std::size_t n = 0; n < data.size(); ++n) {
        out.poles.push_back(-std::conj(data.poles[n]));
        out.coeffs.push_back(-std::conj(data.coeffs[n]));
    }
    return out;
}

inline cplx eval_u0(const RationalData& data, cplx z) {
    cplx s(0.0, 0.0);
    for (std::size_t n = 0; n < data.size(); ++n) {
        const cplx dp = z - data.poles[n];
        const cplx dq = z - std::conj(data.poles[n]);
        if (dp == cplx(0.0, 0.0) || dq == cplx(0.0, 0.0)) throw PoleHit("u0 evaluated at a pole");
        s += data.coeffs[n] / dp + std::conj(data.coeffs[n]) / dq;
    }
    return s;
}

// Szego (Hardy) projection of u0: only the lower-half-plane poles survive,
// Pi u0 (y) = sum_n conj(c_n) / (y - conj(p_n)), analytic in the upper half-plane.
inline cplx szego_project(const RationalData& data, cplx y) {
    cplx s(0.0, 0.0);
    for (std::size_t n = 0; n < data.size(); ++n) {
        const cplx dq = y - std::conj(data.poles[n]);
        if (dq == cplx(0.0, 0.0)) throw PoleHit("Szego projection evaluated at a pole");
        s += std::conj(data.coeffs[n]) / dq;
    }
    return s;
}

} // namespace bodet
