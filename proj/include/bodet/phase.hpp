#pragma once

// Phase function h(z) = (z-x)^2/(4t) + sum_n [ c_n log(z-p_n) + conj(c_n) log(z-conj(p_n)) ]
// continued along paths.  Branches are pinned at a real anchor y_ref far to the left of
// all poles, where every log takes its principal value and h is real.  Continuation along
// a straight segment adds Arg((b-s)/(a-s)) to the tracked argument of each singularity s;
// that increment is exact for segments avoiding s, and segments are subdivided until each
// increment is below pi/2 to keep the near-pole case robust.

#include <cmath>
#include <complex>
#include <vector>

#include "bodet/errors.hpp"
#include "bodet/rational_data.hpp"
#include "bodet/scaled.hpp"

namespace bodet {

struct BranchState {
    cplx z;                      // current point
    std::vector<double> arg_up;  // continued arg(z - p_n)
    std::vector<double> arg_dn;  // continued arg(z - conj(p_n))
};

class PhaseContext {
public:
    PhaseContext(RationalData data, double t, double x)
        : data_(std::move(data)), t_(t), x_(x) {
        if (!(t > 0.0)) throw DomainError("phase context requires t > 0");
        double re_min = data_.poles.front().real();
        double mod_max = 0.0;
        for (const cplx p : data_.poles) {
            re_min = std::min(re_min, p.real());
            mod_max = std::max(mod_max, std::abs(p));
        }
        anchor_ = re_min - 10.0 * (1.0 + mod_max);
    }

    const RationalData& data() const { return data_; }
    double t() const { return t_; }
    double x() const { return x_; }
    double anchor() const { return anchor_; }

    BranchState initial_state() const {
        BranchState s;
        s.z = cplx(anchor_, 0.0);
        s.arg_up.reserve(data_.size());
        s.arg_dn.reserve(data_.size());
        for (const cplx p : data_.poles) {
            s.arg_up.push_back(std::arg(s.z - p));
            s.arg_dn.push_back(std::arg(s.z - std::conj(p)));
        }
        return s;
    }

    // Continue the state along the straight segment from state.z to z_to.
    void advance(BranchState& state, cplx z_to, int depth = 0) const {
        const cplx a = state.z;
        if (z_to == a) return;
        bool needs_split = false;
        for (std::size_t n = 0; n < data_.size() && !needs_split; ++n) {
            needs_split = segment_arg_too_large(a, z_to, data_.poles[n]) ||
                          segment_arg_too_large(a, z_to, std::conj(data_.poles[n]));
        }
        if (needs_split) {
            if (depth > 60)
                throw SingularityTooClose("path segment passes through a pole of the phase");
            const cplx mid = 0.5 * (a + z_to);
            advance(state, mid, depth + 1);
            advance(state, z_to, depth + 1);
            return;
        }
        for (std::size_t n = 0; n < data_.size(); ++n) {
            state.arg_up[n] += segment_arg(a, z_to, data_.poles[n]);
            state.arg_dn[n] += segment_arg(a, z_to, std::conj(data_.poles[n]));
        }
        state.z = z_to;
    }

    BranchState advanced(const BranchState& state, cplx z_to) const {
        BranchState s = state;
        advance(s, z_to);
        return s;
    }

    // h at the state's point on the tracked branch
    cplx eval_h(const BranchState& state) const {
        const cplx z = state.z;
        const cplx dz = z - x_;
        cplx h = dz * dz / (4.0 * t_);
        for (std::size_t n = 0; n < data_.size(); ++n) {
            const cplx c = data_.coeffs[n];
            const double ru = std::abs(z - data_.poles[n]);
            const double rd = std::abs(z - std::conj(data_.poles[n]));
            if (ru == 0.0 || rd == 0.0) throw PoleHit("h evaluated at a pole");
            h += c * cplx(std::log(ru), state.arg_up[n]);
            h += std::conj(c) * cplx(std::log(rd), state.arg_dn[n]);
        }
        return h;
    }

    // log of the integrand factor exp(-i h / eps)
    cplx eval_log_weight(const BranchState& state) const {
        return cplx(0.0, -1.0) * eval_h(state) / data_.epsilon;
    }

    // exp(-i h / eps) with the magnitude split into the exponent
    ScaledComplex eval_exp_phase(const BranchState& state) const {
        const cplx w = eval_log_weight(state);
        return ScaledComplex::from(cplx(std::cos(w.imag()), std::sin(w.imag())), w.real());
    }

    // h'(z) = (z - x)/(2t) + u0(z); meromorphic, no branch tracking needed
    cplx eval_h_prime(cplx z) const { return (z - x_) / (2.0 * t_) + eval_u0(data_, z); }

    // multiplicative jump of exp(-i h / eps) across cut n: exp(2 pi c_n / eps)
    ScaledComplex cut_jump_factor(std::size_t n) const {
        const cplx w = 2.0 * M_PI * data_.coeffs[n] / data_.epsilon;
        return ScaledComplex::from(cplx(std::cos(w.imag()), std::sin(w.imag())), w.real());
    }

private:
    static double segment_arg(cplx a, cplx b, cplx s) {
        const cplx da = a - s, db = b - s;
        if (da == cplx(0.0, 0.0) || db == cplx(0.0, 0.0))
            throw PoleHit("path endpoint lies on a pole of the phase");
        return std::arg(db / da);
    }

    static bool segment_arg_too_large(cplx a, cplx b, cplx s) {
        const cplx da = a - s, db = b - s;
        if (da == cplx(0.0, 0.0) || db == cplx(0.0, 0.0))
            throw PoleHit("path endpoint lies on a pole of the phase");
        return std::abs(std::arg(db / da)) > 0.5 * M_PI;
    }

    RationalData data_;
    double t_;
    double x_;
    double anchor_;
};

} // namespace bodet
