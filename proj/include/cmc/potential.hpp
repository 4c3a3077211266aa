#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cmc/loop.hpp"
#include "cmc/mat2.hpp"

namespace cmc {

// Family parameters: an integer k >= 2 selecting the cone angle pi/k of the
// fundamental piece, and the puncture angle phi in (0, pi/2).  The weight of
// the Fuchsian potential is t = 1/(2k).
struct SurfaceParams {
    int k = 3;
    double phi = pi / 4.0;

    double t() const { return 1.0 / (2.0 * k); }

    // Simple poles of the potential on the unit circle.
    std::array<cplx, 4> punctures() const {
        const cplx e = std::polar(1.0, phi);
        const cplx ebar = std::polar(1.0, -phi);
        return {e, -ebar, -e, ebar};
    }

    void validate() const {
        if (k < 2) throw std::invalid_argument("SurfaceParams: k must be >= 2");
        if (!(phi > 0.0 && phi < pi / 2.0))
            throw std::invalid_argument("SurfaceParams: phi must lie in (0, pi/2)");
    }
};

// Coefficient data of the potential: three real-coefficient loops supported on
// degrees [-1, n] and a positive scale r.  The degree -1 coefficients are
// pinned by the puncture residues and never act as unknowns:
//   x1[-1] = 1/2,  x2[-1] = -sin(phi)/2,  x3[-1] = -cos(phi)/2.
struct PotentialCoeffs {
    RealLoop x1, x2, x3;
    double r = 1.0;
    int order_n = 0;

    void validate(const SurfaceParams& params) const {
        if (r <= 0.0) throw std::invalid_argument("PotentialCoeffs: r must be positive");
        const double c1 = x1.coeff(-1), c2 = x2.coeff(-1), c3 = x3.coeff(-1);
        const double s = std::sin(params.phi), c = std::cos(params.phi);
        if (std::abs(c1 - 0.5) > 1e-12 || std::abs(c2 + 0.5 * s) > 1e-12 ||
            std::abs(c3 + 0.5 * c) > 1e-12)
            throw std::invalid_argument("PotentialCoeffs: residue coefficients do not match phi");
        if (x1.lo() < -1 || x2.lo() < -1 || x3.lo() < -1)
            throw std::invalid_argument("PotentialCoeffs: degrees below -1 are not allowed");
    }
};

// Exact limit of the family at t -> 0 for given phi, padded to order n:
//   x1 = (1/lambda - lambda)/2
//   x2 = -sin(phi) (lambda - 1)^2 / (2 lambda)
//   x3 = -1/cos(phi) - cos(phi) (lambda - 1)^2 / (2 lambda)
//   r  = cos(phi)
inline PotentialCoeffs central_value(const SurfaceParams& params, int order_n) {
    params.validate();
    if (order_n < 1) throw std::invalid_argument("central_value: order_n must be >= 1");
    const double s = std::sin(params.phi), c = std::cos(params.phi);
    auto padded = [order_n](std::vector<double> low) {
        low.resize(static_cast<std::size_t>(order_n + 2), 0.0);
        return RealLoop(-1, std::move(low));
    };
    PotentialCoeffs out;
    out.x1 = padded({0.5, 0.0, -0.5});
    out.x2 = padded({-0.5 * s, s, -0.5 * s});
    out.x3 = padded({-0.5 * c, c - 1.0 / c, -0.5 * c});
    out.r = c;
    out.order_n = order_n;
    return out;
}

// Scalar weights of the three closed one-forms:
//   w1 = 4 i sin(2 phi) z / D(z)
//   w2 = 4 cos(phi) (z^2 - 1) / D(z)
//   w3 = 4 i sin(phi) (z^2 + 1) / D(z)
// with D(z) = z^4 - 2 cos(2 phi) z^2 + 1 vanishing exactly at the punctures.
struct OmegaWeights {
    cplx w1, w2, w3;
};

inline OmegaWeights omega_weights(const SurfaceParams& params, cplx z) {
    const double c2 = std::cos(2.0 * params.phi), s2 = std::sin(2.0 * params.phi);
    const double c = std::cos(params.phi), s = std::sin(params.phi);
    const cplx z2 = z * z;
    const cplx den = z2 * z2 - 2.0 * c2 * z2 + 1.0;
    const cplx i{0.0, 1.0};
    return {4.0 * i * s2 * z / den, 4.0 * c * (z2 - 1.0) / den, 4.0 * i * s * (z2 + 1.0) / den};
}

// Same weights assembled from the defining partial fractions
// sum_j (+/-) 1/(z - p_j); used as an independent cross-check of the closed forms.
inline OmegaWeights omega_weights_partial_fractions(const SurfaceParams& params, cplx z) {
    const auto p = params.punctures();
    auto term = [&](int j) { return 1.0 / (z - p[static_cast<std::size_t>(j)]); };
    return {term(0) - term(1) + term(2) - term(3),
            term(0) - term(1) - term(2) + term(3),
            term(0) + term(1) - term(2) - term(3)};
}

// Constant matrix directions of the potential.
inline Mat2 frame_m1() { return Mat2::diag({0.0, 1.0}, {0.0, -1.0}); }
inline Mat2 frame_m2() { return {0.0, 1.0, 1.0, 0.0}; }
inline Mat2 frame_m3() { return {0.0, {0.0, 1.0}, {0.0, -1.0}, 0.0}; }

// Potential evaluator bound to sampled coefficient loops: for fixed z the
// matrix of eta = A(z, lambda) dz at every lambda sample is
//   A = r t (x1(lambda) m1 w1(z) + x2(lambda) m2 w2(z) + x3(lambda) m3 w3(z))
// whose entries reduce to a = i u1, b = u2 + i u3, c = u2 - i u3, d = -i u1
// with u_j = r t x_j(lambda) w_j(z).
class PotentialEvaluator {
public:
    PotentialEvaluator(const SurfaceParams& params, const PotentialCoeffs& coeffs, int sample_count)
        : params_(params), rt_(coeffs.r * params.t()) {
        auto sampled = [sample_count](const RealLoop& u) {
            return u.is_zero() ? std::vector<cplx>(static_cast<std::size_t>(sample_count))
                               : u.samples(sample_count);
        };
        x1s_ = sampled(coeffs.x1);
        x2s_ = sampled(coeffs.x2);
        x3s_ = sampled(coeffs.x3);
    }

    int sample_count() const { return static_cast<int>(x1s_.size()); }
    const SurfaceParams& params() const { return params_; }
    double rt() const { return rt_; }
    const std::vector<cplx>& x1_samples() const { return x1s_; }
    const std::vector<cplx>& x2_samples() const { return x2s_; }
    const std::vector<cplx>& x3_samples() const { return x3s_; }

    // A(z, lambda_j) for one z at every sample j, written into out (size N).
    void eval(cplx z, std::vector<Mat2>& out) const {
        const OmegaWeights w = omega_weights(params_, z);
        const cplx i{0.0, 1.0};
        const std::size_t n = x1s_.size();
        out.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx u1 = rt_ * x1s_[j] * w.w1;
            const cplx u2 = rt_ * x2s_[j] * w.w2;
            const cplx u3 = rt_ * x3s_[j] * w.w3;
            out[j] = {i * u1, u2 + i * u3, u2 - i * u3, -i * u1};
        }
    }

private:
    SurfaceParams params_;
    double rt_;
    std::vector<cplx> x1s_, x2s_, x3s_;
};

// Determinant-type invariant calK = r^2 (-x1^2 + x2^2 + x3^2), a real loop on
// degrees [-2, 2n].  The monodromy problem pins it to the constant 1.
inline RealLoop calK(const PotentialCoeffs& coeffs) {
    const RealLoop q = coeffs.x2 * coeffs.x2 + coeffs.x3 * coeffs.x3 - coeffs.x1 * coeffs.x1;
    return q * (coeffs.r * coeffs.r);
}

// Deviations of a (possibly complexified) potential from its three symmetries:
//   delta(z) = -z   : delta* eta = D^-1 eta D,  D = diag(i, -i)
//   tauinv(z) = 1/z : tauinv* eta = C^-1 eta C, C = offdiag(i, i)
//   sigma(z) = conj z : sigma* eta = conj(eta(conj z, conj lambda))
// The first two hold identically in the coefficients; the third holds exactly
// when all coefficient loops are real.
struct SymmetryDeviations {
    double delta = 0.0;
    double tau = 0.0;
    double sigma = 0.0;
};

struct ComplexPotential {
    ComplexLoop x1, x2, x3;
    cplx r;
};

inline ComplexPotential complexify(const PotentialCoeffs& coeffs) {
    return {to_complex(coeffs.x1), to_complex(coeffs.x2), to_complex(coeffs.x3), coeffs.r};
}

inline SymmetryDeviations verify_symmetries(const SurfaceParams& params, const ComplexPotential& pot,
                                            int z_samples = 24, int lambda_samples = 16) {
    params.validate();
    const cplx i{0.0, 1.0};
    const Mat2 D = Mat2::diag(i, -i);
    const Mat2 Dinv = Mat2::diag(-i, i);
    const Mat2 C{0.0, i, i, 0.0};
    const Mat2 Cinv{0.0, -i, -i, 0.0};
    const cplx rt = pot.r * params.t();

    auto eval = [&](cplx z, cplx lambda) -> Mat2 {
        const OmegaWeights w = omega_weights(params, z);
        const cplx u1 = rt * pot.x1.eval(lambda) * w.w1;
        const cplx u2 = rt * pot.x2.eval(lambda) * w.w2;
        const cplx u3 = rt * pot.x3.eval(lambda) * w.w3;
        return {i * u1, u2 + i * u3, u2 - i * u3, -i * u1};
    };

    SymmetryDeviations dev;
    for (int a = 0; a < z_samples; ++a) {
        // Interior points on two rings, avoiding the punctures on |z| = 1.
        const double rho = (a % 2 == 0) ? 0.55 : 0.8;
        const cplx z = std::polar(rho, 2.0 * pi * (a + 0.3) / z_samples);
        for (int l = 0; l < lambda_samples; ++l) {
            const cplx lam = std::polar(1.0, 2.0 * pi * (l + 0.2) / lambda_samples);
            const Mat2 A = eval(z, lam);
            // delta pullback of A dz at z is -A(-z).
            const Mat2 lhs_delta = eval(-z, lam) * cplx{-1.0, 0.0};
            const Mat2 rhs_delta = Dinv * A * D;
            dev.delta = std::max(dev.delta, (lhs_delta - rhs_delta).norm());
            // tauinv pullback at z is A(1/z) * (-1/z^2).
            const Mat2 lhs_tau = eval(1.0 / z, lam) * (-1.0 / (z * z));
            const Mat2 rhs_tau = Cinv * A * C;
            dev.tau = std::max(dev.tau, (lhs_tau - rhs_tau).norm());
            // sigma symmetry: conj(A(conj z, conj lambda)) = A(z, lambda).
            const Mat2 conj_eval = eval(std::conj(z), std::conj(lam));
            const Mat2 lhs_sigma{std::conj(conj_eval.a), std::conj(conj_eval.b),
                                 std::conj(conj_eval.c), std::conj(conj_eval.d)};
            dev.sigma = std::max(dev.sigma, (lhs_sigma - A).norm());
        }
    }
    return dev;
}

inline SymmetryDeviations verify_symmetries(const SurfaceParams& params, const PotentialCoeffs& coeffs) {
    return verify_symmetries(params, complexify(coeffs));
}

}  // namespace cmc
