#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmc/fft.hpp"
#include "cmc/matrix_loop.hpp"

namespace cmc {

// Splits a loop Phi on the unit circle as Phi = B * F with
//   - F(lambda) unitary for every |lambda| = 1,
//   - B(lambda) = sum_{j >= 0} W_j lambda^j holomorphic in the disk,
//   - B(0) upper triangular with positive diagonal.
//
// Method: G = Phi Phi^dagger is positive definite on the circle; its factor
// G = B B^dagger is obtained from the Cholesky decomposition of the banded
// Hermitian block-Toeplitz matrix T_{ij} = G_{i-j}.  The last block row of
// the Cholesky factor converges (geometrically in the Toeplitz size) to the
// coefficients W_j; the ladder doubles the size until the factor passes the
// residual checks.  A constant unitary right factor then moves B(0) from the
// lower-triangular shape Cholesky produces to the upper-triangular
// normalization, fixing uniqueness.

struct IwasawaOptions {
    double band_tolerance = 1e-15;          // relative cutoff for the G-band
    double unitary_tolerance = 1e-10;       // max ||F F^dag - Id||
    double reconstruction_tolerance = 1e-9; // max ||B F - Phi||
    int initial_blocks = 32;
    int max_blocks = 4096;
};

class IwasawaError : public std::runtime_error {
public:
    IwasawaError(const std::string& what, double unitary_defect, double reconstruction_error)
        : std::runtime_error(what),
          unitary_defect(unitary_defect),
          reconstruction_error(reconstruction_error) {}
    double unitary_defect;
    double reconstruction_error;
};

struct IwasawaResult {
    std::vector<Mat2> B;  // samples of the positive factor on the lambda grid
    std::vector<Mat2> F;  // samples of the unitary factor on the lambda grid
    std::vector<Mat2> W;  // polynomial coefficients of B, degrees 0..deg
    int toeplitz_blocks = 0;
    double unitarity_defect = 0.0;
    double reconstruction_error = 0.0;
};

namespace detail {

// Fourier coefficients of G = Phi Phi^dagger, Hermitized so that
// G_{-m} = G_m^dagger holds exactly.  Returns coefficients for m = 0..N/2-1;
// negative degrees follow by adjoint symmetry.
inline std::vector<Mat2> gram_coefficients(const std::vector<Mat2>& phi) {
    const int N = static_cast<int>(phi.size());
    std::vector<Mat2> g(phi.size());
    for (int s = 0; s < N; ++s) {
        const Mat2& m = phi[static_cast<std::size_t>(s)];
        g[static_cast<std::size_t>(s)] = m * m.adjoint();
    }
    // Entrywise forward DFT.
    std::vector<std::vector<cplx>> bins(4);
    for (int e = 0; e < 4; ++e) {
        std::vector<cplx> samples(phi.size());
        for (int s = 0; s < N; ++s) {
            const Mat2& m = g[static_cast<std::size_t>(s)];
            samples[static_cast<std::size_t>(s)] = e == 0 ? m.a : e == 1 ? m.b : e == 2 ? m.c : m.d;
        }
        bins[static_cast<std::size_t>(e)] = dft_forward(samples);
    }
    const int half = N / 2;
    std::vector<Mat2> out(static_cast<std::size_t>(half));
    for (int m = 0; m < half; ++m) {
        auto bin = [&](int deg) {
            const int k = ((deg % N) + N) % N;
            return Mat2{bins[0][static_cast<std::size_t>(k)] / static_cast<double>(N),
                        bins[1][static_cast<std::size_t>(k)] / static_cast<double>(N),
                        bins[2][static_cast<std::size_t>(k)] / static_cast<double>(N),
                        bins[3][static_cast<std::size_t>(k)] / static_cast<double>(N)};
        };
        const Mat2 gm = bin(m), gneg = bin(-m);
        out[static_cast<std::size_t>(m)] = (gm + gneg.adjoint()) * 0.5;
    }
    return out;
}

// Hermitian banded Cholesky tailored to the block-Toeplitz matrix
// T_{ij} = G_{i-j}; returns the last block row as W_0..W_band.
inline std::vector<Mat2> bauer_last_row(const std::vector<Mat2>& G, int band_blocks,
                                        int toeplitz_blocks) {
    const int D = 2 * toeplitz_blocks;
    const int bw = 2 * band_blocks + 1;
    // Row-banded storage: row i holds columns i-bw..i.
    std::vector<cplx> Lb(static_cast<std::size_t>(D) * static_cast<std::size_t>(bw + 1));
    auto L = [&](int i, int j) -> cplx& {
        return Lb[static_cast<std::size_t>(i) * static_cast<std::size_t>(bw + 1) +
                  static_cast<std::size_t>(j - (i - bw))];
    };
    auto T = [&](int i, int j) -> cplx {
        const int bi = i / 2, bj = j / 2, r = i % 2, c = j % 2;
        const int m = bi - bj;
        if (std::abs(m) > band_blocks) return {0.0, 0.0};
        const Mat2& g = G[static_cast<std::size_t>(std::abs(m))];
        if (m >= 0) return r == 0 ? (c == 0 ? g.a : g.b) : (c == 0 ? g.c : g.d);
        const Mat2 ga = g.adjoint();
        return r == 0 ? (c == 0 ? ga.a : ga.b) : (c == 0 ? ga.c : ga.d);
    };
    for (int i = 0; i < D; ++i) {
        const int j0 = std::max(0, i - bw);
        for (int j = j0; j <= i; ++j) {
            cplx s = T(i, j);
            const int k0 = std::max(j0, std::max(0, j - bw));
            for (int k = k0; k < j; ++k) s -= L(i, k) * std::conj(L(j, k));
            if (j < i) {
                L(i, j) = s / L(j, j);
            } else {
                if (s.real() <= 0.0)
                    throw IwasawaError("iwasawa: Gram matrix lost positivity", 0.0, 0.0);
                L(i, i) = cplx{std::sqrt(s.real()), 0.0};
            }
        }
    }
    const int last = toeplitz_blocks - 1;
    std::vector<Mat2> W(static_cast<std::size_t>(std::min(band_blocks, last) + 1), Mat2::zero());
    for (int j = 0; j < static_cast<int>(W.size()); ++j) {
        Mat2 w = Mat2::zero();
        cplx* slots[4] = {&w.a, &w.b, &w.c, &w.d};
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                const int I = 2 * last + r, J = 2 * (last - j) + c;
                *slots[2 * r + c] = (J <= I && J >= I - bw) ? L(I, J) : cplx{0.0, 0.0};
            }
        W[static_cast<std::size_t>(j)] = w;
    }
    return W;
}

// Constant unitary right factor turning the lower-triangular W_0 into the
// upper-triangular positive normalization of B(0).
inline Mat2 normalizing_rotation(const Mat2& w0) {
    const cplx beta = w0.c;
    const double gamma = w0.d.real();
    const double den = std::sqrt(gamma * gamma + std::norm(beta));
    if (den == 0.0) throw IwasawaError("iwasawa: degenerate constant term", 0.0, 0.0);
    const cplx a = cplx{gamma / den, 0.0};
    const cplx b = -beta / den;
    Mat2 V{a, -std::conj(b), b, std::conj(a)};
    // Snap residual phases so the diagonal of W_0 V is exactly real positive.
    const Mat2 t = w0 * V;
    auto phase = [](cplx z) {
        const double m = std::abs(z);
        return m == 0.0 ? cplx{1.0, 0.0} : std::conj(z) / m;
    };
    return V * Mat2::diag(phase(t.a), phase(t.d));
}

}  // namespace detail

inline IwasawaResult iwasawa_factor(const std::vector<Mat2>& phi,
                                    const IwasawaOptions& opt = {}) {
    const int N = static_cast<int>(phi.size());
    if (N < 4 || !is_power_of_two(static_cast<std::size_t>(N)))
        throw std::invalid_argument("iwasawa_factor: sample count must be a power of two >= 4");

    const std::vector<Mat2> G = detail::gram_coefficients(phi);
    double g_scale = G[0].norm();
    if (g_scale == 0.0) throw std::invalid_argument("iwasawa_factor: zero loop");
    int band = 1;
    for (int m = static_cast<int>(G.size()) - 1; m >= 1; --m) {
        if (G[static_cast<std::size_t>(m)].norm() > opt.band_tolerance * g_scale) {
            band = m;
            break;
        }
    }

    double phi_scale = 0.0;
    for (const Mat2& m : phi) phi_scale = std::max(phi_scale, m.norm());

    IwasawaResult result;
    double last_unitary = 0.0, last_recon = 0.0;
    for (int blocks = std::max(opt.initial_blocks, band + 1); blocks <= opt.max_blocks;
         blocks *= 2) {
        std::vector<Mat2> W = detail::bauer_last_row(G, band, blocks);
        const Mat2 V = detail::normalizing_rotation(W[0]);
        for (Mat2& w : W) w = w * V;

        std::vector<Mat2> B(phi.size()), F(phi.size());
        double unitary = 0.0, recon = 0.0;
        for (int s = 0; s < N; ++s) {
            const double arg = 2.0 * pi * s / N;
            const cplx lambda{std::cos(arg), std::sin(arg)};
            Mat2 b = W.back();
            for (int j = static_cast<int>(W.size()) - 2; j >= 0; --j)
                b = b * lambda + W[static_cast<std::size_t>(j)];
            const Mat2 f = b.inverse() * phi[static_cast<std::size_t>(s)];
            unitary = std::max(unitary, f.unitarity_defect());
            recon = std::max(recon, (b * f - phi[static_cast<std::size_t>(s)]).norm());
            B[static_cast<std::size_t>(s)] = b;
            F[static_cast<std::size_t>(s)] = f;
        }
        recon /= std::max(1.0, phi_scale);
        last_unitary = unitary;
        last_recon = recon;
        if (unitary <= opt.unitary_tolerance && recon <= opt.reconstruction_tolerance) {
            result.B = std::move(B);
            result.F = std::move(F);
            result.W = std::move(W);
            result.toeplitz_blocks = blocks;
            result.unitarity_defect = unitary;
            result.reconstruction_error = recon;
            return result;
        }
    }
    throw IwasawaError("iwasawa_factor: ladder exhausted without meeting tolerances",
                       last_unitary, last_recon);
}

inline IwasawaResult iwasawa_factor(const MatrixSamples& phi, const IwasawaOptions& opt = {}) {
    return iwasawa_factor(phi.v, opt);
}

}  // namespace cmc
