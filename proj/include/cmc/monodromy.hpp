#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmc/matrix_loop.hpp"
#include "cmc/transport.hpp"

namespace cmc {

// Constant symmetry matrices of the potential.
inline Mat2 sym_D() { return Mat2::diag({0.0, 1.0}, {0.0, -1.0}); }
inline Mat2 sym_C() { return {0.0, {0.0, 1.0}, {0.0, 1.0}, 0.0}; }

// Half-trace functions of the boundary monodromies, per lambda sample:
//   p = P11 P21 - P12 P22        (= tr(L2 L3)/2)
//   q = i (Q11 Q21 + Q12 Q22)    (= -tr(L1 L2)/2)
struct HalfTraces {
    std::vector<cplx> p, q;
};

inline HalfTraces half_traces(const PQFrames& pq) {
    const int N = pq.P.size();
    if (pq.Q.size() != N) throw std::invalid_argument("half_traces: sample grid mismatch");
    HalfTraces out;
    out.p.resize(static_cast<std::size_t>(N));
    out.q.resize(static_cast<std::size_t>(N));
    const cplx i{0.0, 1.0};
    for (int j = 0; j < N; ++j) {
        const Mat2& P = pq.P[j];
        const Mat2& Q = pq.Q[j];
        out.p[static_cast<std::size_t>(j)] = P.a * P.c - P.b * P.d;
        out.q[static_cast<std::size_t>(j)] = i * (Q.a * Q.c + Q.b * Q.d);
    }
    return out;
}

// Generators of the boundary monodromy representation, per sample:
//   L1 = Q C D Q^-1, L2 = D, L3 = P C P^-1, L4 = -L3 L2 L1
// and the puncture monodromies
//   M1 = L4, M2 = L1^-1 L4 L1, M3 = L2^-1 L4 L2, M4 = L2^-1 L1^-1 L4 L1 L2.
struct MonodromyMatrices {
    std::vector<Mat2> L1, L2, L3, L4;
    std::vector<Mat2> M1, M2, M3, M4;
};

inline MonodromyMatrices monodromy_matrices(const PQFrames& pq) {
    const int N = pq.P.size();
    MonodromyMatrices out;
    auto resize_all = [N](auto&... vs) { (vs.resize(static_cast<std::size_t>(N)), ...); };
    resize_all(out.L1, out.L2, out.L3, out.L4, out.M1, out.M2, out.M3, out.M4);
    const Mat2 C = sym_C();
    const Mat2 D = sym_D();
    for (int j = 0; j < N; ++j) {
        const std::size_t u = static_cast<std::size_t>(j);
        const Mat2& P = pq.P[j];
        const Mat2& Q = pq.Q[j];
        const Mat2 L1 = Q * C * D * Q.inverse();
        const Mat2 L3 = P * C * P.inverse();
        const Mat2 L4 = (L3 * D * L1) * cplx{-1.0, 0.0};
        out.L1[u] = L1;
        out.L2[u] = D;
        out.L3[u] = L3;
        out.L4[u] = L4;
        const Mat2 L1i = L1.inverse();
        const Mat2 Di = D.inverse();
        out.M1[u] = L4;
        out.M2[u] = L1i * L4 * L1;
        out.M3[u] = Di * L4 * D;
        out.M4[u] = Di * L1i * L4 * L1 * D;
    }
    return out;
}

// Third half-trace r = -tr(L2 L4)/2, needed only for diagnostics: its reality
// follows from the reality of p and q at a solution.
inline std::vector<cplx> half_trace_r(const MonodromyMatrices& mm) {
    std::vector<cplx> out(mm.L2.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = -0.5 * (mm.L2[j] * mm.L4[j]).trace();
    return out;
}

// Discriminant Delta = 4 (1 - p^2)(1 - q^2) - 4 cos^2(2 pi t) per sample.
inline std::vector<cplx> discriminant(const HalfTraces& ht, double t) {
    const double c = std::cos(2.0 * pi * t);
    std::vector<cplx> out(ht.p.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const cplx p2 = ht.p[j] * ht.p[j];
        const cplx q2 = ht.q[j] * ht.q[j];
        out[j] = 4.0 * (1.0 - p2) * (1.0 - q2) - 4.0 * c * c;
    }
    return out;
}

// Value of a sampled function at lambda = i (sample index N/4 on the uniform grid).
inline cplx sample_at_i(const std::vector<cplx>& samples) {
    const std::size_t N = samples.size();
    if (N % 4 != 0) throw std::invalid_argument("sample_at_i: sample count must be divisible by 4");
    return samples[N / 4];
}

class UnitarizabilityError : public std::runtime_error {
public:
    explicit UnitarizabilityError(const std::string& what, int sample = -1, cplx value = {})
        : std::runtime_error(what), sample(sample), value(value) {}
    int sample;
    cplx value;
};

// Diagonal unitarizer U = diag(u, 1/u) with u > 0 on the circle.  Dressing
// the off-diagonal parts of the generators gives two expressions for u^4:
//   from L3 = P C P^-1:       u^4 = (P22^2 - P21^2) / conj(P11^2 - P12^2)
//   from L1 = Q (CD) Q^-1:    u^4 = (Q21^2 + Q22^2) / conj(Q11^2 + Q12^2)
// Both must be real, positive, and equal samplewise for the dressed
// monodromies to be unitary.  Either expression can degenerate to 0/0 at
// samples where its generator is already diagonal (the flat member has this
// at lambda = 1), and the two routes agree only up to the accuracy of the
// data, so a hard per-sample switch would put small jumps into u and ruin
// the Fourier decay of everything built from it.  Each sample therefore
// takes the least-squares blend of the two conditions, which is smooth in
// lambda and stays defined while at least one route is nondegenerate.
struct Unitarizer {
    std::vector<double> u;
    double max_imag = 0.0;   // largest |Im u^4| encountered
    double min_real = 0.0;   // smallest Re u^4 encountered

    MatrixSamples frames() const {
        MatrixSamples out;
        out.v.resize(u.size());
        for (std::size_t j = 0; j < u.size(); ++j)
            out.v[j] = Mat2::diag(u[j], 1.0 / u[j]);
        return out;
    }
};

inline Unitarizer unitarizer(const MatrixSamples& P, const MatrixSamples& Q,
                             double tolerance = 1e-6) {
    if (Q.size() != P.size())
        throw std::invalid_argument("unitarizer: sample grid mismatch");
    Unitarizer out;
    out.u.resize(static_cast<std::size_t>(P.size()));
    out.min_real = 1e300;
    for (int j = 0; j < P.size(); ++j) {
        const Mat2& p = P[j];
        const Mat2& q = Q[j];
        const cplx num_p = p.d * p.d - p.c * p.c;
        const cplx den_p = std::conj(p.a * p.a - p.b * p.b);
        const cplx num_q = q.c * q.c + q.d * q.d;
        const cplx den_q = std::conj(q.a * q.a + q.b * q.b);
        const double weight = std::norm(den_p) + std::norm(den_q);
        if (weight < 1e-300)
            throw UnitarizabilityError("unitarizer: both routes degenerate at sample " +
                                           std::to_string(j),
                                       j, {});
        const cplx w2 = (std::conj(den_p) * num_p + std::conj(den_q) * num_q) / weight;
        out.max_imag = std::max(out.max_imag, std::abs(w2.imag()));
        out.min_real = std::min(out.min_real, w2.real());
        if (std::abs(w2.imag()) > tolerance * std::max(1.0, std::abs(w2)) || w2.real() <= 0.0)
            throw UnitarizabilityError("unitarizer: u^4 not positive real at sample " +
                                           std::to_string(j) + " (value " +
                                           std::to_string(w2.real()) + " + " +
                                           std::to_string(w2.imag()) + "i)",
                                       j, w2);
        out.u[static_cast<std::size_t>(j)] = std::sqrt(std::sqrt(w2.real()));
    }
    return out;
}

inline Unitarizer unitarizer(const PQFrames& pq, double tolerance = 1e-6) {
    return unitarizer(pq.P, pq.Q, tolerance);
}

// Largest unitarity defect of the dressed generators U L_j U^-1 over samples.
inline double dressed_unitarity_defect(const MonodromyMatrices& mm, const Unitarizer& un) {
    double worst = 0.0;
    for (std::size_t j = 0; j < un.u.size(); ++j) {
        const Mat2 U = Mat2::diag(un.u[j], 1.0 / un.u[j]);
        const Mat2 Ui = Mat2::diag(1.0 / un.u[j], un.u[j]);
        for (const auto* L : {&mm.L1, &mm.L2, &mm.L3, &mm.L4})
            worst = std::max(worst, (U * (*L)[j] * Ui).unitarity_defect());
    }
    return worst;
}

}  // namespace cmc
