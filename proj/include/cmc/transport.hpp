#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmc/matrix_loop.hpp"
#include "cmc/parallel.hpp"
#include "cmc/potential.hpp"

namespace cmc {

struct TransportOptions {
    int steps_per_unit = 500;       // RK4 subdivisions per unit of path length
    double puncture_guard = 1e-3;   // refuse paths closer than this to a puncture
    double refine_radius = 0.15;    // grade step size down within this distance
    bool parallel = true;
};

inline double segment_puncture_distance(cplx z0, cplx z1, const std::array<cplx, 4>& punctures) {
    double dist = 1e300;
    const cplx d = z1 - z0;
    const double len2 = std::norm(d);
    for (const cplx& p : punctures) {
        double s = 0.0;
        if (len2 > 0.0) {
            s = ((p - z0) * std::conj(d)).real() / len2;
            s = std::clamp(s, 0.0, 1.0);
        }
        dist = std::min(dist, std::abs(z0 + s * d - p));
    }
    return dist;
}

class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& what, double distance)
        : std::runtime_error(what), distance(distance) {}
    double distance;
};

namespace detail {

inline Mat2 potential_matrix(double rt, cplx x1, cplx x2, cplx x3, const OmegaWeights& w, cplx dz) {
    const cplx i{0.0, 1.0};
    const cplx u1 = rt * x1 * (w.w1 * dz);
    const cplx u2 = rt * x2 * (w.w2 * dz);
    const cplx u3 = rt * x3 * (w.w3 * dz);
    return {i * u1, u2 + i * u3, u2 - i * u3, -i * u1};
}

}  // namespace detail

// Parallel transport of dPhi = Phi * eta along the straight segment [z0, z1],
// independently for each lambda sample; phi is updated in place.  Fixed-step
// RK4 with steps graded geometrically where the segment approaches a
// puncture, so end-segment refinement near the unit circle is automatic.
// Deterministic: every lambda sample owns its slot and the step sequence is
// fixed by the options, not by the worker count.
inline void transport_segment(const PotentialEvaluator& eta, cplx z0, cplx z1,
                              MatrixSamples& phi, const TransportOptions& opt) {
    const auto punct = eta.params().punctures();
    const double guard_dist = segment_puncture_distance(z0, z1, punct);
    if (guard_dist < opt.puncture_guard)
        throw TransportError("transport: path passes a puncture at distance " +
                                 std::to_string(guard_dist),
                             guard_dist);
    const double length = std::abs(z1 - z0);
    if (length == 0.0) return;
    const int N = eta.sample_count();
    if (phi.size() != N) throw std::invalid_argument("transport: sample grid mismatch");

    // Subdivision knots in [0,1]: uniform base resolution, densified where the
    // path runs close to a puncture (step proportional to the distance inside
    // the refinement radius).
    std::vector<double> knots{0.0};
    const double base_h = 1.0 / std::max(1.0, std::ceil(opt.steps_per_unit * length));
    while (knots.back() < 1.0) {
        const double s = knots.back();
        const cplx z = z0 + s * (z1 - z0);
        double dist = 1e300;
        for (const cplx& p : punct) dist = std::min(dist, std::abs(z - p));
        const double grade = std::min(1.0, std::max(dist, opt.puncture_guard) / opt.refine_radius);
        knots.push_back(std::min(1.0, s + std::max(base_h * grade, 1e-7)));
    }
    const int steps = static_cast<int>(knots.size()) - 1;
    const cplx dz = z1 - z0;

    // Stage weights shared by all lambda samples.
    std::vector<OmegaWeights> wk(knots.size()), wm(static_cast<std::size_t>(steps));
    for (std::size_t i = 0; i < knots.size(); ++i)
        wk[i] = omega_weights(eta.params(), z0 + knots[i] * dz);
    for (int i = 0; i < steps; ++i)
        wm[static_cast<std::size_t>(i)] =
            omega_weights(eta.params(), z0 + 0.5 * (knots[static_cast<std::size_t>(i)] +
                                                    knots[static_cast<std::size_t>(i + 1)]) * dz);

    const double rt = eta.rt();
    const auto& x1s = eta.x1_samples();
    const auto& x2s = eta.x2_samples();
    const auto& x3s = eta.x3_samples();

    auto advance_lambda = [&](int j) {
        const std::size_t u = static_cast<std::size_t>(j);
        const cplx x1 = x1s[u], x2 = x2s[u], x3 = x3s[u];
        Mat2 f = phi[j];
        for (int step = 0; step < steps; ++step) {
            const std::size_t si = static_cast<std::size_t>(step);
            const double h = knots[si + 1] - knots[si];
            const Mat2 B0 = detail::potential_matrix(rt, x1, x2, x3, wk[si], dz);
            const Mat2 Bh = detail::potential_matrix(rt, x1, x2, x3, wm[si], dz);
            const Mat2 B1 = detail::potential_matrix(rt, x1, x2, x3, wk[si + 1], dz);
            const Mat2 k1 = f * B0;
            const Mat2 k2 = (f + k1 * (0.5 * h)) * Bh;
            const Mat2 k3 = (f + k2 * (0.5 * h)) * Bh;
            const Mat2 k4 = (f + k3 * h) * B1;
            f += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        }
        phi[j] = f;
    };

    if (opt.parallel && N >= 8) {
        parallel_for(N, advance_lambda);
    } else {
        for (int j = 0; j < N; ++j) advance_lambda(j);
    }
}

// Transport along a polyline starting from the given initial value.
inline MatrixSamples transport_path(const PotentialEvaluator& eta, const std::vector<cplx>& path,
                                    const MatrixSamples& initial, const TransportOptions& opt) {
    if (path.size() < 2) throw std::invalid_argument("transport_path: need at least two points");
    MatrixSamples phi = initial;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        transport_segment(eta, path[i], path[i + 1], phi, opt);
    return phi;
}

// Endpoint frames of the two defining transports: P = Phi(1), Q = Phi(i),
// both from Phi(0) = Id.
struct PQFrames {
    MatrixSamples P, Q;
};

inline PQFrames compute_PQ(const SurfaceParams& params, const PotentialCoeffs& coeffs,
                           int sample_count, const TransportOptions& opt) {
    const PotentialEvaluator eta(params, coeffs, sample_count);
    PQFrames out;
    out.P = transport_path(eta, {cplx{0.0, 0.0}, cplx{1.0, 0.0}},
                           MatrixSamples::identity(sample_count), opt);
    out.Q = transport_path(eta, {cplx{0.0, 0.0}, cplx{0.0, 1.0}},
                           MatrixSamples::identity(sample_count), opt);
    return out;
}

}  // namespace cmc
