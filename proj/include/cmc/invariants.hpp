#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "cmc/monodromy.hpp"
#include "cmc/potential.hpp"

namespace cmc {

// Second-order jets at tau = 0 of the two coefficient functions that control
// the geometry: a-jet from r*x1(e^{i tau}), b-jet from r*x2(e^{i tau}).
struct SurfaceJets {
    cplx a1, a2, b1, b2;
};

inline SurfaceJets surface_jets(const PotentialCoeffs& coeffs) {
    const auto ja = (coeffs.x1 * coeffs.r).tau_jet();
    const auto jb = (coeffs.x2 * coeffs.r).tau_jet();
    return {ja.first, ja.second, jb.first, jb.second};
}

// Area of one translational fundamental piece, in closed form from the
// solved coefficient data.
inline double surface_area(const SurfaceParams& params, const PotentialCoeffs& coeffs) {
    const double c = std::cos(params.phi), s = std::sin(params.phi);
    return 8.0 * pi * (1.0 - coeffs.r * c * coeffs.x2.coeff(0) + coeffs.r * s * coeffs.x3.coeff(0));
}

// Route 1 to the total-curvature invariant: the closed jet formula.
inline cplx curvature_jets(const PotentialCoeffs& coeffs) {
    const SurfaceJets j = surface_jets(coeffs);
    return 2.0 * (j.a1 * j.b2 - j.a2 * j.b1);
}

namespace detail {

// Matrix-valued Laurent polynomial in a local coordinate; just enough
// calculus (product, primitive, coefficient extraction) for residue work.
struct LaurentMatrix {
    std::map<int, Mat2> terms;

    void add(int deg, const Mat2& m) {
        auto it = terms.find(deg);
        if (it == terms.end())
            terms.emplace(deg, m);
        else
            it->second = it->second + m;
    }

    Mat2 coeff(int deg) const {
        auto it = terms.find(deg);
        return it == terms.end() ? Mat2::zero() : it->second;
    }

    LaurentMatrix primitive() const {
        LaurentMatrix out;
        for (const auto& [deg, m] : terms) {
            if (deg == -1) {
                if (m.norm() > 0.0)
                    throw std::domain_error("LaurentMatrix::primitive: logarithmic term");
                continue;
            }
            out.add(deg + 1, m * (1.0 / static_cast<double>(deg + 1)));
        }
        return out;
    }

    LaurentMatrix operator*(const LaurentMatrix& rhs) const {
        LaurentMatrix out;
        for (const auto& [d1, m1] : terms)
            for (const auto& [d2, m2] : rhs.terms) out.add(d1 + d2, m1 * m2);
        return out;
    }
};

// Local expansion of the k-th order torsion form at a puncture, carrying the
// given pair of jet numbers in its off-diagonal entries.
inline LaurentMatrix puncture_form(cplx a, cplx b) {
    LaurentMatrix out;
    const cplx i{0.0, 1.0};
    Mat2 upper = Mat2::zero(), lower = Mat2::zero();
    upper.b = (-i * a - i * b) * 0.5;  // coefficient of y^{-2}
    lower.c = (-i * a + i * b) * 0.5;  // coefficient of y^{0}
    out.add(-2, upper);
    out.add(0, lower);
    return out;
}

}  // namespace detail

// Route 2 to the total-curvature invariant: at each puncture take the local
// first- and second-order forms, integrate the first, and sum the residues of
// tr(F1 * Theta2).  The four punctures carry identical local data by the
// built-in symmetries, so each contributes the same residue.
inline cplx curvature_residues(const SurfaceParams& params, const PotentialCoeffs& coeffs) {
    const SurfaceJets j = surface_jets(coeffs);
    const detail::LaurentMatrix theta1 = detail::puncture_form(j.a1, j.b1);
    const detail::LaurentMatrix theta2 = detail::puncture_form(j.a2, j.b2);
    const detail::LaurentMatrix F1 = theta1.primitive();
    const cplx res = (F1 * theta2).coeff(-1).trace();
    cplx total{0.0, 0.0};
    for (std::size_t p = 0; p < params.punctures().size(); ++p) total += res;
    return -total;
}

// Enclosed volume of one fundamental piece from area and total curvature.
inline cplx enclosed_volume(double area, cplx curvature) {
    const cplx i{0.0, 1.0};
    return (cplx{area, 0.0} - 2.0 * pi * i * curvature) / 3.0;
}

struct GlobalInvariants {
    double area = 0.0;
    double volume = 0.0;
    double curvature_imag = 0.0;     // K is purely imaginary; this is Im K
    double curvature_real = 0.0;     // |Re K|, should vanish
    double curvature_route_gap = 0.0;  // |K_jets - K_residues|
    double volume_imag = 0.0;        // |Im V|, should vanish
};

inline GlobalInvariants compute_invariants(const SurfaceParams& params,
                                           const PotentialCoeffs& coeffs) {
    GlobalInvariants out;
    out.area = surface_area(params, coeffs);
    const cplx k1 = curvature_jets(coeffs);
    const cplx k2 = curvature_residues(params, coeffs);
    out.curvature_route_gap = std::abs(k1 - k2);
    out.curvature_imag = k1.imag();
    out.curvature_real = std::abs(k1.real());
    const cplx v = enclosed_volume(out.area, k1);
    out.volume = v.real();
    out.volume_imag = std::abs(v.imag());
    return out;
}

// ---------------------------------------------------------------------------
// Independent quadrature oracle on an explicit gauge family.
//
// Given matrix families (tau, x, y) -> M_x, M_y on [0,Lx] x [0,Ly], compute
//   K = (i/2pi) Int tr(D'M ^ D''M),  D' = d/dtau, D'' = d^2/dtau^2 at tau=0,
// with ninth-point central stencils for the tau-jets and the midpoint rule in
// (x, y).
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
Mat2 stencil_first(F&& f, double h) {
    static const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    Mat2 out = Mat2::zero();
    for (int j = 1; j <= 4; ++j) {
        const Mat2 diff = f(j * h) - f(-j * h);
        out += diff * (c[j - 1] / h);
    }
    return out;
}

template <class F>
Mat2 stencil_second(F&& f, double h) {
    static const double c0 = -205.0 / 72.0;
    static const double c[4] = {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    Mat2 out = f(0.0) * (c0 / (h * h));
    for (int j = 1; j <= 4; ++j) {
        const Mat2 sum = f(j * h) + f(-j * h);
        out += sum * (c[j - 1] / (h * h));
    }
    return out;
}

}  // namespace detail

template <class Fx, class Fy>
cplx gauge_family_curvature(Fx&& Mx, Fy&& My, double Lx, double Ly, int nx, int ny,
                            double fd_step = 0.1) {
    cplx integral{0.0, 0.0};
    const double hx = Lx / nx, hy = Ly / ny;
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const double x = (ix + 0.5) * hx, y = (iy + 0.5) * hy;
            auto fx = [&](double tau) { return Mx(tau, x, y); };
            auto fy = [&](double tau) { return My(tau, x, y); };
            const Mat2 P = detail::stencil_first(fx, fd_step);
            const Mat2 Q = detail::stencil_second(fx, fd_step);
            const Mat2 R = detail::stencil_first(fy, fd_step);
            const Mat2 S = detail::stencil_second(fy, fd_step);
            integral += (P * S - Q * R).trace() * (hx * hy);
        }
    }
    return cplx{0.0, 1.0} / (2.0 * pi) * integral;
}

// The harmonically gauged round cylinder of height h: the families are
// constant in (x, y) and the exact invariant is K = -i h / 16.
inline cplx cylinder_gauge_curvature(double h, int nx = 4, int ny = 4) {
    const Mat2 sigma3 = Mat2::diag(1.0, -1.0);
    auto Mx = [&](double tau, double, double) {
        return sigma3 * (cplx{0.0, -0.5} * std::sin(0.5 * tau));
    };
    auto My = [&](double tau, double, double) {
        return sigma3 * (cplx{0.0, 0.5} * std::cos(0.5 * tau));
    };
    return gauge_family_curvature(Mx, My, h, 2.0 * pi, nx, ny);
}

// ---------------------------------------------------------------------------
// Period lattice of the translational symmetries.
// ---------------------------------------------------------------------------

// d/dtau at tau = 0 of a sampled circle function, entrywise, by exact
// differentiation of the discrete Fourier series (Nyquist bin dropped).
inline Mat2 circle_tau_derivative(const MatrixSamples& M) {
    const int N = static_cast<int>(M.v.size());
    Mat2 out = Mat2::zero();
    cplx* slots[4] = {&out.a, &out.b, &out.c, &out.d};
    const std::pair<int, int> rc[4] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int e = 0; e < 4; ++e) {
        const std::vector<cplx> samples = M.entry(rc[e].first, rc[e].second);
        const auto bins = dft_forward(samples);
        cplx d{0.0, 0.0};
        for (int kbin = 0; kbin < N; ++kbin) {
            if (kbin == N / 2) continue;
            const int m = kbin <= N / 2 ? kbin : kbin - N;
            d += cplx{0.0, static_cast<double>(m)} * bins[static_cast<std::size_t>(kbin)] /
                 static_cast<double>(N);
        }
        *slots[e] = d;
    }
    return out;
}

struct TranslationPeriod {
    Vec3 vector;             // su(2) coordinates (first component vertical)
    double closure_defect;   // distance of the dressed word at lambda=1 from +/-Id
    double su2_deviation;    // non-skew part of the translation matrix
};

// Translation of one dressed monodromy word  Mhat = U Ma Mb U^{-1}:
// T = -2 (d/dtau Mhat)|_0 * Mhat(1)^{-1}, with Mhat(1) = +/-Id.
inline TranslationPeriod word_translation(const MatrixSamples& U, const MatrixSamples& Uinv,
                                          const MatrixSamples& Ma, const MatrixSamples& Mb) {
    const MatrixSamples word = U.multiply(Ma.multiply(Mb)).multiply(Uinv);
    const Mat2 D = circle_tau_derivative(word);
    const Mat2 at_one = word.v.front();
    const double sign = at_one.a.real() >= 0.0 ? 1.0 : -1.0;
    const Mat2 id = Mat2::identity() * cplx{sign, 0.0};
    const double defect = (at_one - id).norm();
    const Mat2 T = D * at_one.inverse() * cplx{-2.0, 0.0};
    const auto yc = su2_coordinates(T);
    return {Vec3{yc[0], yc[1], yc[2]}, defect, su2_defect(T)};
}

struct PeriodLattice {
    int rank = 0;
    // Reduced generators of the horizontal lattice, components (y2, y3);
    // for rank 1 only basis[0] is meaningful.
    std::array<std::array<double, 2>, 2> basis{{{0.0, 0.0}, {0.0, 0.0}}};
    double shortest = 0.0;
    double angle = 0.0;              // angle between reduced generators, rank 2
    double vertical_deviation = 0.0; // largest vertical component of a translation
    double closure_deviation = 0.0;  // largest defect of a word value at lambda=1
    double span_deviation = 0.0;     // integrality defect of the dependent word
    std::array<Vec3, 3> translations{};  // raw word translations, su(2) coords
};

namespace detail {

inline double dot2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[0] + a[1] * b[1];
}
inline double norm2d(const std::array<double, 2>& a) { return std::sqrt(dot2(a, a)); }
inline double det2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[1] - a[1] * b[0];
}

// Lagrange-Gauss reduction of a planar basis.
inline void gauss_reduce(std::array<double, 2>& b1, std::array<double, 2>& b2) {
    for (int guard = 0; guard < 64; ++guard) {
        if (norm2d(b2) < norm2d(b1)) std::swap(b1, b2);
        const double mu = std::round(dot2(b1, b2) / dot2(b1, b1));
        if (mu == 0.0) break;
        b2[0] -= mu * b1[0];
        b2[1] -= mu * b1[1];
    }
    if (dot2(b1, b2) < 0.0) {
        b2[0] = -b2[0];
        b2[1] = -b2[1];
    }
}

// Approximate positive generator of a set of collinear signed lengths.
inline double real_gcd(std::vector<double> lengths, double tol) {
    double g = 0.0;
    for (double v : lengths) {
        double a = std::abs(v);
        if (a <= tol) continue;
        if (g == 0.0) {
            g = a;
            continue;
        }
        double b = g;
        if (a < b) std::swap(a, b);
        for (int guard = 0; guard < 64 && b > tol; ++guard) {
            double r = std::fmod(a, b);
            if (r > b - tol) r = 0.0;  // snapped: a was a near-multiple
            if (r < tol) r = 0.0;
            a = b;
            b = r;
        }
        g = a;
    }
    return g;
}

}  // namespace detail

// Extract the translational period lattice from the solved monodromy data.
//
// Every closed word (epsilon-sum 0 mod k) carries a horizontal translation,
// and the full lattice is the integer span of those translations.  The words
// with half-trace 1 - 2q^2 contribute nothing: q has a double zero at
// lambda = 1 on solved data, so their tau-derivative vanishes there.  The
// generating translations instead come from the two orderings of the word
// around punctures 1 and 3 (they differ by the deck rotation, giving the
// hexagonal/square pair), with the word around punctures 4 and 2 as the
// dependent integer-span cross-check.
inline PeriodLattice period_lattice(const PQFrames& pq, double rank_tolerance = 1e-7) {
    const MonodromyMatrices mm = monodromy_matrices(pq);
    const Unitarizer uz = unitarizer(pq);
    const MatrixSamples U = uz.frames();
    const MatrixSamples Uinv = U.inverse();

    const TranslationPeriod w[3] = {
        word_translation(U, Uinv, MatrixSamples{mm.M3}, MatrixSamples{mm.M1}),
        word_translation(U, Uinv, MatrixSamples{mm.M1}, MatrixSamples{mm.M3}),
        word_translation(U, Uinv, MatrixSamples{mm.M4}, MatrixSamples{mm.M2}),
    };
    for (const TranslationPeriod& tp : w) {
        if (tp.closure_defect > 1e-6)
            throw std::domain_error(
                "period_lattice: closed word is not +/-Id at lambda=1 (defect " +
                std::to_string(tp.closure_defect) + ")");
        if (tp.su2_deviation > 1e-6 * (1.0 + tp.vector.norm()))
            throw UnitarizabilityError(
                "period_lattice: translation is not skew-Hermitian (deviation " +
                std::to_string(tp.su2_deviation) + ")");
    }

    PeriodLattice out;
    std::array<std::array<double, 2>, 3> v;
    double scale = 0.0;
    for (int i = 0; i < 3; ++i) {
        out.translations[static_cast<std::size_t>(i)] = w[i].vector;
        out.vertical_deviation = std::max(out.vertical_deviation, std::abs(w[i].vector.x));
        out.closure_deviation = std::max(out.closure_deviation, w[i].closure_defect);
        v[static_cast<std::size_t>(i)] = {w[i].vector.y, w[i].vector.z};
        scale = std::max(scale, detail::norm2d(v[static_cast<std::size_t>(i)]));
    }
    if (scale == 0.0) throw std::domain_error("period_lattice: all translations vanish");

    // Pick the pair with the largest parallelogram as a candidate basis.
    double best = 0.0;
    int bi = 0, bj = 1;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double d = std::abs(detail::det2(v[static_cast<std::size_t>(i)],
                                                   v[static_cast<std::size_t>(j)]));
            if (d > best) {
                best = d;
                bi = i;
                bj = j;
            }
        }

    if (best <= rank_tolerance * scale * scale) {
        // Rank 1: all translations are near-multiples of one generator.
        out.rank = 1;
        std::array<double, 2> dir{0.0, 0.0};
        for (const auto& vi : v)
            if (detail::norm2d(vi) > detail::norm2d(dir)) dir = vi;
        const double dl = detail::norm2d(dir);
        dir[0] /= dl;
        dir[1] /= dl;
        std::vector<double> lengths;
        double span = 0.0;
        for (const auto& vi : v) {
            lengths.push_back(detail::dot2(vi, dir));
            span = std::max(span, std::abs(detail::det2(vi, dir)));
        }
        const double g = detail::real_gcd(lengths, 1e-6 * scale);
        out.basis[0] = {g * dir[0], g * dir[1]};
        out.shortest = g;
        out.span_deviation = span;
        return out;
    }

    out.rank = 2;
    std::array<double, 2> b1 = v[static_cast<std::size_t>(bi)];
    std::array<double, 2> b2 = v[static_cast<std::size_t>(bj)];
    detail::gauss_reduce(b1, b2);
    out.basis[0] = b1;
    out.basis[1] = b2;
    out.shortest = detail::norm2d(b1);
    out.angle = std::acos(std::clamp(
        detail::dot2(b1, b2) / (detail::norm2d(b1) * detail::norm2d(b2)), -1.0, 1.0));

    // Express the remaining word in the reduced basis; it must be integral.
    const int rest = 3 - bi - bj;
    const auto& vr = v[static_cast<std::size_t>(rest)];
    const double det = detail::det2(b1, b2);
    const double c1 = detail::det2(vr, b2) / det;
    const double c2 = detail::det2(b1, vr) / det;
    out.span_deviation =
        std::max(std::abs(c1 - std::round(c1)), std::abs(c2 - std::round(c2)));
    return out;
}

struct NormalizedInvariants {
    double area = 0.0;
    double volume = 0.0;
    double shortest = 0.0;
};

// Scale-invariant quantities: the surface rescaled so the shortest lattice
// vector has unit length.
inline NormalizedInvariants normalize_invariants(const GlobalInvariants& g,
                                                 const PeriodLattice& lattice) {
    NormalizedInvariants out;
    out.shortest = lattice.shortest;
    const double l = lattice.shortest;
    out.area = g.area / (l * l);
    out.volume = g.volume / (l * l * l);
    return out;
}

}  // namespace cmc
