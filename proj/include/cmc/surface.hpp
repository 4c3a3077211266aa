#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "cmc/invariants.hpp"
#include "cmc/iwasawa.hpp"
#include "cmc/parallel.hpp"
#include "cmc/transport.hpp"

namespace cmc {

// ---------------------------------------------------------------------------
// Immersion of a single point: factor the transported frame and apply the
// trace formula  f = -2 (d/dtau F)|_0 * F(1)^{-1},  an su(2) value read as a
// point of R^3.
// ---------------------------------------------------------------------------

inline Vec3 sym_point(const std::vector<Mat2>& phi_samples, const IwasawaOptions& iopt,
                      double* su2_deviation = nullptr) {
    IwasawaResult iw = iwasawa_factor(phi_samples, iopt);
    MatrixSamples F;
    F.v = std::move(iw.F);
    const Mat2 D = circle_tau_derivative(F);
    const Mat2 f = D * F.v.front().inverse() * cplx{-2.0, 0.0};
    if (su2_deviation) *su2_deviation = su2_defect(f);
    const auto yc = su2_coordinates(f);
    return {yc[0], yc[1], yc[2]};
}

// ---------------------------------------------------------------------------
// Fundamental patch: polar grid on the closed quarter disk with the first-
// quadrant puncture excised by clipping rays at a small exclusion disk.
// ---------------------------------------------------------------------------

struct MeshOptions {
    int rays = 35;                   // angular nodes, both quarter edges included
    int rings = 33;                  // radial cells per ray
    double exclusion_radius = 0.02;  // domain disk removed around the puncture
    double angular_cluster = 1.6;    // exponent clustering rays toward phi
    double radial_grading = 1.35;    // exponent grading rings toward the boundary
    int lambda_samples = 256;
    TransportOptions transport{100, 1e-3, 0.15, true};
    IwasawaOptions iwasawa{};
    double weld_tolerance = 1e-7;
    double group_tolerance = 1e-6;

    void validate() const {
        if (rays < 8 || rings < 4) throw std::invalid_argument("MeshOptions: grid too coarse");
        if (!(exclusion_radius > 0.0 && exclusion_radius < 0.2))
            throw std::invalid_argument("MeshOptions: exclusion_radius out of range");
        if (!is_power_of_two(static_cast<std::size_t>(lambda_samples)) || lambda_samples < 16)
            throw std::invalid_argument("MeshOptions: lambda_samples must be a power of two");
    }
};

struct PatchMesh {
    std::vector<cplx> domain;                    // domain points (corner has the puncture)
    std::vector<Vec3> position;                  // immersed points, su(2) coordinates
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> boundary_real;              // vertices on the segment [0, 1]
    std::vector<int> boundary_imag;              // vertices on the segment [0, i]
    std::vector<int> arc_east;                   // unit-circle vertices, angle < phi
    std::vector<int> arc_north;                  // unit-circle vertices, angle > phi
    std::vector<int> hole_fan;                   // rim of the excised disk, by angle
    int corner_index = -1;                       // completion vertex at the puncture
    double su2_deviation = 0.0;                  // worst trace-formula defect
    double corner_line_gap = 0.0;                // extrapolation vs. mirror-line gap
};

namespace detail {

// Ray radius at which the exclusion disk around e^{i phi} clips the ray.
inline double clipped_radius(double theta, double phi, double eps) {
    const double d = theta - phi;
    const double s = std::sin(d);
    if (std::abs(s) > eps || std::cos(d) <= 0.0) return 1.0;
    return std::cos(d) - std::sqrt(eps * eps - s * s);
}

inline std::vector<double> ray_angles(int rays, double phi, double cluster) {
    const int intervals = rays - 1;
    int left = static_cast<int>(std::lround(intervals * phi / (pi / 2.0)));
    left = std::clamp(left, 3, intervals - 3);
    const int right = intervals - left;
    std::vector<double> theta;
    theta.reserve(static_cast<std::size_t>(rays));
    for (int i = 0; i <= left; ++i) {
        const double s = static_cast<double>(i) / left;
        theta.push_back(phi * (1.0 - std::pow(1.0 - s, cluster)));
    }
    for (int i = 1; i <= right; ++i) {
        const double s = static_cast<double>(i) / right;
        theta.push_back(phi + (pi / 2.0 - phi) * std::pow(s, cluster));
    }
    theta.front() = 0.0;
    theta.back() = pi / 2.0;
    return theta;
}

}  // namespace detail

// Domain grid and triangulation only; the position array is left empty.
inline PatchMesh build_patch_domain(const SurfaceParams& params, const MeshOptions& opt) {
    opt.validate();
    const double phi = params.phi, eps = opt.exclusion_radius;
    const std::vector<double> theta = detail::ray_angles(opt.rays, phi, opt.angular_cluster);
    const int R = opt.rays, G = opt.rings;

    PatchMesh mesh;
    mesh.domain.reserve(static_cast<std::size_t>(1 + R * G));
    mesh.domain.push_back(cplx{0.0, 0.0});
    auto vid = [&](int ray, int ring) { return 1 + ray * G + (ring - 1); };

    std::vector<double> rmax(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) {
        rmax[static_cast<std::size_t>(i)] = detail::clipped_radius(theta[static_cast<std::size_t>(i)], phi, eps);
        for (int j = 1; j <= G; ++j) {
            const double s = static_cast<double>(j) / G;
            const double u = 1.0 - std::pow(1.0 - s, opt.radial_grading);
            const double r = rmax[static_cast<std::size_t>(i)] * (j == G ? 1.0 : u);
            mesh.domain.push_back(std::polar(r, theta[static_cast<std::size_t>(i)]));
        }
    }

    for (int i = 0; i + 1 < R; ++i) {
        mesh.triangles.push_back({0, vid(i, 1), vid(i + 1, 1)});
        for (int j = 1; j < G; ++j) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    }

    mesh.boundary_real.push_back(0);
    for (int j = 1; j <= G; ++j) mesh.boundary_real.push_back(vid(0, j));
    mesh.boundary_imag.push_back(0);
    for (int j = 1; j <= G; ++j) mesh.boundary_imag.push_back(vid(R - 1, j));

    int first_clipped = -1, last_clipped = -1;
    for (int i = 0; i < R; ++i) {
        if (rmax[static_cast<std::size_t>(i)] < 1.0) {
            if (first_clipped < 0) first_clipped = i;
            last_clipped = i;
        }
    }
    if (first_clipped <= 0 || last_clipped >= R - 1)
        throw std::invalid_argument("build_patch_domain: exclusion disk reaches a patch corner");
    for (int i = 0; i < first_clipped; ++i) mesh.arc_east.push_back(vid(i, G));
    for (int i = last_clipped + 1; i < R; ++i) mesh.arc_north.push_back(vid(i, G));
    for (int i = first_clipped - 1; i <= last_clipped + 1; ++i) mesh.hole_fan.push_back(vid(i, G));
    return mesh;
}

// Transport the frame along every ray from the center and apply the trace
// formula at each vertex.  The initial frame at z = 0 is the unitarizing
// diagonal loop, so the mapped patch closes up under the mirror symmetries.
inline void map_patch(PatchMesh& mesh, const SurfaceParams& params, const PotentialCoeffs& coeffs,
                      const MatrixSamples& initial_frame, const MeshOptions& opt) {
    const int N = opt.lambda_samples;
    if (initial_frame.size() != N)
        throw std::invalid_argument("map_patch: initial frame grid mismatch");
    const PotentialEvaluator eta(params, coeffs, N);
    const int R = opt.rays, G = opt.rings;
    auto vid = [&](int ray, int ring) { return 1 + ray * G + (ring - 1); };

    std::vector<MatrixSamples> frames(mesh.domain.size());
    frames[0] = initial_frame;
    TransportOptions topt = opt.transport;
    topt.parallel = false;  // parallelism lives at the ray level here
    parallel_for(R, [&](int i) {
        MatrixSamples phi = initial_frame;
        cplx z_prev{0.0, 0.0};
        for (int j = 1; j <= G; ++j) {
            const cplx z = mesh.domain[static_cast<std::size_t>(vid(i, j))];
            transport_segment(eta, z_prev, z, phi, topt);
            frames[static_cast<std::size_t>(vid(i, j))] = phi;
            z_prev = z;
        }
    });

    mesh.position.assign(mesh.domain.size(), Vec3{});
    std::vector<double> deviations(mesh.domain.size(), 0.0);
    parallel_for(static_cast<int>(mesh.domain.size()), [&](int v) {
        double dev = 0.0;
        mesh.position[static_cast<std::size_t>(v)] =
            sym_point(frames[static_cast<std::size_t>(v)].v, opt.iwasawa, &dev);
        deviations[static_cast<std::size_t>(v)] = dev;
    });
    mesh.su2_deviation = *std::max_element(deviations.begin(), deviations.end());

    const Vec3 center = mesh.position[0];
    for (Vec3& p : mesh.position) p = p - center;
}

// ---------------------------------------------------------------------------
// Mirror planes carrying the patch boundary:
//   segment [0,1]  ->  horizontal plane      y1 = c0
//   segment [0,i]  ->  vertical plane        y2 = c2
//   north arc      ->  vertical plane        y3 = c3
//   east arc       ->  tilted vertical plane sin(2 pi t) y2 - cos(2 pi t) y3 = offset
// ---------------------------------------------------------------------------

struct MirrorPlanes {
    double c0 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double tilt = 0.0;    // angle 2 pi t of the fourth plane
    double offset = 0.0;
    std::array<double, 4> fit_residual{};  // worst deviation per plane, same order
};

inline MirrorPlanes fit_mirror_planes(const PatchMesh& mesh, const SurfaceParams& params) {
    MirrorPlanes out;
    out.tilt = 2.0 * pi * params.t();
    auto fit = [&](const std::vector<int>& idx, auto&& value, double& constant) {
        double mean = 0.0;
        for (int v : idx) mean += value(mesh.position[static_cast<std::size_t>(v)]);
        mean /= static_cast<double>(idx.size());
        double worst = 0.0;
        for (int v : idx)
            worst = std::max(worst,
                             std::abs(value(mesh.position[static_cast<std::size_t>(v)]) - mean));
        constant = mean;
        return worst;
    };
    out.fit_residual[0] = fit(mesh.boundary_real, [](const Vec3& p) { return p.x; }, out.c0);
    out.fit_residual[1] = fit(mesh.boundary_imag, [](const Vec3& p) { return p.y; }, out.c2);
    out.fit_residual[2] = fit(mesh.arc_north, [](const Vec3& p) { return p.z; }, out.c3);
    const double sa = std::sin(out.tilt), ca = std::cos(out.tilt);
    out.fit_residual[3] = fit(
        mesh.arc_east, [&](const Vec3& p) { return sa * p.y - ca * p.z; }, out.offset);
    return out;
}

// Close the excised corner: the rim vertices converge to a point on the
// intersection line of the two vertical arc planes.  Extrapolate the rim in
// the resolved scale s = d^{1/k} of the domain distance d to the puncture,
// then snap the horizontal part of the limit onto that line.
inline void complete_corner(PatchMesh& mesh, const SurfaceParams& params,
                            const MirrorPlanes& planes) {
    const cplx p1 = params.punctures()[0];
    const std::size_t n = mesh.hole_fan.size();
    if (n < 3) throw std::invalid_argument("complete_corner: rim too short");

    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(mesh.domain[static_cast<std::size_t>(mesh.hole_fan[i])] - p1);
        s[i] = std::pow(d, 1.0 / static_cast<double>(params.k));
    }
    // Per-coordinate linear fit  f ~ v + w s,  evaluated at s = 0.
    double sum_s = 0.0, sum_ss = 0.0;
    for (double si : s) {
        sum_s += si;
        sum_ss += si * si;
    }
    const double m = static_cast<double>(n);
    const double det = m * sum_ss - sum_s * sum_s;
    Vec3 v0{};
    auto extrapolate = [&](auto&& coord) {
        double sum_f = 0.0, sum_sf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = coord(mesh.position[static_cast<std::size_t>(mesh.hole_fan[i])]);
            sum_f += f;
            sum_sf += s[i] * f;
        }
        return (sum_ss * sum_f - sum_s * sum_sf) / det;
    };
    v0.x = extrapolate([](const Vec3& p) { return p.x; });
    v0.y = extrapolate([](const Vec3& p) { return p.y; });
    v0.z = extrapolate([](const Vec3& p) { return p.z; });

    // Intersection line of {y3 = c3} and {sin(tilt) y2 - cos(tilt) y3 = offset}.
    const double sa = std::sin(planes.tilt), ca = std::cos(planes.tilt);
    const double y3_star = planes.c3;
    const double y2_star = (planes.offset + ca * y3_star) / sa;
    mesh.corner_line_gap = std::hypot(v0.y - y2_star, v0.z - y3_star);

    const Vec3 corner{v0.x, y2_star, y3_star};
    mesh.corner_index = static_cast<int>(mesh.position.size());
    mesh.position.push_back(corner);
    mesh.domain.push_back(p1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        mesh.triangles.push_back(
            {mesh.hole_fan[i + 1], mesh.hole_fan[i], mesh.corner_index});
}

// ---------------------------------------------------------------------------
// Extension by the mirror group: reflections across the three vertical
// planes, viewed as lines in the horizontal (y2, y3) plane, together with the
// horizontal mirror flip, enumerated modulo the period lattice.
// ---------------------------------------------------------------------------

struct PlaneIsometry {
    std::array<double, 4> lin{1.0, 0.0, 0.0, 1.0};  // row-major 2x2 orthogonal part
    std::array<double, 2> tr{0.0, 0.0};
    bool flip = false;

    PlaneIsometry compose(const PlaneIsometry& rhs) const {
        PlaneIsometry out;
        out.lin = {lin[0] * rhs.lin[0] + lin[1] * rhs.lin[2],
                   lin[0] * rhs.lin[1] + lin[1] * rhs.lin[3],
                   lin[2] * rhs.lin[0] + lin[3] * rhs.lin[2],
                   lin[2] * rhs.lin[1] + lin[3] * rhs.lin[3]};
        out.tr = {lin[0] * rhs.tr[0] + lin[1] * rhs.tr[1] + tr[0],
                  lin[2] * rhs.tr[0] + lin[3] * rhs.tr[1] + tr[1]};
        out.flip = flip != rhs.flip;
        return out;
    }

    Vec3 apply(const Vec3& p, double c0) const {
        const double h2 = lin[0] * p.y + lin[1] * p.z + tr[0];
        const double h3 = lin[2] * p.y + lin[3] * p.z + tr[1];
        const double h1 = flip ? 2.0 * c0 - p.x : p.x;
        return {h1, h2, h3};
    }

    double det3() const { return (lin[0] * lin[3] - lin[1] * lin[2]) * (flip ? -1.0 : 1.0); }
};

namespace detail {

inline PlaneIsometry line_reflection(double nx, double ny, double c) {
    PlaneIsometry r;
    r.lin = {1.0 - 2.0 * nx * nx, -2.0 * nx * ny, -2.0 * nx * ny, 1.0 - 2.0 * ny * ny};
    r.tr = {2.0 * c * nx, 2.0 * c * ny};
    return r;
}

inline std::array<double, 2> lattice_reduce(std::array<double, 2> v, const PeriodLattice& lat) {
    if (lat.rank == 2) {
        const auto& b1 = lat.basis[0];
        const auto& b2 = lat.basis[1];
        const double det = b1[0] * b2[1] - b1[1] * b2[0];
        const double c1 = std::round((v[0] * b2[1] - v[1] * b2[0]) / det);
        const double c2 = std::round((b1[0] * v[1] - b1[1] * v[0]) / det);
        v[0] -= c1 * b1[0] + c2 * b2[0];
        v[1] -= c1 * b1[1] + c2 * b2[1];
    } else if (lat.rank == 1) {
        const auto& g = lat.basis[0];
        const double len2 = g[0] * g[0] + g[1] * g[1];
        const double c = std::round((v[0] * g[0] + v[1] * g[1]) / len2);
        v[0] -= c * g[0];
        v[1] -= c * g[1];
    }
    return v;
}

inline bool same_isometry_mod_lattice(const PlaneIsometry& a, const PlaneIsometry& b,
                                      const PeriodLattice& lat, double tol) {
    if (a.flip != b.flip) return false;
    for (int i = 0; i < 4; ++i)
        if (std::abs(a.lin[static_cast<std::size_t>(i)] - b.lin[static_cast<std::size_t>(i)]) > tol)
            return false;
    const auto d = lattice_reduce({a.tr[0] - b.tr[0], a.tr[1] - b.tr[1]}, lat);
    return std::hypot(d[0], d[1]) <= tol;
}

}  // namespace detail

inline std::array<PlaneIsometry, 4> mirror_generators(const MirrorPlanes& planes) {
    const double sa = std::sin(planes.tilt), ca = std::cos(planes.tilt);
    PlaneIsometry flip;
    flip.flip = true;
    return {detail::line_reflection(1.0, 0.0, planes.c2),
            detail::line_reflection(0.0, 1.0, planes.c3),
            detail::line_reflection(sa, -ca, planes.offset), flip};
}

// All copies of the fundamental patch inside one translational cell.
inline std::vector<PlaneIsometry> enumerate_copies(const MirrorPlanes& planes,
                                                   const PeriodLattice& lattice, double tol,
                                                   int max_elements = 512) {
    const auto gen = mirror_generators(planes);
    std::vector<PlaneIsometry> found{PlaneIsometry{}};
    std::deque<PlaneIsometry> queue{PlaneIsometry{}};
    while (!queue.empty()) {
        const PlaneIsometry g = queue.front();
        queue.pop_front();
        for (const PlaneIsometry& r : gen) {
            const PlaneIsometry h = r.compose(g);
            bool known = false;
            for (const PlaneIsometry& f : found)
                if (detail::same_isometry_mod_lattice(h, f, lattice, tol)) {
                    known = true;
                    break;
                }
            if (!known) {
                if (static_cast<int>(found.size()) >= max_elements)
                    throw std::runtime_error("enumerate_copies: mirror group does not close");
                found.push_back(h);
                queue.push_back(h);
            }
        }
    }
    return found;
}

// Pure translations generated by the mirrors (bounded word length), checked
// against the period lattice; returns the worst integrality deviation.
inline double reflection_translation_deviation(const MirrorPlanes& planes,
                                               const PeriodLattice& lattice, int depth = 6) {
    const auto gen = mirror_generators(planes);
    std::vector<PlaneIsometry> layer{PlaneIsometry{}}, all{PlaneIsometry{}};
    auto same_exact = [](const PlaneIsometry& a, const PlaneIsometry& b) {
        if (a.flip != b.flip) return false;
        for (int i = 0; i < 4; ++i)
            if (std::abs(a.lin[static_cast<std::size_t>(i)] - b.lin[static_cast<std::size_t>(i)]) > 1e-9)
                return false;
        return std::hypot(a.tr[0] - b.tr[0], a.tr[1] - b.tr[1]) <= 1e-9;
    };
    for (int d = 0; d < depth; ++d) {
        std::vector<PlaneIsometry> next;
        for (const PlaneIsometry& g : layer)
            for (const PlaneIsometry& r : gen) {
                const PlaneIsometry h = r.compose(g);
                bool known = false;
                for (const PlaneIsometry& f : all)
                    if (same_exact(h, f)) {
                        known = true;
                        break;
                    }
                if (!known) {
                    all.push_back(h);
                    next.push_back(h);
                }
            }
        layer = std::move(next);
    }
    double worst = 0.0;
    for (const PlaneIsometry& g : all) {
        const bool is_translation = !g.flip && std::abs(g.lin[0] - 1.0) < 1e-9 &&
                                    std::abs(g.lin[1]) < 1e-9 && std::abs(g.lin[2]) < 1e-9 &&
                                    std::abs(g.lin[3] - 1.0) < 1e-9 &&
                                    std::hypot(g.tr[0], g.tr[1]) > 1e-9;
        if (!is_translation) continue;
        const auto rem = detail::lattice_reduce(g.tr, lattice);
        worst = std::max(worst, std::hypot(rem[0], rem[1]));
    }
    return worst;
}

struct SurfaceMesh {
    std::vector<Vec3> position;
    std::vector<std::array<int, 3>> triangles;
};

// Apply every copy isometry to the patch and weld coincident vertices.
inline SurfaceMesh extend_patch(const PatchMesh& patch, const std::vector<PlaneIsometry>& copies,
                                double c0, double weld_tolerance) {
    SurfaceMesh out;
    const double g = weld_tolerance;
    std::map<std::array<long long, 3>, int> grid;
    auto key_of = [&](const Vec3& p) {
        return std::array<long long, 3>{static_cast<long long>(std::floor(p.x / g)),
                                        static_cast<long long>(std::floor(p.y / g)),
                                        static_cast<long long>(std::floor(p.z / g))};
    };
    auto weld = [&](const Vec3& p) {
        const auto base = key_of(p);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dz = -1; dz <= 1; ++dz) {
                    const auto it = grid.find({base[0] + dx, base[1] + dy, base[2] + dz});
                    if (it == grid.end()) continue;
                    const Vec3& q = out.position[static_cast<std::size_t>(it->second)];
                    if ((p - q).norm() <= g) return it->second;
                }
        const int idx = static_cast<int>(out.position.size());
        out.position.push_back(p);
        grid.emplace(base, idx);
        return idx;
    };

    for (const PlaneIsometry& iso : copies) {
        std::vector<int> remap(patch.position.size());
        for (std::size_t v = 0; v < patch.position.size(); ++v)
            remap[v] = weld(iso.apply(patch.position[v], c0));
        const bool reversed = iso.det3() < 0.0;
        for (const auto& t : patch.triangles) {
            std::array<int, 3> mapped{remap[static_cast<std::size_t>(t[0])],
                                      remap[static_cast<std::size_t>(t[1])],
                                      remap[static_cast<std::size_t>(t[2])]};
            if (reversed) std::swap(mapped[1], mapped[2]);
            if (mapped[0] == mapped[1] || mapped[1] == mapped[2] || mapped[0] == mapped[2])
                continue;
            out.triangles.push_back(mapped);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete geometry of the extended mesh.
// ---------------------------------------------------------------------------

struct MeshGeometry {
    double area = 0.0;
    double volume = 0.0;
    double orientation_sign = 1.0;
};

// Triangle-sum area, and enclosed volume per translational cell as the flux
// of the height field through the closed quotient surface:
//   V = | sum over triangles of (mean height above c0) * signed (y2,y3) area |.
inline MeshGeometry mesh_geometry(const SurfaceMesh& mesh, double c0) {
    MeshGeometry out;
    double vol = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.position[static_cast<std::size_t>(t[0])];
        const Vec3& b = mesh.position[static_cast<std::size_t>(t[1])];
        const Vec3& c = mesh.position[static_cast<std::size_t>(t[2])];
        out.area += 0.5 * (b - a).cross(c - a).norm();
        const double proj =
            0.5 * ((b.y - a.y) * (c.z - a.z) - (b.z - a.z) * (c.y - a.y));
        const double height = (a.x + b.x + c.x) / 3.0 - c0;
        vol += height * proj;
    }
    out.orientation_sign = vol >= 0.0 ? 1.0 : -1.0;
    out.volume = std::abs(vol);
    return out;
}

// ---------------------------------------------------------------------------
// Full pipeline and export.
// ---------------------------------------------------------------------------

struct MeshResult {
    PatchMesh patch;
    MirrorPlanes planes;
    PeriodLattice lattice;
    SurfaceMesh extended;
    MeshGeometry geometry;              // raw extended-mesh area and volume
    double area_normalized = 0.0;       // divided by shortest^2
    double volume_normalized = 0.0;     // divided by shortest^3
    double lattice_deviation = 0.0;     // mirror translations vs. period lattice
    int copies = 0;
};

inline MeshResult mesh_surface(const SurfaceParams& params, const PotentialCoeffs& coeffs,
                               const MeshOptions& opt = {}) {
    params.validate();
    coeffs.validate(params);
    opt.validate();

    const PQFrames pq = compute_PQ(params, coeffs, opt.lambda_samples, opt.transport);
    const Unitarizer uz = unitarizer(pq);

    MeshResult out;
    out.lattice = period_lattice(pq);
    out.patch = build_patch_domain(params, opt);
    map_patch(out.patch, params, coeffs, uz.frames(), opt);
    out.planes = fit_mirror_planes(out.patch, params);
    complete_corner(out.patch, params, out.planes);

    const auto copies = enumerate_copies(out.planes, out.lattice, opt.group_tolerance);
    out.copies = static_cast<int>(copies.size());
    out.lattice_deviation = reflection_translation_deviation(out.planes, out.lattice);
    out.extended = extend_patch(out.patch, copies, out.planes.c0, opt.weld_tolerance);
    out.geometry = mesh_geometry(out.extended, out.planes.c0);
    const double l = out.lattice.shortest;
    out.area_normalized = out.geometry.area / (l * l);
    out.volume_normalized = out.geometry.volume / (l * l * l);
    return out;
}

// Wavefront export in world coordinates: the vertical su(2) direction is the
// third axis, so the written triple is (y2, y3, y1).
inline void write_obj(std::ostream& os, const SurfaceMesh& mesh) {
    os << "# vertices " << mesh.position.size() << " triangles " << mesh.triangles.size()
       << "\n";
    os.precision(12);
    for (const Vec3& p : mesh.position) os << "v " << p.y << " " << p.z << " " << p.x << "\n";
    for (const auto& t : mesh.triangles)
        os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

}  // namespace cmc
