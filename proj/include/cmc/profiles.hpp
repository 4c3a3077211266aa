#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmc/invariants.hpp"
#include "cmc/solver.hpp"

namespace cmc {

// ---------------------------------------------------------------------------
// Competing doubly periodic configurations at fixed normalized volume, on the
// lattice rescaled to shortest vector 1 with cell area `cell_det`:
//   - a round sphere, admitted while its diameter fits the shortest period;
//   - a round cylinder along a shortest vector, admitted while its diameter
//     fits the transverse spacing (= cell area);
//   - a pair of horizontal planes, always admitted, enclosing any volume.
// ---------------------------------------------------------------------------

struct Competitor {
    double area = 0.0;
    std::string which;
};

inline Competitor competitor_area(double volume_normalized, double cell_det) {
    if (!(volume_normalized > 0.0) || !(cell_det > 0.0))
        throw std::invalid_argument("competitor_area: need positive volume and cell area");
    Competitor best{2.0 * cell_det, "planes"};
    const double sphere_diameter = 2.0 * std::cbrt(3.0 * volume_normalized / (4.0 * pi));
    if (sphere_diameter <= 1.0) {
        const double a = std::cbrt(36.0 * pi * volume_normalized * volume_normalized);
        if (a < best.area) best = {a, "sphere"};
    }
    const double cylinder_diameter = 2.0 * std::sqrt(volume_normalized / pi);
    if (cylinder_diameter <= cell_det) {
        const double a = 2.0 * std::sqrt(pi * volume_normalized);
        if (a < best.area) best = {a, "cylinder"};
    }
    return best;
}

struct ProfilePoint {
    double phi = 0.0;
    double volume_normalized = 0.0;
    double area_normalized = 0.0;
    double area_competitor = 0.0;
    double margin = 0.0;  // competitor minus surface; positive = improvement
    bool converged = false;
    std::string competitor;
    SolveResult solve;
    GlobalInvariants invariants;
    PeriodLattice lattice;
};

// Solves along a one-parameter family with warm starts, falling back to
// stepwise continuation when a direct warm-started solve fails.
class FamilyTracker {
public:
    FamilyTracker(int k, SolverOptions options) : k_(k), opt_(std::move(options)) {}

    ProfilePoint at(double phi) {
        SurfaceParams params{k_, phi};
        params.validate();
        SolveResult solved = solve_with_seed(params);
        if (solved.converged) {
            last_ = solved;
            last_phi_ = phi;
        }
        return finish(params, solved);
    }

    const SolverOptions& options() const { return opt_; }

private:
    SolveResult solve_with_seed(const SurfaceParams& params) {
        if (last_) {
            try {
                SolveResult direct = gauss_newton(params, last_->coeffs, opt_);
                if (direct.converged) return direct;
            } catch (const std::exception&) {
            }
            SurfaceParams from{k_, last_phi_};
            return continue_in_phi(from, *last_, params.phi, opt_);
        }
        try {
            SolveResult direct = solve_from_central(params, opt_);
            if (direct.converged) return direct;
        } catch (const std::exception&) {
        }
        // Central seeds are exact in the small-weight limit and reliable at
        // moderate angles; walk from the midpoint when the direct start fails.
        SurfaceParams mid{k_, pi / 4.0};
        SolveResult seed = solve_from_central(mid, opt_);
        return continue_in_phi(mid, seed, params.phi, opt_);
    }

    ProfilePoint finish(const SurfaceParams& params, const SolveResult& solved) const {
        ProfilePoint out;
        out.phi = params.phi;
        out.converged = solved.converged;
        out.solve = solved;
        try {
            out.invariants = compute_invariants(params, solved.coeffs);
            const PQFrames pq =
                compute_PQ(params, solved.coeffs, opt_.sample_count, opt_.transport);
            out.lattice = period_lattice(pq);
        } catch (const std::exception&) {
            // Post-processing can fail on an unconverged iterate (for example
            // the unitarizer); keep the row with zeroed invariants.
            out.converged = false;
            return out;
        }
        const NormalizedInvariants norm = normalize_invariants(out.invariants, out.lattice);
        out.volume_normalized = norm.volume;
        out.area_normalized = norm.area;
        double cell_det = 0.0;
        if (out.lattice.rank == 2) {
            const auto& b1 = out.lattice.basis[0];
            const auto& b2 = out.lattice.basis[1];
            cell_det = std::abs(b1[0] * b2[1] - b1[1] * b2[0]) /
                       (out.lattice.shortest * out.lattice.shortest);
        }
        if (cell_det > 0.0) {
            const Competitor comp = competitor_area(out.volume_normalized, cell_det);
            out.area_competitor = comp.area;
            out.competitor = comp.which;
            out.margin = comp.area - out.area_normalized;
        }
        return out;
    }

    int k_;
    SolverOptions opt_;
    std::optional<SolveResult> last_;
    double last_phi_ = 0.0;
};

inline std::vector<ProfilePoint> sweep_profile(int k, double phi_lo, double phi_hi, int count,
                                               const SolverOptions& opt) {
    if (count < 2 || !(phi_hi > phi_lo))
        throw std::invalid_argument("sweep_profile: bad sweep range");
    FamilyTracker tracker(k, opt);
    std::vector<ProfilePoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double phi = phi_lo + (phi_hi - phi_lo) * i / (count - 1);
        try {
            out.push_back(tracker.at(phi));
        } catch (const std::exception&) {
            // Mark the row and keep sweeping from the last good seed.
            ProfilePoint failed;
            failed.phi = phi;
            out.push_back(std::move(failed));
        }
    }
    return out;
}

// CSV rows at full double fidelity; one comment line of provenance, then the
// single header line.
inline void write_profile_csv(std::ostream& os, const std::vector<ProfilePoint>& points,
                              const std::string& provenance) {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "phi,V_norm,A_norm,A_competitor,margin,converged\n";
    os.precision(17);
    for (const ProfilePoint& p : points) {
        os << p.phi << "," << p.volume_normalized << "," << p.area_normalized << ","
           << p.area_competitor << "," << p.margin << "," << (p.converged ? 1 : 0) << "\n";
    }
}

struct ImprovementInterval {
    double phi_lo = 0.0, phi_hi = 0.0;
    ProfilePoint at_lo, at_hi;
    ProfilePoint best;  // largest margin seen inside the interval
};

// Locate the parameter interval on which the surface beats every admitted
// competitor (margin > 0), by coarse scan and bisection of the endpoints.
inline ImprovementInterval improvement_interval(int k, double scan_lo, double scan_hi,
                                                int scan_steps, double phi_tolerance,
                                                const SolverOptions& opt) {
    FamilyTracker tracker(k, opt);
    std::vector<ProfilePoint> scan;
    for (int i = 0; i <= scan_steps; ++i) {
        const double phi = scan_lo + (scan_hi - scan_lo) * i / scan_steps;
        scan.push_back(tracker.at(phi));
    }
    int first = -1, last = -1;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        if (scan[i].margin > 0.0) {
            if (first < 0) first = static_cast<int>(i);
            last = static_cast<int>(i);
        }
    }
    if (first <= 0 || last < 0 || last + 1 >= static_cast<int>(scan.size()))
        throw std::runtime_error(
            "improvement_interval: no sign change bracketed inside the scan range");

    auto bisect = [&](ProfilePoint lo, ProfilePoint hi) {
        // Invariant: margin(lo) and margin(hi) have opposite signs.
        while (std::abs(hi.phi - lo.phi) > phi_tolerance) {
            ProfilePoint mid = tracker.at(0.5 * (lo.phi + hi.phi));
            if ((mid.margin > 0.0) == (lo.margin > 0.0))
                lo = mid;
            else
                hi = mid;
        }
        return (lo.margin > 0.0) ? lo : hi;  // prefer the inside sample
    };

    ImprovementInterval out;
    out.at_lo = bisect(scan[static_cast<std::size_t>(first - 1)],
                       scan[static_cast<std::size_t>(first)]);
    out.at_hi = bisect(scan[static_cast<std::size_t>(last + 1)],
                       scan[static_cast<std::size_t>(last)]);
    out.phi_lo = out.at_lo.phi;
    out.phi_hi = out.at_hi.phi;
    out.best = scan[static_cast<std::size_t>(first)];
    for (int i = first; i <= last; ++i)
        if (scan[static_cast<std::size_t>(i)].margin > out.best.margin)
            out.best = scan[static_cast<std::size_t>(i)];
    return out;
}

// Solve for the angle at which the normalized volume hits a target value
// (the normalized volume is monotone on the bracketing range).
inline ProfilePoint find_phi_for_volume(int k, double volume_target, double phi_lo,
                                        double phi_hi, double volume_tolerance,
                                        const SolverOptions& opt) {
    FamilyTracker tracker(k, opt);
    ProfilePoint lo = tracker.at(phi_lo);
    ProfilePoint hi = tracker.at(phi_hi);
    if ((lo.volume_normalized - volume_target) * (hi.volume_normalized - volume_target) > 0.0)
        throw std::runtime_error("find_phi_for_volume: target volume not bracketed");
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(lo.volume_normalized - volume_target) <= volume_tolerance) return lo;
        if (std::abs(hi.volume_normalized - volume_target) <= volume_tolerance) return hi;
        // Secant step, safeguarded by the bracket.
        double phi = hi.phi - (hi.volume_normalized - volume_target) * (hi.phi - lo.phi) /
                                  (hi.volume_normalized - lo.volume_normalized);
        const double a = std::min(lo.phi, hi.phi), b = std::max(lo.phi, hi.phi);
        if (!(phi > a && phi < b)) phi = 0.5 * (lo.phi + hi.phi);
        ProfilePoint mid = tracker.at(phi);
        if ((mid.volume_normalized - volume_target) *
                (lo.volume_normalized - volume_target) >
            0.0)
            lo = mid;
        else
            hi = mid;
    }
    throw std::runtime_error("find_phi_for_volume: did not converge");
}

}  // namespace cmc
