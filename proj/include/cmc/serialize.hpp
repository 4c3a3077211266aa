#pragma once

#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmc/invariants.hpp"
#include "cmc/solver.hpp"
#include "cmc/version.hpp"

namespace cmc {

using json = nlohmann::ordered_json;

// "artifact <version> config <fnv-1a of the canonical config string>"
inline std::string provenance_string(const std::string& config) {
    std::ostringstream os;
    os << "artifact " << library_version << " config 0x" << std::hex << std::setw(16)
       << std::setfill('0') << fnv1a_hash(config);
    return os.str();
}

inline json loop_to_json(const RealLoop& x) {
    json arr = json::array();
    for (int m = x.lo(); m <= x.hi(); ++m) arr.push_back(x.coeff(m));
    return arr;
}

// Coefficients are listed from degree -1 upward.
inline RealLoop loop_from_json(const json& arr) {
    std::vector<double> coeffs;
    for (const auto& v : arr) coeffs.push_back(v.get<double>());
    if (coeffs.empty()) throw std::invalid_argument("loop_from_json: empty coefficient list");
    return RealLoop(-1, std::move(coeffs));
}

struct SolutionInvariants {
    GlobalInvariants global;
    PeriodLattice lattice;
    NormalizedInvariants normalized;
};

inline json solution_to_json(const SurfaceParams& params, const SolveResult& solved,
                             const SolutionInvariants* inv, const std::string& config) {
    json j;
    j["provenance"] = {{"library", library_version}, {"stamp", provenance_string(config)}};
    j["k"] = params.k;
    j["t"] = params.t();
    j["phi"] = params.phi;
    j["order_n"] = solved.coeffs.order_n;
    j["r"] = solved.coeffs.r;
    j["x1"] = loop_to_json(solved.coeffs.x1);
    j["x2"] = loop_to_json(solved.coeffs.x2);
    j["x3"] = loop_to_json(solved.coeffs.x3);
    j["residual_norm"] = solved.residual_norm;
    j["iterations"] = solved.iterations;
    j["converged"] = solved.converged;
    j["delta_at_i"] = solved.delta_at_i;
    if (inv) {
        json g;
        g["area"] = inv->global.area;
        g["volume"] = inv->global.volume;
        g["K_imag"] = inv->global.curvature_imag;
        g["curvature_route_gap"] = inv->global.curvature_route_gap;
        // Lattice vectors in world coordinates (vertical axis third, zero by
        // construction for the reduced horizontal generators).
        json basis = json::array();
        for (int i = 0; i < inv->lattice.rank && i < 2; ++i) {
            const auto& b = inv->lattice.basis[static_cast<std::size_t>(i)];
            basis.push_back({b[0], b[1], 0.0});
        }
        g["lattice"] = basis;
        g["lattice_rank"] = inv->lattice.rank;
        g["lattice_angle"] = inv->lattice.angle;
        g["shortest"] = inv->normalized.shortest;
        g["area_normalized"] = inv->normalized.area;
        g["volume_normalized"] = inv->normalized.volume;
        j["invariants"] = g;
    }
    return j;
}

struct SolutionFile {
    SurfaceParams params;
    PotentialCoeffs coeffs;
    double residual_norm = 0.0;
    bool converged = false;
    json raw;
};

inline SolutionFile solution_from_json(const json& j) {
    SolutionFile out;
    out.params.k = j.at("k").get<int>();
    out.params.phi = j.at("phi").get<double>();
    out.params.validate();
    out.coeffs.order_n = j.at("order_n").get<int>();
    out.coeffs.r = j.at("r").get<double>();
    out.coeffs.x1 = loop_from_json(j.at("x1"));
    out.coeffs.x2 = loop_from_json(j.at("x2"));
    out.coeffs.x3 = loop_from_json(j.at("x3"));
    out.coeffs.validate(out.params);
    out.residual_norm = j.value("residual_norm", 0.0);
    out.converged = j.value("converged", false);
    out.raw = j;
    return out;
}

}  // namespace cmc
