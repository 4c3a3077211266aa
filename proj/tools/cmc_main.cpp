// Command-line interface: solve family members, sweep isoperimetric
// profiles, mesh solved surfaces, and validate the numerical pipeline.
//
// Exit codes (stable contract):
//   0  success
//   1  usage, configuration, or I/O error (and unexpected internal errors)
//   2  solver divergence (includes transport failures while solving)
//   3  unitarizability / unitary-factorization failure
//   4  geometry inconsistency (mesh, mirror group, lattice closure)

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmc/cmc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitUnitarizability = 3;
constexpr int kExitGeometry = 4;

void print_error(const std::string& type, const std::string& message,
                 const std::vector<double>* residual_history = nullptr) {
    cmc::json err;
    err["error"] = {{"type", type}, {"message", message}};
    if (residual_history) err["error"]["residual_history"] = *residual_history;
    std::cerr << err.dump(2) << std::endl;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file: " + path);
    return file;
}

// Solver fidelity knobs shared by the solving subcommands.
struct FidelityCli {
    int k = 3;
    double phi = cmc::pi / 4.0;
    int order = 20;
    int rk_steps = 500;
    int samples = 256;
    double tol = 1e-12;
    int max_iterations = 30;
    double puncture_eps = 1e-3;

    void add_fidelity(CLI::App* cmd, bool with_phi) {
        cmd->add_option("--k", k, "Symmetry order (>= 2)")->required();
        if (with_phi) cmd->add_option("--phi", phi, "Puncture angle in (0, pi/2)");
        cmd->add_option("--order", order, "Laurent truncation order of the unknowns");
        cmd->add_option("--rk-steps", rk_steps, "Transport subdivisions per unit length");
        cmd->add_option("--samples", samples, "Unit-circle sample count (power of two)");
        cmd->add_option("--tol", tol, "Solver residual tolerance (infinity norm)");
        cmd->add_option("--max-iterations", max_iterations, "Solver iteration cap");
        cmd->add_option("--puncture-eps", puncture_eps, "Transport guard distance at punctures");
    }

    cmc::SolverOptions solver_options() const {
        cmc::SolverOptions opt;
        opt.order_n = order;
        opt.sample_count = samples;
        opt.transport.steps_per_unit = rk_steps;
        opt.transport.puncture_guard = puncture_eps;
        opt.tolerance = tol;
        opt.max_iterations = max_iterations;
        opt.validate();
        return opt;
    }

    std::string config_string(const std::string& mode) const {
        std::ostringstream os;
        os.precision(17);
        os << mode << " k=" << k << " phi=" << phi << " order=" << order
           << " rk_steps=" << rk_steps << " samples=" << samples << " tol=" << tol
           << " max_iterations=" << max_iterations << " puncture_eps=" << puncture_eps;
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveCli {
    FidelityCli fid;
    std::string out;
};

int run_solve(const SolveCli& cli) {
    const cmc::SolverOptions opt = cli.fid.solver_options();
    const cmc::SurfaceParams params{cli.fid.k, cli.fid.phi};
    params.validate();

    // Direct solve from the small-weight seed; walk in phi when it fails.
    cmc::SolveResult solved = cmc::solve_from_central(params, opt);
    if (!solved.converged && std::abs(cli.fid.phi - cmc::pi / 4.0) > 1e-12) {
        try {
            const cmc::SurfaceParams mid{cli.fid.k, cmc::pi / 4.0};
            const cmc::SolveResult seed = cmc::solve_from_central(mid, opt);
            if (seed.converged) {
                cmc::SolveResult walked = cmc::continue_in_phi(mid, seed, cli.fid.phi, opt);
                if (walked.converged) solved = std::move(walked);
            }
        } catch (const cmc::SolverDivergenceError&) {
            // keep the direct attempt's diagnostics
        }
    }

    cmc::SolutionInvariants inv;
    bool have_invariants = false;
    if (solved.converged) {
        inv.global = cmc::compute_invariants(params, solved.coeffs);
        const auto pq = cmc::compute_PQ(params, solved.coeffs, opt.sample_count, opt.transport);
        inv.lattice = cmc::period_lattice(pq);
        inv.normalized = cmc::normalize_invariants(inv.global, inv.lattice);
        have_invariants = true;
    }

    const cmc::json doc = cmc::solution_to_json(params, solved, have_invariants ? &inv : nullptr,
                                                cli.fid.config_string("solve"));
    std::ofstream file;
    open_output(file, cli.out) << doc.dump(2) << std::endl;

    if (!solved.converged) {
        print_error("divergence",
                    "solver stopped above tolerance (final residual " +
                        std::to_string(solved.residual_norm) + ")",
                    &solved.residual_history);
        return kExitDivergence;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

struct ProfileCli {
    FidelityCli fid;
    double phi_min = 0.0;
    double phi_max = 0.0;
    int steps = 40;
    bool find_interval = false;
    double phi_tol = 1e-6;
    std::string lattice;
    bool competitors_only = false;
    double v_min = 1e-3;
    double v_max = 1.0;
    std::string out;
};

int run_competitors(const ProfileCli& cli) {
    double cell = 0.0;
    if (cli.lattice == "hex" || cli.lattice == "hexagonal")
        cell = std::sqrt(3.0) / 2.0;
    else if (cli.lattice == "square")
        cell = 1.0;
    else
        throw std::invalid_argument("--competitors-only requires --lattice hex|square");
    if (!(cli.v_min > 0.0) || !(cli.v_max >= cli.v_min) || cli.steps < 1)
        throw std::invalid_argument("competitor sweep needs 0 < --v-min <= --v-max, --steps >= 1");

    std::ostringstream cfg;
    cfg.precision(17);
    cfg << "competitors lattice=" << cli.lattice << " v_min=" << cli.v_min
        << " v_max=" << cli.v_max << " steps=" << cli.steps;

    std::ofstream file;
    std::ostream& os = open_output(file, cli.out);
    os << "# " << cmc::provenance_string(cfg.str()) << "\n";
    os << "V,A_competitor,branch\n";
    os.precision(17);
    for (int i = 0; i < cli.steps; ++i) {
        const double v = cli.steps == 1 ? cli.v_min
                                        : cli.v_min + (cli.v_max - cli.v_min) * i / (cli.steps - 1);
        const cmc::Competitor c = cmc::competitor_area(v, cell);
        os << v << "," << c.area << "," << c.which << "\n";
    }
    return kExitOk;
}

int run_profile(const ProfileCli& cli) {
    if (cli.competitors_only) return run_competitors(cli);
    if (!(cli.phi_max > cli.phi_min))
        throw std::invalid_argument("profile requires --phi-min < --phi-max");

    const cmc::SolverOptions opt = cli.fid.solver_options();
    std::ostringstream cfg;
    cfg.precision(17);
    cfg << cli.fid.config_string("profile") << " phi_min=" << cli.phi_min
        << " phi_max=" << cli.phi_max << " steps=" << cli.steps;

    const auto points = cmc::sweep_profile(cli.fid.k, cli.phi_min, cli.phi_max, cli.steps, opt);
    std::ofstream file;
    cmc::write_profile_csv(open_output(file, cli.out), points,
                           cmc::provenance_string(cfg.str()));

    if (cli.find_interval) {
        cmc::json j;
        j["provenance"] = cmc::provenance_string(cfg.str());
        try {
            const cmc::ImprovementInterval iv = cmc::improvement_interval(
                cli.fid.k, cli.phi_min, cli.phi_max, cli.steps, cli.phi_tol, opt);
            j["phi_lo"] = iv.phi_lo;
            j["phi_hi"] = iv.phi_hi;
            j["V_lo"] = iv.at_lo.volume_normalized;
            j["V_hi"] = iv.at_hi.volume_normalized;
            j["best_phi"] = iv.best.phi;
            j["best_margin"] = iv.best.margin;
            j["empty"] = false;
        } catch (const std::domain_error& e) {
            j["empty"] = true;
            j["reason"] = e.what();
        }
        std::cout << j.dump(2) << std::endl;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// mesh
// ---------------------------------------------------------------------------

struct MeshCli {
    std::string solution;
    int resolution = 35;
    bool patch_only = false;
    int lambda_samples = 256;
    int rk_steps = 100;
    std::string out;
    std::string report;
};

cmc::SolutionFile load_solution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open solution file: " + path);
    cmc::json j;
    in >> j;
    return cmc::solution_from_json(j);
}

int run_mesh(const MeshCli& cli) {
    const cmc::SolutionFile sf = load_solution(cli.solution);

    cmc::MeshOptions mopt;
    mopt.rays = cli.resolution;
    mopt.rings = std::max(4, cli.resolution - 2);
    mopt.lambda_samples = cli.lambda_samples;
    mopt.transport.steps_per_unit = cli.rk_steps;
    mopt.validate();

    std::ostringstream cfg;
    cfg.precision(17);
    cfg << "mesh solution=" << cli.solution << " k=" << sf.params.k << " phi=" << sf.params.phi
        << " resolution=" << cli.resolution << " lambda_samples=" << cli.lambda_samples
        << " rk_steps=" << cli.rk_steps << " patch_only=" << (cli.patch_only ? 1 : 0);
    const std::string provenance = cmc::provenance_string(cfg.str());

    std::string obj_path = cli.out;
    if (obj_path.empty()) {
        obj_path = cli.solution;
        const std::size_t dot = obj_path.find_last_of('.');
        if (dot != std::string::npos) obj_path.resize(dot);
        obj_path += cli.patch_only ? "_patch.obj" : ".obj";
    }

    cmc::json report;
    report["provenance"] = provenance;
    report["resolution"] = cli.resolution;

    if (cli.patch_only) {
        const cmc::PQFrames pq =
            cmc::compute_PQ(sf.params, sf.coeffs, mopt.lambda_samples, mopt.transport);
        const cmc::Unitarizer uz = cmc::unitarizer(pq);
        cmc::PatchMesh patch = cmc::build_patch_domain(sf.params, mopt);
        cmc::map_patch(patch, sf.params, sf.coeffs, uz.frames(), mopt);
        const cmc::MirrorPlanes planes = cmc::fit_mirror_planes(patch, sf.params);
        cmc::complete_corner(patch, sf.params, planes);

        std::ofstream obj;
        std::ostream& os = open_output(obj, obj_path);
        os << "# " << provenance << "\n";
        cmc::write_obj(os, cmc::SurfaceMesh{patch.position, patch.triangles});

        report["triangle_count"] = patch.triangles.size();
        report["plane_fit_residuals"] = planes.fit_residual;
        report["su2_deviation"] = patch.su2_deviation;
        report["corner_line_gap"] = patch.corner_line_gap;
    } else {
        const cmc::MeshResult mesh = cmc::mesh_surface(sf.params, sf.coeffs, mopt);

        std::ofstream obj;
        std::ostream& os = open_output(obj, obj_path);
        os << "# " << provenance << "\n";
        cmc::write_obj(os, mesh.extended);

        const double l = mesh.lattice.shortest;
        report["A_tri"] = mesh.area_normalized;
        report["V_tri"] = mesh.volume_normalized;
        report["triangle_count"] = mesh.extended.triangles.size();
        cmc::json basis = cmc::json::array();
        for (int i = 0; i < mesh.lattice.rank && i < 2; ++i)
            basis.push_back({mesh.lattice.basis[static_cast<std::size_t>(i)][0],
                             mesh.lattice.basis[static_cast<std::size_t>(i)][1], 0.0});
        report["lattice"] = basis;
        report["scale"] = l > 0.0 ? 1.0 / l : 0.0;
        report["copies"] = mesh.copies;
        report["plane_fit_residuals"] = mesh.planes.fit_residual;
        report["lattice_deviation"] = mesh.lattice_deviation;

        // Analytic comparison against the abstract invariants of the same data.
        const cmc::GlobalInvariants inv = cmc::compute_invariants(sf.params, sf.coeffs);
        const cmc::NormalizedInvariants norm = cmc::normalize_invariants(inv, mesh.lattice);
        report["analytic"] = {{"A_norm", norm.area},
                              {"V_norm", norm.volume},
                              {"A_gap", std::abs(norm.area - mesh.area_normalized)},
                              {"V_gap", std::abs(norm.volume - mesh.volume_normalized)}};
    }

    std::ofstream rfile;
    if (!cli.report.empty())
        open_output(rfile, cli.report) << report.dump(2) << std::endl;
    else
        std::cout << report.dump(2) << std::endl;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateCli {
    std::vector<std::string> checks;
    int k = 200;
    int loops = 25;
};

bool wants(const ValidateCli& cli, const std::string& name) {
    if (cli.checks.empty()) return true;
    for (const auto& c : cli.checks)
        if (c == name) return true;
    return false;
}

bool check_line(const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  " << detail << std::endl;
    return ok;
}

int run_validate(const ValidateCli& cli) {
    bool all = true;
    bool any = false;

    if (wants(cli, "cylinder-K")) {
        any = true;
        double worst = 0.0;
        for (const double h : {1.0, cmc::pi, 16.0}) {
            const cmc::cplx K = cmc::cylinder_gauge_curvature(h);
            worst = std::max(worst, std::abs(K - cmc::cplx{0.0, -h / 16.0}));
        }
        std::ostringstream d;
        d << "quadrature vs -ih/16, worst gap " << worst << " (h in {1, pi, 16})";
        all &= check_line("cylinder-K", worst <= 1e-10, d.str());
    }

    if (wants(cli, "minkowski")) {
        any = true;
        // Volume relation 3V = A - 2 pi i K on the closed-form cylinder data.
        const double h = 2.0 * cmc::pi;
        const cmc::cplx K = cmc::cylinder_gauge_curvature(h);
        const double A = h * cmc::pi / 2.0;
        const cmc::cplx V = (A - 2.0 * cmc::pi * cmc::cplx{0.0, 1.0} * K) / 3.0;
        const double gap = std::abs(V - cmc::cplx{h * cmc::pi / 8.0, 0.0});
        std::ostringstream d;
        d << "cylinder h=2pi: V from (A - 2 pi i K)/3 vs h pi/8, gap " << gap;
        all &= check_line("minkowski", gap <= 1e-9, d.str());
    }

    if (wants(cli, "K-routes")) {
        any = true;
        double worst = 0.0;
        for (const double phi : {cmc::pi / 4.0, 0.9}) {
            const cmc::SurfaceParams params{3, phi};
            const cmc::PotentialCoeffs c = cmc::central_value(params, 8);
            const cmc::GlobalInvariants inv = cmc::compute_invariants(params, c);
            worst = std::max(worst, inv.curvature_route_gap);
        }
        std::ostringstream d;
        d << "jet formula vs residue sum, worst gap " << worst;
        all &= check_line("K-routes", worst <= 1e-12, d.str());
    }

    if (wants(cli, "t0-oracle")) {
        any = true;
        // Half-traces divided by t approach explicit multiples of the loops as
        // t -> 0; the deviation must scale linearly in t (checked at k and 2k).
        auto deviation = [](int k) {
            const cmc::SurfaceParams params{k, cmc::pi / 4.0};
            const cmc::PotentialCoeffs c = cmc::central_value(params, 6);
            const int N = 16;
            const auto pq = cmc::compute_PQ(params, c, N, {});
            const auto ht = cmc::half_traces(pq);
            double dev = 0.0;
            for (int j = 0; j < N; ++j) {
                const cmc::cplx lam = std::polar(1.0, 2.0 * cmc::pi * j / N);
                const double w = 2.0 * cmc::pi * c.r;
                dev = std::max(dev, std::abs(ht.p[static_cast<std::size_t>(j)] / params.t() -
                                             w * c.x3.eval(lam)));
                dev = std::max(dev, std::abs(ht.q[static_cast<std::size_t>(j)] / params.t() -
                                             w * c.x2.eval(lam)));
            }
            return dev;
        };
        const double d1 = deviation(cli.k);
        const double d2 = deviation(2 * cli.k);
        const double ratio = d1 / d2;  // exact linear scaling gives 2
        std::ostringstream d;
        d << "k=" << cli.k << " deviation " << d1 << ", k=" << 2 * cli.k << " deviation " << d2
          << ", ratio " << ratio;
        all &= check_line("t0-oracle", ratio > 1.0 && ratio < 4.0 && d1 < 10.0 / cli.k, d.str());
    }

    if (wants(cli, "iwasawa")) {
        any = true;
        std::mt19937 rng(20260822u);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double worst_f = 0.0, worst_rec = 0.0, worst_neg = 0.0;
        const int N = 64;
        for (int trial = 0; trial < cli.loops; ++trial) {
            cmc::MatrixLoop loop = cmc::MatrixLoop::identity();
            cmc::ComplexLoop* entries[4] = {&loop.a, &loop.b, &loop.c, &loop.d};
            for (auto* e : entries) {
                std::vector<cmc::cplx> cs;
                for (int m = -3; m <= 3; ++m)
                    cs.push_back(0.35 * std::pow(0.4, std::abs(m)) *
                                 cmc::cplx{gauss(rng), gauss(rng)});
                *e = *e + cmc::ComplexLoop(-3, std::move(cs));
            }
            const auto samples = cmc::sample_matrix_loop(loop, N);
            const auto iw = cmc::iwasawa_factor(samples.v, {});
            worst_f = std::max(worst_f, iw.unitarity_defect);
            worst_rec = std::max(worst_rec, iw.reconstruction_error);
            const cmc::MatrixLoop bfit =
                cmc::fit_matrix_loop(cmc::MatrixSamples{iw.B}, -N / 2, N / 2 - 1);
            worst_neg = std::max(worst_neg, bfit.coefficient_mass(-N / 2, -1));
        }
        std::ostringstream d;
        d << cli.loops << " random loops: F unitarity " << worst_f << ", reconstruction "
          << worst_rec << ", negative-degree mass " << worst_neg;
        all &= check_line("iwasawa", worst_f <= 1e-10 && worst_rec <= 1e-9 && worst_neg <= 1e-10,
                          d.str());
    }

    if (!any) {
        print_error("usage", "unknown --check name; known: cylinder-K, minkowski, K-routes, "
                             "t0-oracle, iwasawa");
        return kExitUsage;
    }
    return all ? kExitOk : kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly periodic constant-mean-curvature surface toolkit"};
    app.require_subcommand(1);

    SolveCli solve_cli;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one family member");
    solve_cli.fid.add_fidelity(solve_cmd, true);
    solve_cmd->add_option("--out,-o", solve_cli.out, "Solution JSON path (default stdout)");

    ProfileCli profile_cli;
    CLI::App* profile_cmd =
        app.add_subcommand("profile", "Sweep the isoperimetric profile over phi");
    profile_cli.fid.add_fidelity(profile_cmd, false);
    profile_cmd->get_option("--k")->required(false);
    profile_cmd->add_option("--phi-min", profile_cli.phi_min, "Sweep start");
    profile_cmd->add_option("--phi-max", profile_cli.phi_max, "Sweep end");
    profile_cmd->add_option("--steps", profile_cli.steps, "Number of sweep samples");
    profile_cmd->add_flag("--find-interval", profile_cli.find_interval,
                          "Bisect the improvement interval inside the sweep range");
    profile_cmd->add_option("--phi-tol", profile_cli.phi_tol,
                            "Bisection tolerance for --find-interval endpoints");
    profile_cmd->add_option("--lattice", profile_cli.lattice,
                            "Competitor lattice kind: hex or square");
    profile_cmd->add_flag("--competitors-only", profile_cli.competitors_only,
                          "Emit the competitor profile without solving");
    profile_cmd->add_option("--v-min", profile_cli.v_min, "Competitor sweep volume start");
    profile_cmd->add_option("--v-max", profile_cli.v_max, "Competitor sweep volume end");
    profile_cmd->add_option("--out,-o", profile_cli.out, "CSV output path (default stdout)");

    MeshCli mesh_cli;
    CLI::App* mesh_cmd = app.add_subcommand("mesh", "Triangulate a stored solution");
    mesh_cmd->add_option("--solution", mesh_cli.solution, "Solution JSON path")->required();
    mesh_cmd->add_option("--resolution", mesh_cli.resolution, "Rays across the quarter patch");
    mesh_cmd->add_flag("--patch-only", mesh_cli.patch_only,
                       "Export the quarter-domain patch without reflections");
    mesh_cmd->add_option("--lambda-samples", mesh_cli.lambda_samples,
                         "Circle samples for the per-vertex factorization");
    mesh_cmd->add_option("--rk-steps", mesh_cli.rk_steps,
                         "Transport subdivisions per unit for mesh rays");
    mesh_cmd->add_option("--out,-o", mesh_cli.out,
                         "Wavefront OBJ path (default: solution stem + .obj)");
    mesh_cmd->add_option("--report", mesh_cli.report,
                         "Write the geometry report JSON here instead of stdout");

    ValidateCli validate_cli;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Run the numerical property suite");
    validate_cmd->add_option("--check", validate_cli.checks,
                             "Run only the named checks (repeatable): cylinder-K, minkowski, "
                             "K-routes, t0-oracle, iwasawa");
    validate_cmd->add_option("--k", validate_cli.k, "Symmetry order for the t0 oracle");
    validate_cmd->add_option("--loops", validate_cli.loops,
                             "Random loop count for the factorization check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(solve_cli);
        if (profile_cmd->parsed()) return run_profile(profile_cli);
        if (mesh_cmd->parsed()) return run_mesh(mesh_cli);
        if (validate_cmd->parsed()) return run_validate(validate_cli);
        print_error("usage", "no subcommand given");
        return kExitUsage;
    } catch (const cmc::SolverDivergenceError& e) {
        print_error("divergence", e.what());
        return kExitDivergence;
    } catch (const cmc::TransportError& e) {
        print_error("transport", e.what());
        return kExitDivergence;
    } catch (const cmc::UnitarizabilityError& e) {
        print_error("unitarizability", e.what());
        return kExitUnitarizability;
    } catch (const cmc::IwasawaError& e) {
        print_error("factorization", e.what());
        return kExitUnitarizability;
    } catch (const std::domain_error& e) {
        print_error("geometry", e.what());
        return kExitGeometry;
    } catch (const std::invalid_argument& e) {
        print_error("config", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return kExitUsage;
    }
}
