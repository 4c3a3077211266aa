// End-to-end walkthrough: solve the closing conditions for one triply
// symmetric family member, then report the residual history together with
// the resulting area, enclosed volume, and translation lattice.

#include <cstdio>

#include "cmc/cmc.hpp"

int main() {
    const int k = 3;
    const double phi = cmc::pi / 4.0;

    cmc::SolverOptions opt;
    opt.order_n = 12;
    opt.sample_count = 128;
    opt.transport.steps_per_unit = 250;

    const cmc::SurfaceParams params{k, phi};
    std::printf("solving k=%d phi=%.6f (t=%.6f)\n", k, phi, params.t());
    const cmc::SolveResult result = cmc::solve_from_central(params, opt);
    for (std::size_t i = 0; i < result.residual_history.size(); ++i)
        std::printf("  iteration %2zu  residual %.3e\n", i, result.residual_history[i]);
    std::printf("converged: %s in %d iterations\n", result.converged ? "yes" : "no",
                result.iterations);

    const cmc::GlobalInvariants inv = cmc::compute_invariants(params, result.coeffs);
    const auto pq = cmc::compute_PQ(params, result.coeffs, opt.sample_count, opt.transport);
    const cmc::PeriodLattice lattice = cmc::period_lattice(pq);
    const cmc::NormalizedInvariants norm = cmc::normalize_invariants(inv, lattice);

    std::printf("area                %.12f\n", inv.area);
    std::printf("enclosed volume     %.12f\n", inv.volume);
    std::printf("lattice rank        %d\n", lattice.rank);
    if (lattice.rank == 2) {
        std::printf("lattice basis       (%.9f, %.9f), (%.9f, %.9f)\n",
                    lattice.basis[0][0], lattice.basis[0][1], lattice.basis[1][0],
                    lattice.basis[1][1]);
        std::printf("lattice angle       %.9f\n", lattice.angle);
    }
    std::printf("normalized area     %.12f\n", norm.area);
    std::printf("normalized volume   %.12f\n", norm.volume);
    return result.converged ? 0 : 1;
}
