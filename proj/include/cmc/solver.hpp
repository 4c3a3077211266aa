#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmc/monodromy.hpp"
#include "cmc/parallel.hpp"
#include "cmc/potential.hpp"
#include "cmc/transport.hpp"

namespace cmc {

struct SolverOptions {
    int order_n = 20;
    int sample_count = 256;
    TransportOptions transport;
    double tolerance = 1e-12;    // infinity norm of the residual vector
    int max_iterations = 30;
    double fd_relative_step = 1e-7;

    void validate() const {
        if (order_n < 1) throw std::invalid_argument("SolverOptions: order_n must be >= 1");
        if (sample_count < 2 * (2 * order_n + 2) + 2)
            throw std::invalid_argument("SolverOptions: sample_count too small for order_n");
        if (!is_power_of_two(static_cast<std::size_t>(sample_count)) || sample_count % 4 != 0)
            throw std::invalid_argument("SolverOptions: sample_count must be a power of two");
    }
};

class SolverDivergenceError : public std::runtime_error {
public:
    explicit SolverDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Unknown vector layout: [log r, x1_0..x1_n, x2_0..x2_n, x3_0..x3_n].
// The degree -1 coefficients are pinned to the puncture residues of phi and
// are never unknowns; r enters as exp(s) so it stays positive.
inline std::vector<double> pack_unknowns(const PotentialCoeffs& coeffs) {
    const int n = coeffs.order_n;
    std::vector<double> u;
    u.reserve(static_cast<std::size_t>(3 * (n + 1) + 1));
    u.push_back(std::log(coeffs.r));
    for (const RealLoop* x : {&coeffs.x1, &coeffs.x2, &coeffs.x3})
        for (int m = 0; m <= n; ++m) u.push_back(x->coeff(m));
    return u;
}

inline PotentialCoeffs unpack_unknowns(const SurfaceParams& params, const std::vector<double>& u,
                                       int order_n) {
    if (static_cast<int>(u.size()) != 3 * (order_n + 1) + 1)
        throw std::invalid_argument("unpack_unknowns: size mismatch");
    const double s = std::sin(params.phi), c = std::cos(params.phi);
    const double res[3] = {0.5, -0.5 * s, -0.5 * c};
    PotentialCoeffs out;
    out.order_n = order_n;
    out.r = std::exp(u[0]);
    RealLoop* xs[3] = {&out.x1, &out.x2, &out.x3};
    std::size_t at = 1;
    for (int j = 0; j < 3; ++j) {
        std::vector<double> cv(static_cast<std::size_t>(order_n + 2), 0.0);
        cv[0] = res[j];
        for (int m = 0; m <= order_n; ++m) cv[static_cast<std::size_t>(m + 1)] = u[at++];
        *xs[j] = RealLoop(-1, std::move(cv));
    }
    return out;
}

// Monodromy residual: stacked real equations whose common zero is the solved
// family member.
//   - Re/Im Fourier coefficients m = 1..n of Im(p/t) sampled on the circle
//   - Re/Im Fourier coefficients m = 1..n of Im(q/t)
//   - Re/Im of (q/t)(1)
//   - Laurent coefficients of (calK - 1) for degrees -2..2n
// The reality rows are mildly redundant under the built-in sigma symmetry;
// the system is solved in the least-squares sense.
inline std::vector<double> monodromy_residual(const SurfaceParams& params,
                                              const PotentialCoeffs& coeffs,
                                              const SolverOptions& opt,
                                              bool parallel_transport) {
    const int n = opt.order_n;
    const int N = opt.sample_count;
    TransportOptions topt = opt.transport;
    topt.parallel = parallel_transport;
    const PQFrames pq = compute_PQ(params, coeffs, N, topt);
    const HalfTraces ht = half_traces(pq);
    const double inv_t = 1.0 / params.t();

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(4 * n + 2 + (2 * n + 3)));

    auto push_reality_rows = [&](const std::vector<cplx>& f) {
        std::vector<cplx> im(f.size());
        for (std::size_t j = 0; j < f.size(); ++j) im[j] = cplx{f[j].imag() * inv_t, 0.0};
        const auto bins = dft_forward(im);
        for (int m = 1; m <= n; ++m) {
            const cplx cm = bins[static_cast<std::size_t>(m)] / static_cast<double>(N);
            out.push_back(cm.real());
            out.push_back(cm.imag());
        }
    };
    push_reality_rows(ht.p);
    push_reality_rows(ht.q);

    const cplx q1 = ht.q[0] * inv_t;  // sample 0 is lambda = 1
    out.push_back(q1.real());
    out.push_back(q1.imag());

    const RealLoop K = calK(coeffs);
    for (int m = -2; m <= 2 * n; ++m) out.push_back(K.coeff(m) - (m == 0 ? 1.0 : 0.0));
    return out;
}

namespace detail {

inline double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double norm_2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Dense symmetric positive definite solve via Cholesky with a tiny ridge
// fallback; dimensions here are ~3n+4, far below any scale needing a library.
inline std::vector<double> spd_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += A[i][i];
    const double ridge0 = 1e-14 * (trace / std::max<std::size_t>(n, 1));
    for (int attempt = 0; attempt < 6; ++attempt) {
        std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
        const double ridge = attempt == 0 ? 0.0 : ridge0 * std::pow(100.0, attempt - 1);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = A[i][j] + (i == j ? ridge : 0.0);
                for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    L[i][i] = std::sqrt(s);
                } else {
                    L[i][j] = s / L[j][j];
                }
            }
        }
        if (!ok) continue;
        std::vector<double> y(n, 0.0), x(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= L[i][k] * y[k];
            y[i] = s / L[i][i];
        }
        for (std::size_t ii = n; ii > 0; --ii) {
            const std::size_t i = ii - 1;
            double s = y[i];
            for (std::size_t k = i + 1; k < n; ++k) s -= L[k][i] * x[k];
            x[i] = s / L[i][i];
        }
        return x;
    }
    throw SolverDivergenceError("gauss_newton: normal equations not positive definite");
}

}  // namespace detail

struct SolveResult {
    PotentialCoeffs coeffs;
    double residual_norm = 0.0;       // infinity norm at the final iterate
    int iterations = 0;
    bool converged = false;
    double delta_at_i = 0.0;          // discriminant at lambda = i
    std::vector<double> residual_history;
};

// Damped Gauss-Newton on the monodromy residual with a forward-difference
// Jacobian.  Columns are evaluated concurrently (each with serial transports);
// a single residual evaluation parallelizes across lambda samples instead.
inline SolveResult gauss_newton(const SurfaceParams& params, const PotentialCoeffs& seed,
                                const SolverOptions& opt) {
    params.validate();
    opt.validate();
    seed.validate(params);

    std::vector<double> u = pack_unknowns(seed);
    const int dim = static_cast<int>(u.size());

    auto eval = [&](const std::vector<double>& v, bool parallel) {
        return monodromy_residual(params, unpack_unknowns(params, v, opt.order_n), opt, parallel);
    };

    SolveResult result;
    std::vector<double> res = eval(u, true);
    double res_inf = detail::norm_inf(res);
    double res_2 = detail::norm_2(res);
    result.residual_history.push_back(res_inf);

    for (int iter = 0; iter < opt.max_iterations && res_inf > opt.tolerance; ++iter) {
        const int rows = static_cast<int>(res.size());
        std::vector<std::vector<double>> J(static_cast<std::size_t>(dim));
        parallel_for(dim, [&](int i) {
            std::vector<double> up = u;
            const double h = opt.fd_relative_step * std::max(std::abs(u[static_cast<std::size_t>(i)]), 1.0);
            up[static_cast<std::size_t>(i)] += h;
            std::vector<double> rp = eval(up, false);
            std::vector<double>& col = J[static_cast<std::size_t>(i)];
            col.resize(static_cast<std::size_t>(rows));
            for (int r = 0; r < rows; ++r)
                col[static_cast<std::size_t>(r)] =
                    (rp[static_cast<std::size_t>(r)] - res[static_cast<std::size_t>(r)]) / h;
        });

        // Column scaling, normal equations, and the scaled step.
        std::vector<double> scale(static_cast<std::size_t>(dim), 1.0);
        for (int i = 0; i < dim; ++i) {
            const double nrm = detail::norm_2(J[static_cast<std::size_t>(i)]);
            scale[static_cast<std::size_t>(i)] = nrm > 1e-14 ? 1.0 / nrm : 1.0;
        }
        std::vector<std::vector<double>> A(static_cast<std::size_t>(dim),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        std::vector<double> g(static_cast<std::size_t>(dim), 0.0);
        for (int i = 0; i < dim; ++i) {
            const auto& ci = J[static_cast<std::size_t>(i)];
            for (int j = 0; j <= i; ++j) {
                const auto& cj = J[static_cast<std::size_t>(j)];
                double s = 0.0;
                for (int r = 0; r < rows; ++r)
                    s += ci[static_cast<std::size_t>(r)] * cj[static_cast<std::size_t>(r)];
                A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    s * scale[static_cast<std::size_t>(i)] * scale[static_cast<std::size_t>(j)];
                A[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                    A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            double gs = 0.0;
            for (int r = 0; r < rows; ++r)
                gs += ci[static_cast<std::size_t>(r)] * res[static_cast<std::size_t>(r)];
            g[static_cast<std::size_t>(i)] = -gs * scale[static_cast<std::size_t>(i)];
        }
        std::vector<double> step = detail::spd_solve(std::move(A), std::move(g));
        for (int i = 0; i < dim; ++i) step[static_cast<std::size_t>(i)] *= scale[static_cast<std::size_t>(i)];

        // Damped update: halve until the 2-norm decreases.
        double alpha = 1.0;
        bool accepted = false;
        for (int halve = 0; halve < 30; ++halve, alpha *= 0.5) {
            std::vector<double> ut = u;
            for (int i = 0; i < dim; ++i)
                ut[static_cast<std::size_t>(i)] += alpha * step[static_cast<std::size_t>(i)];
            std::vector<double> rt = eval(ut, true);
            const double rt2 = detail::norm_2(rt);
            if (rt2 < res_2) {
                u = std::move(ut);
                res = std::move(rt);
                res_2 = rt2;
                res_inf = detail::norm_inf(res);
                accepted = true;
                break;
            }
        }
        result.iterations = iter + 1;
        result.residual_history.push_back(res_inf);
        if (!accepted) break;  // stalled; converged flag decides below
    }

    result.coeffs = unpack_unknowns(params, u, opt.order_n);
    result.residual_norm = res_inf;
    result.converged = res_inf <= opt.tolerance;

    const PQFrames pq = compute_PQ(params, result.coeffs, opt.sample_count, opt.transport);
    const auto delta = discriminant(half_traces(pq), params.t());
    result.delta_at_i = sample_at_i(delta).real();
    return result;
}

// Solve at the given parameters starting from the exact t -> 0 limit.
inline SolveResult solve_from_central(const SurfaceParams& params, const SolverOptions& opt) {
    return gauss_newton(params, central_value(params, opt.order_n), opt);
}

struct ContinuationOptions {
    double initial_step = 0.05;
    double min_step = 1e-5;
    double growth = 1.5;
};

// Continuation in phi: walk from the solved seed toward phi_target, halving
// the step on solver failure; a step below the floor is a divergence.
inline SolveResult continue_in_phi(const SurfaceParams& params_start, const SolveResult& seed,
                                   double phi_target, const SolverOptions& opt,
                                   const ContinuationOptions& copt = {}) {
    SurfaceParams params = params_start;
    SolveResult current = seed;
    double step = copt.initial_step;
    const double dir = phi_target >= params.phi ? 1.0 : -1.0;
    while (std::abs(params.phi - phi_target) > 0.0) {
        const double next_phi =
            dir > 0 ? std::min(params.phi + step, phi_target) : std::max(params.phi - step, phi_target);
        SurfaceParams trial = params;
        trial.phi = next_phi;
        bool ok = false;
        SolveResult attempt;
        try {
            attempt = gauss_newton(trial, current.coeffs, opt);
            ok = attempt.converged;
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok) {
            params = trial;
            current = attempt;
            step = std::min(step * copt.growth, copt.initial_step);
        } else {
            step *= 0.5;
            if (step < copt.min_step)
                throw SolverDivergenceError("continuation: step floor reached at phi = " +
                                            std::to_string(params.phi));
        }
    }
    return current;
}

}  // namespace cmc
