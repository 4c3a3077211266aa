#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cmc/loop.hpp"
#include "cmc/mat2.hpp"

namespace cmc {

// 2x2 matrix loop in coefficient form: four scalar Laurent loops.
struct MatrixLoop {
    ComplexLoop a, b, c, d;

    static MatrixLoop identity() {
        return {ComplexLoop::constant({1.0, 0.0}), {}, {}, ComplexLoop::constant({1.0, 0.0})};
    }

    int lo() const {
        int m = 0;
        for (const auto* e : {&a, &b, &c, &d})
            if (!e->is_zero()) m = std::min(m, e->lo());
        return m;
    }
    int hi() const {
        int m = 0;
        for (const auto* e : {&a, &b, &c, &d})
            if (!e->is_zero()) m = std::max(m, e->hi());
        return m;
    }

    Mat2 coeff(int m) const { return {a.coeff(m), b.coeff(m), c.coeff(m), d.coeff(m)}; }
    Mat2 eval(cplx lambda) const { return {a.eval(lambda), b.eval(lambda), c.eval(lambda), d.eval(lambda)}; }

    MatrixLoop operator+(const MatrixLoop& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    MatrixLoop operator-(const MatrixLoop& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    MatrixLoop operator*(const MatrixLoop& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }

    // Adjoint-star A*(lambda) = conj-transpose of A(1/conj lambda): entrywise star + transpose.
    MatrixLoop adjoint_star() const { return {a.star(), c.star(), b.star(), d.star()}; }

    ComplexLoop det() const { return a * d - b * c; }
    ComplexLoop trace() const { return a + d; }

    double coefficient_mass(int from, int to) const {
        double s = 0.0;
        for (const auto* e : {&a, &b, &c, &d})
            for (int m = from; m <= to; ++m) s += std::abs(e->coeff(m));
        return s;
    }
};

// Per-sample view of a matrix loop on the uniform grid lambda_j = e^{2 pi i j / N}.
struct MatrixSamples {
    std::vector<Mat2> v;

    int size() const { return static_cast<int>(v.size()); }
    Mat2& operator[](int j) { return v[static_cast<std::size_t>(j)]; }
    const Mat2& operator[](int j) const { return v[static_cast<std::size_t>(j)]; }

    static MatrixSamples identity(int N) {
        MatrixSamples s;
        s.v.assign(static_cast<std::size_t>(N), Mat2::identity());
        return s;
    }

    MatrixSamples multiply(const MatrixSamples& o) const {
        require_same_grid(o);
        MatrixSamples out;
        out.v.resize(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) out.v[j] = v[j] * o.v[j];
        return out;
    }

    // Pointwise inverse; reports the offending sample index on a singular determinant.
    MatrixSamples inverse() const {
        MatrixSamples out;
        out.v.resize(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (std::abs(v[j].det()) < 1e-300)
                throw std::domain_error("MatrixSamples::inverse: singular determinant at sample " +
                                        std::to_string(j));
            out.v[j] = v[j].inverse();
        }
        return out;
    }

    MatrixSamples adjoint() const {
        MatrixSamples out;
        out.v.resize(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) out.v[j] = v[j].adjoint();
        return out;
    }

    double max_unitarity_defect() const {
        double m = 0.0;
        for (const auto& s : v) m = std::max(m, s.unitarity_defect());
        return m;
    }

    double max_distance(const MatrixSamples& o) const {
        require_same_grid(o);
        double m = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) m = std::max(m, (v[j] - o.v[j]).norm());
        return m;
    }

    std::vector<cplx> entry(int row, int col) const {
        std::vector<cplx> out(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            const Mat2& s = v[j];
            out[j] = (row == 0) ? (col == 0 ? s.a : s.b) : (col == 0 ? s.c : s.d);
        }
        return out;
    }

    void require_same_grid(const MatrixSamples& o) const {
        if (o.v.size() != v.size())
            throw std::invalid_argument("MatrixSamples: mismatched sample grids");
    }
};

inline MatrixSamples sample_matrix_loop(const MatrixLoop& ml, int N) {
    MatrixSamples out;
    out.v.resize(static_cast<std::size_t>(N));
    const auto sa = ml.a.is_zero() ? std::vector<cplx>(static_cast<std::size_t>(N)) : ml.a.samples(N);
    const auto sb = ml.b.is_zero() ? std::vector<cplx>(static_cast<std::size_t>(N)) : ml.b.samples(N);
    const auto sc = ml.c.is_zero() ? std::vector<cplx>(static_cast<std::size_t>(N)) : ml.c.samples(N);
    const auto sd = ml.d.is_zero() ? std::vector<cplx>(static_cast<std::size_t>(N)) : ml.d.samples(N);
    for (int j = 0; j < N; ++j)
        out.v[static_cast<std::size_t>(j)] = {sa[static_cast<std::size_t>(j)], sb[static_cast<std::size_t>(j)],
                                              sc[static_cast<std::size_t>(j)], sd[static_cast<std::size_t>(j)]};
    return out;
}

// Coefficient fit of matrix samples on [lo, hi] per entry.
inline MatrixLoop fit_matrix_loop(const MatrixSamples& ms, int lo, int hi,
                                  FitDiagnostics* diag = nullptr) {
    FitDiagnostics worst;
    MatrixLoop out;
    ComplexLoop* entries[4] = {&out.a, &out.b, &out.c, &out.d};
    int idx = 0;
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 2; ++col) {
            FitDiagnostics d;
            *entries[idx++] = fit_coefficients(ms.entry(row, col), lo, hi, diag ? &d : nullptr);
            if (diag) worst.residual = std::max(worst.residual, d.residual);
        }
    if (diag) *diag = worst;
    return out;
}

}  // namespace cmc
