#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "cmc/fft.hpp"

namespace cmc {

// Truncated Laurent loop u(lambda) = sum_{m=lo..hi} c_m lambda^m on the unit
// circle.  Coefficients are the canonical representation; sample vectors are
// derived views.  Values are immutable after construction, so loops can be
// shared across threads freely.
template <typename T>
class BasicLoop {
public:
    BasicLoop() = default;

    BasicLoop(int lo, std::vector<T> coeffs) : lo_(lo), c_(std::move(coeffs)) { normalize(); }

    static BasicLoop zero() { return BasicLoop(); }
    static BasicLoop constant(T v) { return BasicLoop(0, {v}); }
    static BasicLoop monomial(int degree, T v) { return BasicLoop(degree, {v}); }

    bool is_zero() const { return c_.empty(); }
    int lo() const { return c_.empty() ? 0 : lo_; }
    int hi() const { return c_.empty() ? -1 : lo_ + static_cast<int>(c_.size()) - 1; }

    T coeff(int m) const {
        if (c_.empty() || m < lo_ || m > hi()) return T{};
        return c_[static_cast<std::size_t>(m - lo_)];
    }

    cplx eval(cplx lambda) const {
        // Horner on the nonnegative part plus Horner in 1/lambda on the principal part.
        cplx pos{0.0, 0.0};
        for (int m = hi(); m >= std::max(lo(), 0); --m) pos = pos * lambda + cplx(coeff(m));
        cplx neg{0.0, 0.0};
        if (lo() < 0) {
            const cplx inv = 1.0 / lambda;
            for (int j = -lo(); j >= 1; --j) neg = (neg + cplx(coeff(-j))) * inv;
        }
        return pos + neg;
    }

    // Samples on the uniform grid lambda_j = exp(2 pi i j / N), j = 0..N-1.
    // Requires N >= 2*max(|lo|,|hi|)+1 so degrees do not alias.
    std::vector<cplx> samples(int N) const {
        const int maxdeg = std::max(std::abs(lo()), std::abs(hi()));
        if (N < 2 * maxdeg + 1)
            throw std::invalid_argument("BasicLoop::samples: N too small for degree range");
        std::vector<cplx> bins(static_cast<std::size_t>(N), cplx{0.0, 0.0});
        for (int m = lo(); m <= hi(); ++m) {
            int k = ((m % N) + N) % N;
            bins[static_cast<std::size_t>(k)] += cplx(coeff(m));
        }
        // u(lambda_j) = sum_k bins_k e^{+2 pi i j k / N} = N * inverse-DFT of bins.
        auto out = dft_inverse(std::move(bins));
        for (auto& v : out) v *= static_cast<double>(N);
        return out;
    }

    // Involution (u*)(lambda) = conj(u(1/conj(lambda))); coefficients (u*)_m = conj(u_{-m}).
    BasicLoop star() const {
        if (c_.empty()) return {};
        std::vector<T> rc(c_.size());
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if constexpr (std::is_same_v<T, double>) {
                rc[i] = c_[c_.size() - 1 - i];
            } else {
                rc[i] = std::conj(c_[c_.size() - 1 - i]);
            }
        }
        return BasicLoop(-hi(), std::move(rc));
    }

    // Wiener-type norm sum |c_m| rho^|m| with rho >= 1.
    double wiener_norm(double rho) const {
        if (rho < 1.0) throw std::invalid_argument("wiener_norm: rho must be >= 1");
        double s = 0.0;
        for (int m = lo(); m <= hi(); ++m) s += std::abs(cplx(coeff(m))) * std::pow(rho, std::abs(m));
        return s;
    }

    // First two derivatives at tau = 0 of g(tau) = u(e^{i tau}):
    //   g'(0) = i sum m c_m,  g''(0) = -sum m^2 c_m.
    std::pair<cplx, cplx> tau_jet() const {
        cplx s1{0.0, 0.0}, s2{0.0, 0.0};
        for (int m = lo(); m <= hi(); ++m) {
            const cplx cm(coeff(m));
            s1 += static_cast<double>(m) * cm;
            s2 += static_cast<double>(m) * static_cast<double>(m) * cm;
        }
        return {cplx{0.0, 1.0} * s1, -s2};
    }

    BasicLoop operator+(const BasicLoop& o) const { return combine(o, +1.0); }
    BasicLoop operator-(const BasicLoop& o) const { return combine(o, -1.0); }

    BasicLoop operator*(const BasicLoop& o) const {
        if (c_.empty() || o.c_.empty()) return {};
        const int rlo = lo() + o.lo();
        const int rhi = hi() + o.hi();
        std::vector<T> rc(static_cast<std::size_t>(rhi - rlo + 1), T{});
        for (int m = lo(); m <= hi(); ++m)
            for (int n = o.lo(); n <= o.hi(); ++n)
                rc[static_cast<std::size_t>(m + n - rlo)] += coeff(m) * o.coeff(n);
        return BasicLoop(rlo, std::move(rc));
    }

    BasicLoop operator*(T s) const {
        std::vector<T> rc(c_);
        for (auto& v : rc) v *= s;
        return BasicLoop(lo_, std::move(rc));
    }

    // Restriction to [new_lo, new_hi]; reports the absolute coefficient mass dropped.
    BasicLoop truncated(int new_lo, int new_hi, double* dropped_mass = nullptr) const {
        double lost = 0.0;
        std::vector<T> rc;
        rc.reserve(static_cast<std::size_t>(std::max(0, new_hi - new_lo + 1)));
        for (int m = lo(); m <= hi(); ++m)
            if (m < new_lo || m > new_hi) lost += std::abs(cplx(coeff(m)));
        for (int m = new_lo; m <= new_hi; ++m) rc.push_back(coeff(m));
        if (dropped_mass) *dropped_mass = lost;
        return BasicLoop(new_lo, std::move(rc));
    }

private:
    BasicLoop combine(const BasicLoop& o, double sign) const {
        if (o.c_.empty()) return *this;
        if (c_.empty()) return o * T(sign);
        const int rlo = std::min(lo(), o.lo());
        const int rhi = std::max(hi(), o.hi());
        std::vector<T> rc(static_cast<std::size_t>(rhi - rlo + 1), T{});
        for (int m = rlo; m <= rhi; ++m)
            rc[static_cast<std::size_t>(m - rlo)] = coeff(m) + T(sign) * o.coeff(m);
        return BasicLoop(rlo, std::move(rc));
    }

    void normalize() {
        // Trim exact zeros at both ends so degree bookkeeping stays tight.
        std::size_t head = 0, tail = c_.size();
        while (head < tail && cplx(c_[head]) == cplx{0.0, 0.0}) ++head;
        while (tail > head && cplx(c_[tail - 1]) == cplx{0.0, 0.0}) --tail;
        if (head == tail) {
            c_.clear();
            lo_ = 0;
            return;
        }
        if (head > 0 || tail < c_.size()) {
            std::vector<T> trimmed(c_.begin() + static_cast<std::ptrdiff_t>(head),
                                   c_.begin() + static_cast<std::ptrdiff_t>(tail));
            lo_ += static_cast<int>(head);
            c_ = std::move(trimmed);
        }
    }

    int lo_ = 0;
    std::vector<T> c_;
};

using RealLoop = BasicLoop<double>;
using ComplexLoop = BasicLoop<cplx>;

inline ComplexLoop to_complex(const RealLoop& u) {
    std::vector<cplx> c;
    c.reserve(static_cast<std::size_t>(std::max(0, u.hi() - u.lo() + 1)));
    for (int m = u.lo(); m <= u.hi(); ++m) c.emplace_back(u.coeff(m), 0.0);
    return ComplexLoop(u.lo(), std::move(c));
}

struct FitDiagnostics {
    double residual = 0.0;       // max |refit samples - input samples|
    double imag_mass = 0.0;      // only meaningful for real fits
};

// Least-squares fit of grid samples to a loop supported on [lo, hi].  With
// N >= hi-lo+1 the fit is the orthogonal projection onto those frequencies;
// the diagnostic residual reports energy the range could not represent.
inline ComplexLoop fit_coefficients(const std::vector<cplx>& samples, int lo, int hi,
                                    FitDiagnostics* diag = nullptr) {
    const int N = static_cast<int>(samples.size());
    if (N <= 0) throw std::invalid_argument("fit_coefficients: empty samples");
    if (hi - lo + 1 > N)
        throw std::invalid_argument("fit_coefficients: degree range wider than sample count");
    // c_m = (1/N) sum_j s_j e^{-2 pi i j m / N}: forward transform, scaled.
    auto fwd = dft_forward(samples);
    std::vector<cplx> coeffs(static_cast<std::size_t>(hi - lo + 1));
    for (int m = lo; m <= hi; ++m) {
        int k = ((m % N) + N) % N;
        coeffs[static_cast<std::size_t>(m - lo)] = fwd[static_cast<std::size_t>(k)] / static_cast<double>(N);
    }
    ComplexLoop out(lo, std::move(coeffs));
    if (diag) {
        auto redo = out.samples(std::max(N, 2 * std::max(std::abs(out.lo()), std::abs(out.hi())) + 1));
        double r = 0.0;
        if (static_cast<int>(redo.size()) == N) {
            for (int j = 0; j < N; ++j)
                r = std::max(r, std::abs(redo[static_cast<std::size_t>(j)] - samples[static_cast<std::size_t>(j)]));
        } else {
            // Range forced a larger re-evaluation grid; compare on the original grid points.
            for (int j = 0; j < N; ++j) {
                const cplx lam = std::polar(1.0, 2.0 * 3.14159265358979323846 * j / N);
                r = std::max(r, std::abs(out.eval(lam) - samples[static_cast<std::size_t>(j)]));
            }
        }
        diag->residual = r;
    }
    return out;
}

// Real-coefficient fit; imag_mass diagnoses how non-real the data was.
inline RealLoop fit_real_coefficients(const std::vector<cplx>& samples, int lo, int hi,
                                      FitDiagnostics* diag = nullptr) {
    FitDiagnostics local;
    ComplexLoop cl = fit_coefficients(samples, lo, hi, &local);
    double imag_mass = 0.0;
    std::vector<double> rc(static_cast<std::size_t>(std::max(0, hi - lo + 1)), 0.0);
    for (int m = lo; m <= hi; ++m) {
        const cplx v = cl.coeff(m);
        imag_mass += std::abs(v.imag());
        rc[static_cast<std::size_t>(m - lo)] = v.real();
    }
    local.imag_mass = imag_mass;
    if (diag) *diag = local;
    return RealLoop(lo, std::move(rc));
}

}  // namespace cmc
