#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace cmc {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// In-place iterative radix-2 transform; sign = -1 forward, +1 inverse (unscaled).
inline void fft_radix2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
        const cplx wlen = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            cplx w{1.0, 0.0};
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline std::vector<cplx> dft_naive(const std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    std::vector<cplx> out(n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * 3.14159265358979323846 *
                               static_cast<double>(j) * static_cast<double>(k) / static_cast<double>(n);
            acc += a[j] * std::polar(1.0, ang);
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace detail

// Forward transform: out[k] = sum_j in[j] exp(-2 pi i j k / N).
inline std::vector<cplx> dft_forward(std::vector<cplx> a) {
    if (a.empty()) throw std::invalid_argument("dft_forward: empty input");
    if (is_power_of_two(a.size())) {
        detail::fft_radix2(a, -1);
        return a;
    }
    return detail::dft_naive(a, -1);
}

// Inverse transform with 1/N scaling: out[j] = (1/N) sum_k in[k] exp(+2 pi i j k / N).
inline std::vector<cplx> dft_inverse(std::vector<cplx> a) {
    if (a.empty()) throw std::invalid_argument("dft_inverse: empty input");
    const double inv_n = 1.0 / static_cast<double>(a.size());
    if (is_power_of_two(a.size())) {
        detail::fft_radix2(a, +1);
    } else {
        a = detail::dft_naive(a, +1);
    }
    for (auto& v : a) v *= inv_n;
    return a;
}

}  // namespace cmc
