#pragma once

#include <numbers>

#include "rdr/point.hpp"

namespace rdr {

enum class DftDirection { Forward, Inverse };

namespace detail {

inline bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place; sign = -1 forward, +1 inverse.
inline void fft_pow2(CplxVec& a, int sign) {
    const Index n = a.size();
    for (Index i = 1, j = 0; i < n; ++i) {
        Index bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (Index len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (Index i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (Index k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct O(n^2) evaluation for the non power-of-two sizes.
inline CplxVec dft_direct(const CplxVec& x, int sign) {
    const Index n = x.size();
    CplxVec out(n);
    const double base = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
    for (Index k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        for (Index j = 0; j < n; ++j) {
            const double ang = base * static_cast<double>((j * k) % n);
            acc += x[j] * Complex(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

} // namespace detail

/// Discrete Fourier transform.  Forward is unnormalized,
/// X_k = sum_j x_j e^{-2 pi i jk/n}; the inverse carries the 1/n factor so
/// that inverse(forward(x)) = x.  Radix-2 fast path for power-of-two n,
/// direct evaluation otherwise.
inline CplxVec dft(const CplxVec& x, DftDirection dir) {
    const Index n = x.size();
    if (n < 1) throw InvalidParams("dft: empty input");
    if (!x.allFinite()) throw NonFinite("dft: non-finite entry");
    const int sign = (dir == DftDirection::Forward) ? -1 : +1;
    CplxVec out;
    if (detail::is_pow2(n)) {
        out = x;
        detail::fft_pow2(out, sign);
    } else {
        out = detail::dft_direct(x, sign);
    }
    if (dir == DftDirection::Inverse) out /= static_cast<double>(n);
    return out;
}

inline Point dft(const Point& x, DftDirection dir) {
    return Point(dft(x.cplx(), dir));
}

} // namespace rdr
