#pragma once
#include <algorithm>

// Radix-2 complex FFT, power-of-two sizes only. Plans (bit-reversal tables
// and twiddles) are cached per size behind a mutex; transforms themselves
// are pure and safe to run concurrently.

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/parallel.hpp"

namespace qhdlab::fft {

struct Plan {
    int n = 0;
    std::vector<int> rev;
    std::vector<Complex> roots;  // roots[len/2 + j] = exp(-2 pi i j / len)

    explicit Plan(int size) : n(size), rev(size) {
        int logn = 0;
        while ((1 << logn) < n) ++logn;
        if ((1 << logn) != n) throw FieldError("fft size must be a power of two");
        for (int i = 0; i < n; ++i)
            rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (logn - 1));
        roots.assign(n, Complex(0.0, 0.0));
        for (int len = 2; len <= n; len <<= 1) {
            for (int j = 0; j < len / 2; ++j) {
                double ang = -kTwoPi * double(j) / double(len);
                roots[len / 2 + j] = Complex(std::cos(ang), std::sin(ang));
            }
        }
    }
};

inline const Plan& plan_for(int n) {
    static std::mutex mu;
    static std::unordered_map<int, std::unique_ptr<Plan>> cache;
    std::scoped_lock lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Plan>(n);
    return *slot;
}

// In-place transform of length-n vector; sign = -1 forward, +1 inverse.
// Unnormalized in both directions.
inline void transform(Complex* a, int n, int sign) {
    const Plan& p = plan_for(n);
    for (int i = 0; i < n; ++i)
        if (i < p.rev[i]) std::swap(a[i], a[p.rev[i]]);
    for (int len = 2; len <= n; len <<= 1) {
        const Complex* ws = p.roots.data() + len / 2;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < len / 2; ++j) {
                Complex w = sign < 0 ? ws[j] : std::conj(ws[j]);
                Complex u = a[i + j];
                Complex v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

// Square 2-D grid of complex samples, row-major, indices are torus points
// x_j = 2 pi j / n.
struct Grid2 {
    int n = 0;
    std::vector<Complex> v;

    Grid2() = default;
    explicit Grid2(int size) : n(size), v(std::size_t(size) * size) {}
    Complex& at(int ix, int iy) { return v[std::size_t(iy) * n + ix]; }
    const Complex& at(int ix, int iy) const { return v[std::size_t(iy) * n + ix]; }
};

inline void transpose(Grid2& g) {
    const int n = g.n;
    constexpr int B = 32;
    for (int i0 = 0; i0 < n; i0 += B)
        for (int j0 = i0; j0 < n; j0 += B)
            for (int i = i0; i < std::min(i0 + B, n); ++i) {
                int jstart = (i0 == j0) ? i + 1 : j0;
                for (int j = jstart; j < std::min(j0 + B, n); ++j)
                    std::swap(g.v[std::size_t(i) * n + j], g.v[std::size_t(j) * n + i]);
            }
}

// 2-D transform: rows, transpose, rows, transpose. Row batches fan out to
// the worker pool for large grids.
inline void transform2(Grid2& g, int sign) {
    const int n = g.n;
    auto rows = [&](int lo, int hi) {
        for (int row = lo; row < hi; ++row)
            transform(g.v.data() + std::size_t(row) * n, n, sign);
    };
    if (n >= 128) {
        parallel_for(0, n, rows);
        transpose(g);
        parallel_for(0, n, rows);
    } else {
        rows(0, n);
        transpose(g);
        rows(0, n);
    }
    transpose(g);
}

// Frequency index -> grid bin (negative frequencies wrap).
inline int bin_of(int k, int n) {
    int b = k % n;
    return b < 0 ? b + n : b;
}

// Signed frequency represented by a grid bin, in [-n/2, n/2).
inline int freq_of(int bin, int n) { return bin < n / 2 ? bin : bin - n; }

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace qhdlab::fft
