#pragma once

#include <complex>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/quadrature.hpp"

namespace iflux {

using Cplx = std::complex<double>;

namespace detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT, sign = -1 forward / +1 inverse (unscaled).
inline void fft_inplace(Cplx* a, int n, int sign) {
  if (!is_pow2(n)) throw Error("fft: length must be a power of two");
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / len;
    const Cplx wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      Cplx w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const Cplx u = a[i + k];
        const Cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace detail

// Forward 2-D FFT of an n x n row-major grid (x fastest); unscaled.
inline void fft2(std::vector<Cplx>& a, int n, int sign) {
  if (static_cast<int>(a.size()) != n * n) throw Error("fft2: size mismatch");
  for (int row = 0; row < n; ++row) detail::fft_inplace(a.data() + static_cast<std::size_t>(row) * n, n, sign);
  std::vector<Cplx> col(n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) col[r] = a[static_cast<std::size_t>(r) * n + c];
    detail::fft_inplace(col.data(), n, sign);
    for (int r = 0; r < n; ++r) a[static_cast<std::size_t>(r) * n + c] = col[r];
  }
}

// Signed integer frequency for index i on a length-n transform.
inline int fft_freq(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace iflux
