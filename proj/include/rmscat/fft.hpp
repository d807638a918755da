#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace rmscat {

// Iterative radix-2 Cooley-Tukey on a contiguous stride-1 span.
// inverse=true applies conjugate twiddles and divides by n.
inline void fft1d(cplx* a, int n, bool inverse) {
  if (!is_pow2(n)) throw std::invalid_argument("fft1d: length must be a power of 2");
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / len * (inverse ? 1.0 : -1.0);
    cplx wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      cplx w(1.0);
      for (int k = 0; k < len / 2; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (int i = 0; i < n; ++i) a[i] /= double(n);
  }
}

inline void fft1d(std::vector<cplx>& a, bool inverse) { fft1d(a.data(), int(a.size()), inverse); }

// In-place 2D FFT: rows then columns. Both dims must be powers of 2.
inline void fft2d(ComplexGrid& x, bool inverse) {
  const int h = x.height, w = x.width;
  if (!is_pow2(h) || !is_pow2(w)) throw std::invalid_argument("fft2d: dims must be powers of 2");
  for (int r = 0; r < h; ++r) fft1d(&x.samples[size_t(r) * w], w, inverse);
  std::vector<cplx> col(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) col[r] = x.at(r, c);
    fft1d(col.data(), h, inverse);
    for (int r = 0; r < h; ++r) x.at(r, c) = col[r];
  }
}

inline ComplexGrid fft2d_copy(const ComplexGrid& x, bool inverse) {
  ComplexGrid out = x;
  fft2d(out, inverse);
  return out;
}

// Signed DFT frequency (radians per sample) of bin k on an axis of length n.
inline double bin_freq(int k, int n) {
  int kk = (k <= n / 2) ? k : k - n;
  return 2.0 * std::numbers::pi * double(kk) / double(n);
}

}  // namespace rmscat
