#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"
#include "grid.hpp"

namespace rmscat {

// Pixel-displacement field tau(u); x_tau(u) = x(u - tau(u)).
struct DeformationField {
  Image2D tau_row;  // vertical displacement component
  Image2D tau_col;  // horizontal displacement component
  double grad_norm = 0.0;

  void validate() const {
    if (!tau_row.same_dims(tau_col)) throw std::invalid_argument("DeformationField: component dims differ");
    if (!(grad_norm < 1.0)) throw std::invalid_argument("DeformationField: grad_norm must be < 1");
  }
};

inline ComplexGrid periodic_convolve2d(const ComplexGrid& x, const ComplexGrid& filter_hat) {
  if (!x.same_dims(filter_hat)) throw std::invalid_argument("periodic_convolve2d: dimension mismatch");
  ComplexGrid out = fft2d_copy(x, false);
  for (size_t i = 0; i < out.size(); ++i) out.samples[i] *= filter_hat.samples[i];
  fft2d(out, true);
  return out;
}

inline ComplexGrid periodic_convolve2d(const Image2D& x, const ComplexGrid& filter_hat) {
  return periodic_convolve2d(to_complex(x), filter_hat);
}

template <typename T>
Grid<T> downsample2d(const Grid<T>& x, int step) {
  if (step < 1 || !is_pow2(step)) throw std::invalid_argument("downsample2d: step must be a positive power of 2");
  if (x.height % step || x.width % step) throw std::invalid_argument("downsample2d: step must divide dimensions");
  Grid<T> out(x.height / step, x.width / step);
  for (int r = 0; r < out.height; ++r)
    for (int c = 0; c < out.width; ++c) out.at(r, c) = x.at(r * step, c * step);
  return out;
}

namespace detail {

inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  int p = 2 * n;
  int m = ((i % p) + p) % p;
  return m < n ? m : p - 1 - m;
}

// Catmull-Rom cubic kernel; interpolates exactly at integer offsets.
inline double cubic_kernel(double t) {
  t = std::abs(t);
  if (t < 1.0) return 1.0 + t * t * (-2.5 + 1.5 * t);
  if (t < 2.0) return 2.0 + t * (-4.0 + t * (2.5 - 0.5 * t));
  return 0.0;
}

inline double sample_bicubic(const Image2D& x, double r, double c) {
  int r0 = int(std::floor(r)), c0 = int(std::floor(c));
  double fr = r - r0, fc = c - c0;
  double wr[4], wc[4];
  for (int i = 0; i < 4; ++i) {
    wr[i] = cubic_kernel(fr - (i - 1));
    wc[i] = cubic_kernel(fc - (i - 1));
  }
  double acc = 0;
  for (int i = 0; i < 4; ++i) {
    int rr = mirror_index(r0 + i - 1, x.height);
    double row_acc = 0;
    for (int j = 0; j < 4; ++j) row_acc += wc[j] * x.at(rr, mirror_index(c0 + j - 1, x.width));
    acc += wr[i] * row_acc;
  }
  return acc;
}

inline int wrap_index(int i, int n) { return ((i % n) + n) % n; }

// Bicubic sample with periodic extension, matching the circular boundary
// model of the frequency-domain convolutions.
inline double sample_bicubic_periodic(const Image2D& x, double r, double c) {
  int r0 = int(std::floor(r)), c0 = int(std::floor(c));
  double fr = r - r0, fc = c - c0;
  double wr[4], wc[4];
  for (int i = 0; i < 4; ++i) {
    wr[i] = cubic_kernel(fr - (i - 1));
    wc[i] = cubic_kernel(fc - (i - 1));
  }
  double acc = 0;
  for (int i = 0; i < 4; ++i) {
    int rr = wrap_index(r0 + i - 1, x.height);
    double row_acc = 0;
    for (int j = 0; j < 4; ++j) row_acc += wc[j] * x.at(rr, wrap_index(c0 + j - 1, x.width));
    acc += wr[i] * row_acc;
  }
  return acc;
}

inline Image2D rotate90_ccw(const Image2D& x) {
  if (x.height != x.width) throw std::invalid_argument("rotate90: square grid required");
  const int n = x.height;
  Image2D out(n, n);
  // out(r,c) = x(n-1-c, r): quarter-turn index permutation about the grid center
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out.at(r, c) = x.at(n - 1 - c, r);
  return out;
}

}  // namespace detail

inline Image2D rotate_image(const Image2D& x, double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  double quarter = t / (std::numbers::pi / 2.0);
  long q = std::lround(quarter);
  if (std::abs(quarter - double(q)) < 1e-12 && (q % 4 == 0 || x.height == x.width)) {
    Image2D out = x;
    for (long i = 0; i < q % 4; ++i) out = detail::rotate90_ccw(out);
    return out;
  }
  Image2D out(x.height, x.width);
  double rc = 0.5 * (x.height - 1), cc = 0.5 * (x.width - 1);
  double ct = std::cos(t), st = std::sin(t);
  // inverse map: rotate output coordinates by -theta about the center;
  // u1 = column axis, u2 = row axis
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      double u1 = c - cc, u2 = r - rc;
      double s1 = ct * u1 + st * u2;
      double s2 = -st * u1 + ct * u2;
      out.at(r, c) = detail::sample_bicubic(x, s2 + rc, s1 + cc);
    }
  }
  return out;
}

inline Image2D dilate_image(const Image2D& x, double s) {
  if (!(s > 0)) throw std::invalid_argument("dilate_image: factor must be positive");
  if (s == 1.0) return x;
  Image2D out(x.height, x.width);
  double rc = 0.5 * (x.height - 1), cc = 0.5 * (x.width - 1);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c)
      out.at(r, c) = detail::sample_bicubic(x, rc + (r - rc) / s, cc + (c - cc) / s);
  return out;
}

inline Image2D warp_image(const Image2D& x, const DeformationField& tau) {
  tau.validate();
  if (!x.same_dims(tau.tau_row)) throw std::invalid_argument("warp_image: field dims differ from image");
  Image2D out(x.height, x.width);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c)
      out.at(r, c) = detail::sample_bicubic(x, r - tau.tau_row.at(r, c), c - tau.tau_col.at(r, c));
  return out;
}

// Warp with circular boundary extension; an integer constant field is an
// exact circular shift. Used where the periodic convolution model must be
// preserved (stability probes); warp_image keeps mirror extension.
inline Image2D warp_image_periodic(const Image2D& x, const DeformationField& tau) {
  tau.validate();
  if (!x.same_dims(tau.tau_row)) throw std::invalid_argument("warp_image_periodic: field dims differ from image");
  Image2D out(x.height, x.width);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c)
      out.at(r, c) = detail::sample_bicubic_periodic(x, r - tau.tau_row.at(r, c), c - tau.tau_col.at(r, c));
  return out;
}

inline Image2D mirror_pad(const Image2D& x, int h, int w) {
  if (h < x.height || w < x.width) throw std::invalid_argument("mirror_pad: target smaller than input");
  Image2D out(h, w);
  int r_off = (h - x.height) / 2, c_off = (w - x.width) / 2;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      out.at(r, c) = x.at(detail::mirror_index(r - r_off, x.height), detail::mirror_index(c - c_off, x.width));
  return out;
}

template <typename T>
Grid<T> center_crop(const Grid<T>& x, int h, int w) {
  if (h > x.height || w > x.width) throw std::invalid_argument("center_crop: target larger than input");
  Grid<T> out(h, w);
  int r_off = (x.height - h) / 2, c_off = (x.width - w) / 2;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.at(r, c) = x.at(r + r_off, c + c_off);
  return out;
}

}  // namespace rmscat
