#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rmscat {

using cplx = std::complex<double>;

// Dense row-major 2D grid of samples.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> samples;

  Grid() = default;
  Grid(int h, int w, T fill = T{}) : height(h), width(w), samples(size_t(h) * w, fill) {
    if (h < 0 || w < 0) throw std::invalid_argument("Grid: negative dimensions");
  }

  T& at(int r, int c) { return samples[size_t(r) * width + c]; }
  const T& at(int r, int c) const { return samples[size_t(r) * width + c]; }

  size_t size() const { return samples.size(); }
  bool same_dims(const Grid& o) const { return height == o.height && width == o.width; }
};

using Image2D = Grid<double>;
using ComplexGrid = Grid<cplx>;

inline ComplexGrid to_complex(const Image2D& x) {
  ComplexGrid out(x.height, x.width);
  for (size_t i = 0; i < x.size(); ++i) out.samples[i] = x.samples[i];
  return out;
}

inline Image2D real_part(const ComplexGrid& x) {
  Image2D out(x.height, x.width);
  for (size_t i = 0; i < x.size(); ++i) out.samples[i] = x.samples[i].real();
  return out;
}

inline Image2D modulus(const ComplexGrid& x) {
  Image2D out(x.height, x.width);
  for (size_t i = 0; i < x.size(); ++i) out.samples[i] = std::abs(x.samples[i]);
  return out;
}

template <typename T>
double sq_norm(const Grid<T>& x) {
  double s = 0;
  for (const auto& v : x.samples) s += std::norm(cplx(v));
  return s;
}

template <typename T>
double grid_mean_real(const Grid<T>& x) {
  double s = 0;
  for (const auto& v : x.samples) s += std::real(cplx(v));
  return x.size() ? s / double(x.size()) : 0.0;
}

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace rmscat
