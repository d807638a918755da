#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "signals.hpp"
#include "wavelets2d.hpp"

namespace rmscat {

struct CascadeFilters {
  ComplexGrid h_hat;                // low-pass transfer phi(2w)/phi(w), mother level
  std::vector<ComplexGrid> g_hat;   // band-pass transfers psi_theta(w)/phi(w)
  int taps_p = 0;                   // side of the square holding 99.9% of h's spatial energy
  MorletParams params;
  double norm_scale = 1.0;
  int J = 0, C = 0, height = 0, width = 0;
};

struct Pyramid {
  std::vector<Image2D> A;                       // j = 0..J, resolution 2^-j
  std::vector<std::vector<ComplexGrid>> B;      // [orientation][j], resolution 2^-j
};

namespace detail {

constexpr double kQuotientFloor = 1e-8;

// psi_theta(2^j w) / phi(2^j w) on an (h x w) lattice with the given sample
// spacing; zero where the denominator falls under the floor.
inline ComplexGrid quotient_transfer(const MorletParams& p, int h, int w, double spacing, int j,
                                     double theta, bool low_pass) {
  ComplexGrid num = low_pass ? sample_phi_hat(p, h, w, spacing, j + 1)
                             : sample_psi_hat(p, h, w, spacing, j, theta);
  ComplexGrid den = sample_phi_hat(p, h, w, spacing, j);
  for (size_t i = 0; i < num.size(); ++i) {
    if (std::abs(den.samples[i]) < kQuotientFloor)
      num.samples[i] = 0.0;
    else
      num.samples[i] /= den.samples[i];
  }
  return num;
}

// Iterated filter/downsample recursion computing A_j = x * phi_j and
// B_{theta,j} = x * psi_{theta,j}. Internal grids are kept `delay` levels
// finer than critical so decimation folds only negligible window tails.
// x lives on a lattice with `spacing` mother pixels between samples.
// emit_band(c, j, grid) receives band (angles[c], j) at resolution 2^-j;
// emit_low(j, grid) receives A_j (j = 1..J). Bands below j_lo are skipped.
inline void run_spatial_cascade(const ComplexGrid& x, const MorletParams& p,
                                const std::vector<double>& angles, int J, int j_lo, double spacing,
                                int oversampling, double norm,
                                const std::function<void(int, int, ComplexGrid&&)>& emit_band,
                                const std::function<void(int, ComplexGrid&&)>& emit_low) {
  constexpr int delay = 2;
  auto level_spacing = [&](int j) { return std::max(spacing, double(1 << std::max(j - delay, 0))); };
  auto out_step = [&](int j, double sp) {
    return std::max(int(double(1 << std::max(j - oversampling, 0)) / sp), 1);
  };
  ComplexGrid phi0 = sample_phi_hat(p, x.height, x.width, spacing, 0);
  for (auto& v : phi0.samples) v *= norm;
  ComplexGrid a = periodic_convolve2d(x, phi0);
  double sp = spacing;
  for (int j = 0; j < J; ++j) {
    ComplexGrid ah = fft2d_copy(a, false);
    if (j >= j_lo) {
      for (size_t c = 0; c < angles.size(); ++c) {
        ComplexGrid g = quotient_transfer(p, a.height, a.width, sp, j, angles[c], false);
        for (size_t i = 0; i < g.size(); ++i) g.samples[i] *= ah.samples[i];
        fft2d(g, true);
        emit_band(int(c), j, downsample2d(g, out_step(j, sp)));
      }
    }
    ComplexGrid h = quotient_transfer(p, a.height, a.width, sp, j, 0.0, true);
    for (size_t i = 0; i < h.size(); ++i) h.samples[i] *= ah.samples[i];
    fft2d(h, true);
    double sp_next = level_spacing(j + 1);
    if (sp_next > sp) {
      a = downsample2d(h, int(sp_next / sp));
    } else {
      a = std::move(h);
      sp_next = sp;
    }
    sp = sp_next;
    emit_low(j + 1, downsample2d(a, out_step(j + 1, sp)));
  }
}

}  // namespace detail

inline CascadeFilters derive_cascade_filters(const FilterBank2D& fb) {
  CascadeFilters cf;
  cf.params = fb.params;
  cf.norm_scale = fb.norm_scale;
  cf.J = fb.J;
  cf.C = fb.C;
  cf.height = fb.height;
  cf.width = fb.width;
  ComplexGrid phi0 = detail::sample_phi_hat(fb.params, fb.height, fb.width, 1.0, 0);
  for (int r = 0; r < fb.height; ++r) {
    for (int c = 0; c < fb.width; ++c) {
      double w1 = bin_freq(c, fb.width), w2 = bin_freq(r, fb.height);
      if (w1 * w1 + w2 * w2 <= kPi * kPi / 4.0 && std::abs(phi0.at(r, c)) < detail::kQuotientFloor)
        throw std::runtime_error("derive_cascade_filters: phi vanishes inside the half band");
    }
  }
  cf.h_hat = detail::quotient_transfer(fb.params, fb.height, fb.width, 1.0, 0, 0.0, true);
  for (int c = 0; c < fb.C; ++c)
    cf.g_hat.push_back(detail::quotient_transfer(fb.params, fb.height, fb.width, 1.0, 0,
                                                 fb.orientation(c), false));
  // effective taps: smallest centered odd square capturing 99.9% of h's energy
  ComplexGrid h_spatial = fft2d_copy(cf.h_hat, true);
  double total = sq_norm(h_spatial);
  int max_r = std::min(fb.height, fb.width) / 2;
  for (int radius = 0; radius <= max_r; ++radius) {
    double captured = 0;
    for (int r = -radius; r <= radius; ++r)
      for (int c = -radius; c <= radius; ++c)
        captured += std::norm(h_spatial.at((r + fb.height) % fb.height, (c + fb.width) % fb.width));
    if (captured >= 0.999 * total) {
      cf.taps_p = 2 * radius + 1;
      break;
    }
  }
  if (cf.taps_p == 0) cf.taps_p = std::min(fb.height, fb.width);
  return cf;
}

inline Pyramid atrous_cascade(const Image2D& x, const CascadeFilters& cf, int J) {
  if (x.height % (1 << J) || x.width % (1 << J))
    throw std::invalid_argument("atrous_cascade: dims must be divisible by 2^J");
  Pyramid pyr;
  pyr.A.assign(size_t(J) + 1, Image2D());
  pyr.B.assign(size_t(cf.C), std::vector<ComplexGrid>(size_t(J)));
  std::vector<double> angles;
  for (int c = 0; c < cf.C; ++c) angles.push_back(c * kPi / cf.C);
  ComplexGrid x0 = to_complex(x);
  detail::run_spatial_cascade(
      x0, cf.params, angles, J, 0, 1.0, 0, cf.norm_scale,
      [&](int c, int j, ComplexGrid&& g) { pyr.B[size_t(c)][size_t(j)] = std::move(g); },
      [&](int j, ComplexGrid&& g) { pyr.A[size_t(j)] = real_part(g); });
  ComplexGrid phi0 = detail::sample_phi_hat(cf.params, x.height, x.width, 1.0, 0);
  for (auto& v : phi0.samples) v *= cf.norm_scale;
  pyr.A[0] = real_part(periodic_convolve2d(x0, phi0));
  return pyr;
}

}  // namespace rmscat
