#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "se2.hpp"
#include "signals.hpp"

namespace rmscat {

struct MorletParams {
  double sigma = 0.5;       // spatial envelope width, pixels
  double xi = std::numbers::pi;  // central frequency, radians/pixel
  double slant = 1.2;       // envelope anisotropy zeta
  double sigma_phi = 0.215;  // window envelope width
  double phi_gain = 3.407;  // squared gain of the window in the LP sum
  double k_const = 0.0;     // zero-mean correction, computed

  void finalize() {
    if (!(sigma > 0) || !(slant > 0) || !(sigma_phi > 0) || !(phi_gain > 0) || !std::isfinite(xi))
      throw std::invalid_argument("MorletParams: parameters must be positive and finite");
    k_const = std::exp(-sigma * sigma * xi * xi / 2.0);
  }
};

struct LPReport {
  double min_sum = 0, max_sum = 0, epsilon = 0;
};

struct FilterBank2D {
  MorletParams params;
  int J = 0, C = 0;
  int height = 0, width = 0;
  std::vector<std::vector<ComplexGrid>> psi_hat;  // [orientation c][scale j]
  ComplexGrid phi_hat_J;
  double lp_epsilon = 0;
  double norm_scale = 1.0;  // factor applied to all closed-form samples

  double orientation(int c) const { return c * std::numbers::pi / C; }
};

namespace detail {

inline double morlet_hat_mother(const MorletParams& p, double w1, double w2) {
  double z2 = p.slant * p.slant * w2 * w2;
  return std::exp(-p.sigma * p.sigma * ((w1 - p.xi) * (w1 - p.xi) + z2) / 2.0) -
         p.k_const * std::exp(-p.sigma * p.sigma * (w1 * w1 + z2) / 2.0);
}

inline double gauss_hat_mother(const MorletParams& p, double w1, double w2) {
  return std::sqrt(p.phi_gain) * std::exp(-p.sigma_phi * p.sigma_phi * (w1 * w1 + w2 * w2) / 2.0);
}

// Sample a closed-form transfer on an (h x w) grid whose samples are spaced
// `spacing` mother pixels apart, dilated by 2^j and rotated by theta, summing
// +-2 periodization images on each axis (a square image set, so exact grid
// rotations permute the images and commute with the sampling).
template <typename F>
ComplexGrid sample_transfer(F&& fun, int h, int w, double spacing, int j, double theta) {
  ComplexGrid out(h, w);
  const double scale = double(1 << j);
  const double per_r = 2.0 * std::numbers::pi / spacing;
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int r = 0; r < h; ++r) {
    double w2 = bin_freq(r, h) / spacing;
    for (int c = 0; c < w; ++c) {
      double w1 = bin_freq(c, w) / spacing;
      double acc = 0;
      for (int i1 = -2; i1 <= 2; ++i1) {
        for (int i2 = -2; i2 <= 2; ++i2) {
          double a1 = w1 + i1 * per_r, a2 = w2 + i2 * per_r;
          // evaluate at 2^j * r_{-theta} omega
          double b1 = ct * a1 + st * a2;
          double b2 = -st * a1 + ct * a2;
          acc += fun(scale * b1, scale * b2);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

inline ComplexGrid sample_psi_hat(const MorletParams& p, int h, int w, double spacing, int j, double theta) {
  ComplexGrid out = sample_transfer([&](double a, double b) { return morlet_hat_mother(p, a, b); },
                                    h, w, spacing, j, theta);
  out.at(0, 0) = 0.0;  // exact zero mean on the grid
  return out;
}

inline ComplexGrid sample_phi_hat(const MorletParams& p, int h, int w, double spacing, int j) {
  return sample_transfer([&](double a, double b) { return gauss_hat_mother(p, a, b); },
                         h, w, spacing, j, 0.0);
}

// Value of a sampled real transfer at the negated frequency bin.
inline cplx at_neg_freq(const ComplexGrid& g, int r, int c) {
  return g.at((g.height - r) % g.height, (g.width - c) % g.width);
}

}  // namespace detail

inline MorletParams default_morlet_params() {
  MorletParams p;
  p.finalize();
  return p;
}

inline int default_scale_count(int min_dim) {
  int j = int(std::floor(std::log2(double(min_dim)))) - 2;
  return j < 1 ? 1 : j;
}

inline LPReport littlewood_paley_audit(const FilterBank2D& fb) {
  LPReport rep;
  rep.min_sum = 1e300;
  rep.max_sum = -1e300;
  for (int r = 0; r < fb.height; ++r) {
    for (int c = 0; c < fb.width; ++c) {
      double s = std::norm(fb.phi_hat_J.at(r, c));
      for (int o = 0; o < fb.C; ++o) {
        for (int j = 0; j < fb.J; ++j) {
          // psi_{theta+pi}(omega) = psi_theta(-omega): sum the conjugate pair
          s += std::norm(fb.psi_hat[o][j].at(r, c));
          s += std::norm(detail::at_neg_freq(fb.psi_hat[o][j], r, c));
        }
      }
      rep.min_sum = std::min(rep.min_sum, s);
      rep.max_sum = std::max(rep.max_sum, s);
    }
  }
  rep.epsilon = 1.0 - rep.min_sum;
  return rep;
}

inline FilterBank2D build_filter_bank(MorletParams params, int J, int C, int height, int width) {
  params.finalize();
  if (C < 1 || J < 1) throw std::invalid_argument("build_filter_bank: need C >= 1 and J >= 1");
  int min_dim = std::min(height, width);
  if (double(1 << J) * params.sigma > min_dim / 4.0)
    throw std::invalid_argument("build_filter_bank: grid too small for scale J");

  FilterBank2D fb;
  fb.params = params;
  fb.J = J;
  fb.C = C;
  fb.height = height;
  fb.width = width;
  fb.phi_hat_J = detail::sample_phi_hat(params, height, width, 1.0, J);
  fb.psi_hat.assign(size_t(C), {});
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < J; ++j)
      fb.psi_hat[size_t(c)].push_back(detail::sample_psi_hat(params, height, width, 1.0, j, fb.orientation(c)));
  }
  // Normalize so the max of the audited sum is exactly 1; the energy upper
  // bound of the transform then holds by Parseval.
  LPReport rep = littlewood_paley_audit(fb);
  double scale = 1.0 / std::sqrt(rep.max_sum);
  fb.norm_scale = scale;
  for (auto& row : fb.psi_hat)
    for (auto& g : row)
      for (auto& v : g.samples) v *= scale;
  for (auto& v : fb.phi_hat_J.samples) v *= scale;
  fb.lp_epsilon = 1.0 - rep.min_sum / rep.max_sum;
  // epsilon < 1 i.e. a strictly positive frequency-plane minimum; the ratio
  // itself can round to 1 for sparse banks, so gate on the minimum directly
  if (!(rep.min_sum > 0))
    throw std::runtime_error("build_filter_bank: Littlewood-Paley sum vanishes (epsilon >= 1)");
  return fb;
}

struct WaveletCoeffs {
  Image2D low;
  std::vector<std::vector<ComplexGrid>> band;  // [orientation][scale]
};

inline WaveletCoeffs wavelet_transform(const Image2D& x, const FilterBank2D& fb, int oversampling) {
  if (x.height != fb.height || x.width != fb.width)
    throw std::invalid_argument("wavelet_transform: image dims do not match bank");
  ComplexGrid xh = fft2d_copy(to_complex(x), false);
  WaveletCoeffs out;
  out.band.assign(size_t(fb.C), {});
  for (int c = 0; c < fb.C; ++c) {
    for (int j = 0; j < fb.J; ++j) {
      ComplexGrid y = xh;
      for (size_t i = 0; i < y.size(); ++i) y.samples[i] *= fb.psi_hat[size_t(c)][size_t(j)].samples[i];
      fft2d(y, true);
      int step = 1 << std::max(j - oversampling, 0);
      out.band[size_t(c)].push_back(downsample2d(y, step));
    }
  }
  ComplexGrid low = xh;
  for (size_t i = 0; i < low.size(); ++i) low.samples[i] *= fb.phi_hat_J.samples[i];
  fft2d(low, true);
  out.low = real_part(downsample2d(low, 1 << std::max(fb.J - oversampling, 0)));
  return out;
}

// Squared transform norm; band filters cover only the half circle of
// orientations, so their conjugate pairs are counted implicitly.
inline double transform_energy(const WaveletCoeffs& wc) {
  double e = sq_norm(wc.low);
  for (const auto& row : wc.band)
    for (const auto& g : row) e += 2.0 * sq_norm(g);
  return e;
}

// First layer of the scattering network: windowed average plus one modulus
// volume per scale, orientation axis of length C with period pi.
inline std::pair<Image2D, std::vector<SE2Volume>> wavelet_modulus(const Image2D& x, const FilterBank2D& fb) {
  WaveletCoeffs wc = wavelet_transform(x, fb, fb.J);  // full resolution
  std::vector<SE2Volume> u1;
  for (int j = 0; j < fb.J; ++j) {
    SE2Volume vol(x.height, x.width, fb.C, std::numbers::pi);
    for (int c = 0; c < fb.C; ++c)
      for (size_t i = 0; i < vol.slices[size_t(c)].size(); ++i)
        vol.slices[size_t(c)].samples[i] = std::abs(wc.band[size_t(c)][size_t(j)].samples[i]);
    u1.push_back(std::move(vol));
  }
  return {wc.low, std::move(u1)};
}

}  // namespace rmscat
