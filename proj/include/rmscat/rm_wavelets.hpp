#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "filterbank.hpp"
#include "grid.hpp"
#include "se2.hpp"
#include "signals.hpp"
#include "wavelets2d.hpp"

namespace rmscat {

// Wavelets on the orientation circle, defined on the integer circular
// frequencies of an n_theta-point grid (scaled into (-pi, pi]).
struct AngularParams {
  double sigma = 0.78;     // envelope width
  double xi = 1.71;        // central circular frequency
  double sigma_phi = 0.39; // window envelope width
  double phi_gain = 1.1;   // squared gain of the window in the LP sum
  double k_const = 0.0;    // zero-mean correction, computed

  void finalize() {
    if (!(sigma > 0) || !(sigma_phi > 0) || !(phi_gain > 0) || !std::isfinite(xi))
      throw std::invalid_argument("AngularParams: parameters must be positive and finite");
    k_const = std::exp(-sigma * sigma * xi * xi / 2.0);
  }
};

struct AngularFilterBank {
  AngularParams params;
  int n_theta = 0, K = 0;
  std::vector<std::vector<double>> psi_hat;  // [k][m], real even transfers
  std::vector<double> phi_hat;               // [m], window at scale K
  double lp_epsilon = 0;
  double norm_scale = 1.0;
};

namespace detail {

// Real, even-spectrum angular mother wavelet.
inline double angular_hat_mother(const AngularParams& p, double nu) {
  double a = std::abs(nu) - p.xi;
  return std::exp(-p.sigma * p.sigma * a * a / 2.0) -
         p.k_const * std::exp(-p.sigma * p.sigma * nu * nu / 2.0);
}

inline double angular_window_mother(const AngularParams& p, double nu) {
  return std::sqrt(p.phi_gain) * std::exp(-p.sigma_phi * p.sigma_phi * nu * nu / 2.0);
}

// Signed circular frequency of DFT bin m on an n-point circle, in (-pi, pi].
inline double circle_freq(int m, int n) {
  int s = m <= n / 2 ? m : m - n;
  return 2.0 * kPi * s / n;
}

}  // namespace detail

inline AngularParams default_angular_params() {
  AngularParams p;
  p.finalize();
  return p;
}

inline int default_angular_scales(int n_theta) {
  int k = int(std::lround(std::log2(double(n_theta)))) - 1;
  return k < 0 ? 0 : k;
}

// K = 0 yields the identity window (no angular filtering, exact shift
// covariance); otherwise K band-pass scales plus a window at scale K.
inline AngularFilterBank build_angular_bank(AngularParams params, int n_theta, int K) {
  params.finalize();
  if (n_theta < 1 || !is_pow2(n_theta))
    throw std::invalid_argument("build_angular_bank: n_theta must be a positive power of 2");
  if (K < 0 || (1 << K) > n_theta)
    throw std::invalid_argument("build_angular_bank: need 0 <= K <= log2(n_theta)");

  AngularFilterBank bank;
  bank.params = params;
  bank.n_theta = n_theta;
  bank.K = K;
  if (K == 0) {
    bank.phi_hat.assign(size_t(n_theta), 1.0);
    return bank;
  }
  bank.phi_hat.assign(size_t(n_theta), 0.0);
  bank.psi_hat.assign(size_t(K), std::vector<double>(size_t(n_theta), 0.0));
  double scale_K = double(1 << K);
  for (int m = 0; m < n_theta; ++m) {
    double nu = detail::circle_freq(m, n_theta);
    for (int i = -1; i <= 1; ++i) {
      double a = nu + 2.0 * kPi * i;
      bank.phi_hat[size_t(m)] += detail::angular_window_mother(params, scale_K * a);
      for (int k = 0; k < K; ++k)
        bank.psi_hat[size_t(k)][size_t(m)] += detail::angular_hat_mother(params, double(1 << k) * a);
    }
  }
  for (int k = 0; k < K; ++k) bank.psi_hat[size_t(k)][0] = 0.0;  // exact zero mean

  double min_sum = 1e300, max_sum = -1e300;
  for (int m = 0; m < n_theta; ++m) {
    double s = bank.phi_hat[size_t(m)] * bank.phi_hat[size_t(m)];
    for (int k = 0; k < K; ++k) s += bank.psi_hat[size_t(k)][size_t(m)] * bank.psi_hat[size_t(k)][size_t(m)];
    min_sum = std::min(min_sum, s);
    max_sum = std::max(max_sum, s);
  }
  bank.norm_scale = 1.0 / std::sqrt(max_sum);
  for (auto& v : bank.phi_hat) v *= bank.norm_scale;
  for (auto& row : bank.psi_hat)
    for (auto& v : row) v *= bank.norm_scale;
  bank.lp_epsilon = 1.0 - min_sum / max_sum;
  if (bank.lp_epsilon >= 0.5)
    throw std::runtime_error("build_angular_bank: Littlewood-Paley epsilon >= 0.5");
  return bank;
}

// Separable rigid-motion filter bank: a spatial Morlet bank together with a
// table of rotated copies covering the full circle, plus an angular bank.
// The wavelet oriented at table index m has true orientation m * theta_step.
struct SE2FilterBank {
  FilterBank2D spatial;   // C_bank orientations over [0, pi)
  AngularFilterBank angular;
  std::vector<std::vector<ComplexGrid>> psi_table;  // [table index m][scale j]
  int n_theta = 0, J = 0, C_bank = 0, M = 0;
  double period = 2 * kPi;

  double theta_step() const { return period / n_theta; }
};

inline SE2FilterBank build_se2_bank(MorletParams mp, AngularParams ap, int J, int K, int n_theta,
                                    double period, int height, int width) {
  bool half_circle = std::abs(period - kPi) < 1e-12;
  if (!half_circle && std::abs(period - 2 * kPi) > 1e-12)
    throw std::invalid_argument("build_se2_bank: period must be pi or 2*pi");
  SE2FilterBank bank;
  bank.n_theta = n_theta;
  bank.J = J;
  bank.period = period;
  bank.C_bank = half_circle ? n_theta : n_theta / 2;
  bank.M = half_circle ? 2 * n_theta : n_theta;
  if (bank.C_bank < 1)
    throw std::invalid_argument("build_se2_bank: n_theta too small for the period");
  bank.spatial = build_filter_bank(mp, J, bank.C_bank, height, width);
  bank.angular = build_angular_bank(ap, n_theta, K);
  double dtheta = bank.theta_step();
  bank.psi_table.assign(size_t(bank.M), {});
  for (int m = 0; m < bank.M; ++m) {
    for (int j = 0; j < J; ++j) {
      ComplexGrid g = detail::sample_psi_hat(bank.spatial.params, height, width, 1.0, j, m * dtheta);
      for (auto& v : g.samples) v *= bank.spatial.norm_scale;
      bank.psi_table[size_t(m)].push_back(std::move(g));
    }
  }
  return bank;
}

// One output of the rigid-motion wavelet transform. Axis conventions:
//   l = -1, j = -1 : spatial low-pass (window at scale J)
//   l, j >= 0      : spatial wavelet, orientation index l, scale j
//   k = -1         : angular window at scale K
//   k >= 0         : angular wavelet at scale k
struct RMBand {
  int l = -1, j = -1, k = -1;
  SE2Volume data;
};

struct RMWaveletCoeffs {
  SE2Volume low;              // spatial and angular windows on both axes
  std::vector<RMBand> bands;  // every band-pass combination
};

enum class RMBackend { direct, cascade };

namespace detail {

// DFT across the orientation axis: spectrum[m] = sum_c slices[c] e^{-2pi i mc/T}.
inline std::vector<ComplexGrid> angular_dft(const std::vector<ComplexGrid>& slices) {
  const int T = int(slices.size());
  std::vector<ComplexGrid> spec(slices.size(), ComplexGrid(slices[0].height, slices[0].width));
  std::vector<cplx> buf(static_cast<size_t>(T));
  for (size_t i = 0; i < slices[0].size(); ++i) {
    for (int c = 0; c < T; ++c) buf[size_t(c)] = slices[size_t(c)].samples[i];
    fft1d(buf.data(), size_t(T), false);
    for (int m = 0; m < T; ++m) spec[size_t(m)].samples[i] = buf[size_t(m)];
  }
  return spec;
}

// Multiply an orientation-axis spectrum by a real transfer, invert the DFT and
// decimate the orientation axis by ang_step.
inline SE2Volume angular_apply(const std::vector<ComplexGrid>& spec, const std::vector<double>& transfer,
                               int ang_step, double period) {
  const int T = int(spec.size());
  SE2Volume out(spec[0].height, spec[0].width, T / ang_step, period);
  std::vector<cplx> buf(static_cast<size_t>(T));
  for (size_t i = 0; i < spec[0].size(); ++i) {
    for (int m = 0; m < T; ++m) buf[size_t(m)] = spec[size_t(m)].samples[i] * transfer[size_t(m)];
    fft1d(buf.data(), size_t(T), true);
    for (int t = 0; t < out.n_theta; ++t) out.slices[size_t(t)].samples[i] = buf[size_t(t * ang_step)];
  }
  return out;
}

inline int spatial_step(int j, int oversampling) { return 1 << std::max(j - oversampling, 0); }

inline int angular_step(int k, int oversampling, int T) {
  return std::min(1 << std::max(k - oversampling, 0), T);
}

}  // namespace detail

// Rigid-motion wavelet transform of a volume on the same spatial grid as the
// bank. Spatial band j is decimated by 2^max(j - oversampling, 0), the spatial
// window by 2^max(J - oversampling, 0); angular scale k is decimated by
// min(2^max(k - oversampling, 0), n_theta), the angular window uses k = K.
// Spatial bands below j_lo are skipped (frequency-increasing condition).
inline RMWaveletCoeffs rm_wavelet_transform(const SE2Volume& x, const SE2FilterBank& bank,
                                            int oversampling, int j_lo,
                                            RMBackend backend = RMBackend::direct) {
  const int T = x.n_theta, J = bank.J, K = bank.angular.K;
  if (T != bank.n_theta || std::abs(x.period - bank.period) > 1e-12)
    throw std::invalid_argument("rm_wavelet_transform: orientation axis does not match bank");
  if (x.height != bank.spatial.height || x.width != bank.spatial.width)
    throw std::invalid_argument("rm_wavelet_transform: spatial dims do not match bank");
  const double dtheta = bank.theta_step();

  // Spatial stage: per-slice 2D convolutions against the window and the
  // rotated wavelets; slice c of family (l, j) uses orientation l + c.
  std::vector<ComplexGrid> a_slices(static_cast<size_t>(T));
  std::vector<std::vector<std::vector<ComplexGrid>>> b_slices(
      size_t(bank.C_bank), std::vector<std::vector<ComplexGrid>>(size_t(J), std::vector<ComplexGrid>(size_t(T))));
  if (backend == RMBackend::direct) {
    for (int c = 0; c < T; ++c) {
      ComplexGrid xh = fft2d_copy(x.slices[size_t(c)], false);
      for (int l = 0; l < bank.C_bank; ++l) {
        for (int j = j_lo; j < J; ++j) {
          const ComplexGrid& g = bank.psi_table[size_t((l + c) % bank.M)][size_t(j)];
          ComplexGrid y(xh.height, xh.width);
          for (size_t i = 0; i < y.size(); ++i) y.samples[i] = xh.samples[i] * g.samples[i];
          fft2d(y, true);
          b_slices[size_t(l)][size_t(j)][size_t(c)] =
              downsample2d(y, detail::spatial_step(j, oversampling));
        }
      }
      ComplexGrid y(xh.height, xh.width);
      for (size_t i = 0; i < y.size(); ++i) y.samples[i] = xh.samples[i] * bank.spatial.phi_hat_J.samples[i];
      fft2d(y, true);
      a_slices[size_t(c)] = downsample2d(y, detail::spatial_step(J, oversampling));
    }
  } else {
    for (int c = 0; c < T; ++c) {
      std::vector<double> angles(size_t(bank.C_bank));
      for (int l = 0; l < bank.C_bank; ++l) angles[size_t(l)] = ((l + c) % bank.M) * dtheta;
      detail::run_spatial_cascade(
          x.slices[size_t(c)], bank.spatial.params, angles, J, j_lo, 1.0, oversampling,
          bank.spatial.norm_scale,
          [&](int l, int j, ComplexGrid&& g) { b_slices[size_t(l)][size_t(j)][size_t(c)] = std::move(g); },
          [&](int j, ComplexGrid&& g) {
            if (j == J) a_slices[size_t(c)] = std::move(g);
          });
    }
  }

  // Angular stage: circular DFT along the orientation axis, multiply by the
  // angular transfers, decimate.
  RMWaveletCoeffs out;
  auto spec_a = detail::angular_dft(a_slices);
  out.low = detail::angular_apply(spec_a, bank.angular.phi_hat,
                                  detail::angular_step(K, oversampling, T), x.period);
  for (int k = 0; k < K; ++k) {
    RMBand band;
    band.k = k;
    band.data = detail::angular_apply(spec_a, bank.angular.psi_hat[size_t(k)],
                                      detail::angular_step(k, oversampling, T), x.period);
    out.bands.push_back(std::move(band));
  }
  for (int l = 0; l < bank.C_bank; ++l) {
    for (int j = j_lo; j < J; ++j) {
      auto spec_b = detail::angular_dft(b_slices[size_t(l)][size_t(j)]);
      RMBand win;
      win.l = l;
      win.j = j;
      win.data = detail::angular_apply(spec_b, bank.angular.phi_hat,
                                       detail::angular_step(K, oversampling, T), x.period);
      out.bands.push_back(std::move(win));
      for (int k = 0; k < K; ++k) {
        RMBand band;
        band.l = l;
        band.j = j;
        band.k = k;
        band.data = detail::angular_apply(spec_b, bank.angular.psi_hat[size_t(k)],
                                          detail::angular_step(k, oversampling, T), x.period);
        out.bands.push_back(std::move(band));
      }
    }
  }
  return out;
}

// Squared transform norm. Spatial wavelets cover only the half circle of
// orientations (the other half holds their conjugates), so families with a
// spatial band-pass component count twice; the angular bank already covers
// both signs of the circular frequency.
inline double rm_transform_energy(const RMWaveletCoeffs& coeffs) {
  double e = coeffs.low.sq_norm();
  for (const auto& b : coeffs.bands) e += (b.l >= 0 ? 2.0 : 1.0) * b.data.sq_norm();
  return e;
}

// Build the sampled group-domain filter matching output (l, j, k) of the fast
// transform, for comparison against the brute-force group convolution.
// l = -1 selects the spatial window, k = -1 the angular window.
inline SE2Volume se2_filter_volume(const SE2FilterBank& bank, int l, int j, int k) {
  const int T = bank.n_theta;
  const double dtheta = bank.theta_step();
  ComplexGrid spatial_hat = (l < 0) ? bank.spatial.phi_hat_J : bank.psi_table[size_t(l)][size_t(j)];
  ComplexGrid spatial = fft2d_copy(spatial_hat, true);
  const std::vector<double>& transfer = (k < 0) ? bank.angular.phi_hat : bank.angular.psi_hat[size_t(k)];
  // angular profile whose DFT times dtheta reproduces the transfer
  std::vector<cplx> prof(static_cast<size_t>(T));
  for (int m = 0; m < T; ++m) prof[size_t(m)] = transfer[size_t(m)];
  fft1d(prof.data(), size_t(T), true);
  SE2Volume out(bank.spatial.height, bank.spatial.width, T, bank.period);
  for (int t = 0; t < T; ++t)
    for (size_t i = 0; i < spatial.size(); ++i)
      out.slices[size_t(t)].samples[i] = spatial.samples[i] * prof[size_t(t)] / dtheta;
  return out;
}

}  // namespace rmscat
