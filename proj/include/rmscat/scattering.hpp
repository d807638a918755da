#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fft.hpp"
#include "filterbank.hpp"
#include "grid.hpp"
#include "rm_wavelets.hpp"
#include "se2.hpp"
#include "signals.hpp"
#include "wavelets2d.hpp"

namespace rmscat {

enum class Pooling { global_average, keep_grid };

struct ScatteringConfig {
  int J = 0;   // <= 0: derived from the input dims
  int C = 8;   // orientations / n_theta
  int K = -1;  // < 0: default angular scale count for C
  int M = 2;   // maximum scattering order
  int oversampling = 1;
  RMBackend backend = RMBackend::direct;
  MorletParams morlet = default_morlet_params();
  AngularParams angular = default_angular_params();

  int scales_for(int h, int w) const { return J > 0 ? J : default_scale_count(std::min(h, w)); }
  int angular_scales() const { return K >= 0 ? K : default_angular_scales(C); }

  void validate() const {
    if (M < 0 || M > 2) throw std::invalid_argument("ScatteringConfig: M must be 0, 1 or 2");
    if (C < 1 || !is_pow2(C)) throw std::invalid_argument("ScatteringConfig: C must be a positive power of 2");
    if (oversampling < 0) throw std::invalid_argument("ScatteringConfig: oversampling must be >= 0");
  }
};

// One output coefficient grid with its path indices. Unused indices stay at
// their sentinels: t1 only applies to translation scattering; l2 = -1 marks a
// spatial low-pass, k2 = -1 an angular window on the second layer.
struct ScatteringEntry {
  int m = 0;
  int j1 = -1, t1 = -1;
  int l2 = -2, j2 = -1, k2 = -2;
  double weight = 1.0;  // path multiplicity in the transform norm
  SE2Volume data;       // n_theta = 1 for translation-scattering entries

  double mean() const {
    double s = 0;
    size_t n = 0;
    for (const auto& sl : data.slices) {
      for (const auto& z : sl.samples) s += z.real();
      n += sl.size();
    }
    return n ? s / double(n) : 0.0;
  }
};

struct ScatteringOutput {
  int J = 0, C = 0, K = 0, M = 0, oversampling = 0;
  std::vector<ScatteringEntry> entries;
};

namespace detail {

inline SE2Volume volume_from_image(Image2D&& img, double period) {
  SE2Volume v(img.height, img.width, 1, period);
  for (size_t i = 0; i < img.size(); ++i) v.slices[0].samples[i] = img.samples[i];
  return v;
}

// x * phi_J on a grid sampled `spacing` pixels apart, then decimation.
inline ComplexGrid window_image(const ComplexGrid& u, const MorletParams& p, double norm,
                                double spacing, int J, int extra_step) {
  ComplexGrid phi = sample_phi_hat(p, u.height, u.width, spacing, J);
  for (auto& v : phi.samples) v *= norm;
  return downsample2d(periodic_convolve2d(u, phi), extra_step);
}

// The angular window transfer restricted to a decimated orientation circle of
// n_reduced samples: surviving harmonics keep their original transfer values.
inline std::vector<double> reduced_angular_window(const AngularFilterBank& bank, int n_reduced) {
  std::vector<double> w(static_cast<size_t>(n_reduced));
  for (int m = 0; m < n_reduced; ++m) {
    int s = m <= n_reduced / 2 ? m : m - n_reduced;
    w[size_t(m)] = bank.phi_hat[size_t((s % bank.n_theta + bank.n_theta) % bank.n_theta)];
  }
  return w;
}

// Window a possibly-decimated volume with phi_J (spatially) and phi_bar_K
// (angularly), then decimate both axes down to the standard output rate.
inline SE2Volume window_volume(const SE2Volume& u, const MorletParams& mp, double spatial_norm,
                               const AngularFilterBank& ab, int J, double spatial_spacing,
                               int oversampling) {
  int target = 1 << std::max(J - oversampling, 0);
  int extra = std::max(int(double(target) / spatial_spacing), 1);
  std::vector<ComplexGrid> slices(u.slices.size());
  for (size_t c = 0; c < u.slices.size(); ++c) {
    ComplexGrid phi = sample_phi_hat(mp, u.height, u.width, spatial_spacing, J);
    for (auto& v : phi.samples) v *= spatial_norm;
    slices[c] = downsample2d(periodic_convolve2d(u.slices[c], phi), extra);
  }
  int ang_total = std::min(1 << std::max(ab.K - oversampling, 0), ab.n_theta);
  int ang_done = ab.n_theta / u.n_theta;
  int ang_extra = std::max(ang_total / ang_done, 1);
  auto spec = angular_dft(slices);
  return angular_apply(spec, reduced_angular_window(ab, u.n_theta), ang_extra, u.period);
}

// Lift a modulus volume from the half circle (period pi) to the full circle
// by pi-periodic duplication. Real pi-periodic input makes the full-circle
// rigid-motion transform carry the conjugate orientation bands automatically
// (slice s + T uses the filter at angle + pi, whose response is the complex
// conjugate), so rotations act as exact group translations with no wrap seam.
inline SE2Volume lift_half_circle(const SE2Volume& u) {
  SE2Volume out(u.height, u.width, 2 * u.n_theta, 2 * kPi);
  for (int t = 0; t < u.n_theta; ++t) {
    out.slices[size_t(t)] = u.slices[size_t(t)];
    out.slices[size_t(t + u.n_theta)] = u.slices[size_t(t)];
  }
  return out;
}

}  // namespace detail

// Translation scattering: S0 = x * phi_J, S1 = |x * psi_{t1,j1}| * phi_J,
// S2 over frequency-increasing paths j2 > j1 only.
inline ScatteringOutput translation_scattering(const Image2D& x, const ScatteringConfig& cfg) {
  cfg.validate();
  const int J = cfg.scales_for(x.height, x.width), C = cfg.C, os = cfg.oversampling;
  FilterBank2D fb = build_filter_bank(cfg.morlet, J, C, x.height, x.width);
  ScatteringOutput out;
  out.J = J;
  out.C = C;
  out.K = 0;
  out.M = cfg.M;
  out.oversampling = os;
  const double two_pi = 2 * kPi;
  auto spatial_step = [&](int j) { return 1 << std::max(j - os, 0); };
  auto push = [&](int m, int j1, int t1, int t2, int j2, double weight, ComplexGrid&& grid) {
    ScatteringEntry e;
    e.m = m;
    e.j1 = j1;
    e.t1 = t1;
    e.l2 = t2;
    e.j2 = j2;
    e.weight = weight;
    e.data = detail::volume_from_image(real_part(grid), two_pi);
    out.entries.push_back(std::move(e));
  };

  // first-layer bands at their decimated rates, plus S0
  std::vector<std::vector<ComplexGrid>> u1(static_cast<size_t>(C), std::vector<ComplexGrid>(static_cast<size_t>(J)));
  ComplexGrid s0;
  ComplexGrid x0 = to_complex(x);
  std::vector<double> angles(static_cast<size_t>(C));
  for (int c = 0; c < C; ++c) angles[size_t(c)] = fb.orientation(c);
  if (cfg.backend == RMBackend::direct) {
    WaveletCoeffs wc = wavelet_transform(x, fb, os);
    for (int c = 0; c < C; ++c)
      for (int j = 0; j < J; ++j) u1[size_t(c)][size_t(j)] = std::move(wc.band[size_t(c)][size_t(j)]);
    s0 = to_complex(wc.low);
  } else {
    detail::run_spatial_cascade(
        x0, fb.params, angles, J, 0, 1.0, os, fb.norm_scale,
        [&](int c, int j, ComplexGrid&& g) { u1[size_t(c)][size_t(j)] = std::move(g); },
        [&](int j, ComplexGrid&& g) {
          if (j == J) s0 = std::move(g);
        });
  }
  push(0, -1, -1, -2, -1, 1.0, std::move(s0));
  if (cfg.M == 0) {
    for (auto& row : u1) row.clear();
    return out;
  }

  for (int j1 = 0; j1 < J; ++j1) {
    for (int t1 = 0; t1 < C; ++t1) {
      ComplexGrid mod(u1[size_t(t1)][size_t(j1)].height, u1[size_t(t1)][size_t(j1)].width);
      for (size_t i = 0; i < mod.size(); ++i) mod.samples[i] = std::abs(u1[size_t(t1)][size_t(j1)].samples[i]);
      double s1 = double(spatial_step(j1));
      push(1, j1, t1, -2, -1, 2.0,
           detail::window_image(mod, fb.params, fb.norm_scale, s1, J,
                                std::max(int(double(spatial_step(J)) / s1), 1)));
      if (cfg.M < 2 || j1 + 1 >= J) continue;
      auto emit2 = [&](int t2, int j2, ComplexGrid&& g) {
        for (auto& v : g.samples) v = std::abs(v);
        double s2 = double(spatial_step(j2));
        push(2, j1, t1, t2, j2, 4.0,
             detail::window_image(g, fb.params, fb.norm_scale, s2, J,
                                  std::max(int(double(spatial_step(J)) / s2), 1)));
      };
      if (cfg.backend == RMBackend::direct) {
        ComplexGrid mh = fft2d_copy(mod, false);
        for (int j2 = j1 + 1; j2 < J; ++j2) {
          for (int t2 = 0; t2 < C; ++t2) {
            ComplexGrid psi = detail::sample_psi_hat(fb.params, mod.height, mod.width, s1, j2,
                                                     fb.orientation(t2));
            for (size_t i = 0; i < psi.size(); ++i) psi.samples[i] *= fb.norm_scale * mh.samples[i];
            fft2d(psi, true);
            emit2(t2, j2, downsample2d(psi, std::max(int(double(spatial_step(j2)) / s1), 1)));
          }
        }
      } else {
        detail::run_spatial_cascade(
            mod, fb.params, angles, J, j1 + 1, s1, os, fb.norm_scale,
            [&](int t2, int j2, ComplexGrid&& g) { emit2(t2, j2, std::move(g)); },
            [&](int, ComplexGrid&&) {});
      }
    }
  }
  // canonical ordering: ascending (m, j1, t1, j2, t2)
  std::stable_sort(out.entries.begin(), out.entries.end(), [](const ScatteringEntry& a, const ScatteringEntry& b) {
    return std::tie(a.m, a.j1, a.t1, a.j2, a.l2) < std::tie(b.m, b.j1, b.t1, b.j2, b.l2);
  });
  return out;
}

// Rigid-motion scattering: the first layer's modulus volumes (one per j1,
// orientation axis of period pi) are lifted to the full circle and propagated
// with the separable SE(2) wavelet transform; outputs are jointly averaged by
// phi_J and phi_bar_K. The lift keeps rotation acting as an exact group
// translation of the lifted volume, and it carries the conjugate half of the
// second-layer orientation bands, so those bands count once in the norm.
inline ScatteringOutput rigid_motion_scattering(const Image2D& x, const ScatteringConfig& cfg) {
  cfg.validate();
  const int J = cfg.scales_for(x.height, x.width), C = cfg.C, os = cfg.oversampling;
  const int K = cfg.angular_scales();
  SE2FilterBank bank = build_se2_bank(cfg.morlet, cfg.angular, J, K, 2 * C, 2 * kPi,
                                      x.height, x.width);
  ScatteringOutput out;
  out.J = J;
  out.C = C;
  out.K = K;
  out.M = cfg.M;
  out.oversampling = os;

  auto [low0, u1] = wavelet_modulus(x, bank.spatial);  // full-resolution first layer
  {
    ScatteringEntry e;
    e.m = 0;
    e.data = detail::volume_from_image(
        real_part(downsample2d(to_complex(low0), 1 << std::max(J - os, 0))), 2 * kPi);
    out.entries.push_back(std::move(e));
  }
  if (cfg.M == 0) return out;

  for (int j1 = 0; j1 < J; ++j1) {
    SE2Volume lifted = detail::lift_half_circle(u1[size_t(j1)]);
    if (cfg.M == 1) {
      SE2Volume s1 = detail::window_volume(lifted, bank.spatial.params, bank.spatial.norm_scale,
                                           bank.angular, J, 1.0, os);
      ScatteringEntry e;
      e.m = 1;
      e.j1 = j1;
      e.weight = 1.0;  // the lifted volume already holds both half circles
      e.data = std::move(s1);
      out.entries.push_back(std::move(e));
      continue;
    }
    RMWaveletCoeffs rm = rm_wavelet_transform(lifted, bank, os, j1 + 1, cfg.backend);
    {
      ScatteringEntry e;
      e.m = 1;
      e.j1 = j1;
      e.weight = 1.0;
      e.data = std::move(rm.low);
      out.entries.push_back(std::move(e));
    }
    for (auto& b : rm.bands) {
      for (auto& sl : b.data.slices)
        for (auto& z : sl.samples) z = std::abs(z);
      double spacing = double(1 << std::max((b.j >= 0 ? b.j : J) - os, 0));
      ScatteringEntry e;
      e.m = 2;
      e.j1 = j1;
      e.l2 = b.l;
      e.j2 = b.j >= 0 ? b.j : J;
      e.k2 = b.k;
      e.weight = b.l >= 0 ? 2.0 : 1.0;
      e.data = detail::window_volume(b.data, bank.spatial.params, bank.spatial.norm_scale,
                                     bank.angular, J, spacing, os);
      out.entries.push_back(std::move(e));
    }
  }
  std::stable_sort(out.entries.begin(), out.entries.end(), [](const ScatteringEntry& a, const ScatteringEntry& b) {
    return std::tie(a.m, a.j1, a.l2, a.j2, a.k2) < std::tie(b.m, b.j1, b.l2, b.j2, b.k2);
  });
  return out;
}

// Concatenated coefficient vector in canonical path order.
inline std::vector<double> feature_vector(const ScatteringOutput& out, Pooling pooling) {
  std::vector<double> v;
  for (const auto& e : out.entries) {
    if (pooling == Pooling::global_average) {
      v.push_back(e.mean());
    } else {
      for (const auto& sl : e.data.slices)
        for (const auto& z : sl.samples) v.push_back(z.real());
    }
  }
  return v;
}

// Squared norm of the scattering output with path multiplicities, the
// quantity that the non-expansiveness bound controls.
inline double scattering_sq_norm(const ScatteringOutput& out) {
  double s = 0;
  for (const auto& e : out.entries) s += e.weight * e.data.sq_norm();
  return s;
}

inline double scattering_distance(const ScatteringOutput& a, const ScatteringOutput& b) {
  if (a.entries.size() != b.entries.size())
    throw std::invalid_argument("scattering_distance: output shapes differ");
  double s = 0;
  for (size_t i = 0; i < a.entries.size(); ++i) {
    const auto& ea = a.entries[i];
    const auto& eb = b.entries[i];
    if (!ea.data.same_shape(eb.data))
      throw std::invalid_argument("scattering_distance: entry shapes differ");
    for (size_t t = 0; t < ea.data.slices.size(); ++t)
      for (size_t k = 0; k < ea.data.slices[t].size(); ++k)
        s += ea.weight * std::norm(ea.data.slices[t].samples[k] - eb.data.slices[t].samples[k]);
  }
  return std::sqrt(s);
}

// Empirical deformation-stability ratio on globally pooled features:
// ||S x_tau - S x|| / (||x|| (2^-J ||tau||_inf + ||grad tau||_inf)).
inline double deformation_stability_probe(const Image2D& x, const DeformationField& tau,
                                          const ScatteringConfig& cfg) {
  tau.validate();
  double tau_inf = 0;
  for (size_t i = 0; i < tau.tau_row.size(); ++i)
    tau_inf = std::max(tau_inf, std::hypot(tau.tau_row.samples[i], tau.tau_col.samples[i]));
  const int J = cfg.scales_for(x.height, x.width);
  double denom = std::sqrt(sq_norm(to_complex(x))) * (std::ldexp(tau_inf, -J) + tau.grad_norm);
  if (denom == 0) return 0.0;
  auto f0 = feature_vector(translation_scattering(x, cfg), Pooling::global_average);
  auto f1 = feature_vector(translation_scattering(warp_image_periodic(x, tau), cfg), Pooling::global_average);
  double num = 0;
  for (size_t i = 0; i < f0.size(); ++i) num += (f0[i] - f1[i]) * (f0[i] - f1[i]);
  return std::sqrt(num) / denom;
}

}  // namespace rmscat
